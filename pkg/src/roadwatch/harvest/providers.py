"""Image-search providers.

Each provider turns a query into an ordered stream of result dicts with at
least a ``url`` key (optionally ``lat``/``lon``/``region`` for geotagged
sources). Live providers are thin HTTP adapters with an injectable transport
so they can be exercised offline; the fixture provider is fully
deterministic and is what the test suite and local dry-runs use.
"""

from __future__ import annotations

import os
from typing import Callable, Iterable, Iterator

from ..querygen import QuerySpec


class ProviderError(RuntimeError):
    pass


class TransientProviderError(ProviderError):
    """Network-ish failure worth retrying with backoff."""


class QuotaExceededError(ProviderError):
    """Provider quota exhausted; retrying will not help."""


class MalformedResponseError(ProviderError):
    pass


class Provider:
    id: str = "abstract"

    def search(self, query: QuerySpec) -> Iterator[dict]:
        raise NotImplementedError


class FixtureProvider(Provider):
    """Deterministic provider backed by an in-memory result table.

    ``results`` maps query text to a list of result dicts (or URL strings).
    Unknown queries yield nothing. ``fail_times`` makes the first N calls per
    query raise a transient error, for retry-path tests.
    """

    id = "local-fixture"

    def __init__(self, results: dict[str, list] | None = None, fail_times: int = 0):
        self.results = results or {}
        self.fail_times = fail_times
        self.calls: dict[str, int] = {}

    def search(self, query: QuerySpec) -> Iterator[dict]:
        self.calls[query.text] = self.calls.get(query.text, 0) + 1
        if self.calls[query.text] <= self.fail_times:
            raise TransientProviderError(f"synthetic failure #{self.calls[query.text]}")
        for item in self.results.get(query.text, []):
            yield {"url": item} if isinstance(item, str) else dict(item)


class HttpImageProvider(Provider):
    """Base for live JSON-API providers.

    ``transport(url, params) -> dict`` performs one GET and returns parsed
    JSON; passing a fake transport makes an adapter fully testable. Requests
    are paced by an optional token bucket shared across pages.
    """

    page_size = 50
    max_pages = 10

    def __init__(
        self,
        endpoint: str,
        api_key_env: str | None = None,
        transport: Callable[[str, dict], dict] | None = None,
        rate_limiter=None,
    ):
        self.endpoint = endpoint
        self.api_key = os.environ.get(api_key_env, "") if api_key_env else ""
        self.rate_limiter = rate_limiter
        if transport is None:
            transport = _requests_transport
        self._transport = transport

    def request(self, params: dict) -> dict:
        if self.rate_limiter is not None:
            self.rate_limiter.acquire()
        return self._transport(self.endpoint, params)

    def page_params(self, query: QuerySpec, page: int) -> dict:
        raise NotImplementedError

    def parse_page(self, payload: dict) -> list[dict]:
        raise NotImplementedError

    def search(self, query: QuerySpec) -> Iterator[dict]:
        for page in range(self.max_pages):
            payload = self.request(self.page_params(query, page))
            items = self.parse_page(payload)
            if not items:
                return
            yield from items


def _requests_transport(url: str, params: dict) -> dict:
    import requests

    try:
        response = requests.get(url, params=params, timeout=30)
    except requests.RequestException as exc:
        raise TransientProviderError(str(exc)) from exc
    if response.status_code == 429:
        raise QuotaExceededError(f"quota exhausted at {url}")
    if response.status_code >= 500:
        raise TransientProviderError(f"server error {response.status_code}")
    if response.status_code != 200:
        raise ProviderError(f"HTTP {response.status_code} from {url}")
    try:
        return response.json()
    except ValueError as exc:
        raise MalformedResponseError(f"non-JSON response from {url}") from exc


class GoogleImageProvider(HttpImageProvider):
    id = "google"
    page_size = 10  # API maximum per request

    def __init__(self, cx: str = "", **kwargs):
        kwargs.setdefault("endpoint", "https://www.googleapis.com/customsearch/v1")
        kwargs.setdefault("api_key_env", "ROADWATCH_GOOGLE_KEY")
        super().__init__(**kwargs)
        self.cx = cx or os.environ.get("ROADWATCH_GOOGLE_CX", "")

    def page_params(self, query: QuerySpec, page: int) -> dict:
        return {
            "key": self.api_key,
            "cx": self.cx,
            "q": query.text,
            "searchType": "image",
            "num": self.page_size,
            "start": page * self.page_size + 1,
        }

    def parse_page(self, payload: dict) -> list[dict]:
        try:
            return [{"url": item["link"]} for item in payload.get("items", [])]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected result shape: {exc}") from exc


class BingImageProvider(HttpImageProvider):
    id = "bing"

    def __init__(self, **kwargs):
        kwargs.setdefault("endpoint", "https://api.bing.microsoft.com/v7.0/images/search")
        kwargs.setdefault("api_key_env", "ROADWATCH_BING_KEY")
        super().__init__(**kwargs)

    def page_params(self, query: QuerySpec, page: int) -> dict:
        return {
            "q": query.text,
            "count": self.page_size,
            "offset": page * self.page_size,
            "subscription-key": self.api_key,
        }

    def parse_page(self, payload: dict) -> list[dict]:
        try:
            return [{"url": item["contentUrl"]} for item in payload.get("value", [])]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected result shape: {exc}") from exc


class FlickrProvider(HttpImageProvider):
    id = "flickr"

    def __init__(self, **kwargs):
        kwargs.setdefault("endpoint", "https://api.flickr.com/services/rest")
        kwargs.setdefault("api_key_env", "ROADWATCH_FLICKR_KEY")
        super().__init__(**kwargs)

    def page_params(self, query: QuerySpec, page: int) -> dict:
        return {
            "method": "flickr.photos.search",
            "api_key": self.api_key,
            "text": query.text,
            "per_page": self.page_size,
            "page": page + 1,
            "format": "json",
            "nojsoncallback": 1,
            "extras": "url_c,geo",
        }

    def parse_page(self, payload: dict) -> list[dict]:
        try:
            photos = payload["photos"]["photo"]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected result shape: {exc}") from exc
        out = []
        for p in photos:
            url = p.get("url_c") or (
                f"https://live.staticflickr.com/{p['server']}/{p['id']}_{p['secret']}_c.jpg"
            )
            item = {"url": url}
            if p.get("latitude") not in (None, 0, "0"):
                item["lat"] = float(p["latitude"])
                item["lon"] = float(p["longitude"])
            out.append(item)
        return out


class GeographProvider(HttpImageProvider):
    """Geograph's syndication API; results carry reliable UK/Ireland geotags."""

    id = "geograph"

    def __init__(self, **kwargs):
        kwargs.setdefault("endpoint", "https://api.geograph.org.uk/syndicator.php")
        kwargs.setdefault("api_key_env", "ROADWATCH_GEOGRAPH_KEY")
        super().__init__(**kwargs)

    def page_params(self, query: QuerySpec, page: int) -> dict:
        return {
            "key": self.api_key,
            "q": query.text,
            "perpage": self.page_size,
            "page": page + 1,
            "format": "JSON",
        }

    def parse_page(self, payload: dict) -> list[dict]:
        try:
            items = payload["items"]
        except (KeyError, TypeError) as exc:
            raise MalformedResponseError(f"unexpected result shape: {exc}") from exc
        out = []
        for item in items:
            entry = {"url": item["link"]}
            if "lat" in item:
                entry["lat"] = float(item["lat"])
                entry["lon"] = float(item["long"])
            out.append(entry)
        return out


_REGISTRY: dict[str, Callable[..., Provider]] = {
    "local-fixture": FixtureProvider,
    "google": GoogleImageProvider,
    "bing": BingImageProvider,
    "flickr": FlickrProvider,
    "geograph": GeographProvider,
}


def register_provider(provider_id: str, factory: Callable[..., Provider]) -> None:
    _REGISTRY[provider_id] = factory


def get_provider(provider_id: str, **kwargs) -> Provider:
    if provider_id not in _REGISTRY:
        raise ProviderError(f"unregistered provider {provider_id!r}")
    return _REGISTRY[provider_id](**kwargs)


def registered_providers() -> Iterable[str]:
    return tuple(sorted(_REGISTRY))
