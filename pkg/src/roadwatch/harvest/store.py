"""Content-addressed blob store and candidate download."""

from __future__ import annotations

import hashlib
import io
from pathlib import Path
from urllib.parse import urlparse

from PIL import Image, UnidentifiedImageError

from .client import CandidateImage
from .providers import TransientProviderError
from .client import RetryPolicy, with_retries


class DownloadError(RuntimeError):
    pass


class NotAnImageError(DownloadError):
    pass


class BlobStore:
    """Immutable bytes keyed by SHA-256, laid out as blobs/<first2>/<hash>."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path_for(self, checksum: str) -> Path:
        return self.root / checksum[:2] / checksum

    @staticmethod
    def checksum_of(data: bytes) -> str:
        return hashlib.sha256(data).hexdigest()

    def put(self, data: bytes) -> str:
        """Store bytes, returning the checksum. Re-putting identical bytes is
        a no-op, so the same content is never stored twice."""
        checksum = self.checksum_of(data)
        path = self._path_for(checksum)
        if not path.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.rename(path)
        return checksum

    def has(self, checksum: str) -> bool:
        return self._path_for(checksum).exists()

    def read(self, checksum: str) -> bytes:
        path = self._path_for(checksum)
        if not path.exists():
            raise KeyError(f"no blob {checksum}")
        return path.read_bytes()

    def path(self, checksum: str) -> Path:
        return self._path_for(checksum)

    def __len__(self) -> int:
        return sum(1 for _ in self.root.glob("*/*") if _.is_file())


def _fetch_url(url: str) -> bytes:
    parsed = urlparse(url)
    if parsed.scheme in ("", "file"):
        path = Path(parsed.path if parsed.scheme == "file" else url)
        try:
            return path.read_bytes()
        except OSError as exc:
            raise DownloadError(f"cannot read {url}: {exc}") from exc
    import requests

    try:
        response = requests.get(url, timeout=60)
    except requests.RequestException as exc:
        raise TransientProviderError(str(exc)) from exc
    if response.status_code >= 500:
        raise TransientProviderError(f"server error {response.status_code} for {url}")
    if response.status_code != 200:
        raise DownloadError(f"HTTP {response.status_code} for {url}")
    return response.content


def _validate_image(data: bytes, url: str) -> None:
    if not data:
        raise NotAnImageError(f"zero-byte body from {url}")
    try:
        with Image.open(io.BytesIO(data)) as img:
            img.verify()
    except (UnidentifiedImageError, OSError) as exc:
        raise NotAnImageError(f"not-an-image: {url}: {exc}") from exc


def download(
    candidate: CandidateImage,
    store: BlobStore,
    fetch=_fetch_url,
    retry: RetryPolicy | None = None,
) -> str:
    """Fetch a candidate's bytes, validate, persist, record the checksum.

    Idempotent: identical bytes land on the same blob path and the checksum
    is stable across calls. Raises after bounded retries on network failures,
    immediately on non-image or empty bodies.
    """
    data = with_retries(lambda: fetch(candidate.url), retry)
    _validate_image(data, candidate.url)
    checksum = store.put(data)
    candidate.bytes_checksum = checksum
    return checksum
