"""Query execution: result capping, provenance stamping, retries, pacing."""

from __future__ import annotations

import hashlib
import random
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone

from ..querygen import QuerySpec
from ..manifest.records import Geotag
from .providers import Provider, QuotaExceededError, TransientProviderError

# Results beyond the first hundred are not worth keeping.
QUERY_RESULT_CAP = 100


@dataclass
class CandidateImage:
    """A ranked search hit before curation."""

    url: str
    provider: str
    query: QuerySpec
    rank: int
    fetched_at: str
    bytes_checksum: str | None = None
    geotag: Geotag | None = None

    @property
    def record_id(self) -> str:
        digest = hashlib.sha256(f"{self.provider}:{self.url}".encode()).hexdigest()
        return f"{self.provider[:2]}-{digest[:16]}"


class TokenBucket:
    """Simple token-bucket pacer: at most ``rate`` requests/second sustained,
    bursts up to ``capacity``."""

    def __init__(self, rate: float, capacity: int = 5, clock=time.monotonic, sleep=time.sleep):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity
        self.tokens = float(capacity)
        self._clock = clock
        self._sleep = sleep
        self._last = clock()

    def acquire(self) -> None:
        now = self._clock()
        self.tokens = min(self.capacity, self.tokens + (now - self._last) * self.rate)
        self._last = now
        if self.tokens < 1.0:
            wait = (1.0 - self.tokens) / self.rate
            self._sleep(wait)
            self.tokens = 1.0
            self._last = self._clock()
        self.tokens -= 1.0


@dataclass
class RetryPolicy:
    attempts: int = 3
    base_delay: float = 0.5
    max_delay: float = 8.0
    jitter: float = 0.25
    sleep: object = field(default=time.sleep, repr=False)
    rng: random.Random = field(default_factory=lambda: random.Random(0), repr=False)

    def delays(self):
        delay = self.base_delay
        for _ in range(self.attempts - 1):
            yield min(self.max_delay, delay) * (1.0 + self.jitter * self.rng.random())
            delay *= 2


def with_retries(fn, policy: RetryPolicy | None = None):
    """Call fn(); on transient provider errors back off and retry, then surface."""
    policy = policy or RetryPolicy()
    delays = policy.delays()
    while True:
        try:
            return fn()
        except QuotaExceededError:
            raise
        except TransientProviderError:
            delay = next(delays, None)
            if delay is None:
                raise
            policy.sleep(delay)


def run_query(
    provider: Provider,
    query: QuerySpec,
    cap: int = QUERY_RESULT_CAP,
    retry: RetryPolicy | None = None,
    now=lambda: datetime.now(timezone.utc).isoformat(),
) -> list[CandidateImage]:
    """Run one search query and return at most ``cap`` ranked candidates.

    Provider order is preserved (rank 1 = first result). Transient provider
    failures are retried with bounded exponential backoff before surfacing;
    quota errors surface immediately.
    """
    if not query.text.strip():
        raise ValueError("empty query")

    def fetch() -> list[dict]:
        items = []
        for item in provider.search(query):
            items.append(item)
            if len(items) >= cap:
                break
        return items

    items = with_retries(fetch, retry)
    fetched_at = now()
    candidates = []
    for rank, item in enumerate(items, start=1):
        geotag = None
        if "lat" in item:
            geotag = Geotag(lat=item["lat"], lon=item["lon"], region=item.get("region"))
        elif "region" in item:
            geotag = Geotag(lat=float("nan"), lon=float("nan"), region=item["region"])
        candidates.append(
            CandidateImage(
                url=item["url"],
                provider=provider.id,
                query=query,
                rank=rank,
                fetched_at=fetched_at,
                geotag=geotag,
            )
        )
    return candidates
