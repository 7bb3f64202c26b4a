"""Candidate-image harvesting from pluggable search providers.

Providers yield ranked result URLs for a query; the client caps each query
at the first 100 results (result quality drops off sharply after that),
stamps provenance, and downloads bytes into a content-addressed blob store.
"""

from .providers import (
    FixtureProvider,
    GeographProvider,
    HttpImageProvider,
    MalformedResponseError,
    Provider,
    ProviderError,
    QuotaExceededError,
    TransientProviderError,
    get_provider,
    register_provider,
)
from .client import CandidateImage, RetryPolicy, TokenBucket, run_query, QUERY_RESULT_CAP
from .store import BlobStore, DownloadError, NotAnImageError, download
from .report import HarvestReport, harvest_report

__all__ = [
    "BlobStore",
    "CandidateImage",
    "DownloadError",
    "FixtureProvider",
    "GeographProvider",
    "HarvestReport",
    "HttpImageProvider",
    "MalformedResponseError",
    "NotAnImageError",
    "Provider",
    "ProviderError",
    "QUERY_RESULT_CAP",
    "QuotaExceededError",
    "RetryPolicy",
    "TokenBucket",
    "TransientProviderError",
    "download",
    "get_provider",
    "harvest_report",
    "register_provider",
    "run_query",
]
