"""Duplicate-image removal.

Two passes: an exact pass that groups byte-identical downloads by checksum,
and a perceptual pass that clusters near-duplicates (resized or re-encoded
copies) by Hamming distance between 64-bit difference hashes.

The dHash here is deliberately specified to the bit so hashes are
reproducible across implementations:

  1. decode to RGB,
  2. integer luma grayscale: (299*R + 587*G + 114*B) // 1000,
  3. area-mean downsample to 9 columns x 8 rows (exact fractional pixel
     coverage, float64 accumulation),
  4. one bit per horizontal neighbour pair: bit = left > right,
     row-major, 8 rows x 8 comparisons = 64 bits.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from PIL import Image

HASH_ALGORITHM_TAG = "dhash-9x8-v1"

# Sort key used everywhere a cluster representative is chosen: earliest
# search result wins, then lexicographic id.
_UNRANKED = 1 << 30


class UndecodableImageError(ValueError):
    pass


@dataclass(frozen=True)
class PerceptualHash:
    bits: int  # 64-bit integer
    algorithm_tag: str = HASH_ALGORITHM_TAG

    def hamming(self, other: "PerceptualHash") -> int:
        if self.algorithm_tag != other.algorithm_tag:
            raise ValueError(
                f"hamming distance undefined across algorithms "
                f"({self.algorithm_tag} vs {other.algorithm_tag})"
            )
        return (self.bits ^ other.bits).bit_count()


@dataclass(frozen=True)
class DedupCluster:
    representative: str
    members: tuple[str, ...]
    reason: str  # "exact" | "perceptual"


@dataclass
class DedupScanResult:
    clusters: list[DedupCluster]
    kept: list[str]
    duplicates: list[str]
    quarantined: list[str] = field(default_factory=list)


def decode_image(image_bytes: bytes) -> np.ndarray:
    """Decode to an HxWx3 uint8 RGB array; raises UndecodableImageError."""
    try:
        with Image.open(io.BytesIO(image_bytes)) as img:
            return np.asarray(img.convert("RGB"), dtype=np.uint8)
    except Exception as exc:
        raise UndecodableImageError(f"cannot decode image: {exc}") from exc


def exact_duplicate(image_a_bytes: bytes, image_b_bytes: bytes) -> bool:
    """True iff both images decode to pixel matrices of equal shape and value.

    This intentionally misses resampled/re-encoded-with-loss copies; those
    are the perceptual pass's job.
    """
    a = decode_image(image_a_bytes)
    b = decode_image(image_b_bytes)
    return a.shape == b.shape and bool(np.array_equal(a, b))


def integer_luma(rgb: np.ndarray) -> np.ndarray:
    """Grayscale via integer luma (29.9% R, 58.7% G, 11.4% B), floor division."""
    rgb = rgb.astype(np.int64)
    return (299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]) // 1000


def _resample_matrix(n_in: int, n_out: int) -> np.ndarray:
    """Row-stochastic matrix averaging n_in samples into n_out cells.

    Output cell i covers the half-open interval [i*n_in/n_out, (i+1)*n_in/n_out);
    each input sample contributes in proportion to its overlap with the cell.
    """
    m = np.zeros((n_out, n_in), dtype=np.float64)
    scale = n_in / n_out
    for i in range(n_out):
        lo = i * scale
        hi = (i + 1) * scale
        j0 = int(np.floor(lo))
        j1 = int(np.ceil(hi))
        for j in range(j0, min(j1, n_in)):
            overlap = min(hi, j + 1) - max(lo, j)
            if overlap > 0:
                m[i, j] = overlap / scale
    return m


def area_downsample(gray: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Exact area-mean downsample of a 2-D array to (rows, cols), float64."""
    h, w = gray.shape
    row_m = _resample_matrix(h, rows)
    col_m = _resample_matrix(w, cols)
    return row_m @ gray.astype(np.float64) @ col_m.T


def perceptual_hash(image_bytes: bytes) -> PerceptualHash:
    """64-bit difference hash; stable across lossless re-encoding."""
    rgb = decode_image(image_bytes)
    gray = integer_luma(rgb)
    grid = area_downsample(gray, rows=8, cols=9)
    bits = 0
    index = 0
    for r in range(8):
        for c in range(8):
            if grid[r, c] > grid[r, c + 1]:
                bits |= 1 << index
            index += 1
    return PerceptualHash(bits=bits)


def hamming_distance(a: PerceptualHash, b: PerceptualHash) -> int:
    return a.hamming(b)


class _UnionFind:
    def __init__(self, keys: Iterable[str]):
        self.parent = {k: k for k in keys}

    def find(self, k: str) -> str:
        root = k
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[k] != root:
            self.parent[k], k = root, self.parent[k]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra

    def components(self) -> dict[str, list[str]]:
        groups: dict[str, list[str]] = {}
        for k in self.parent:
            groups.setdefault(self.find(k), []).append(k)
        return groups


def _pairwise_hamming(hashes: Sequence[int]) -> np.ndarray:
    """All-pairs Hamming distance matrix for 64-bit hashes."""
    arr = np.array(hashes, dtype=np.uint64)
    bits = np.unpackbits(arr.view(np.uint8).reshape(len(arr), 8), axis=1).astype(np.int32)
    popcnt = bits.sum(axis=1)
    inner = bits @ bits.T
    return popcnt[:, None] + popcnt[None, :] - 2 * inner


def dedup_scan(
    records: Sequence,
    threshold: int,
    fetch_bytes: Callable[[str], bytes],
) -> DedupScanResult:
    """Cluster duplicate records and pick one representative per cluster.

    ``records`` need ``id``, ``blob_checksum`` and ``rank`` attributes;
    ``fetch_bytes(checksum)`` returns the stored image bytes. Byte-identical
    records always cluster (checksum grouping, no decoding needed); records
    whose unique bytes decode are then clustered at Hamming <= threshold.
    The representative is the member with the lowest rank, ties broken by id.
    Undecodable records are quarantined and excluded.
    """
    if not 0 <= threshold <= 64:
        raise ValueError(f"threshold must be in [0, 64], got {threshold}")

    by_id = {}
    order_key = {}
    for rec in records:
        if rec.id in by_id:
            raise ValueError(f"duplicate record id {rec.id!r}")
        by_id[rec.id] = rec
        rank = rec.rank if rec.rank is not None else _UNRANKED
        order_key[rec.id] = (rank, rec.id)

    # Hash each unique checksum once; quarantine records whose bytes fail to
    # decode (they cannot participate in either pass).
    checksum_ids: dict[str, list[str]] = {}
    for rec in records:
        checksum_ids.setdefault(rec.blob_checksum, []).append(rec.id)
    hash_by_checksum: dict[str, int] = {}
    quarantined: list[str] = []
    for checksum, ids in checksum_ids.items():
        try:
            hash_by_checksum[checksum] = perceptual_hash(fetch_bytes(checksum)).bits
        except UndecodableImageError:
            quarantined.extend(ids)
    quarantined.sort()
    live_ids = [rec.id for rec in records if rec.id not in set(quarantined)]

    uf = _UnionFind(live_ids)
    # Exact pass: checksum grouping.
    for checksum, ids in checksum_ids.items():
        alive = [i for i in ids if i in uf.parent]
        for other in alive[1:]:
            uf.union(alive[0], other)
    # Perceptual pass over unique decodable checksums.
    checksums = sorted(c for c in hash_by_checksum if any(i in uf.parent for i in checksum_ids[c]))
    if len(checksums) > 1:
        dist = _pairwise_hamming([hash_by_checksum[c] for c in checksums])
        close = np.argwhere(dist <= threshold)
        for i, j in close:
            if i < j:
                a = next(x for x in checksum_ids[checksums[i]] if x in uf.parent)
                b = next(x for x in checksum_ids[checksums[j]] if x in uf.parent)
                uf.union(a, b)

    clusters: list[DedupCluster] = []
    kept: list[str] = []
    duplicates: list[str] = []
    for _, ids in sorted(uf.components().items()):
        members = sorted(ids, key=lambda i: order_key[i])
        representative = members[0]
        kept.append(representative)
        if len(members) == 1:
            continue
        checksums_here = {by_id[i].blob_checksum for i in members}
        reason = "exact" if len(checksums_here) == 1 else "perceptual"
        clusters.append(
            DedupCluster(representative=representative, members=tuple(members), reason=reason)
        )
        duplicates.extend(m for m in members[1:])
    clusters.sort(key=lambda c: c.representative)
    kept.sort()
    duplicates.sort()
    return DedupScanResult(
        clusters=clusters, kept=kept, duplicates=duplicates, quarantined=quarantined
    )
