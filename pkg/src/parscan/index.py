"""Neighbor order / core order index and its binary file format."""
from __future__ import annotations

import hashlib
import json
import struct
import time
from dataclasses import dataclass, field
from typing import BinaryIO

import numpy as np

from ._parallel import map_chunks
from .graph import Graph
from .similarity import MEASURES, SimilarityTable

MAGIC = b"PSCANIDX"
VERSION = 1
_HEADER = struct.Struct("<8sIQQBB32sQ")  # magic, version, n, m, measure, weighted, digest, config length


class IndexFormatError(ValueError):
    pass


class IndexVersionError(IndexFormatError):
    pass


class IndexTruncatedError(IndexFormatError):
    pass


class IndexChecksumError(IndexFormatError):
    pass


def config_digest(config: dict) -> bytes:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).digest()


@dataclass(frozen=True, eq=False)
class ScanIndex:
    """Graph, similarities, neighbor order (NO) and core order (CO).

    NO[v] occupies ``no_ids[no_offsets[v]:no_offsets[v+1]]`` with v itself in
    the first slot. CO[mu] occupies ``co_ids[co_offsets[mu]:co_offsets[mu+1]]``
    for 2 <= mu <= max_closed_size.
    """

    graph: Graph
    table: SimilarityTable
    no_offsets: np.ndarray
    no_ids: np.ndarray
    no_sims: np.ndarray
    co_offsets: np.ndarray
    co_ids: np.ndarray
    co_thresholds: np.ndarray
    config: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def digest(self) -> bytes:
        return config_digest(self.config)

    @property
    def max_closed_size(self) -> int:
        return len(self.co_offsets) - 2

    def neighbor_order(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.no_offsets[v], self.no_offsets[v + 1]
        return self.no_ids[s:e], self.no_sims[s:e]

    def core_order(self, mu: int) -> tuple[np.ndarray, np.ndarray]:
        if mu < 2 or mu > self.max_closed_size:
            return self.co_ids[:0], self.co_thresholds[:0]
        s, e = self.co_offsets[mu], self.co_offsets[mu + 1]
        return self.co_ids[s:e], self.co_thresholds[s:e]

    def core_threshold(self, v: int, mu: int) -> float:
        """sigma(v, NO[v][mu]) with 1-based mu; NaN when |N̄(v)| < mu."""
        if mu < 1 or mu > self.no_offsets[v + 1] - self.no_offsets[v]:
            return float("nan")
        return float(self.no_sims[self.no_offsets[v] + mu - 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScanIndex):
            return NotImplemented
        return serialize_index(self) == serialize_index(other)

    __hash__ = None  # type: ignore[assignment]


def _sorted_segments(keys_fn, seg_offsets: np.ndarray, threads) -> np.ndarray:
    """Permutation sorting each segment independently; segments are grouped into thread chunks."""
    n_seg = len(seg_offsets) - 1

    def work(lo, hi):
        a, b = seg_offsets[lo], seg_offsets[hi]
        return a + np.lexsort(keys_fn(a, b))

    parts = map_chunks(work, n_seg, threads)
    return np.concatenate(parts) if parts else np.empty(0, np.int64)


def build_neighbor_order(graph: Graph, table: SimilarityTable, threads=1):
    n = graph.n
    no_offsets = graph.offsets + np.arange(n + 1, dtype=np.int64)
    owner = np.repeat(np.arange(n, dtype=np.int64), graph.degrees + 1)
    ids = np.empty(n + 2 * graph.m, dtype=np.int64)
    sims = np.empty(n + 2 * graph.m, dtype=np.float64)
    is_self = np.zeros(n + 2 * graph.m, dtype=bool)
    slot0 = no_offsets[:-1]
    is_self[slot0] = True
    ids[slot0] = np.arange(n)
    sims[slot0] = 1.0
    rest = ~is_self
    ids[rest] = graph.neighbors
    sims[rest] = table.scores
    # key order (last is primary): owner, self first, similarity desc, id asc
    perm = _sorted_segments(lambda a, b: (ids[a:b], -sims[a:b], ~is_self[a:b], owner[a:b]),
                            no_offsets, threads)
    return no_offsets, ids[perm], sims[perm]


def build_core_order(graph: Graph, no_offsets, no_sims, threads=1):
    n = graph.n
    max_closed = int(graph.degrees.max()) + 1 if n else 0
    # CO entries are exactly the non-self NO slots: slot s of NO[v] (0-based) serves mu = s + 1
    slot = np.arange(len(no_sims), dtype=np.int64) - np.repeat(no_offsets[:-1], graph.degrees + 1)
    owner = np.repeat(np.arange(n, dtype=np.int64), graph.degrees + 1)
    keep = slot > 0
    mu = slot[keep] + 1
    vert = owner[keep]
    thr = no_sims[keep]
    counts = np.bincount(mu, minlength=max_closed + 1)
    co_offsets = np.concatenate([np.zeros(1, np.int64), np.cumsum(counts)]).astype(np.int64)
    by_mu = np.argsort(mu, kind="stable")
    mu, vert, thr = mu[by_mu], vert[by_mu], thr[by_mu]
    perm = _sorted_segments(lambda a, b: (vert[a:b], -thr[a:b], mu[a:b]), co_offsets, threads)
    return co_offsets, vert[perm], thr[perm]


def build_index(graph: Graph, table: SimilarityTable, *, config: dict | None = None,
                threads: int | None = 1, timings: dict | None = None) -> ScanIndex:
    """Sort every closed neighborhood by (-sigma, id) and every CO[mu] by (-threshold, id)."""
    if len(table.scores) != 2 * graph.m:
        raise ValueError(f"similarity table has {len(table.scores)} entries, graph has {2 * graph.m} half-edges")
    config = dict(config or {})
    config.setdefault("measure", table.measure)
    t0 = time.perf_counter()
    no_offsets, no_ids, no_sims = build_neighbor_order(graph, table, threads)
    t1 = time.perf_counter()
    co_offsets, co_ids, co_thr = build_core_order(graph, no_offsets, no_sims, threads)
    t2 = time.perf_counter()
    if timings is not None:
        timings["neighbor_order"] = t1 - t0
        timings["core_order"] = t2 - t1
    return ScanIndex(graph, table, no_offsets, no_ids, no_sims, co_offsets, co_ids, co_thr, config)


# --------------------------------------------------------------------------
# file format v1: header, config JSON, length-prefixed little-endian arrays,
# trailing SHA-256 over everything before it

_ARRAYS = (
    ("graph.offsets", "<i8"), ("graph.neighbors", "<i8"), ("graph.weights", "<f8"),
    ("table.scores", "<f8"), ("no_offsets", "<i8"), ("no_ids", "<i8"), ("no_sims", "<f8"),
    ("co_offsets", "<i8"), ("co_ids", "<i8"), ("co_thresholds", "<f8"),
)


def _get(index: ScanIndex, name: str) -> np.ndarray:
    obj = index
    for part in name.split("."):
        obj = getattr(obj, part)
    return obj


def serialize_index(index: ScanIndex, stream: BinaryIO | None = None) -> bytes:
    cfg = json.dumps(index.config, sort_keys=True).encode()
    chunks = [_HEADER.pack(MAGIC, VERSION, index.n, index.m, MEASURES.index(index.table.measure),
                           int(index.graph.weighted), index.digest, len(cfg)), cfg]
    for name, dtype in _ARRAYS:
        arr = np.ascontiguousarray(_get(index, name), dtype=dtype)
        chunks.append(struct.pack("<Q", len(arr)))
        chunks.append(arr.tobytes())
    body = b"".join(chunks)
    data = body + hashlib.sha256(body).digest()
    if stream is not None:
        stream.write(data)
    return data


def deserialize_index(source: BinaryIO | bytes) -> ScanIndex:
    data = source if isinstance(source, (bytes, bytearray)) else source.read()
    if len(data) < len(MAGIC) + 4 or data[: len(MAGIC)] != MAGIC:
        raise IndexVersionError("not a parscan index (bad magic)")
    (version,) = struct.unpack_from("<I", data, len(MAGIC))
    if version != VERSION:
        raise IndexVersionError(f"index format version {version}, expected {VERSION}")
    if len(data) < _HEADER.size + 32:
        raise IndexTruncatedError("index file truncated in header")
    body, checksum = data[:-32], data[-32:]
    _, _, n, m, measure_tag, weighted, digest, cfg_len = _HEADER.unpack_from(data, 0)
    pos = _HEADER.size
    if pos + cfg_len > len(body):
        raise IndexTruncatedError("index file truncated in config")
    cfg_raw = body[pos:pos + cfg_len]
    pos += cfg_len
    arrays = {}
    for name, dtype in _ARRAYS:
        if pos + 8 > len(body):
            raise IndexTruncatedError(f"index file truncated before {name}")
        (length,) = struct.unpack_from("<Q", body, pos)
        pos += 8
        nbytes = length * 8
        if pos + nbytes > len(body):
            raise IndexTruncatedError(f"index file truncated in {name}")
        arrays[name] = np.frombuffer(body, dtype=dtype, count=length, offset=pos).astype(dtype[1:])
        pos += nbytes
    if pos != len(body):
        raise IndexTruncatedError("trailing bytes or missing checksum")
    if hashlib.sha256(body).digest() != checksum:
        raise IndexChecksumError("payload checksum mismatch")
    config = json.loads(cfg_raw.decode())
    if config_digest(config) != digest:
        raise IndexChecksumError("config digest mismatch")
    if measure_tag >= len(MEASURES):
        raise IndexFormatError(f"unknown measure tag {measure_tag}")
    graph = Graph(int(n), arrays["graph.offsets"], arrays["graph.neighbors"],
                  arrays["graph.weights"], bool(weighted))
    if graph.m != m:
        raise IndexFormatError("edge count disagrees with header")
    table = SimilarityTable(arrays["table.scores"], MEASURES[measure_tag])
    return ScanIndex(graph, table, arrays["no_offsets"], arrays["no_ids"], arrays["no_sims"],
                     arrays["co_offsets"], arrays["co_ids"], arrays["co_thresholds"], config)


def save_index(index: ScanIndex, path) -> None:
    with open(path, "wb") as fh:
        serialize_index(index, fh)


def load_index(path) -> ScanIndex:
    with open(path, "rb") as fh:
        return deserialize_index(fh)
