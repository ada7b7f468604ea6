"""Hierarchical navigable small-world index over inner-product similarity.

Two instances back the engine (one per modality). Scores are raw inner
products of stored vectors with the query — the index never normalizes, so
providers that send unnormalized vectors keep their semantics. Level
assignment is a pure function of (seed, insertion ordinal), which makes a
build reproducible byte-for-byte and keeps determinism across save/load.

Vectors are stored float32 (the on-disk dtype) from insert time, so
save -> load round-trips bit-identically and get() returns exactly what
search scores against.

File format: magic "VAGIDX1\\0", u32 header length, header JSON, float32
little-endian vectors row-major, per-node per-layer delta-encoded varint
adjacency, CRC32C of all preceding bytes.
"""

from __future__ import annotations

import heapq
import json
import math
import os
import struct
from bisect import insort
from dataclasses import asdict, dataclass
from typing import Iterable

import numpy as np

from .crc32c import IncrementalCrc32c
from .errors import CorruptIndexFile, DimensionMismatch, DuplicateId, EmptyIndex

MAGIC = b"VAGIDX1\x00"

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass
class IndexParams:
    m: int = 16
    ef_construction: int = 200
    ef_search: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("m must be >= 2")
        if self.ef_construction < self.m:
            raise ValueError("ef_construction must be >= m")
        if self.ef_search < 1:
            raise ValueError("ef_search must be >= 1")


def _write_varint(buf: bytearray, value: int) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            buf.append(byte | 0x80)
        else:
            buf.append(byte)
            return


def _read_varint(data: bytes, offset: int) -> tuple[int, int]:
    value = 0
    shift = 0
    while True:
        if offset >= len(data):
            raise CorruptIndexFile("truncated adjacency section")
        byte = data[offset]
        offset += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, offset
        shift += 7


class HnswIndex:
    """Approximate nearest-neighbor graph with exact-lookup storage.

    Concurrency contract: many concurrent readers OR one writer. search()
    touches no mutable state; insert() must be externally serialized.
    """

    def __init__(self, dim: int, params: IndexParams | None = None) -> None:
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.params = params or IndexParams()
        self._level_mult = 1.0 / math.log(self.params.m)
        self._ids: list[str] = []
        self._pos: dict[str, int] = {}
        self._levels: list[int] = []
        self._links: list[list[list[int]]] = []  # node -> layer -> sorted neighbor positions
        self._matrix = np.zeros((256, dim), dtype=np.float32)
        self._count = 0
        self._entry = -1
        self._max_level = -1

    def __len__(self) -> int:
        return self._count

    def __contains__(self, video_id: str) -> bool:
        return video_id in self._pos

    def ids(self) -> list[str]:
        return list(self._ids)

    def get(self, video_id: str) -> np.ndarray:
        """Stored float32 vector, bitwise as scored by search."""
        pos = self._pos[video_id]
        return self._matrix[pos].copy()

    def level_of(self, video_id: str) -> int:
        return self._levels[self._pos[video_id]]

    def neighbor_ids(self, video_id: str, layer: int) -> list[str]:
        pos = self._pos[video_id]
        return [self._ids[n] for n in self._links[pos][layer]]

    # -- construction --------------------------------------------------

    def _assign_level(self, ordinal: int) -> int:
        z = _splitmix64(self.params.seed + (ordinal + 1) * _GOLDEN)
        u = ((z >> 11) + 1) / float(1 << 53)  # uniform in (0, 1]
        return int(-math.log(u) * self._level_mult)

    def _m_for(self, layer: int) -> int:
        return 2 * self.params.m if layer == 0 else self.params.m

    def insert(self, video_id: str, vector) -> None:
        if video_id in self._pos:
            raise DuplicateId(f"id {video_id!r} already indexed")
        arr = np.asarray(getattr(vector, "values", vector), dtype=np.float32)
        if arr.shape != (self.dim,):
            raise DimensionMismatch(f"vector shape {arr.shape}, index dim {self.dim}")

        pos = self._count
        if pos == len(self._matrix):
            grown = np.zeros((max(256, len(self._matrix) * 2), self.dim), dtype=np.float32)
            grown[:pos] = self._matrix
            self._matrix = grown
        self._matrix[pos] = arr
        level = self._assign_level(pos)
        self._ids.append(video_id)
        self._pos[video_id] = pos
        self._levels.append(level)
        self._links.append([[] for _ in range(level + 1)])

        if self._count == 0:
            self._count = 1
            self._entry = pos
            self._max_level = level
            return

        query = self._matrix[pos].astype(np.float64)
        cur = [self._entry]
        for layer in range(self._max_level, level, -1):
            best = self._search_layer(query, cur, layer, 1)
            cur = [best[0][1]]

        for layer in range(min(level, self._max_level), -1, -1):
            candidates = self._search_layer(query, cur, layer, self.params.ef_construction)
            cap = self._m_for(layer)
            selected = self._select_neighbors(candidates, cap, query_scores_sorted=True)
            self._links[pos][layer] = sorted(selected)
            for neighbor in selected:
                nlinks = self._links[neighbor][layer]
                insort(nlinks, pos)
                if len(nlinks) > cap:
                    self._prune(neighbor, layer, cap)
            cur = [p for _, p in candidates]

        self._count += 1
        if level > self._max_level:
            self._entry = pos
            self._max_level = level

    def _prune(self, node: int, layer: int, cap: int) -> None:
        links = self._links[node][layer]
        base = self._matrix[node].astype(np.float64)
        scores = self._matrix[links] @ base
        ordered = sorted(zip(scores.tolist(), links), key=lambda t: (-t[0], t[1]))
        selected = self._select_neighbors(ordered, cap, query_scores_sorted=True)
        self._links[node][layer] = sorted(selected)

    def _select_neighbors(self, candidates, m: int, query_scores_sorted: bool):
        """Diversity-aware selection: keep a candidate only if it is more
        similar to the query point than to anything already kept, then fill
        remaining slots from the discards (keeps the graph well connected)."""
        if len(candidates) <= m:
            return [p for _, p in candidates]
        if not query_scores_sorted:
            candidates = sorted(candidates, key=lambda t: (-t[0], t[1]))
        positions = [p for _, p in candidates]
        qsims = [s for s, _ in candidates]
        vecs = self._matrix[positions].astype(np.float64)
        pair = vecs @ vecs.T
        selected: list[int] = []
        discarded: list[int] = []
        # running max over pair[i, selected], updated as columns are kept
        kept_sim = np.full(len(candidates), -np.inf)
        kept_list = kept_sim.tolist()
        for i in range(len(candidates)):
            if len(selected) >= m:
                break
            if not selected:
                selected.append(i)
                np.maximum(kept_sim, pair[:, i], out=kept_sim)
                kept_list = kept_sim.tolist()
                continue
            if qsims[i] > kept_list[i]:
                selected.append(i)
                np.maximum(kept_sim, pair[:, i], out=kept_sim)
                kept_list = kept_sim.tolist()
            else:
                discarded.append(i)
        for i in discarded:
            if len(selected) >= m:
                break
            selected.append(i)
        return [positions[i] for i in selected]

    # -- search --------------------------------------------------------

    def _search_layer(self, query: np.ndarray, entries: list[int], layer: int, ef: int):
        """Beam search on one layer; returns [(score, pos)] best-first,
        ties broken by position."""
        visited = bytearray(self._count + 1)
        for p in entries:
            visited[p] = 1
        scores = self._matrix[entries] @ query
        candidates = [(-s, p) for s, p in zip(scores.tolist(), entries)]
        heapq.heapify(candidates)
        best = list(zip(scores.tolist(), entries))
        heapq.heapify(best)
        while len(best) > ef:
            heapq.heappop(best)

        while candidates:
            neg, pos = heapq.heappop(candidates)
            if len(best) >= ef and -neg < best[0][0]:
                break
            links = self._links[pos][layer]
            fresh = [n for n in links if not visited[n]]
            if not fresh:
                continue
            for n in fresh:
                visited[n] = 1
            fresh_scores = self._matrix[fresh] @ query
            for n, s in zip(fresh, fresh_scores.tolist()):
                if len(best) < ef:
                    heapq.heappush(best, (s, n))
                    heapq.heappush(candidates, (-s, n))
                elif s > best[0][0]:
                    heapq.heappushpop(best, (s, n))
                    heapq.heappush(candidates, (-s, n))
        return sorted(best, key=lambda t: (-t[0], t[1]))

    def search(self, query, k: int, ef_search: int | None = None) -> list[tuple[str, float]]:
        """Top-k (id, inner-product score), score desc, ties by id asc."""
        if self._count == 0:
            raise EmptyIndex("search on empty index")
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(getattr(query, "values", query), dtype=np.float64)
        if q.shape != (self.dim,):
            raise DimensionMismatch(f"query shape {q.shape}, index dim {self.dim}")
        ef = max(ef_search if ef_search is not None else self.params.ef_search, k)

        cur = [self._entry]
        for layer in range(self._max_level, 0, -1):
            best = self._search_layer(q, cur, layer, 1)
            cur = [best[0][1]]
        found = self._search_layer(q, cur, 0, ef)
        rows = [(self._ids[p], s) for s, p in found]
        rows.sort(key=lambda t: (-t[1], t[0]))
        return [(vid, float(s)) for vid, s in rows[:k]]

    # -- persistence ---------------------------------------------------

    def save(self, path: str) -> None:
        header = {
            "count": self._count,
            "dim": self.dim,
            "dtype": "f32",
            "entry": self._entry,
            "ids": self._ids[: self._count],
            "levels": self._levels[: self._count],
            "max_level": self._max_level,
            "params": asdict(self.params),
        }
        header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
        adjacency = bytearray()
        for node in range(self._count):
            for layer in range(self._levels[node] + 1):
                neighbors = self._links[node][layer]
                _write_varint(adjacency, len(neighbors))
                prev = 0
                for i, n in enumerate(neighbors):
                    _write_varint(adjacency, n if i == 0 else n - prev)
                    prev = n

        crc = IncrementalCrc32c()
        tmp = path + ".tmp"
        with open(tmp, "wb") as fh:
            for chunk in (
                MAGIC,
                struct.pack("<I", len(header_bytes)),
                header_bytes,
                self._matrix[: self._count].astype("<f4", copy=False).tobytes(),
                bytes(adjacency),
            ):
                fh.write(chunk)
                crc.update(chunk)
            fh.write(struct.pack("<I", crc.value))
        os.replace(tmp, path)

    @classmethod
    def load(cls, path: str) -> "HnswIndex":
        with open(path, "rb") as fh:
            blob = fh.read()
        if len(blob) < len(MAGIC) + 8:
            raise CorruptIndexFile("file too short")
        if blob[: len(MAGIC)] != MAGIC:
            raise CorruptIndexFile("bad magic")
        crc = IncrementalCrc32c()
        crc.update(blob[:-4])
        (stored_crc,) = struct.unpack("<I", blob[-4:])
        if crc.value != stored_crc:
            raise CorruptIndexFile("checksum mismatch")

        offset = len(MAGIC)
        (header_len,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        if offset + header_len > len(blob) - 4:
            raise CorruptIndexFile("truncated header")
        try:
            header = json.loads(blob[offset : offset + header_len].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise CorruptIndexFile(f"unreadable header: {exc}") from exc
        offset += header_len

        try:
            count = int(header["count"])
            dim = int(header["dim"])
            dtype = header["dtype"]
            ids = list(header["ids"])
            levels = [int(x) for x in header["levels"]]
            entry = int(header["entry"])
            max_level = int(header["max_level"])
            params = IndexParams(**header["params"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptIndexFile(f"malformed header: {exc}") from exc
        if dtype != "f32":
            raise CorruptIndexFile(f"unsupported element dtype {dtype!r}")
        if len(ids) != count or len(levels) != count or len(set(ids)) != count:
            raise CorruptIndexFile("inconsistent id/level tables")

        vec_bytes = count * dim * 4
        if offset + vec_bytes > len(blob) - 4:
            raise CorruptIndexFile("truncated vector section")
        matrix = np.frombuffer(blob[offset : offset + vec_bytes], dtype="<f4").reshape(count, dim)
        offset += vec_bytes

        adjacency = blob[:-4]
        links: list[list[list[int]]] = []
        for node in range(count):
            node_layers: list[list[int]] = []
            for _layer in range(levels[node] + 1):
                length, offset = _read_varint(adjacency, offset)
                neighbors: list[int] = []
                prev = 0
                for i in range(length):
                    delta, offset = _read_varint(adjacency, offset)
                    prev = delta if i == 0 else prev + delta
                    if prev >= count:
                        raise CorruptIndexFile("neighbor position out of range")
                    neighbors.append(prev)
                node_layers.append(neighbors)
            links.append(node_layers)
        if offset != len(blob) - 4:
            raise CorruptIndexFile("trailing bytes after adjacency section")
        if count > 0 and not (0 <= entry < count):
            raise CorruptIndexFile("entry point out of range")

        index = cls(dim, params)
        index._count = count
        index._ids = ids
        index._pos = {vid: i for i, vid in enumerate(ids)}
        index._levels = levels
        index._links = links
        index._entry = entry
        index._max_level = max_level
        index._matrix = np.zeros((max(256, count), dim), dtype=np.float32)
        if count:
            index._matrix[:count] = matrix
        return index


def brute_force_search(index: HnswIndex, query, k: int) -> list[tuple[str, float]]:
    """Exhaustive scoring over every stored vector; same tie rules as search."""
    if len(index) == 0:
        raise EmptyIndex("search on empty index")
    q = np.asarray(getattr(query, "values", query), dtype=np.float64)
    scores = index._matrix[: index._count] @ q
    rows = sorted(zip(index._ids, scores.tolist()), key=lambda t: (-t[1], t[0]))
    return [(vid, float(s)) for vid, s in rows[:k]]
