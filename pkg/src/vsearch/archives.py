"""Tensor archives and task-vector arithmetic over them.

An archive maps tensor names to float32 arrays. The on-disk form is
canonical (names sorted, header keys sorted, fixed little-endian payload
order), so write then read is byte-identical and archives can be compared
by file hash.

File format: magic "VAGTNSR1", u32 header length, header JSON mapping
name -> {dtype, shape, offset, length} plus the reserved "__metadata__"
key, raw payload (tensors in sorted-name order, offsets relative to the
payload start), CRC32C of all preceding bytes.
"""

from __future__ import annotations

import json
import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from .crc32c import IncrementalCrc32c, crc32c
from .errors import (
    CorruptArchive,
    NameSetMismatch,
    NonFiniteResult,
    ShapeMismatch,
    UnsupportedDtype,
)

MAGIC = b"VAGTNSR1"
METADATA_KEY = "__metadata__"
_CHUNK = 1 << 16


@dataclass
class TensorArchive:
    tensors: dict[str, np.ndarray] = field(default_factory=dict)
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        canonical = {}
        for name in sorted(self.tensors):
            if name == METADATA_KEY:
                raise ValueError(f"tensor name {METADATA_KEY!r} is reserved")
            arr = np.asarray(self.tensors[name])
            if arr.dtype != np.float32:
                raise UnsupportedDtype(f"tensor {name!r} has dtype {arr.dtype}, only f32 supported")
            canonical[name] = arr
        self.tensors = canonical

    def names(self) -> list[str]:
        return sorted(self.tensors)

    def allow_nonfinite(self) -> bool:
        return self.metadata.get("allow_nonfinite", "") == "true"

    def validate_finite(self) -> None:
        if self.allow_nonfinite():
            return
        for name, arr in self.tensors.items():
            if arr.size and not np.isfinite(arr).all():
                raise NonFiniteResult(f"tensor {name!r} contains NaN/Inf without allow_nonfinite")

    def digest(self) -> str:
        """CRC32C over the canonical payload; cheap provenance fingerprint."""
        crc = IncrementalCrc32c()
        for name in self.names():
            crc.update(self.tensors[name].astype("<f4", copy=False).tobytes())
        return f"{crc.value:08x}"


def _build_header(archive: TensorArchive) -> tuple[bytes, list[str]]:
    names = archive.names()
    header: dict[str, object] = {METADATA_KEY: dict(archive.metadata)}
    offset = 0
    for name in names:
        arr = archive.tensors[name]
        length = arr.size * 4
        header[name] = {
            "dtype": "f32",
            "shape": list(arr.shape),
            "offset": offset,
            "length": length,
        }
        offset += length
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8"), names


def archive_write(archive: TensorArchive, path: str) -> None:
    archive.validate_finite()
    header_bytes, names = _build_header(archive)
    crc = IncrementalCrc32c()
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        for chunk in (MAGIC, struct.pack("<I", len(header_bytes)), header_bytes):
            fh.write(chunk)
            crc.update(chunk)
        for name in names:
            payload = archive.tensors[name].astype("<f4", copy=False).tobytes()
            fh.write(payload)
            crc.update(payload)
        fh.write(struct.pack("<I", crc.value))
    os.replace(tmp, path)


def _parse_header(blob_head: bytes, total_size: int) -> tuple[dict, dict, int]:
    """Returns (tensor descriptors, metadata, payload start offset)."""
    if total_size < len(MAGIC) + 8:
        raise CorruptArchive("file too short")
    if blob_head[: len(MAGIC)] != MAGIC:
        raise CorruptArchive("bad magic")
    (header_len,) = struct.unpack_from("<I", blob_head, len(MAGIC))
    payload_start = len(MAGIC) + 4 + header_len
    if payload_start > total_size - 4:
        raise CorruptArchive("truncated header")
    try:
        header = json.loads(blob_head[len(MAGIC) + 4 : payload_start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptArchive(f"unreadable header: {exc}") from exc
    if not isinstance(header, dict):
        raise CorruptArchive("header is not an object")
    metadata = header.pop(METADATA_KEY, {})
    if not isinstance(metadata, dict):
        raise CorruptArchive("malformed metadata")
    descriptors = {}
    for name, desc in header.items():
        try:
            dtype = desc["dtype"]
            shape = [int(x) for x in desc["shape"]]
            offset = int(desc["offset"])
            length = int(desc["length"])
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptArchive(f"malformed descriptor for {name!r}: {exc}") from exc
        if dtype != "f32":
            raise UnsupportedDtype(f"tensor {name!r} has dtype {dtype!r}, only f32 supported")
        if any(d < 0 for d in shape) or length != math.prod(shape) * 4 or offset < 0:
            raise CorruptArchive(f"inconsistent descriptor for {name!r}")
        if payload_start + offset + length > total_size - 4:
            raise CorruptArchive(f"tensor {name!r} extends past end of file")
        descriptors[name] = {"shape": tuple(shape), "offset": offset, "length": length}
    return descriptors, {str(k): str(v) for k, v in metadata.items()}, payload_start


class ArchiveReader:
    """Random access to one archive file; verifies the CRC on open in
    chunks, then serves tensors by seek, so memory stays at one tensor."""

    def __init__(self, path: str) -> None:
        self.path = path
        self._fh = open(path, "rb")
        try:
            size = os.fstat(self._fh.fileno()).st_size
            crc = IncrementalCrc32c()
            remaining = size - 4
            if remaining < 0:
                raise CorruptArchive("file too short")
            while remaining > 0:
                chunk = self._fh.read(min(_CHUNK, remaining))
                if not chunk:
                    raise CorruptArchive("short read")
                crc.update(chunk)
                remaining -= len(chunk)
            stored = self._fh.read(4)
            if len(stored) != 4 or struct.unpack("<I", stored)[0] != crc.value:
                raise CorruptArchive("checksum mismatch")
            self._fh.seek(0)
            head = self._fh.read(min(size, len(MAGIC) + 4))
            if len(head) >= len(MAGIC) + 4:
                (header_len,) = struct.unpack_from("<I", head, len(MAGIC))
                self._fh.seek(0)
                head = self._fh.read(len(MAGIC) + 4 + header_len)
            self.descriptors, self.metadata, self._payload_start = _parse_header(head, size)
        except Exception:
            self._fh.close()
            raise

    def names(self) -> list[str]:
        return sorted(self.descriptors)

    def shape(self, name: str) -> tuple[int, ...]:
        return self.descriptors[name]["shape"]

    def tensor(self, name: str) -> np.ndarray:
        desc = self.descriptors[name]
        self._fh.seek(self._payload_start + desc["offset"])
        raw = self._fh.read(desc["length"])
        if len(raw) != desc["length"]:
            raise CorruptArchive(f"short read for tensor {name!r}")
        return np.frombuffer(raw, dtype="<f4").reshape(desc["shape"]).copy()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "ArchiveReader":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def archive_read(path: str) -> TensorArchive:
    with ArchiveReader(path) as reader:
        tensors = {name: reader.tensor(name) for name in reader.names()}
        return TensorArchive(tensors=tensors, metadata=dict(reader.metadata))


def _check_compatible(a_names: set[str], b_names: set[str], a_shapes, b_shapes) -> None:
    if a_names != b_names:
        missing = sorted(a_names - b_names)
        extra = sorted(b_names - a_names)
        raise NameSetMismatch(f"only in first: {missing}; only in second: {extra}")
    for name in sorted(a_names):
        if a_shapes(name) != b_shapes(name):
            raise ShapeMismatch(
                f"tensor {name!r}: {a_shapes(name)} vs {b_shapes(name)}"
            )


def _compatible_archives(a: TensorArchive, b: TensorArchive) -> None:
    _check_compatible(
        set(a.tensors), set(b.tensors),
        lambda n: a.tensors[n].shape, lambda n: b.tensors[n].shape,
    )


def _source_label(archive: TensorArchive) -> str:
    name = archive.metadata.get("name", "unnamed")
    return f"{name}#{archive.digest()}"


def tensor_diff(a: TensorArchive, b: TensorArchive) -> TensorArchive:
    """Elementwise a - b; the task-vector direction is minuend - subtrahend."""
    _compatible_archives(a, b)
    tensors = {name: a.tensors[name] - b.tensors[name] for name in a.tensors}
    metadata = {
        "op": "diff",
        "minuend": _source_label(a),
        "subtrahend": _source_label(b),
    }
    if a.allow_nonfinite() or b.allow_nonfinite():
        metadata["allow_nonfinite"] = "true"
    return TensorArchive(tensors=tensors, metadata=metadata)


def tensor_add(m: TensorArchive, t: TensorArchive) -> TensorArchive:
    """Elementwise m + t; raises NonFiniteResult on overflow to Inf/NaN
    unless either operand carries allow_nonfinite."""
    _compatible_archives(m, t)
    allow = m.allow_nonfinite() or t.allow_nonfinite()
    tensors = {}
    for name in m.tensors:
        with np.errstate(over="ignore"):  # overflow handled by the check below
            out = m.tensors[name] + t.tensors[name]
        if not allow and out.size and not np.isfinite(out).all():
            raise NonFiniteResult(f"tensor {name!r}: addition produced NaN/Inf")
        tensors[name] = out
    metadata = {
        "op": "add",
        "base": _source_label(m),
        "delta": _source_label(t),
        "delta_op": t.metadata.get("op", ""),
    }
    if allow:
        metadata["allow_nonfinite"] = "true"
    return TensorArchive(tensors=tensors, metadata=metadata)


def merge_stream(
    base_path: str,
    plus_path: str,
    minus_path: str,
    out_path: str | None,
    dry_run: bool = False,
) -> list[tuple[str, float]]:
    """Streaming base + (plus - minus), one tensor at a time.

    Arithmetic matches tensor_add(base, tensor_diff(plus, minus)) bit for
    bit: the difference rounds to float32 before the addition. Returns
    (name, L2 norm of the difference tensor) per tensor; with dry_run no
    output is written. Peak memory stays within three tensors.
    """
    if not dry_run and out_path is None:
        raise ValueError("out_path required unless dry_run")
    norms: list[tuple[str, float]] = []
    with ArchiveReader(base_path) as base, ArchiveReader(plus_path) as plus, ArchiveReader(
        minus_path
    ) as minus:
        _check_compatible(set(plus.descriptors), set(minus.descriptors), plus.shape, minus.shape)
        _check_compatible(set(base.descriptors), set(plus.descriptors), base.shape, plus.shape)

        names = base.names()
        metadata = {
            "op": "merge",
            "base": os.path.basename(base_path),
            "plus": os.path.basename(plus_path),
            "minus": os.path.basename(minus_path),
        }
        header: dict[str, object] = {METADATA_KEY: metadata}
        offset = 0
        for name in names:
            length = base.descriptors[name]["length"]
            header[name] = {
                "dtype": "f32",
                "shape": list(base.shape(name)),
                "offset": offset,
                "length": length,
            }
            offset += length
        header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")

        out_fh = None
        crc = IncrementalCrc32c()
        if not dry_run:
            out_fh = open(out_path + ".tmp", "wb")
            for chunk in (MAGIC, struct.pack("<I", len(header_bytes)), header_bytes):
                out_fh.write(chunk)
                crc.update(chunk)
        try:
            for name in names:
                g = plus.tensor(name)
                q = minus.tensor(name)
                tau = g - q
                del g, q
                norms.append((name, float(np.linalg.norm(tau.astype(np.float64)))))
                if dry_run:
                    del tau
                    continue
                f = base.tensor(name)
                with np.errstate(over="ignore"):  # checked right below
                    merged = f + tau
                del f, tau
                if not np.isfinite(merged).all():
                    raise NonFiniteResult(f"tensor {name!r}: merge produced NaN/Inf")
                payload = merged.astype("<f4", copy=False).tobytes()
                del merged
                out_fh.write(payload)
                crc.update(payload)
            if out_fh is not None:
                out_fh.write(struct.pack("<I", crc.value))
        finally:
            if out_fh is not None:
                out_fh.close()
        if not dry_run:
            os.replace(out_path + ".tmp", out_path)
    return norms


def corrupt_check(path: str) -> None:
    """Raise CorruptArchive unless the file parses and passes its CRC."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < len(MAGIC) + 8:
        raise CorruptArchive("file too short")
    if crc32c(blob[:-4]) != struct.unpack("<I", blob[-4:])[0]:
        raise CorruptArchive("checksum mismatch")
    _parse_header(blob, len(blob))
