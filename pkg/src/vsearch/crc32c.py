"""CRC32C (Castagnoli) used by the index and tensor-archive file formats.

Table-driven, reflected polynomial 0x82F63B78. Check value:
crc32c(b"123456789") == 0xE3069283.
"""

_TABLE = []
for _i in range(256):
    _crc = _i
    for _ in range(8):
        _crc = (_crc >> 1) ^ 0x82F63B78 if _crc & 1 else _crc >> 1
    _TABLE.append(_crc)


def crc32c(data: bytes, crc: int = 0) -> int:
    """Compute (or continue, via `crc`) a CRC32C over `data`."""
    crc ^= 0xFFFFFFFF
    for byte in data:
        crc = _TABLE[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


class IncrementalCrc32c:
    """Streaming CRC32C accumulator for chunked writers/readers."""

    def __init__(self) -> None:
        self._state = 0xFFFFFFFF

    def update(self, data: bytes) -> None:
        crc = self._state
        for byte in data:
            crc = _TABLE[(crc ^ byte) & 0xFF] ^ (crc >> 8)
        self._state = crc

    @property
    def value(self) -> int:
        return self._state ^ 0xFFFFFFFF
