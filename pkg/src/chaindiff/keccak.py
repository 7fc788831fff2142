"""Pure-Python Keccak-256 (original padding, not SHA3).

hashlib only ships SHA3 variants, whose domain-separation padding differs
from the Keccak used by contract bytecode, so we carry our own sponge.
The permutation is fully unrolled (25 lane locals, precomputed rotations)
because the fuzz loop hashes large memory regions on its hot path; a small
digest cache covers repeated hashing of identical large inputs.
"""

_MASK = (1 << 64) - 1

_RC = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A,
    0x8000000080008000, 0x000000000000808B, 0x0000000080000001,
    0x8000000080008081, 0x8000000000008009, 0x000000000000008A,
    0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089,
    0x8000000000008003, 0x8000000000008002, 0x8000000000000080,
    0x000000000000800A, 0x800000008000000A, 0x8000000080008081,
    0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)


def _keccak_f(a):
    (a0, a1, a2, a3, a4,
     a5, a6, a7, a8, a9,
     a10, a11, a12, a13, a14,
     a15, a16, a17, a18, a19,
     a20, a21, a22, a23, a24) = a
    for rc in _RC:
        # theta
        c0 = a0 ^ a5 ^ a10 ^ a15 ^ a20
        c1 = a1 ^ a6 ^ a11 ^ a16 ^ a21
        c2 = a2 ^ a7 ^ a12 ^ a17 ^ a22
        c3 = a3 ^ a8 ^ a13 ^ a18 ^ a23
        c4 = a4 ^ a9 ^ a14 ^ a19 ^ a24
        d = c4 ^ ((c1 << 1 | c1 >> 63) & _MASK)
        a0 ^= d; a5 ^= d; a10 ^= d; a15 ^= d; a20 ^= d
        d = c0 ^ ((c2 << 1 | c2 >> 63) & _MASK)
        a1 ^= d; a6 ^= d; a11 ^= d; a16 ^= d; a21 ^= d
        d = c1 ^ ((c3 << 1 | c3 >> 63) & _MASK)
        a2 ^= d; a7 ^= d; a12 ^= d; a17 ^= d; a22 ^= d
        d = c2 ^ ((c4 << 1 | c4 >> 63) & _MASK)
        a3 ^= d; a8 ^= d; a13 ^= d; a18 ^= d; a23 ^= d
        d = c3 ^ ((c0 << 1 | c0 >> 63) & _MASK)
        a4 ^= d; a9 ^= d; a14 ^= d; a19 ^= d; a24 ^= d
        # rho + pi
        b0 = a0
        b1 = (a6 << 44 | a6 >> 20) & _MASK
        b2 = (a12 << 43 | a12 >> 21) & _MASK
        b3 = (a18 << 21 | a18 >> 43) & _MASK
        b4 = (a24 << 14 | a24 >> 50) & _MASK
        b5 = (a3 << 28 | a3 >> 36) & _MASK
        b6 = (a9 << 20 | a9 >> 44) & _MASK
        b7 = (a10 << 3 | a10 >> 61) & _MASK
        b8 = (a16 << 45 | a16 >> 19) & _MASK
        b9 = (a22 << 61 | a22 >> 3) & _MASK
        b10 = (a1 << 1 | a1 >> 63) & _MASK
        b11 = (a7 << 6 | a7 >> 58) & _MASK
        b12 = (a13 << 25 | a13 >> 39) & _MASK
        b13 = (a19 << 8 | a19 >> 56) & _MASK
        b14 = (a20 << 18 | a20 >> 46) & _MASK
        b15 = (a4 << 27 | a4 >> 37) & _MASK
        b16 = (a5 << 36 | a5 >> 28) & _MASK
        b17 = (a11 << 10 | a11 >> 54) & _MASK
        b18 = (a17 << 15 | a17 >> 49) & _MASK
        b19 = (a23 << 56 | a23 >> 8) & _MASK
        b20 = (a2 << 62 | a2 >> 2) & _MASK
        b21 = (a8 << 55 | a8 >> 9) & _MASK
        b22 = (a14 << 39 | a14 >> 25) & _MASK
        b23 = (a15 << 41 | a15 >> 23) & _MASK
        b24 = (a21 << 2 | a21 >> 62) & _MASK
        # chi
        a0 = b0 ^ (~b1 & b2)
        a1 = b1 ^ (~b2 & b3)
        a2 = b2 ^ (~b3 & b4)
        a3 = b3 ^ (~b4 & b0)
        a4 = b4 ^ (~b0 & b1)
        a5 = b5 ^ (~b6 & b7)
        a6 = b6 ^ (~b7 & b8)
        a7 = b7 ^ (~b8 & b9)
        a8 = b8 ^ (~b9 & b5)
        a9 = b9 ^ (~b5 & b6)
        a10 = b10 ^ (~b11 & b12)
        a11 = b11 ^ (~b12 & b13)
        a12 = b12 ^ (~b13 & b14)
        a13 = b13 ^ (~b14 & b10)
        a14 = b14 ^ (~b10 & b11)
        a15 = b15 ^ (~b16 & b17)
        a16 = b16 ^ (~b17 & b18)
        a17 = b17 ^ (~b18 & b19)
        a18 = b18 ^ (~b19 & b15)
        a19 = b19 ^ (~b15 & b16)
        a20 = b20 ^ (~b21 & b22)
        a21 = b21 ^ (~b22 & b23)
        a22 = b22 ^ (~b23 & b24)
        a23 = b23 ^ (~b24 & b20)
        a24 = b24 ^ (~b20 & b21)
        # iota
        a0 ^= rc
    a[:] = (a0, a1, a2, a3, a4,
            a5, a6, a7, a8, a9,
            a10, a11, a12, a13, a14,
            a15, a16, a17, a18, a19,
            a20, a21, a22, a23, a24)
    return a


_RATE = 136  # bytes, for capacity 512

# Repeated executions of the same pooled mutant hash identical memory
# regions; cache digests of large inputs (bounded, FIFO eviction).
_CACHE_MIN_LEN = 1024
_CACHE_MAX_ENTRIES = 256
_digest_cache: dict[bytes, bytes] = {}


def keccak256(data: bytes) -> bytes:
    """Keccak-256 digest of ``data`` (0x01 multi-rate padding)."""
    cacheable = _CACHE_MIN_LEN <= len(data) <= (1 << 20)
    if cacheable:
        key = bytes(data)
        cached = _digest_cache.get(key)
        if cached is not None:
            return cached
    padded = bytearray(data)
    pad_len = _RATE - (len(padded) % _RATE)
    padded += b"\x01" + b"\x00" * (pad_len - 2) + b"\x80" if pad_len >= 2 else b"\x81"
    state = [0] * 25
    for off in range(0, len(padded), _RATE):
        block = padded[off:off + _RATE]
        for i in range(_RATE // 8):
            state[i] ^= int.from_bytes(block[8 * i:8 * i + 8], "little")
        _keccak_f(state)
    out = b"".join(state[i].to_bytes(8, "little") for i in range(4))
    if cacheable:
        if len(_digest_cache) >= _CACHE_MAX_ENTRIES:
            del _digest_cache[next(iter(_digest_cache))]
        _digest_cache[key] = out
    return out
