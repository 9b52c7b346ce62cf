"""Keccak-f[1600] permutation, SHA3-256/512 digests and SHAKE-128/256 XOF.

The sponge state doubles as the CS-PRNG of the emulated processor: samplers
pull pseudo-random bits out of a seeded SHAKE state 32 bits at a time.
Each state keeps counters of permutations run and 32-bit words shifted out,
which the machine's cycle model reads back (24 cycles per permutation, one
cycle per word).

Lane layout follows FIPS-202: lane (x, y) sits at flat index x + 5*y and is
serialized as 8 little-endian bytes.
"""

_MASK64 = (1 << 64) - 1

_ROUND_CONSTANTS = (
    0x0000000000000001, 0x0000000000008082, 0x800000000000808A,
    0x8000000080008000, 0x000000000000808B, 0x0000000080000001,
    0x8000000080008081, 0x8000000000008009, 0x000000000000008A,
    0x0000000000000088, 0x0000000080008009, 0x000000008000000A,
    0x000000008000808B, 0x800000000000008B, 0x8000000000008089,
    0x8000000000008003, 0x8000000000008002, 0x8000000000000080,
    0x000000000000800A, 0x800000008000000A, 0x8000000080008081,
    0x8000000000008080, 0x0000000080000001, 0x8000000080008008,
)

SHAKE128_RATE_BITS = 1344
SHAKE256_RATE_BITS = 1088
SHA3_256_RATE_BITS = 1088
SHA3_512_RATE_BITS = 576

DOMAIN_SHAKE = 0x1F
DOMAIN_SHA3 = 0x06


def keccak_f1600(lanes):
    """All 24 rounds over a 25-lane list (index x + 5*y). Returns a new list.

    The round body is unrolled across the 25 lanes; only the round loop
    remains, which keeps the permutation fast enough to drive the samplers.
    """
    (a00, a10, a20, a30, a40,
     a01, a11, a21, a31, a41,
     a02, a12, a22, a32, a42,
     a03, a13, a23, a33, a43,
     a04, a14, a24, a34, a44) = lanes
    for rc in _ROUND_CONSTANTS:
        # theta
        c0 = a00 ^ a01 ^ a02 ^ a03 ^ a04
        c1 = a10 ^ a11 ^ a12 ^ a13 ^ a14
        c2 = a20 ^ a21 ^ a22 ^ a23 ^ a24
        c3 = a30 ^ a31 ^ a32 ^ a33 ^ a34
        c4 = a40 ^ a41 ^ a42 ^ a43 ^ a44
        d0 = c4 ^ ((c1 << 1 | c1 >> 63) & _MASK64)
        d1 = c0 ^ ((c2 << 1 | c2 >> 63) & _MASK64)
        d2 = c1 ^ ((c3 << 1 | c3 >> 63) & _MASK64)
        d3 = c2 ^ ((c4 << 1 | c4 >> 63) & _MASK64)
        d4 = c3 ^ ((c0 << 1 | c0 >> 63) & _MASK64)
        a00 ^= d0; a01 ^= d0; a02 ^= d0; a03 ^= d0; a04 ^= d0
        a10 ^= d1; a11 ^= d1; a12 ^= d1; a13 ^= d1; a14 ^= d1
        a20 ^= d2; a21 ^= d2; a22 ^= d2; a23 ^= d2; a24 ^= d2
        a30 ^= d3; a31 ^= d3; a32 ^= d3; a33 ^= d3; a34 ^= d3
        a40 ^= d4; a41 ^= d4; a42 ^= d4; a43 ^= d4; a44 ^= d4
        # rho + pi: b[y][(2x+3y)%5] = rotl(a[x][y], r[x][y])
        b00 = a00
        b02 = (a10 << 1 | a10 >> 63) & _MASK64
        b04 = (a20 << 62 | a20 >> 2) & _MASK64
        b01 = (a30 << 28 | a30 >> 36) & _MASK64
        b03 = (a40 << 27 | a40 >> 37) & _MASK64
        b13 = (a01 << 36 | a01 >> 28) & _MASK64
        b10 = (a11 << 44 | a11 >> 20) & _MASK64
        b12 = (a21 << 6 | a21 >> 58) & _MASK64
        b14 = (a31 << 55 | a31 >> 9) & _MASK64
        b11 = (a41 << 20 | a41 >> 44) & _MASK64
        b21 = (a02 << 3 | a02 >> 61) & _MASK64
        b23 = (a12 << 10 | a12 >> 54) & _MASK64
        b20 = (a22 << 43 | a22 >> 21) & _MASK64
        b22 = (a32 << 25 | a32 >> 39) & _MASK64
        b24 = (a42 << 39 | a42 >> 25) & _MASK64
        b34 = (a03 << 41 | a03 >> 23) & _MASK64
        b31 = (a13 << 45 | a13 >> 19) & _MASK64
        b33 = (a23 << 15 | a23 >> 49) & _MASK64
        b30 = (a33 << 21 | a33 >> 43) & _MASK64
        b32 = (a43 << 8 | a43 >> 56) & _MASK64
        b42 = (a04 << 18 | a04 >> 46) & _MASK64
        b44 = (a14 << 2 | a14 >> 62) & _MASK64
        b41 = (a24 << 61 | a24 >> 3) & _MASK64
        b43 = (a34 << 56 | a34 >> 8) & _MASK64
        b40 = (a44 << 14 | a44 >> 50) & _MASK64
        # chi + iota
        a00 = b00 ^ (~b10 & b20) & _MASK64 ^ rc
        a10 = b10 ^ (~b20 & b30) & _MASK64
        a20 = b20 ^ (~b30 & b40) & _MASK64
        a30 = b30 ^ (~b40 & b00) & _MASK64
        a40 = b40 ^ (~b00 & b10) & _MASK64
        a01 = b01 ^ (~b11 & b21) & _MASK64
        a11 = b11 ^ (~b21 & b31) & _MASK64
        a21 = b21 ^ (~b31 & b41) & _MASK64
        a31 = b31 ^ (~b41 & b01) & _MASK64
        a41 = b41 ^ (~b01 & b11) & _MASK64
        a02 = b02 ^ (~b12 & b22) & _MASK64
        a12 = b12 ^ (~b22 & b32) & _MASK64
        a22 = b22 ^ (~b32 & b42) & _MASK64
        a32 = b32 ^ (~b42 & b02) & _MASK64
        a42 = b42 ^ (~b02 & b12) & _MASK64
        a03 = b03 ^ (~b13 & b23) & _MASK64
        a13 = b13 ^ (~b23 & b33) & _MASK64
        a23 = b23 ^ (~b33 & b43) & _MASK64
        a33 = b33 ^ (~b43 & b03) & _MASK64
        a43 = b43 ^ (~b03 & b13) & _MASK64
        a04 = b04 ^ (~b14 & b24) & _MASK64
        a14 = b14 ^ (~b24 & b34) & _MASK64
        a24 = b24 ^ (~b34 & b44) & _MASK64
        a34 = b34 ^ (~b44 & b04) & _MASK64
        a44 = b44 ^ (~b04 & b14) & _MASK64
    return [a00, a10, a20, a30, a40,
            a01, a11, a21, a31, a41,
            a02, a12, a22, a32, a42,
            a03, a13, a23, a33, a43,
            a04, a14, a24, a34, a44]


class KeccakState:
    """One sponge instance: absorb bytes, then squeeze bits.

    Fields mirror the hardware PRNG datapath: ``permutes`` counts
    Keccak-f[1600] runs (24 cycles each), ``words_out`` counts 32-bit
    shift-outs (one cycle each).
    """

    def __init__(self, rate_bits, domain_suffix):
        if rate_bits % 64 or not 0 < rate_bits < 1600:
            raise ValueError(f"invalid rate {rate_bits}")
        self.rate_bits = rate_bits
        self.domain_suffix = domain_suffix
        self.lanes = [0] * 25
        self.absorbed = 0          # bytes absorbed into the current block
        self.phase = "absorbing"
        self.squeeze_cursor = 0    # bit offset into the current output block
        self._block = b""
        self.permutes = 0
        self.words_out = 0

    def _permute(self):
        self.lanes = keccak_f1600(self.lanes)
        self.permutes += 1

    def permute(self):
        """Run the bare permutation (exposed for tests and register use)."""
        self._permute()

    def absorb(self, data):
        if self.phase != "absorbing":
            raise ValueError("cannot absorb after squeezing started")
        rate_bytes = self.rate_bits // 8
        for byte in data:
            lane, off = divmod(self.absorbed, 8)
            self.lanes[lane] ^= byte << (8 * off)
            self.absorbed += 1
            if self.absorbed == rate_bytes:
                self._permute()
                self.absorbed = 0
        return self

    def finalize(self):
        """Apply the domain-separation suffix and padding; start squeezing."""
        if self.phase != "absorbing":
            return self
        rate_bytes = self.rate_bits // 8
        lane, off = divmod(self.absorbed, 8)
        self.lanes[lane] ^= self.domain_suffix << (8 * off)
        lane, off = divmod(rate_bytes - 1, 8)
        self.lanes[lane] ^= 0x80 << (8 * off)
        self._permute()
        self.phase = "squeezing"
        self.squeeze_cursor = 0
        self._refill_block()
        return self

    def _refill_block(self):
        rate_bytes = self.rate_bits // 8
        out = bytearray()
        for lane in self.lanes[: (rate_bytes + 7) // 8]:
            out += lane.to_bytes(8, "little")
        self._block = bytes(out[:rate_bytes])

    def squeeze_bits(self, nbits):
        """Next nbits of output as an int (stream bit j = bit j of result)."""
        if self.phase != "squeezing":
            self.finalize()
        result = 0
        got = 0
        while got < nbits:
            if self.squeeze_cursor == self.rate_bits:
                self._permute()
                self.squeeze_cursor = 0
                self._refill_block()
            take = min(nbits - got, self.rate_bits - self.squeeze_cursor)
            byte0 = self.squeeze_cursor // 8
            byte1 = (self.squeeze_cursor + take + 7) // 8
            chunk = int.from_bytes(self._block[byte0:byte1], "little")
            chunk >>= self.squeeze_cursor - 8 * byte0
            result |= (chunk & ((1 << take) - 1)) << got
            self.squeeze_cursor += take
            got += take
        return result

    def squeeze(self, nbytes):
        return self.squeeze_bits(8 * nbytes).to_bytes(nbytes, "little")

    def next_word(self):
        """Shift out one 32-bit word, as the sampler datapath does."""
        self.words_out += 1
        return self.squeeze_bits(32)


def shake128(data=b""):
    return KeccakState(SHAKE128_RATE_BITS, DOMAIN_SHAKE).absorb(data)


def shake256(data=b""):
    return KeccakState(SHAKE256_RATE_BITS, DOMAIN_SHAKE).absorb(data)


def shake_squeeze(state, nbits):
    """Functional form of KeccakState.squeeze_bits."""
    return state.squeeze_bits(nbits)


def sha3_digest(data, bits=256):
    """SHA3-256 or SHA3-512 digest of a byte string."""
    if bits == 256:
        s = KeccakState(SHA3_256_RATE_BITS, DOMAIN_SHA3)
    elif bits == 512:
        s = KeccakState(SHA3_512_RATE_BITS, DOMAIN_SHA3)
    else:
        raise ValueError(f"unsupported SHA-3 digest size {bits}")
    s.absorb(data).finalize()
    return s.squeeze(bits // 8)


def sampler_prng(mode, seed, c0, c1):
    """Seeded sampler PRNG: absorbs seed (32 bytes) || c0 || c1 (LE16 each).

    This block layout is the emulator's canonical choice for deriving
    multiple polynomials from one seed register.
    """
    if len(seed) != 32:
        raise ValueError("sampler seed must be 32 bytes")
    if not (0 <= c0 < 1 << 16 and 0 <= c1 < 1 << 16):
        raise ValueError("sampler counters must be 16-bit")
    if mode == "SHAKE-128":
        state = shake128()
    elif mode == "SHAKE-256":
        state = shake256()
    else:
        raise ValueError(f"unknown PRNG mode {mode!r}")
    state.absorb(seed)
    state.absorb(c0.to_bytes(2, "little"))
    state.absorb(c1.to_bytes(2, "little"))
    return state.finalize()
