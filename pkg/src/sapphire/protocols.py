"""Protocol drivers: CPA-PKE over Ring-LWE, a Module-LWE kernel and tiled
LWE matrix kernels, all executed as assembled programs on the emulated
processor, plus the host-side oracles used to validate them.

The drivers move data through the memory-mapped host interface, run the
checked-in programs from ``programs/`` (templates are instantiated with
the active dimension and slot numbers) and post-process results exactly
the way the protocol host processor would.
"""

import secrets
from dataclasses import dataclass
from importlib import resources

from . import isa, keccak, nttcore, sampler

NEWHOPE_Q = 12289
KYBER_Q = 7681
KYBER_N = 256


def _program_text(name):
    return resources.files("sapphire").joinpath(f"programs/{name}").read_text()


def load_program(name, **params):
    text = _program_text(name)
    if params:
        text = text.format(**params)
    return isa.assemble(text)


# --------------------------------------------------------------- messages

def encode_message(msg, n, q=NEWHOPE_Q):
    """Spread each of the 256 message bits over n/256 coefficients.

    Bit i drives coefficients i + 256*t for t < n/256, set to 0 or
    floor(q/2).
    """
    if len(msg) != 32:
        raise ValueError("message must be 32 bytes")
    if n % 256:
        raise ValueError("ring dimension must be a multiple of 256")
    half = q // 2
    coeffs = [0] * n
    for i in range(256):
        if (msg[i >> 3] >> (i & 7)) & 1:
            for t in range(n // 256):
                coeffs[i + 256 * t] = half
    return coeffs


def decode_message(coeffs, n, q=NEWHOPE_Q):
    """Threshold-decode: bit = 1 iff the group's summed distance from
    floor(q/2) stays at or below (n/256) * q/4 (ties decode to 1)."""
    half = q // 2
    threshold = ((n // 256) * q) // 4
    out = bytearray(32)
    for i in range(256):
        total = sum(abs(coeffs[i + 256 * t] - half) for t in range(n // 256))
        if total <= threshold:
            out[i >> 3] |= 1 << (i & 7)
    return bytes(out)


def vector_to_hex(values):
    """Interchange form for keys/ciphertexts: 3 LE bytes per coefficient."""
    out = bytearray()
    for v in values:
        if not 0 <= v < (1 << 24):
            raise ValueError(f"coefficient {v} does not fit 24 bits")
        out += v.to_bytes(3, "little")
    return out.hex()


def vector_from_hex(text):
    raw = bytes.fromhex(text.strip())
    if len(raw) % 3:
        raise ValueError("hex vector length is not a multiple of 3 bytes")
    return [int.from_bytes(raw[i:i + 3], "little") for i in range(0, len(raw), 3)]


# ----------------------------------------------------------------- NewHope

@dataclass
class CpaKeyPair:
    n: int
    a_hat: list
    b_hat: list
    s_hat: list


@dataclass
class CpaCiphertext:
    n: int
    u_hat: list
    v_prime: list


class DriverError(RuntimeError):
    pass


def _right_bank(n):
    return (8192 // n) // 2


def _newhope_check(n):
    if n not in (512, 1024):
        raise DriverError(f"CPA-PKE supports n in (512, 1024), got {n}")


def newhope_keygen(m, seed, n=1024, k=8):
    """Run the keygen program; seed expands to (public, noise) seeds."""
    _newhope_check(n)
    expanded = keccak.shake256(seed).finalize().squeeze(64)
    m.write_seed("r0", expanded[:32])
    m.write_seed("r1", expanded[32:])
    rb = _right_bank(n)
    m.load_program(load_program("newhope_keygen.sph", n=n, k=k,
                                r0=rb, r1=rb + 1, r2=rb + 2))
    m.run()
    return CpaKeyPair(n, m.read_slot(0), m.read_slot(rb + 2), m.read_slot(rb))


def newhope_encrypt(m, pk, coin, msg, k=8):
    """Encrypt a 32-byte message under pk using coin as the noise seed."""
    n = pk.n
    _newhope_check(n)
    rb = _right_bank(n)
    m.configure(n, NEWHOPE_Q)
    m.load_program(load_program("newhope_encrypt.sph", n=n, k=k,
                                r0=rb, r1=rb + 1, r2=rb + 2))
    m.write_seed("r1", coin)
    m.write_slot(0, pk.a_hat)
    m.write_slot(1, pk.b_hat)
    m.write_slot(2, encode_message(msg, n))
    m.run()
    return CpaCiphertext(n, m.read_slot(0), m.read_slot(rb + 2))


def newhope_decrypt(m, sk, ct):
    n = ct.n
    _newhope_check(n)
    rb = _right_bank(n)
    m.configure(n, NEWHOPE_Q)
    m.load_program(load_program("newhope_decrypt.sph", n=n, r0=rb))
    m.write_slot(0, ct.u_hat)
    m.write_slot(1, sk.s_hat)
    m.write_slot(2, ct.v_prime)
    m.run()
    return decode_message(m.read_slot(rb), n)


def add_ciphertexts(m, ct_a, ct_b):
    """(u_a + u_b, v'_a + v'_b): the additive-homomorphism step."""
    n = ct_a.n
    m.configure(n, NEWHOPE_Q)
    m.load_program(load_program("ciphertext_add.sph", n=n))
    m.write_slot(0, ct_a.u_hat)
    m.write_slot(1, ct_b.u_hat)
    m.write_slot(2, ct_a.v_prime)
    m.write_slot(3, ct_b.v_prime)
    m.run()
    return CpaCiphertext(n, m.read_slot(0), m.read_slot(2))


def masked_decrypt(m, keypair, ct, rng=secrets.token_bytes):
    """First-order masked decryption via ciphertext re-randomization.

    Decrypts ct + Enc(mu_r) for a fresh random mask message mu_r, then
    unmasks the result with XOR.  Needs the public half of the key pair
    to encrypt the mask.
    """
    mask_msg = rng(32)
    mask_coin = rng(32)
    ct_r = newhope_encrypt(m, keypair, mask_coin, mask_msg)
    masked = add_ciphertexts(m, ct, ct_r)
    mu_m = newhope_decrypt(m, keypair, masked)
    return bytes(a ^ b for a, b in zip(mu_m, mask_msg))


# ------------------------------------------------------------ host oracles

def negacyclic_mul(a, b, q):
    """Schoolbook product in Z_q[x]/(x^n + 1)."""
    n = len(a)
    out = [0] * n
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            k = i + j
            if k >= n:
                out[k - n] -= ai * bj
            else:
                out[k] += ai * bj
    return [v % q for v in out]


def intt_direct(hat_bitrev, n, q):
    """Inverse negacyclic transform by direct summation (O(n^2) oracle).

    Input is in the bit-reversed order the forward transform leaves in
    the polynomial cache.
    """
    cfg = nttcore.LatticeConfig.make(n, q)
    consts = nttcore.gen_constants(cfg)
    lgn = cfg.lg_n
    nat = [hat_bitrev[nttcore.bit_reverse(u, lgn)] for u in range(n)]
    omega = consts.psi * consts.psi % q
    winv = pow(omega, q - 2, q)
    wpow = [1] * n
    for i in range(1, n):
        wpow[i] = wpow[i - 1] * winv % q
    out = []
    for t in range(n):
        acc = 0
        for u in range(n):
            acc += nat[u] * wpow[(t * u) % n]
        out.append(acc % q * consts.psi_inv_scaled[t] % q)
    return out


def _centered(v, q):
    return v - q if v > q // 2 else v


def kyber_as_plus_e(m, seed_a, seed_s):
    """Run the checked-in 2x2 Module-LWE A*s+e program; returns both rows."""
    m.write_seed("r0", seed_a)
    m.write_seed("r1", seed_s)
    m.load_program(load_program("kyber512_as_plus_e.sph"))
    m.run()
    return m.read_slot(24), m.read_slot(25)


def kyber_as_plus_e_oracle(seed_a, seed_s):
    """NTT-free recomputation: direct inverse transforms plus schoolbook
    negacyclic matrix-vector arithmetic, O(k^2 n^2)."""
    n, q = KYBER_N, KYBER_Q
    plan = sampler.RejectionPlan.for_modulus(q)
    s = [sampler.bin_sample(n, 3, q, keccak.sampler_prng("SHAKE-256", seed_s, 0, c1))
         for c1 in (0, 1)]
    e = [sampler.bin_sample(n, 3, q, keccak.sampler_prng("SHAKE-256", seed_s, 0, c1))
         for c1 in (2, 3)]
    rows = []
    for i in range(2):
        row = []
        for j in range(2):
            hat = sampler.rej_sample(
                n, plan, keccak.sampler_prng("SHAKE-128", seed_a, j, i))
            row.append(intt_direct(hat, n, q))
        rows.append(row)
    out = []
    for i in range(2):
        acc = [0] * n
        for j in range(2):
            prod = negacyclic_mul(rows[i][j], s[j], q)
            acc = [(x + y) % q for x, y in zip(acc, prod)]
        out.append([(x + y) % q for x, y in zip(acc, e[i])])
    return out[0], out[1]


# -------------------------------------------------------------------- Frodo

def tile_plan(n):
    """Row/column tiling of the n x n matrix into power-of-two arrays.

    Returns (array_length, zeroed_tail) segments: 640 splits into 512+128,
    976 pads to 1024 with 48 zeroed, 1344 splits into 1024+512 with the
    last 192 of the 512-array zeroed.
    """
    plans = {
        640: ((512, 0), (128, 0)),
        976: ((1024, 48),),
        1344: ((1024, 0), (512, 192)),
    }
    if n not in plans:
        raise DriverError(f"no tiling defined for n={n}")
    return plans[n]


@dataclass(frozen=True)
class FrodoProfile:
    name: str
    n: int                 # logical matrix dimension
    q: int
    tiles: tuple           # ((array_len, zeroed_tail), ...)
    two_cols: bool         # generate S two columns/rows at a time
    nbar: int
    sigma: float
    s: int                 # CDT support bound
    r: int                 # CDT precision

    @property
    def chunk(self):
        return 64


FRODO_PROFILES = {
    "frodo640": FrodoProfile("frodo640", 640, 1 << 15, tile_plan(640),
                             True, 8, 2.8, 12, 16),
    "frodo976": FrodoProfile("frodo976", 976, 1 << 16, tile_plan(976),
                             True, 8, 2.3, 10, 16),
    "frodo1344": FrodoProfile("frodo1344", 1344, 1 << 16, tile_plan(1344),
                              False, 8, 1.4, 6, 16),
    # desk-scale mirrors of the three tiling shapes
    "desk640": FrodoProfile("desk640", 192, 1 << 15, ((128, 0), (64, 0)),
                            True, 8, 2.8, 12, 16),
    "desk976": FrodoProfile("desk976", 120, 1 << 15, ((128, 8),),
                            True, 8, 2.3, 10, 16),
    "desk1344": FrodoProfile("desk1344", 176, 1 << 15, ((128, 0), (64, 16)),
                             False, 8, 1.4, 6, 16),
}

# counter-space bases on the noise seed r1 (the public seed r0 uses
# (c0 = row, c1 = tile) for just-in-time rows of A)
_S_COL_BASE = 0       # c0 = tile, c1 = column
_SP_CHUNK_BASE = 20   # c0 = 20 + chunk, c1 = row
_E_BASE = 40          # c0 = 40 (E) / 41 (E'), c1 = column / row


def _load_cdt(m, profile):
    m.load_cdt(sampler.CdtTable.from_sigma(profile.sigma, profile.s, profile.r))


def _frodo_cdt_host(profile, seed, c0, c1, count):
    table = sampler.CdtTable.from_sigma(profile.sigma, profile.s, profile.r)
    prng = keccak.sampler_prng("SHAKE-256", seed, c0, c1)
    return sampler.cdt_sample(count, table, prng, q=profile.q)


def _second_col_lines(profile, col):
    if not profile.two_cols:
        return ""
    return (f"c1 = {col + 1}\n"
            f"cdt_sample (prng = SHAKE-256, seed = r1, c0 = c0, c1 = c1, "
            f"r = {profile.r}, s = {profile.s}, poly = 1)\n")


def frodo_as_plus_e(m, profile, seed_a, seed_s):
    """Tiled A*S + E on the machine; returns the n x nbar result matrix."""
    if isinstance(profile, str):
        profile = FRODO_PROFILES[profile]
    n, q, nbar = profile.n, profile.q, profile.nbar
    _load_cdt(m, profile)
    m.write_seed("r0", seed_a)
    m.write_seed("r1", seed_s)
    acc = [[0] * nbar for _ in range(n)]
    step = 2 if profile.two_cols else 1
    for tile_idx, (tile_n, pad) in enumerate(profile.tiles):
        real = tile_n - pad
        for col in range(0, nbar, step):
            m.load_program(load_program(
                "frodo_s_cols.sph", tile_n=tile_n, q=q,
                r=profile.r, s=profile.s,
                c0val=_S_COL_BASE + tile_idx, col0=col,
                second_col=_second_col_lines(profile, col)))
            m.run()
            if pad:
                for slot in range(step):
                    seg = m.read_slot(slot)
                    m.write_slot(slot, seg[:real] + [0] * pad)
            copy_row = ("poly_copy (poly_dst = 5, poly_src = 4)"
                        if profile.two_cols else "")
            second_mac = ""
            if profile.two_cols:
                second_mac = ("poly_op (op = MUL, poly_dst = 5, poly_src = 1)\n"
                              "reg = sum_elems (poly = 5)\n"
                              "(poly = 9)[c1] = reg")
            for row_base in range(0, n, profile.chunk):
                chunk = min(profile.chunk, n - row_base)
                m.load_program(load_program(
                    "frodo_as_rows.sph", tile_n=tile_n, q=q,
                    row_base=row_base, tile=tile_idx, chunk=chunk,
                    copy_row=copy_row, second_mac=second_mac))
                m.run()
                r0 = m.read_slot(8)[:chunk]
                for t in range(chunk):
                    acc[row_base + t][col] += r0[t]
                if profile.two_cols:
                    r1 = m.read_slot(9)[:chunk]
                    for t in range(chunk):
                        acc[row_base + t][col + 1] += r1[t]
    for col in range(nbar):
        e = _frodo_cdt_host(profile, seed_s, _E_BASE, col, n)
        for i in range(n):
            acc[i][col] = (acc[i][col] + e[i]) % q
    return acc


def frodo_sa_plus_e(m, profile, seed_a, seed_s):
    """Tiled S'*A + E' on the machine; returns the nbar x n result matrix."""
    if isinstance(profile, str):
        profile = FRODO_PROFILES[profile]
    n, q, nbar = profile.n, profile.q, profile.nbar
    _load_cdt(m, profile)
    m.write_seed("r0", seed_a)
    m.write_seed("r1", seed_s)
    out = [[0] * n for _ in range(nbar)]
    step = 2 if profile.two_cols else 1
    offset = 0
    for tile_idx, (tile_n, pad) in enumerate(profile.tiles):
        real = tile_n - pad
        for row in range(0, nbar, step):
            second_mac = ""
            if profile.two_cols:
                second_mac = ("reg = (poly = 1)[c1]\n"
                              "poly_op (op = CONST_MUL, poly_dst = 3, poly_src = 4)\n"
                              "poly_op (op = ADD, poly_dst = 7, poly_src = 3)")
            for chunk_idx, base in enumerate(range(0, n, profile.chunk)):
                chunk = min(profile.chunk, n - base)
                m.load_program(load_program(
                    "frodo_s_cols.sph", tile_n=tile_n, q=q,
                    r=profile.r, s=profile.s,
                    c0val=_SP_CHUNK_BASE + chunk_idx, col0=row,
                    second_col=_second_col_lines(profile, row)))
                m.run()
                init_acc = "init (poly = 6)\ninit (poly = 7)" if base == 0 else ""
                m.load_program(load_program(
                    "frodo_sa_chunk.sph", tile_n=tile_n, q=q,
                    row_base=base, tile=tile_idx, chunk=chunk,
                    second_mac=second_mac, init_acc=init_acc))
                m.run()
            seg = m.read_slot(6)[:real]
            out[row][offset:offset + real] = seg
            if profile.two_cols:
                seg = m.read_slot(7)[:real]
                out[row + 1][offset:offset + real] = seg
        offset += real
    for row in range(nbar):
        e = _frodo_cdt_host(profile, seed_s, _E_BASE + 1, row, n)
        for i in range(n):
            out[row][i] = (out[row][i] + e[i]) % q
    return out


def _frodo_rebuild_a(profile, seed_a):
    """Row-major A exactly as the just-in-time generation produces it."""
    plan = sampler.RejectionPlan.for_modulus(profile.q)
    rows = []
    for i in range(profile.n):
        row = []
        for tile_idx, (tile_n, pad) in enumerate(profile.tiles):
            prng = keccak.sampler_prng("SHAKE-128", seed_a, i, tile_idx)
            row.extend(sampler.rej_sample(tile_n, plan, prng)[:tile_n - pad])
        rows.append(row)
    return rows


def _frodo_rebuild_s(profile, seed_s):
    """Column-major S (n x nbar), concatenating the per-tile segments."""
    cols = []
    for col in range(profile.nbar):
        column = []
        for tile_idx, (tile_n, pad) in enumerate(profile.tiles):
            seg = _frodo_cdt_host(profile, seed_s, _S_COL_BASE + tile_idx,
                                  col, tile_n)
            column.extend(seg[:tile_n - pad])
        cols.append(column)
    return cols


def _frodo_rebuild_sp(profile, seed_s):
    """Row-major S' (nbar x n) from the chunked generation."""
    rows = []
    for row in range(profile.nbar):
        values = []
        for chunk_idx, base in enumerate(range(0, profile.n, profile.chunk)):
            chunk = min(profile.chunk, profile.n - base)
            seg = _frodo_cdt_host(profile, seed_s,
                                  _SP_CHUNK_BASE + chunk_idx, row, chunk)
            values.extend(seg)
        rows.append(values)
    return rows


def frodo_as_plus_e_oracle(profile, seed_a, seed_s):
    """Dense matrix product oracle for the tiled A*S + E kernel."""
    if isinstance(profile, str):
        profile = FRODO_PROFILES[profile]
    n, q, nbar = profile.n, profile.q, profile.nbar
    a = _frodo_rebuild_a(profile, seed_a)
    s = _frodo_rebuild_s(profile, seed_s)
    out = []
    for i in range(n):
        arow = a[i]
        row = []
        for j in range(nbar):
            sj = s[j]
            row.append(sum(x * y for x, y in zip(arow, sj)) % q)
        out.append(row)
    for col in range(nbar):
        e = _frodo_cdt_host(profile, seed_s, _E_BASE, col, n)
        for i in range(n):
            out[i][col] = (out[i][col] + e[i]) % q
    return out


def frodo_sa_plus_e_oracle(profile, seed_a, seed_s):
    if isinstance(profile, str):
        profile = FRODO_PROFILES[profile]
    n, q, nbar = profile.n, profile.q, profile.nbar
    a = _frodo_rebuild_a(profile, seed_a)
    sp = _frodo_rebuild_sp(profile, seed_s)
    out = []
    for row in range(nbar):
        acc = [0] * n
        srow = sp[row]
        for i in range(n):
            si = srow[i]
            if si == 0:
                continue
            arow = a[i]
            for t in range(n):
                acc[t] += si * arow[t]
        e = _frodo_cdt_host(profile, seed_s, _E_BASE + 1, row, n)
        out.append([(x + y) % q for x, y in zip(acc, e)])
    return out
