"""Constant-geometry NTT/INTT over the banked polynomial cache.

Transform dataflow (one butterfly per memory cycle):

  * DIT modes read coefficient pairs (2j, 2j+1) and write (j, j+n/2);
    input must be in bit-reversed order, output comes out in normal order.
  * DIF modes read (j, j+n/2) and write (2j, 2j+1); input is normal order,
    output is bit-reversed.

Pairing DIF for the forward transform with DIT for the inverse therefore
needs no explicit bit-reversal pass.  Stage s of lg n uses the twiddle
exponent

  DIT:  k = (j >> (lg n - s)) << (lg n - s)
  DIF:  k = (j >> (s - 1)) << (s - 1)

with omega^k for forward modes; inverse modes derive omega^-k from the
forward table as q - omega[n/2 - k] (and 1 for k = 0), so no inverse table
is stored.  Stored constants are exactly omega^j for j < n/2, psi^i and
n^-1 * psi^-i for i < n.

Stages ping-pong between the src and dst slot regions (the src slot is
consumed as scratch).  The final stage always lands in dst; when lg n is
even this makes the last stage read and write the same bank, which is
modelled as a read pass followed by a write pass in the memory-cycle
ledger.  The instruction cycle cost is accounted separately by the
machine as (n/2 + 1) * lg n.
"""

import functools
from dataclasses import dataclass

from . import modmath

DIF_NTT = "DIF_NTT"
DIT_NTT = "DIT_NTT"
DIF_INTT = "DIF_INTT"
DIT_INTT = "DIT_INTT"
TRANSFORM_MODES = (DIF_NTT, DIF_INTT, DIT_NTT, DIT_INTT)


class NttError(ValueError):
    """Configuration or operand error in the transform engine."""


@dataclass(frozen=True)
class LatticeConfig:
    """Active ring parameters: dimension, modulus and reduction profile."""

    n: int
    q: int
    profile: modmath.ModulusProfile

    def __post_init__(self):
        if self.n & (self.n - 1) or not 8 <= self.n <= 2048:
            raise NttError(f"ring dimension n={self.n} unsupported")
        if self.profile.q != self.q:
            raise NttError("profile modulus does not match q")

    @property
    def lg_n(self):
        return self.n.bit_length() - 1

    @classmethod
    def make(cls, n, q):
        return cls(n, q, modmath.ModulusProfile.for_modulus(q))


@dataclass(frozen=True)
class NttConstants:
    n: int
    q: int
    psi: int
    omega_powers: tuple     # omega^j, j in [0, n/2)
    psi_powers: tuple       # psi^i, i in [0, n)
    psi_inv_scaled: tuple   # n^-1 * psi^-i, i in [0, n)


def find_psi(n, q):
    """Smallest primitive 2n-th root of unity mod q (psi^n = -1)."""
    for c in range(2, q):
        if pow(c, n, q) == q - 1:
            return c
    raise NttError(f"no 2n-th primitive root: q={q} is not 1 mod {2 * n}")


@functools.lru_cache(maxsize=None)
def gen_constants(cfg):
    n, q = cfg.n, cfg.q
    if (q - 1) % (2 * n):
        raise NttError(f"q={q} is not 1 mod 2n={2 * n}; no NTT for n={n}")
    psi = find_psi(n, q)
    omega = psi * psi % q
    if pow(omega, n // 2, q) != q - 1:
        raise NttError("omega^(n/2) != -1; inconsistent root")
    omega_powers = [1] * (n // 2)
    for j in range(1, n // 2):
        omega_powers[j] = omega_powers[j - 1] * omega % q
    psi_powers = [1] * n
    for i in range(1, n):
        psi_powers[i] = psi_powers[i - 1] * psi % q
    psi_inv = pow(psi, q - 2, q)
    n_inv = pow(n, q - 2, q)
    psi_inv_scaled = [n_inv] * n
    for i in range(1, n):
        psi_inv_scaled[i] = psi_inv_scaled[i - 1] * psi_inv % q
    return NttConstants(n, q, psi, tuple(omega_powers),
                        tuple(psi_powers), tuple(psi_inv_scaled))


def butterfly(a, b, w, mode, profile):
    """Unified butterfly: CT computes (a+wb, a-wb), GS ((a+b), (a-b)w)."""
    q = profile.q
    if mode == "CT":
        t = modmath.mod_mul(w, b, profile)
        return modmath.mod_add(a, t, profile), modmath.mod_sub(a, t, profile)
    if mode == "GS":
        s = modmath.mod_add(a, b, profile)
        d = modmath.mod_sub(a, b, profile)
        return s, modmath.mod_mul(d, w, profile)
    raise NttError(f"unknown butterfly mode {mode!r}")


def bit_reverse(i, bits):
    r = 0
    for _ in range(bits):
        r = (r << 1) | (i & 1)
        i >>= 1
    return r


def _check_slots(cache, cfg, src, dst):
    if cache.n != cfg.n:
        raise NttError("cache configured for a different dimension")
    if cache.slot_bank(src) == cache.slot_bank(dst):
        raise NttError(
            f"transform src slot {src} and dst slot {dst} share a bank")


def ntt(cfg, consts, cache, dst, src, mode):
    """Run one constant-geometry transform from slot src into slot dst."""
    if mode not in TRANSFORM_MODES:
        raise NttError(f"unknown transform mode {mode!r}")
    _check_slots(cache, cfg, src, dst)
    n, lgn, q = cfg.n, cfg.lg_n, cfg.q
    half = n >> 1
    qmask = (n >> 2) - 1
    red = modmath.reducer(cfg.profile)
    omega = consts.omega_powers
    banks = cache.banks
    trace = cache.trace_enabled
    ledger = cache.ledger
    spb = cache.slots_per_bank
    dif = mode in (DIF_NTT, DIF_INTT)
    forward = mode in (DIF_NTT, DIT_NTT)

    def locate(slot):
        bank = 0 if slot < spb else 1
        return bank, (slot - bank * spb) * (n >> 2)

    def region(t):
        # ping-pong: even intermediate hops use the src region as scratch
        if t == 0:
            return src
        if t == lgn:
            return dst
        return dst if t & 1 else src

    cyc = cache.mem_cycle
    for s in range(1, lgn + 1):
        rslot, wslot = region(s - 1), region(s)
        rbank, rbase = locate(rslot)
        wbank, wbase = locate(wslot)
        rb = banks[rbank]
        wb = banks[wbank]
        split = rslot == wslot   # even-lg n final stage: read pass, write pass
        sh = (s - 1) if dif else (lgn - s)
        out0 = [0] * half if split else None
        out1 = [0] * half if split else None
        for g in range(half >> sh):
            k = g << sh
            if forward:
                w = omega[k]
            else:
                w = 1 if k == 0 else q - omega[half - k]
            for j in range(g << sh, (g + 1) << sh):
                m2 = (j >> (lgn - 2)) << 1
                lo = j & 1
                if dif:
                    rrow = rbase + (j >> 1)
                    v0 = rb[lo][rrow]
                    v1 = rb[2 + lo][rrow]
                    if trace:
                        ledger.append((cyc, rbank, lo, rrow, 0))
                        ledger.append((cyc, rbank, 2 + lo, rrow, 0))
                    u = v0 + v1
                    y0 = u - (q & -(u >= q))
                    d = v0 - v1
                    y1 = red((d + (q & -(d < 0))) * w)
                    wrow = wbase + (j & qmask)
                    if split:
                        out0[j] = y0
                        out1[j] = y1
                    else:
                        wb[m2][wrow] = y0
                        wb[m2 + 1][wrow] = y1
                        if trace:
                            ledger.append((cyc, wbank, m2, wrow, 1))
                            ledger.append((cyc, wbank, m2 + 1, wrow, 1))
                else:
                    rrow = rbase + (j & qmask)
                    v0 = rb[m2][rrow]
                    v1 = rb[m2 + 1][rrow]
                    if trace:
                        ledger.append((cyc, rbank, m2, rrow, 0))
                        ledger.append((cyc, rbank, m2 + 1, rrow, 0))
                    t = red(v1 * w)
                    u = v0 + t
                    y0 = u - (q & -(u >= q))
                    d = v0 - t
                    y1 = d + (q & -(d < 0))
                    wrow = wbase + (j >> 1)
                    if split:
                        out0[j] = y0
                        out1[j] = y1
                    else:
                        wb[lo][wrow] = y0
                        wb[2 + lo][wrow] = y1
                        if trace:
                            ledger.append((cyc, wbank, lo, wrow, 1))
                            ledger.append((cyc, wbank, 2 + lo, wrow, 1))
                cyc += 1
        if split:
            for j in range(half):
                if dif:
                    wrow = wbase + (j & qmask)
                    s0 = (j >> (lgn - 2)) << 1
                    s1 = s0 + 1
                else:
                    wrow = wbase + (j >> 1)
                    s0 = j & 1
                    s1 = 2 + s0
                wb[s0][wrow] = out0[j]
                wb[s1][wrow] = out1[j]
                if trace:
                    ledger.append((cyc, wbank, s0, wrow, 1))
                    ledger.append((cyc, wbank, s1, wrow, 1))
                cyc += 1
    cache.mem_cycle = cyc


def _scale_slot(cfg, cache, slot, table):
    """In-place coefficient-wise multiply by table[i].

    Pipelined like the hardware: memory cycle i reads coefficient i and
    writes back result i-1 (adjacent indices always map to different
    SRAMs), for n+1 cycles total.
    """
    if cache.n != cfg.n:
        raise NttError("cache configured for a different dimension")
    n, lgn = cfg.n, cfg.lg_n
    red = modmath.reducer(cfg.profile)
    bank = cache.slot_bank(slot)
    base = (slot - bank * cache.slots_per_bank) * (n >> 2)
    arr = cache.banks[bank]
    qmask = (n >> 2) - 1
    trace = cache.trace_enabled
    ledger = cache.ledger
    cyc = cache.mem_cycle
    prev_sram = prev_row = prev_val = None
    for i in range(n):
        sram = ((i >> (lgn - 1)) << 1) | (i & 1)
        row = base + ((i >> 1) & qmask)
        v = arr[sram][row]
        if trace:
            ledger.append((cyc, bank, sram, row, 0))
        if prev_sram is not None:
            arr[prev_sram][prev_row] = prev_val
            if trace:
                ledger.append((cyc, bank, prev_sram, prev_row, 1))
        prev_sram, prev_row, prev_val = sram, row, red(v * table[i])
        cyc += 1
    arr[prev_sram][prev_row] = prev_val
    if trace:
        ledger.append((cyc, bank, prev_sram, prev_row, 1))
    cache.mem_cycle = cyc + 1


def mult_psi(cfg, consts, cache, slot):
    """Scale slot coefficient-wise by psi^i (negacyclic pre-twist)."""
    _scale_slot(cfg, cache, slot, consts.psi_powers)


def mult_psi_inv(cfg, consts, cache, slot):
    """Scale slot coefficient-wise by n^-1 * psi^-i (post-twist + 1/n)."""
    _scale_slot(cfg, cache, slot, consts.psi_inv_scaled)


def export_constants(consts, path):
    """Write q, n and the three tables as a plain text file."""
    with open(path, "w") as fh:
        fh.write(f"{consts.q}\n{consts.n}\n")
        fh.write(" ".join(map(str, consts.omega_powers)) + "\n")
        fh.write(" ".join(map(str, consts.psi_powers)) + "\n")
        fh.write(" ".join(map(str, consts.psi_inv_scaled)) + "\n")


def import_constants(path):
    """Load a constants file and re-validate the root-of-unity invariants."""
    with open(path) as fh:
        q = int(fh.readline())
        n = int(fh.readline())
        omega_powers = tuple(int(v) for v in fh.readline().split())
        psi_powers = tuple(int(v) for v in fh.readline().split())
        psi_inv_scaled = tuple(int(v) for v in fh.readline().split())
    if len(omega_powers) != n // 2 or len(psi_powers) != n or len(psi_inv_scaled) != n:
        raise NttError("constants file has wrong table lengths")
    psi = psi_powers[1] if n > 1 else 1
    if pow(psi, n, q) != q - 1:
        raise NttError("psi^n != -1 in constants file")
    omega = psi * psi % q
    if n >= 4 and omega_powers[1] != omega:
        raise NttError("omega != psi^2 in constants file")
    for j in range(1, n // 2):
        if omega_powers[j] != omega_powers[j - 1] * omega % q:
            raise NttError(f"omega_powers[{j}] breaks the power chain")
    for i in range(n):
        if i and psi_powers[i] != psi_powers[i - 1] * psi % q:
            raise NttError(f"psi_powers[{i}] breaks the power chain")
        if psi_inv_scaled[i] * psi_powers[i] * n % q != 1:
            raise NttError(f"psi_inv_scaled[{i}] fails n * psi^i * entry = 1")
    return NttConstants(n, q, psi, omega_powers, psi_powers, psi_inv_scaled)
