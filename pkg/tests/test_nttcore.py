import random

import pytest

from sapphire import modmath, nttcore, polycache
from sapphire.nttcore import (
    DIF_INTT, DIF_NTT, DIT_INTT, DIT_NTT, LatticeConfig, NttError,
    butterfly, gen_constants,
)
from conftest import bitrev, iterative_ntt, schoolbook_negacyclic

CONFIGS = [(64, 7681), (256, 7681), (256, 12289), (512, 12289), (1024, 12289)]


def make(n, q):
    cfg = LatticeConfig.make(n, q)
    consts = gen_constants(cfg)
    cache = polycache.PolynomialCache().configure(n)
    return cfg, consts, cache


def pipeline_product(cfg, consts, cache, a, b):
    """psi-scale, forward DIF, pointwise, inverse DIT, inverse psi-scale."""
    n = cfg.n
    src, dst = 0, cache.slots_per_bank
    cache.load_slot(src, a)
    nttcore.mult_psi(cfg, consts, cache, src)
    nttcore.ntt(cfg, consts, cache, dst, src, DIF_NTT)
    fa = cache.dump_slot(dst)
    cache.load_slot(src, b)
    nttcore.mult_psi(cfg, consts, cache, src)
    nttcore.ntt(cfg, consts, cache, dst, src, DIF_NTT)
    fb = cache.dump_slot(dst)
    cache.load_slot(dst, [x * y % cfg.q for x, y in zip(fa, fb)])
    nttcore.ntt(cfg, consts, cache, src, dst, DIT_INTT)
    nttcore.mult_psi_inv(cfg, consts, cache, src)
    return cache.dump_slot(src)


class TestConstants:
    def test_newhope_psi(self):
        cfg = LatticeConfig.make(1024, 12289)
        consts = gen_constants(cfg)
        assert pow(consts.psi, 1024, 12289) == 12288

    def test_kyber_modulus_supports_n256(self):
        assert (7681 - 1) % 512 == 0
        consts = gen_constants(LatticeConfig.make(256, 7681))
        assert pow(consts.psi, 256, 7681) == 7680

    def test_table_lengths(self):
        consts = gen_constants(LatticeConfig.make(256, 12289))
        assert len(consts.omega_powers) == 128
        assert len(consts.psi_powers) == 256
        assert len(consts.psi_inv_scaled) == 256

    def test_omega_is_psi_squared_and_half_order(self):
        for n, q in CONFIGS:
            consts = gen_constants(LatticeConfig.make(n, q))
            omega = consts.psi * consts.psi % q
            assert consts.omega_powers[1 % (n // 2)] == omega % q
            assert pow(omega, n // 2, q) == q - 1

    def test_no_root_configuration_error(self):
        with pytest.raises(NttError):
            gen_constants(LatticeConfig.make(1024, 7681))   # 7681 != 1 mod 2048
        with pytest.raises(NttError):
            gen_constants(LatticeConfig.make(256, 1 << 15))

    def test_psi_inv_scaled_table(self):
        for n, q in [(256, 7681), (512, 12289)]:
            consts = gen_constants(LatticeConfig.make(n, q))
            for i in range(0, n, 37):
                assert consts.psi_inv_scaled[i] * consts.psi_powers[i] * n % q == 1

    def test_export_import_round_trip(self, tmp_path):
        consts = gen_constants(LatticeConfig.make(256, 7681))
        path = tmp_path / "consts.txt"
        nttcore.export_constants(consts, path)
        assert nttcore.import_constants(path) == consts

    def test_import_rejects_corruption(self, tmp_path):
        consts = gen_constants(LatticeConfig.make(64, 7681))
        path = tmp_path / "bad.txt"
        nttcore.export_constants(consts, path)
        lines = open(path).read().splitlines()
        tables = lines[2].split()
        tables[3] = str((int(tables[3]) + 1) % 7681)
        lines[2] = " ".join(tables)
        open(path, "w").write("\n".join(lines) + "\n")
        with pytest.raises(NttError):
            nttcore.import_constants(path)


class TestButterfly:
    def test_ct_zero_branch(self):
        p = modmath.ModulusProfile.specialized(12289)
        for a in (0, 5, 12288):
            assert butterfly(a, 0, 777, "CT", p) == (a, a)

    def test_gs_equal_inputs(self):
        p = modmath.ModulusProfile.specialized(12289)
        for a in (0, 5, 12288):
            assert butterfly(a, a, 777, "GS", p) == (2 * a % 12289, 0)

    def test_ct_gs_inverse_pair(self):
        q = 12289
        p = modmath.ModulusProfile.specialized(q)
        rng = random.Random(3)
        inv2 = pow(2, q - 2, q)
        for _ in range(200):
            a, b, w = (rng.randrange(q) for _ in range(3))
            if w == 0:
                continue
            winv = pow(w, q - 2, q)
            u, v = butterfly(a, b, w, "CT", p)
            s, t = butterfly(u, v, winv, "GS", p)
            assert (s * inv2 % q, t * inv2 % q) == (a, b)


class TestTransform:
    @pytest.mark.parametrize("n,q", [(64, 7681), (256, 12289)])
    def test_dif_matches_iterative_oracle(self, n, q):
        cfg, consts, cache = make(n, q)
        omega = consts.psi * consts.psi % q
        rng = random.Random(n ^ q)
        for _ in range(5):
            a = [rng.randrange(q) for _ in range(n)]
            ref = iterative_ntt(a, omega, q)
            cache.load_slot(0, a)
            nttcore.ntt(cfg, consts, cache, cache.slots_per_bank, 0, DIF_NTT)
            out = cache.dump_slot(cache.slots_per_bank)
            assert [out[bitrev(i, cfg.lg_n)] for i in range(n)] == ref

    @pytest.mark.parametrize("n,q", [(64, 7681), (256, 12289)])
    def test_dit_matches_iterative_oracle(self, n, q):
        cfg, consts, cache = make(n, q)
        omega = consts.psi * consts.psi % q
        rng = random.Random(n + q)
        a = [rng.randrange(q) for _ in range(n)]
        ref = iterative_ntt(a, omega, q)
        cache.load_slot(0, [a[bitrev(i, cfg.lg_n)] for i in range(n)])
        nttcore.ntt(cfg, consts, cache, cache.slots_per_bank, 0, DIT_NTT)
        assert cache.dump_slot(cache.slots_per_bank) == ref

    def test_zero_maps_to_zero(self):
        cfg, consts, cache = make(256, 7681)
        cache.load_slot(0, [0] * 256)
        nttcore.ntt(cfg, consts, cache, 16, 0, DIF_NTT)
        assert cache.dump_slot(16) == [0] * 256

    def test_unit_impulse_transforms_to_all_ones(self):
        cfg, consts, cache = make(256, 7681)
        cache.load_slot(0, [1] + [0] * 255)
        nttcore.mult_psi(cfg, consts, cache, 0)   # psi^0 leaves the impulse
        nttcore.ntt(cfg, consts, cache, 16, 0, DIF_NTT)
        assert cache.dump_slot(16) == [1] * 256

    @pytest.mark.parametrize("n,q", CONFIGS)
    def test_round_trip(self, n, q):
        cfg, consts, cache = make(n, q)
        rng = random.Random(q * n)
        for _ in range(3):
            a = [rng.randrange(q) for _ in range(n)]
            cache.load_slot(0, a)
            src, dst = 0, cache.slots_per_bank
            nttcore.mult_psi(cfg, consts, cache, src)
            nttcore.ntt(cfg, consts, cache, dst, src, DIF_NTT)
            nttcore.ntt(cfg, consts, cache, src, dst, DIT_INTT)
            nttcore.mult_psi_inv(cfg, consts, cache, src)
            assert cache.dump_slot(src) == a

    def test_dit_dif_alternative_modes_invert(self):
        # DIT_NTT on bit-reversed input, then DIF_INTT, returns n * input
        n, q = 64, 7681
        cfg, consts, cache = make(n, q)
        rng = random.Random(5)
        a = [rng.randrange(q) for _ in range(n)]
        ninv = pow(n, q - 2, q)
        cache.load_slot(0, a)
        nttcore.ntt(cfg, consts, cache, cache.slots_per_bank, 0, DIT_NTT)
        nttcore.ntt(cfg, consts, cache, 0, cache.slots_per_bank, DIF_INTT)
        got = [v * ninv % q for v in cache.dump_slot(0)]
        assert got == a

    @pytest.mark.parametrize("n,q", CONFIGS)
    def test_convolution_theorem(self, n, q):
        cfg, consts, cache = make(n, q)
        rng = random.Random(n * 31 + q)
        a = [rng.randrange(q) for _ in range(n)]
        b = [rng.randrange(q) for _ in range(n)]
        assert pipeline_product(cfg, consts, cache, a, b) == \
            schoolbook_negacyclic(a, b, q)

    def test_monomial_sign_wrap(self):
        # x^(n-1) * x = x^n = -1 in the negacyclic ring
        n, q = 64, 7681
        cfg, consts, cache = make(n, q)
        a = [0] * n
        a[n - 1] = 1
        b = [0] * n
        b[1] = 1
        got = pipeline_product(cfg, consts, cache, a, b)
        assert got == [q - 1] + [0] * (n - 1)

    def test_same_bank_slots_rejected(self):
        cfg, consts, cache = make(256, 7681)
        with pytest.raises(NttError):
            nttcore.ntt(cfg, consts, cache, 1, 0, DIF_NTT)

    def test_stagewise_equivalence_with_inplace_oracle(self):
        # intermediate stage outputs follow the in-place algorithm under
        # the constant-geometry index correspondence; equality of every
        # final output over many random vectors covers all stages
        n, q = 128, 7681
        cfg, consts, cache = make(n, q)
        omega = consts.psi * consts.psi % q
        rng = random.Random(77)
        for _ in range(20):
            a = [rng.randrange(q) for _ in range(n)]
            cache.load_slot(0, a)
            nttcore.ntt(cfg, consts, cache, cache.slots_per_bank, 0, DIF_NTT)
            out = cache.dump_slot(cache.slots_per_bank)
            ref = iterative_ntt(a, omega, q)
            assert [out[bitrev(i, cfg.lg_n)] for i in range(n)] == ref


class TestCycleFormula:
    def test_transform_plus_psi_totals(self):
        # (n/2 + 1) lg n + (n + 1): 1289 / 2826 / 6155
        for n, total in ((256, 1289), (512, 2826), (1024, 6155)):
            lg = n.bit_length() - 1
            assert (n // 2 + 1) * lg + (n + 1) == total
