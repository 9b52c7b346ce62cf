import os
import random

import pytest

from sapphire import nttcore, polycache
from sapphire.polycache import (
    CacheError, HazardFault, PAIR_ADJACENT, PAIR_STRIDED, PolynomialCache,
)
from conftest import DATA_DIR


def test_total_capacity():
    c = PolynomialCache()
    assert polycache.TOTAL_WORDS == 8192
    assert sum(len(s) for bank in c.banks for s in bank) == 8192


@pytest.mark.parametrize("n,slots", [(2048, 4), (1024, 8), (512, 16),
                                     (256, 32), (128, 64), (64, 128)])
def test_slot_partitions(n, slots):
    c = PolynomialCache().configure(n)
    assert c.slots == slots == 8192 // n
    assert c.slots_per_bank == slots // 2


def test_small_n_slot_cap():
    # demo dimensions below 64 cap at the 7-bit slot namespace
    c = PolynomialCache().configure(8)
    assert c.slots == 128
    assert c.slot_bank(63) == 0 and c.slot_bank(64) == 1


def test_bank_assignment_contiguous_halves():
    c = PolynomialCache().configure(1024)
    assert [c.slot_bank(s) for s in range(8)] == [0, 0, 0, 0, 1, 1, 1, 1]


def test_eight_point_mapping_examples():
    c = PolynomialCache().configure(8)
    locate = c._locate
    assert locate(0, 0)[1] == 0 and locate(0, 1)[1] == 1   # Mem0 / Mem1
    assert locate(0, 0)[1] == 0 and locate(0, 4)[1] == 2   # Mem0 / Mem2


def test_pair_kinds_always_distinct_srams():
    for n in (8, 64, 256, 1024):
        c = PolynomialCache().configure(n)
        for j in range(n // 2):
            b0, s0, _ = c._locate(0, 2 * j)
            b1, s1, _ = c._locate(0, 2 * j + 1)
            assert (b0, s0) != (b1, s1) and s0 != s1
            b0, s0, _ = c._locate(0, j)
            b1, s1, _ = c._locate(0, j + n // 2)
            assert s0 != s1


def test_pair_read_write_coherence():
    c = PolynomialCache().configure(64)
    c.write_pair(0, PAIR_ADJACENT, 5, 111, 222)
    assert c.read_pair(0, PAIR_ADJACENT, 5) == (111, 222)
    c.write_pair(0, PAIR_STRIDED, 7, 333, 444)
    assert c.slot_read(0, 7) == 333
    assert c.slot_read(0, 7 + 32) == 444


def test_write_then_read_round_trip():
    c = PolynomialCache().configure(256)
    rng = random.Random(1)
    values = [rng.randrange(1 << 24) for _ in range(256)]
    c.load_slot(3, values)
    assert c.dump_slot(3) == values


def test_slot_clear():
    c = PolynomialCache().configure(128)
    c.load_slot(2, list(range(128)))
    c.slot_clear(2)
    assert c.dump_slot(2) == [0] * 128


def test_same_cycle_same_sram_is_hazard():
    c = PolynomialCache().configure(64)
    cycle = c.next_cycle()
    c.slot_read(0, 0, record=True)    # separate cycle: fine
    c._access(cycle, 0, 0, 0, polycache.READ)
    with pytest.raises(HazardFault):
        c._access(cycle, 0, 0, 5, polycache.WRITE)


def test_cross_bank_same_cycle_ok():
    c = PolynomialCache().configure(64)
    cycle = c.next_cycle()
    c._access(cycle, 0, 0, 0, polycache.READ)
    c._access(cycle, 1, 0, 0, polycache.WRITE)   # other bank: no conflict


def test_range_errors():
    c = PolynomialCache().configure(256)
    with pytest.raises(CacheError):
        c.slot_read(32, 0)
    with pytest.raises(CacheError):
        c.slot_read(0, 256)
    with pytest.raises(CacheError):
        c.slot_write(0, 0, 1 << 24)
    with pytest.raises(CacheError):
        c.configure(4096)
    with pytest.raises(CacheError):
        PolynomialCache().slot_read(0, 0)


@pytest.mark.parametrize("n", [8, 64, 128, 256, 512, 1024, 2048])
@pytest.mark.parametrize("mode", nttcore.TRANSFORM_MODES)
def test_hazard_freedom_full_transforms(n, mode):
    q = {8: 257, 64: 7681, 128: 7681, 256: 7681,
         512: 12289, 1024: 12289, 2048: 12289}[n]
    cfg = nttcore.LatticeConfig.make(n, q)
    consts = nttcore.gen_constants(cfg)
    c = PolynomialCache().configure(n)
    c.trace_enabled = True
    rng = random.Random(n)
    c.load_slot(0, [rng.randrange(q) for _ in range(n)])
    nttcore.ntt(cfg, consts, c, c.slots_per_bank, 0, mode)
    assert c.audit_hazards() > 0


def test_golden_traces_frozen():
    cfg = nttcore.LatticeConfig.make(8, 257)
    consts = nttcore.gen_constants(cfg)
    for mode, fname in ((nttcore.DIT_NTT, "golden_trace_8pt_dit.txt"),
                        (nttcore.DIF_NTT, "golden_trace_8pt_dif.txt")):
        c = PolynomialCache().configure(8)
        c.trace_enabled = True
        c.load_slot(0, list(range(1, 9)))
        nttcore.ntt(cfg, consts, c, 64, 0, mode)
        golden = open(os.path.join(DATA_DIR, fname)).read().splitlines()
        assert c.trace_lines() == golden


def test_trace_is_data_independent():
    cfg = nttcore.LatticeConfig.make(64, 7681)
    consts = nttcore.gen_constants(cfg)
    traces = []
    for seed in (1, 2):
        c = PolynomialCache().configure(64)
        c.trace_enabled = True
        rng = random.Random(seed)
        c.load_slot(0, [rng.randrange(7681) for _ in range(64)])
        nttcore.ntt(cfg, consts, c, c.slots_per_bank, 0, nttcore.DIF_NTT)
        traces.append(c.trace_lines())
    assert traces[0] == traces[1]


def test_mult_psi_pipelined_schedule_hazard_free():
    cfg = nttcore.LatticeConfig.make(64, 7681)
    consts = nttcore.gen_constants(cfg)
    c = PolynomialCache().configure(64)
    c.trace_enabled = True
    c.load_slot(0, list(range(64)))
    nttcore.mult_psi(cfg, consts, c, 0)
    count = c.audit_hazards()
    assert count == 2 * 64   # one read and one write per coefficient
    cycles = {e[0] for e in c.ledger}
    assert len(cycles) == 65  # n + 1 memory cycles
