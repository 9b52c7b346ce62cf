"""Two-bank polynomial cache built from single-port SRAM models.

Each bank is four 1024 x 24-bit single-port SRAMs; together the banks hold
8192 coefficients.  A coefficient index i inside a slot maps to

    sram = 2 * MSB(i) + LSB(i)        row = middle bits of i

so that both butterfly pair shapes, (2j, 2j+1) and (j, j+n/2), always land
in two different SRAMs.  Every access is stamped with a memory-cycle id;
within one cycle each (bank, sram) may be touched at most once, and the
optional ledger records the full schedule for trace diffing.

Slot-to-bank assignment: slots [0, slots_per_bank) live in the left bank,
the rest in the right bank.
"""

SRAM_ROWS = 1024
SRAMS_PER_BANK = 4
TOTAL_WORDS = 2 * SRAMS_PER_BANK * SRAM_ROWS   # 8192
MAX_SLOTS = 128

READ = 0
WRITE = 1

PAIR_ADJACENT = "adjacent"   # (2j, 2j+1)
PAIR_STRIDED = "strided"     # (j, j+n/2)


class HazardFault(RuntimeError):
    """Two same-cycle accesses hit the same single-port SRAM."""


class CacheError(ValueError):
    """Slot/index out of range or unsupported configuration."""


class PolynomialCache:
    def __init__(self):
        self.banks = [[[0] * SRAM_ROWS for _ in range(SRAMS_PER_BANK)]
                      for _ in range(2)]
        self.n = None
        self.lg_n = 0
        self.slots = 0
        self.slots_per_bank = 0
        self.trace_enabled = False
        self.ledger = []            # (cycle, bank, sram, row, READ|WRITE)
        self.mem_cycle = 0
        self._cycle_used = {}       # (bank, sram) -> cycle of last access

    def configure(self, n):
        """Set the active polynomial dimension; repartitions the slots."""
        if n & (n - 1) or not 8 <= n <= 2048:
            raise CacheError(f"unsupported polynomial dimension n={n}")
        self.n = n
        self.lg_n = n.bit_length() - 1
        # Addressable slots are capped by the 7-bit slot operand; for
        # n >= 64 this equals the full 8192/n capacity.
        self.slots = min(TOTAL_WORDS // n, MAX_SLOTS)
        self.slots_per_bank = self.slots // 2
        return self

    def clear_ledger(self):
        self.ledger = []
        self.mem_cycle = 0
        self._cycle_used = {}

    def _require_config(self):
        if self.n is None:
            raise CacheError("cache not configured")

    def slot_bank(self, slot):
        self._require_config()
        if not 0 <= slot < self.slots:
            raise CacheError(f"slot {slot} out of range [0, {self.slots})")
        return 0 if slot < self.slots_per_bank else 1

    def _locate(self, slot, i):
        """(bank, sram, row) of coefficient i in the given slot."""
        n = self.n
        if not 0 <= i < n:
            raise CacheError(f"coefficient index {i} out of range [0, {n})")
        bank = self.slot_bank(slot)
        slot_in_bank = slot - bank * self.slots_per_bank
        msb = i >> (self.lg_n - 1)
        sram = 2 * msb + (i & 1)
        row = slot_in_bank * (n >> 2) + ((i >> 1) & ((n >> 2) - 1))
        return bank, sram, row

    def next_cycle(self):
        self.mem_cycle += 1
        return self.mem_cycle - 1

    def _access(self, cycle, bank, sram, row, rw):
        key = (bank, sram)
        if self._cycle_used.get(key) == cycle:
            raise HazardFault(
                f"cycle {cycle}: second access to bank {bank} sram {sram}")
        self._cycle_used[key] = cycle
        if self.trace_enabled:
            self.ledger.append((cycle, bank, sram, row, rw))

    def _pair_indices(self, pair_kind, j):
        n = self.n
        if not 0 <= j < n // 2:
            raise CacheError(f"pair index {j} out of range [0, {n // 2})")
        if pair_kind == PAIR_ADJACENT:
            return 2 * j, 2 * j + 1
        if pair_kind == PAIR_STRIDED:
            return j, j + n // 2
        raise CacheError(f"unknown pair kind {pair_kind!r}")

    def read_pair(self, slot, pair_kind, j, cycle=None):
        """Read a butterfly input pair; both halves land in distinct SRAMs."""
        self._require_config()
        i0, i1 = self._pair_indices(pair_kind, j)
        if cycle is None:
            cycle = self.next_cycle()
        b0, s0, r0 = self._locate(slot, i0)
        b1, s1, r1 = self._locate(slot, i1)
        self._access(cycle, b0, s0, r0, READ)
        self._access(cycle, b1, s1, r1, READ)
        return self.banks[b0][s0][r0], self.banks[b1][s1][r1]

    def write_pair(self, slot, pair_kind, j, v0, v1, cycle=None):
        self._require_config()
        i0, i1 = self._pair_indices(pair_kind, j)
        if cycle is None:
            cycle = self.next_cycle()
        b0, s0, r0 = self._locate(slot, i0)
        b1, s1, r1 = self._locate(slot, i1)
        self._access(cycle, b0, s0, r0, WRITE)
        self._access(cycle, b1, s1, r1, WRITE)
        self.banks[b0][s0][r0] = v0
        self.banks[b1][s1][r1] = v1

    def slot_read(self, slot, i, record=True):
        self._require_config()
        bank, sram, row = self._locate(slot, i)
        if record:
            self._access(self.next_cycle(), bank, sram, row, READ)
        return self.banks[bank][sram][row]

    def slot_write(self, slot, i, value, record=True):
        self._require_config()
        if not 0 <= value < (1 << 24):
            raise CacheError(f"value {value} does not fit a 24-bit word")
        bank, sram, row = self._locate(slot, i)
        if record:
            self._access(self.next_cycle(), bank, sram, row, WRITE)
        self.banks[bank][sram][row] = value

    def slot_clear(self, slot):
        for i in range(self.n):
            self.slot_write(slot, i, 0)

    # Host-side (memory-mapped) data movement: no cycles, no ledger.

    def load_slot(self, slot, values):
        self._require_config()
        if len(values) != self.n:
            raise CacheError(f"expected {self.n} coefficients, got {len(values)}")
        for i, v in enumerate(values):
            self.slot_write(slot, i, v, record=False)

    def dump_slot(self, slot):
        self._require_config()
        return [self.slot_read(slot, i, record=False) for i in range(self.n)]

    def audit_hazards(self):
        """Re-check the recorded ledger: one access per (bank, sram, cycle)."""
        seen = set()
        for cycle, bank, sram, _row, _rw in self.ledger:
            key = (cycle, bank, sram)
            if key in seen:
                raise HazardFault(
                    f"ledger violation at cycle {cycle}: bank {bank} sram {sram}")
            seen.add(key)
        return len(self.ledger)

    def trace_lines(self):
        """Render the ledger, one access per line: cycle bank sram row R|W."""
        return [f"{c} {b} {s} {r} {'RW'[rw]}" for c, b, s, r, rw in self.ledger]
