"""Fetch/decode/execute engine with cycle accounting and clock-gate stats.

Cycle model (per instruction, in emulated cycles):

  * scalar/register/control ops (config, clock_config, counter and
    register arithmetic, compare, branch, poly element get/set): 1
  * transform: (n/2 + 1) * lg n
  * mult_psi / mult_psi_inv: n + 1
  * poly_op, init, poly_copy, shift_poly, max/sum_elems, eq_check,
    inf_norm_check: n + 1
  * samplers: 24 per Keccak permutation + 1 per 32-bit word consumed
    + 1 per sample written
  * sha3 ops: 24 per permutation + 1 per 32-bit word moved + 1

The transform and psi-multiply constants reproduce the hardware's
(n/2 + 1) * lg n + (n + 1) transform cost exactly; the remaining values
are documented emulator estimates.

Cycles are attributed to one of four statistics buckets: "alu" (scalar
and control), "ntt" (butterfly/polynomial datapath), "keccak"
(permutations) and "sampler" (word shifts and sample writes).  The
clock_config instruction gates buckets: a gated unit's cycles still count
toward the total (functional behavior is unchanged) but stop accumulating
in its bucket.  In strict gating mode, touching a gated unit faults.
"""

from dataclasses import dataclass

from . import isa, keccak, modmath, nttcore, polycache, sampler

WORD_MASK = (1 << 24) - 1


class MachineFault(RuntimeError):
    def __init__(self, message, pc=None):
        self.pc = pc
        super().__init__(message if pc is None else f"pc={pc}: {message}")


@dataclass
class ExecutionEvent:
    pc: int
    op: str
    cycles: int
    halted: bool


@dataclass
class CycleReport:
    total: int
    per_unit: dict
    per_instruction: dict
    halted: bool

    def lines(self):
        out = [f"cycles_total {self.total}", f"halted {int(self.halted)}"]
        for unit in sorted(self.per_unit):
            out.append(f"cycles_{unit} {self.per_unit[unit]}")
        for op in sorted(self.per_instruction):
            out.append(f"insn_{op} {self.per_instruction[op]}")
        return out


class Machine:
    """One crypto-processor instance: cache, registers and cycle ledger."""

    def __init__(self, strict_gating=False, debug=False):
        self.cache = polycache.PolynomialCache()
        self.r0 = bytes(32)
        self.r1 = bytes(32)
        self.c0 = 0
        self.c1 = 0
        self.reg = 0
        self.tmp = 0
        self.flag = 0
        self.cdt_ram = [0] * 64
        self.pc = 0
        self.cycles = 0
        self.halted = True
        self.gate_config = {"keccak": True, "ntt": True, "sampler": True}
        self.strict_gating = strict_gating
        self.debug = debug
        self.program = None
        self.n = None
        self.q = None
        self.profile = None
        self.consts = None
        self.rej_plan = None
        self.sha3 = None
        self.per_unit = {"alu": 0, "ntt": 0, "keccak": 0, "sampler": 0}
        self.per_insn = {}

    # ------------------------------------------------------------- host API

    def load_program(self, program):
        if isinstance(program, str):
            program = isa.assemble(program)
        if len(program.instructions) > isa.MAX_PROGRAM:
            raise MachineFault(f"program exceeds {isa.MAX_PROGRAM} instructions")
        self.program = program
        self.reset()

    def reset(self):
        """Clear pc/cycle/statistics state; registers and memories persist."""
        self.pc = 0
        self.cycles = 0
        self.halted = self.program is None or not self.program.instructions
        self.per_unit = {"alu": 0, "ntt": 0, "keccak": 0, "sampler": 0}
        self.per_insn = {}
        self.cache.clear_ledger()

    def write_seed(self, which, data):
        if len(data) != 32:
            raise MachineFault("seed registers are 32 bytes")
        if which == "r0":
            self.r0 = bytes(data)
        elif which == "r1":
            self.r1 = bytes(data)
        else:
            raise MachineFault(f"unknown seed register {which!r}")

    def read_seed(self, which):
        if not self.debug:
            raise MachineFault("seed registers are write-only (set debug=True)")
        return {"r0": self.r0, "r1": self.r1}[which]

    def configure(self, n, q):
        """Host-side parameter setup, equivalent to the config instruction
        but free of program cycles; needed before host data movement on a
        fresh machine."""
        try:
            profile = modmath.ModulusProfile.for_modulus(q)
            cfg = nttcore.LatticeConfig(n, q, profile)
        except (modmath.ModMathError, nttcore.NttError) as exc:
            raise MachineFault(f"configure: {exc}") from None
        self.n, self.q, self.profile = n, q, profile
        self.cfg = cfg
        try:
            self.consts = nttcore.gen_constants(cfg)
        except nttcore.NttError:
            self.consts = None   # no NTT for this modulus (e.g. Frodo)
        self.rej_plan = sampler.RejectionPlan.for_modulus(q)
        self.cache.configure(n)

    def write_slot(self, slot, values):
        self.cache.load_slot(slot, values)

    def read_slot(self, slot):
        return self.cache.dump_slot(slot)

    def load_cdt(self, table):
        """Load a CdtTable (or raw entry list) into the 64x32 CDT RAM."""
        entries = table.entries if isinstance(table, sampler.CdtTable) else table
        if len(entries) > 64:
            raise MachineFault("CDT RAM holds at most 64 entries")
        for e in entries:
            if not 0 <= e < (1 << 32):
                raise MachineFault("CDT entries are 32-bit words")
        self.cdt_ram = list(entries) + [0] * (64 - len(entries))

    def cycle_report(self):
        return CycleReport(self.cycles, dict(self.per_unit),
                           dict(self.per_insn), self.halted)

    def trace(self):
        return self.cache.trace_lines()

    # ------------------------------------------------------------ execution

    def _use(self, unit, cycles, op):
        if unit != "alu" and not self.gate_config[unit]:
            if self.strict_gating:
                raise MachineFault(f"{op} drives clock-gated unit {unit!r}",
                                   self.pc)
        else:
            self.per_unit[unit] += cycles
        self.cycles += cycles
        self.per_insn[op] = self.per_insn.get(op, 0) + cycles

    def _need_config(self):
        if self.n is None:
            raise MachineFault("no config instruction executed", self.pc)

    def _need_slot(self, slot):
        self._need_config()
        if not 0 <= slot < self.cache.slots:
            raise MachineFault(
                f"slot {slot} out of range for n={self.n} "
                f"({self.cache.slots} slots)", self.pc)

    def step(self):
        if self.halted:
            raise MachineFault("machine is halted")
        if self.program is None:
            raise MachineFault("no program loaded")
        pc = self.pc
        insn = self.program.instructions[pc]
        before = self.cycles
        next_pc = pc + 1
        try:
            handler = self._HANDLERS[insn.op]
        except KeyError:
            raise MachineFault(f"unimplemented opcode {insn.op!r}", pc) from None
        jump = handler(self, insn.args, insn.op)
        if jump is not None:
            next_pc = jump
        if not 0 <= next_pc <= len(self.program.instructions):
            raise MachineFault(f"branch target {next_pc} out of range", pc)
        self.pc = next_pc
        if next_pc == len(self.program.instructions):
            self.halted = True
        return ExecutionEvent(pc, insn.op, self.cycles - before, self.halted)

    def run(self, max_cycles=None):
        while not self.halted:
            self.step()
            if max_cycles is not None and self.cycles >= max_cycles:
                break
        return self.cycle_report()

    # ----------------------------------------------------------- semantics

    def _exec_config(self, a, op):
        try:
            self.configure(a["n"], a["q"])
        except MachineFault as exc:
            raise MachineFault(str(exc), self.pc) from None
        self._use("alu", 1, op)

    def _exec_clock_config(self, a, op):
        for unit in ("keccak", "ntt", "sampler"):
            self.gate_config[unit] = a[unit] == "UNGATE"
        self._use("alu", 1, op)

    def _exec_cnt(self, a, op):
        cur = getattr(self, a["counter"])
        v = a["value"]
        new = {"set": v, "add": cur + v, "sub": cur - v}[a["mode"]]
        setattr(self, a["counter"], new & 0xFFFF)
        self._use("alu", 1, op)

    def _exec_regop(self, a, op):
        if a["mode"] == "imm":
            setattr(self, a["target"], a["value"] & WORD_MASK)
        elif a["mode"] == "copy":
            self.reg = self.tmp
        else:
            alu = isa.REG_ALU_OPS[a["value"] & 7]
            x, y = self.tmp, self.reg
            if alu == "ADD":
                r = x + y
            elif alu == "SUB":
                r = x - y
            elif alu == "MUL":
                r = x * y
            elif alu == "AND":
                r = x & y
            elif alu == "OR":
                r = x | y
            elif alu == "XOR":
                r = x ^ y
            elif alu == "RSHIFT":
                r = x >> (y & 31)
            else:
                r = x << (y & 31)
            self.tmp = r & WORD_MASK
        self._use("alu", 1, op)

    def _exec_elems(self, a, op):
        self._need_slot(a["poly"])
        values = [self.cache.slot_read(a["poly"], i) for i in range(self.n)]
        if a["fn"] == "max":
            self.reg = max(values)
        else:
            self.reg = sum(values) % self.q
        self._use("ntt", self.n + 1, op)

    def _poly_index(self, a):
        if a["sel"] == "imm":
            idx = a["index"]
        else:
            idx = getattr(self, a["sel"])
        if not 0 <= idx < self.n:
            raise MachineFault(f"element index {idx} out of range", self.pc)
        return idx

    def _exec_poly_get(self, a, op):
        self._need_slot(a["poly"])
        self.reg = self.cache.slot_read(a["poly"], self._poly_index(a))
        self._use("alu", 1, op)

    def _exec_poly_set(self, a, op):
        self._need_slot(a["poly"])
        self.cache.slot_write(a["poly"], self._poly_index(a), self.reg)
        self._use("alu", 1, op)

    def _exec_transform(self, a, op):
        self._need_slot(a["poly_src"])
        self._need_slot(a["poly_dst"])
        if self.consts is None:
            raise MachineFault(
                f"transform with q={self.q}: no 2n-th root of unity", self.pc)
        try:
            nttcore.ntt(self.cfg, self.consts, self.cache,
                        a["poly_dst"], a["poly_src"], a["mode"])
        except nttcore.NttError as exc:
            raise MachineFault(str(exc), self.pc) from None
        self._use("ntt", (self.n // 2 + 1) * self.cfg.lg_n, op)

    def _exec_mult_psi(self, a, op):
        self._need_slot(a["poly"])
        if self.consts is None:
            raise MachineFault(f"mult_psi with q={self.q}: no NTT constants",
                               self.pc)
        fn = nttcore.mult_psi if op == "mult_psi" else nttcore.mult_psi_inv
        fn(self.cfg, self.consts, self.cache, a["poly"])
        self._use("ntt", self.n + 1, op)

    def _counter_value(self, spec):
        if spec == "c0":
            return self.c0
        if spec == "c1":
            return self.c1
        return spec

    def _run_sampler(self, a, op, draw):
        self._need_slot(a["poly"])
        seed = self.r0 if a["seed"] == "r0" else self.r1
        prng = keccak.sampler_prng(a["prng"], seed,
                                   self._counter_value(a["c0"]),
                                   self._counter_value(a["c1"]))
        try:
            values = draw(prng)
        except sampler.SamplerError as exc:
            raise MachineFault(f"{op}: {exc}", self.pc) from None
        slot = a["poly"]
        for i, v in enumerate(values):
            self.cache.slot_write(slot, i, v)
        self._use("keccak", 24 * prng.permutes, op)
        self._use("sampler", prng.words_out + self.n, op)

    def _exec_bin_sample(self, a, op):
        self._run_sampler(
            a, op, lambda p: sampler.bin_sample(self.n, a["k"], self.q, p))

    def _exec_cdt_sample(self, a, op):
        r, s = a["r"], a["s"]
        try:
            table = sampler.CdtTable(tuple(self.cdt_ram[:s]), s, r)
        except sampler.SamplerError as exc:
            raise MachineFault(f"cdt_sample: {exc}", self.pc) from None
        self._run_sampler(
            a, op, lambda p: sampler.cdt_sample(self.n, table, p, q=self.q))

    def _exec_rej_sample(self, a, op):
        self._run_sampler(
            a, op, lambda p: sampler.rej_sample(self.n, self.rej_plan, p))

    def _exec_uni_sample(self, a, op):
        self._run_sampler(
            a, op, lambda p: sampler.uni_sample(self.n, a["eta"], a["bitlen"],
                                                self.q, p))

    def _exec_tri1(self, a, op):
        self._run_sampler(
            a, op, lambda p: sampler.tri_sample_fixed(self.n, a["m"], self.q, p))

    def _exec_tri2(self, a, op):
        self._run_sampler(
            a, op, lambda p: sampler.tri_sample_split(self.n, a["m0"], a["m1"],
                                                      self.q, p))

    def _exec_tri3(self, a, op):
        self._run_sampler(
            a, op, lambda p: sampler.tri_sample_prob(self.n, a["rho"], self.q, p))

    def _exec_init(self, a, op):
        self._need_slot(a["poly"])
        self.cache.slot_clear(a["poly"])
        self._use("ntt", self.n + 1, op)

    def _exec_poly_copy(self, a, op):
        self._need_slot(a["poly_dst"])
        self._need_slot(a["poly_src"])
        for i in range(self.n):
            self.cache.slot_write(a["poly_dst"], i,
                                  self.cache.slot_read(a["poly_src"], i))
        self._use("ntt", self.n + 1, op)

    def _exec_poly_op(self, a, op):
        dst, src, kind = a["poly_dst"], a["poly_src"], a["op"]
        self._need_slot(dst)
        self._need_slot(src)
        n, q, p = self.n, self.q, self.profile
        cache = self.cache
        if kind == "BITREV":
            lgn = self.cfg.lg_n
            values = [cache.slot_read(src, nttcore.bit_reverse(i, lgn))
                      for i in range(n)]
            for i, v in enumerate(values):
                cache.slot_write(dst, i, v)
            self._use("ntt", n + 1, op)
            return
        if kind in ("ADD", "SUB", "MUL"):
            fn = {"ADD": modmath.mod_add, "SUB": modmath.mod_sub,
                  "MUL": modmath.mod_mul}[kind]
            for i in range(n):
                x = cache.slot_read(src, i)
                y = cache.slot_read(dst, i)
                try:
                    cache.slot_write(dst, i, fn(x, y, p))
                except modmath.ModMathError as exc:
                    raise MachineFault(f"poly_op {kind}: {exc}", self.pc) from None
            self._use("ntt", n + 1, op)
            return
        # CONST_* family: scalar operand comes from reg
        r = self.reg
        rq = r % q
        for i in range(n):
            x = cache.slot_read(src, i)
            if kind == "CONST_ADD":
                v = modmath.reduce(x % q + rq, p)
            elif kind == "CONST_SUB":
                v = (x % q - rq) % q
            elif kind == "CONST_MUL":
                v = modmath.reduce((x % q) * rq, p)
            elif kind == "CONST_AND":
                v = x & r
            elif kind == "CONST_OR":
                v = (x | r) & WORD_MASK
            elif kind == "CONST_XOR":
                v = (x ^ r) & WORD_MASK
            elif kind == "CONST_RSHIFT":
                v = x >> (r & 31)
            else:  # CONST_LSHIFT
                v = (x << (r & 31)) & WORD_MASK
            cache.slot_write(dst, i, v)
        self._use("ntt", n + 1, op)

    def _exec_shift_poly(self, a, op):
        dst, src = a["poly_dst"], a["poly_src"]
        self._need_slot(dst)
        self._need_slot(src)
        n, q = self.n, self.q
        values = [self.cache.slot_read(src, i) for i in range(n)]
        if a["ring"] == "x^N+1":
            head = (-values[-1]) % q     # negacyclic wrap picks up a sign
        else:
            head = values[-1]
        shifted = [head] + values[:-1]
        for i, v in enumerate(shifted):
            self.cache.slot_write(dst, i, v)
        self._use("ntt", n + 1, op)

    def _exec_eq_check(self, a, op):
        self._need_slot(a["poly_a"])
        self._need_slot(a["poly_b"])
        equal = all(self.cache.slot_read(a["poly_a"], i)
                    == self.cache.slot_read(a["poly_b"], i)
                    for i in range(self.n))
        self.flag = 1 if equal else 0
        self._use("ntt", self.n + 1, op)

    def _exec_inf_norm(self, a, op):
        self._need_slot(a["poly"])
        q, half = self.q, self.q // 2
        ok = True
        for i in range(self.n):
            v = self.cache.slot_read(a["poly"], i)
            centered = v if v <= half else v - q
            if abs(centered) > a["bound"]:
                ok = False
        self.flag = 1 if ok else 0
        self._use("ntt", self.n + 1, op)

    def _exec_compare(self, a, op):
        cur = getattr(self, a["reg"])
        v = a["value"]
        self.flag = -1 if cur < v else (0 if cur == v else 1)
        self._use("alu", 1, op)

    def _exec_branch(self, a, op):
        taken = (self.flag == a["flag"]) == (a["sense"] == "==")
        self._use("alu", 1, op)
        return a["target"] if taken else None

    def _exec_sha3_init(self, a, op):
        self.sha3 = None
        self._use("keccak", 1, op)

    def _sha3_state(self, bits):
        if self.sha3 is None:
            rate = (keccak.SHA3_256_RATE_BITS if bits == 256
                    else keccak.SHA3_512_RATE_BITS)
            self.sha3 = (bits, keccak.KeccakState(rate, keccak.DOMAIN_SHA3))
        elif self.sha3[0] != bits:
            raise MachineFault(
                f"sha3 mode {bits} does not match absorbed mode {self.sha3[0]}",
                self.pc)
        return self.sha3[1]

    def _exec_sha3_absorb(self, a, op):
        state = self._sha3_state(a["bits"])
        if a["source"] == "poly":
            self._need_slot(a["poly"])
            data = bytearray()
            for i in range(self.n):
                data += self.cache.slot_read(a["poly"], i).to_bytes(3, "little")
            data = bytes(data)
        else:
            data = self.r0 if a["source"] == "r0" else self.r1
        before = state.permutes
        state.absorb(data)
        self._use("keccak",
                  24 * (state.permutes - before) + (len(data) + 3) // 4 + 1, op)

    def _exec_sha3_digest(self, a, op):
        state = self._sha3_state(a["bits"])
        before = state.permutes
        state.finalize()
        digest = state.squeeze(a["bits"] // 8)
        self._use("keccak",
                  24 * (state.permutes - before) + a["bits"] // 32 + 1, op)
        self.sha3 = None
        if a["bits"] == 256:
            self.write_seed(a["dest"], digest)
        else:
            self.write_seed("r0", digest[:32])
            self.write_seed("r1", digest[32:])

    _HANDLERS = {
        "config": _exec_config,
        "clock_config": _exec_clock_config,
        "cnt": _exec_cnt,
        "regop": _exec_regop,
        "elems": _exec_elems,
        "poly_get": _exec_poly_get,
        "poly_set": _exec_poly_set,
        "transform": _exec_transform,
        "mult_psi": _exec_mult_psi,
        "mult_psi_inv": _exec_mult_psi,
        "bin_sample": _exec_bin_sample,
        "cdt_sample": _exec_cdt_sample,
        "rej_sample": _exec_rej_sample,
        "uni_sample": _exec_uni_sample,
        "tri_sample_1": _exec_tri1,
        "tri_sample_2": _exec_tri2,
        "tri_sample_3": _exec_tri3,
        "init": _exec_init,
        "poly_copy": _exec_poly_copy,
        "poly_op": _exec_poly_op,
        "shift_poly": _exec_shift_poly,
        "eq_check": _exec_eq_check,
        "inf_norm_check": _exec_inf_norm,
        "compare": _exec_compare,
        "branch": _exec_branch,
        "sha3_init": _exec_sha3_init,
        "sha3_absorb": _exec_sha3_absorb,
        "sha3_digest": _exec_sha3_digest,
    }
