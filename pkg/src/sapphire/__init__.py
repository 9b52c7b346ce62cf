"""Functional and cycle-accounting emulator for the Sapphire configurable
lattice-cryptography processor: modular arithmetic, Keccak PRNG, discrete
samplers, single-port-SRAM NTT memory model, the custom instruction set
and protocol drivers."""

from .isa import AsmError, DecodeError, Instruction, Program, assemble, disassemble
from .machine import CycleReport, Machine, MachineFault
from .modmath import ModulusProfile
from .nttcore import LatticeConfig, NttConstants, gen_constants
from .polycache import HazardFault, PolynomialCache
from .sampler import CdtTable, RejectionPlan

__version__ = "0.1.0"

__all__ = [
    "AsmError", "CdtTable", "CycleReport", "DecodeError", "HazardFault",
    "Instruction", "LatticeConfig", "Machine", "MachineFault",
    "ModulusProfile", "NttConstants", "PolynomialCache", "Program",
    "RejectionPlan", "assemble", "disassemble", "gen_constants",
]
