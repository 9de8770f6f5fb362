"""Lowering of source-level gates to the native {Rxy, cZ} set.

Source vocabulary: Rx, Ry, Rz, cNOT, cRx plus everything native.  Operand
conventions (pinned by requiring the lowered evolution interval to approximate
exp(-iHt), see tests):

* ``CNOT(target, control)`` — the first operand receives the rotations of the
  decomposition; ``cnot q1, q0`` flips q1 when q0 is set.
* ``CRx(angle, rotated, conditioning)`` — Rx(angle) on ``rotated`` when
  ``conditioning`` is set.

Passes:

* ``frame_rotate_z_to_y`` — re-express a program whose z-dependence is limited
  to Rz gates, z-basis preparation and z-basis measurement in the frame where
  z becomes y.  Every gate is conjugated exactly by Rx(-pi/2) on each qubit
  (Rz -> Ry, Ry -> Rz(-angle), compensating Rx(+-pi/2) around the z-dependent
  operands of cNOT/cRx/cZ), with basis-change rotations inserted after the
  leading resets and before the trailing measurements, so measured
  probabilities are preserved exactly.
* ``lower`` — decompose to native instructions.
* ``schedule`` — greedy adjacent merge of single-qubit gates on disjoint qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import isa
from .errors import (DimensionMismatch, NonUnitarySlot, ParseError, SameQubit,
                     UnsupportedGate, ValidationError)
from .isa import CZ, Measure, QuantumProgram, Reset, RotationKey, Rxy, TimeSlot

HALF_PI = math.pi / 2


# --- source-level gates --------------------------------------------------------


@dataclass(frozen=True)
class Rx:
    qubit: int
    angle: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Ry:
    qubit: int
    angle: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Rz:
    qubit: int
    angle: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class CNOT:
    target: int
    control: int

    def __post_init__(self):
        if self.target == self.control:
            raise SameQubit(f"cnot operands must differ, got q{self.target} twice")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.target, self.control)


@dataclass(frozen=True)
class CRx:
    angle: float
    rotated: int
    conditioning: int

    def __post_init__(self):
        if self.rotated == self.conditioning:
            raise SameQubit(f"crx operands must differ, got q{self.rotated} twice")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.rotated, self.conditioning)


SOURCE_KINDS = (Rx, Ry, Rz, CNOT, CRx) + isa.NATIVE_KINDS


@dataclass(frozen=True)
class SourceProgram:
    """Like :class:`~qcoproc.isa.QuantumProgram` but over source gates.

    ``frame`` records which axis carries the z-type disorder terms; the
    frame-rotation pass flips it to "y" (h^z parameters are then read as h^y).
    """

    n_qubits: int
    slots: tuple
    frame: str = "z"

    def __post_init__(self):
        for s in self.slots:
            for instr in s.instructions:
                if not isinstance(instr, SOURCE_KINDS):
                    raise ValidationError(f"unknown source gate {instr!r}")
                for q in instr.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise ValidationError(
                            f"qubit q{q} out of range for {self.n_qubits}-qubit program")

    def instructions(self):
        for s in self.slots:
            yield from s.instructions


@dataclass(frozen=True)
class EquivalenceReport:
    phase_invariant_distance: float
    equivalent: bool
    tolerance: float


# --- decompositions (each list is in execution order) ----------------------------


def decompose_cnot(target: int, control: int) -> list:
    """cNOT = Ry(-pi/2)_t . cZ . Ry(pi/2)_t, with Ry written as Rxy(pi/2, .)."""
    if target == control:
        raise SameQubit("cnot operands must differ")
    return [
        Rxy(target, RotationKey.make(HALF_PI, -HALF_PI)),
        CZ(target, control),
        Rxy(target, RotationKey.make(HALF_PI, HALF_PI)),
    ]


def decompose_crx(alpha: float, rotated: int, conditioning: int) -> list:
    """cRx(a) = cZ . Rx(-a/2) . cZ . Rx(a/2), rotations on the rotated qubit."""
    if rotated == conditioning:
        raise SameQubit("crx operands must differ")
    return [
        CZ(rotated, conditioning),
        Rxy(rotated, RotationKey.make(0.0, -alpha / 2)),
        CZ(rotated, conditioning),
        Rxy(rotated, RotationKey.make(0.0, alpha / 2)),
    ]


def decompose_rz(beta: float, qubit: int) -> list:
    """Rz(b) = Rxy(pi/2, pi) then Rxy(b/2 - pi/2, pi), exact including phase."""
    return [
        Rxy(qubit, RotationKey.make(HALF_PI, math.pi)),
        Rxy(qubit, RotationKey.make(beta / 2 - HALF_PI, math.pi)),
    ]


def _lower_gate(gate) -> list:
    if isinstance(gate, isa.NATIVE_KINDS):
        return [gate]
    if isinstance(gate, Rx):
        return [Rxy(gate.qubit, RotationKey.make(0.0, gate.angle))]
    if isinstance(gate, Ry):
        return [Rxy(gate.qubit, RotationKey.make(HALF_PI, gate.angle))]
    if isinstance(gate, Rz):
        return decompose_rz(gate.angle, gate.qubit)
    if isinstance(gate, CNOT):
        return decompose_cnot(gate.target, gate.control)
    if isinstance(gate, CRx):
        return decompose_crx(gate.angle, gate.rotated, gate.conditioning)
    raise UnsupportedGate(f"cannot lower {gate!r}")


def lower(source: SourceProgram | QuantumProgram) -> QuantumProgram:
    """Replace every source gate by its native decomposition.

    Parallel slots are kept intact when every gate maps to one instruction;
    otherwise the slot is serialized gate by gate (disjoint qubits commute, so
    the circuit unitary is unchanged).
    """
    out_slots: list[TimeSlot] = []
    for s in source.slots:
        lowered = [_lower_gate(g) for g in s.instructions]
        if all(len(seq) == 1 for seq in lowered):
            out_slots.append(TimeSlot(tuple(seq[0] for seq in lowered)))
        else:
            for seq in lowered:
                out_slots.extend(TimeSlot((instr,)) for instr in seq)
    return QuantumProgram(n_qubits=source.n_qubits, slots=tuple(out_slots))


# --- frame rotation --------------------------------------------------------------


def _conjugate_gate(gate) -> list:
    """Exact image of a gate under conjugation by Rx(-pi/2) on every qubit."""
    if isinstance(gate, Rz):
        return [Ry(gate.qubit, gate.angle)]
    if isinstance(gate, Ry):
        return [Rz(gate.qubit, -gate.angle)]
    if isinstance(gate, Rx):
        return [gate]
    if isinstance(gate, Rxy):
        if gate.key.gamma_over_pi == 0.0 or gate.key.phi_over_pi in (0.0, 1.0):
            return [gate]  # x-axis rotations are invariant
        if gate.key.phi_over_pi == 0.5:
            return [Rz(gate.qubit, -gate.key.gamma)]
        if gate.key.phi_over_pi == 1.5:
            return [Rz(gate.qubit, gate.key.gamma)]
        raise UnsupportedGate(f"cannot frame-rotate general {gate!r}")
    if isinstance(gate, CNOT):
        return [Rx(gate.control, HALF_PI), gate, Rx(gate.control, -HALF_PI)]
    if isinstance(gate, CRx):
        return [Rx(gate.conditioning, HALF_PI), gate, Rx(gate.conditioning, -HALF_PI)]
    if isinstance(gate, CZ):
        sandwich_in = [Rx(gate.qa, HALF_PI), Rx(gate.qb, HALF_PI)]
        sandwich_out = [Rx(gate.qa, -HALF_PI), Rx(gate.qb, -HALF_PI)]
        return sandwich_in + [gate] + sandwich_out
    raise UnsupportedGate(f"cannot frame-rotate {gate!r}")


def frame_rotate_z_to_y(source: SourceProgram) -> SourceProgram:
    """Rotate the single-qubit basis so that z becomes y.

    Requires the shape of the evolution workload: any resets first, then
    unitary gates, then measurements.  Measured probabilities are unchanged;
    Rz disorder gates become single-pulse Ry gates.
    """
    phase = "resets"
    head: list[TimeSlot] = []
    body: list[TimeSlot] = []
    tail: list[TimeSlot] = []
    for s in source.slots:
        kinds = {type(i) for i in s.instructions}
        if kinds <= {Reset}:
            if phase != "resets":
                raise UnsupportedGate("reset after the program prologue")
            head.append(s)
        elif kinds <= {Measure}:
            phase = "measures"
            tail.append(s)
        elif Measure in kinds or Reset in kinds:
            raise UnsupportedGate("slot mixes measurement/reset with gates")
        else:
            if phase == "measures":
                raise UnsupportedGate("gate after measurement")
            phase = "body"
            body.append(s)

    rotated: list[TimeSlot] = []
    for s in body:
        conj = [_conjugate_gate(g) for g in s.instructions]
        if all(len(seq) == 1 for seq in conj):
            rotated.append(TimeSlot(tuple(seq[0] for seq in conj)))
        else:
            for seq in conj:
                rotated.extend(TimeSlot((g,)) for g in seq)

    qs = range(source.n_qubits)
    enter = TimeSlot(tuple(Rx(q, -HALF_PI) for q in qs))
    leave = TimeSlot(tuple(Rx(q, HALF_PI) for q in qs))
    slots = tuple(head) + (enter,) + tuple(rotated) + (leave,) + tuple(tail)
    return SourceProgram(n_qubits=source.n_qubits, slots=slots, frame="y")


# --- scheduling -------------------------------------------------------------------


def schedule(program: QuantumProgram) -> QuantumProgram:
    """Merge adjacent single-qubit rotations on disjoint qubits into one slot.

    Instructions on the same qubit are never reordered, and nothing moves
    across a two-qubit gate, measure, or reset touching its qubit (merging is
    restricted to slots made purely of Rxy instructions).
    """
    out: list[list] = []
    for s in program.slots:
        for instr in s.instructions:
            if (isinstance(instr, Rxy) and out
                    and all(isinstance(prev, Rxy) for prev in out[-1])
                    and all(instr.qubit not in prev.qubits for prev in out[-1])):
                out[-1].append(instr)
            else:
                out.append([instr])
    return QuantumProgram(n_qubits=program.n_qubits,
                          slots=tuple(TimeSlot(tuple(group)) for group in out))


# --- equivalence ------------------------------------------------------------------

# float64 cannot resolve |tr(U+V)|/d defects below ~1e-13 (matrix entries carry
# relative rounding of ~1e-16); overlaps that close count as exact.
_RESOLUTION_SQ = 1e-13


def equivalence_check(U: np.ndarray, V: np.ndarray, tol: float = 1e-10) -> EquivalenceReport:
    """Phase-invariant distance sqrt(1 - |tr(U+V)|/d), clamped to [0, 1]."""
    if U.shape != V.shape or U.shape[0] != U.shape[1]:
        raise DimensionMismatch(f"cannot compare shapes {U.shape} and {V.shape}")
    d = U.shape[0]
    dist_sq = 1.0 - abs(np.trace(U.conj().T @ V)) / d
    dist = math.sqrt(min(max(dist_sq, 0.0), 1.0)) if dist_sq > _RESOLUTION_SQ else 0.0
    return EquivalenceReport(phase_invariant_distance=dist,
                             equivalent=dist < tol, tolerance=tol)


def source_gate_unitary(gate, n_qubits: int) -> np.ndarray:
    """Full-space unitary of one source gate."""
    if isinstance(gate, isa.NATIVE_KINDS):
        return isa.instruction_unitary(gate, n_qubits)
    U = np.eye(1 << n_qubits, dtype=complex)
    for instr in _lower_gate(gate):
        U = isa.instruction_unitary(instr, n_qubits) @ U
    return U


def source_program_unitary(program: SourceProgram | QuantumProgram) -> np.ndarray:
    """Whole-circuit unitary; raises NonUnitarySlot on measure/reset."""
    U = np.eye(1 << program.n_qubits, dtype=complex)
    for s in program.slots:
        for gate in s.instructions:
            if isinstance(gate, (Measure, Reset)):
                raise NonUnitarySlot(f"{type(gate).__name__} has no unitary")
            U = source_gate_unitary(gate, program.n_qubits) @ U
    return U


# --- pass pipeline and extended assembly -------------------------------------------

PASSES = ("frame-rotate", "lower", "schedule")


def run_passes(program, passes) -> SourceProgram | QuantumProgram:
    """Apply named passes in order; see :data:`PASSES`."""
    for name in passes:
        if name == "frame-rotate":
            if isinstance(program, QuantumProgram):
                program = SourceProgram(program.n_qubits, program.slots)
            program = frame_rotate_z_to_y(program)
        elif name == "lower":
            program = lower(program)
        elif name == "schedule":
            if not isinstance(program, QuantumProgram):
                if any(not isinstance(g, isa.NATIVE_KINDS) for g in program.instructions()):
                    raise UnsupportedGate("schedule requires a native program; run lower first")
                program = QuantumProgram(program.n_qubits, program.slots)
            program = schedule(program)
        else:
            raise ValidationError(f"unknown pass {name!r} (expected one of {PASSES})")
    return program


def _parse_source_statement(text: str, line: int):
    parts = text.strip().split(None, 1)
    mnemonic, rest = parts[0], (parts[1] if len(parts) > 1 else "")
    ops = [o.strip() for o in rest.split(",")] if rest else []

    def angle(tok):
        try:
            return float(tok) * math.pi
        except ValueError:
            raise ParseError(f"expected angle in units of pi, got {tok!r}", line) from None

    def qubit(tok):
        if not tok.startswith("q") or not tok[1:].isdigit():
            raise ParseError(f"expected qubit operand, got {tok!r}", line)
        return int(tok[1:])

    if mnemonic in ("rx", "ry", "rz"):
        if len(ops) != 2:
            raise ParseError(f"{mnemonic} takes qubit, angle", line)
        cls = {"rx": Rx, "ry": Ry, "rz": Rz}[mnemonic]
        return cls(qubit(ops[0]), angle(ops[1]))
    if mnemonic == "cnot":
        if len(ops) != 2:
            raise ParseError("cnot takes target, control", line)
        return CNOT(qubit(ops[0]), qubit(ops[1]))
    if mnemonic == "crx":
        if len(ops) != 3:
            raise ParseError("crx takes rotated, conditioning, angle", line)
        return CRx(angle(ops[2]), qubit(ops[0]), qubit(ops[1]))
    return isa._parse_statement(text, line)


def parse_source_program(text: str) -> SourceProgram:
    """Parse the extended grammar (adds rx/ry/rz/cnot/crx to the native one)."""
    n_qubits, slots = isa.parse_slots(text, statement_parser=_parse_source_statement)
    return SourceProgram(n_qubits=n_qubits, slots=slots)


def emit_source_statement(gate) -> str:
    if isinstance(gate, Rx):
        return f"rx q{gate.qubit}, {float(round(gate.angle / math.pi, 12))!r}"
    if isinstance(gate, Ry):
        return f"ry q{gate.qubit}, {float(round(gate.angle / math.pi, 12))!r}"
    if isinstance(gate, Rz):
        return f"rz q{gate.qubit}, {float(round(gate.angle / math.pi, 12))!r}"
    if isinstance(gate, CNOT):
        return f"cnot q{gate.target}, q{gate.control}"
    if isinstance(gate, CRx):
        return (f"crx q{gate.rotated}, q{gate.conditioning}, "
                f"{float(round(gate.angle / math.pi, 12))!r}")
    return isa.emit_statement(gate)


def emit_source_program(program: SourceProgram | QuantumProgram) -> str:
    return isa.emit_program(program, statement_emitter=emit_source_statement)
