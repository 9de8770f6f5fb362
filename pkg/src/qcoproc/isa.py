"""Native instruction set: Rxy/cZ/measure/reset, program IR, and assembly text format.

Conventions fixed here and shared by every other module:

* Qubit 0 is the least significant bit of a basis-state index, so a gate U on
  qubit 0 of a 2-qubit register embeds as kron(I, U).
* A rotation key (phi, gamma) means: rotate by gamma about the axis at azimuth
  phi in the xy plane.  phi is canonical in [0, 2*pi), gamma in (-2*pi, 2*pi]
  (the sign of gamma is kept because it scales the pulse amplitude).  Angles
  are quantized to a 1e-12 grid in units of pi so that equality is transitive
  and keys can be hashed.
* Angles in the text format are decimals in units of pi, e.g. ``rxy q0, 0.5, -0.5``.
* Global phase is never tracked; equivalence elsewhere is phase-invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import NonUnitarySlot, ParseError, ValidationError


def _quantize(angle_over_pi: float) -> float:
    """Snap to a 1e-12 grid in units of pi; exact for short decimals like 0.5."""
    q = round(angle_over_pi, 12)
    return 0.0 if q == 0.0 else q  # normalize -0.0


@dataclass(frozen=True)
class RotationKey:
    """Canonicalized (phi, gamma) pair identifying one single-qubit rotation.

    Construct via :meth:`make` (or the radians properties); the stored fields
    are in units of pi.
    """

    phi_over_pi: float
    gamma_over_pi: float

    @staticmethod
    def make(phi: float, gamma: float) -> "RotationKey":
        """Canonicalize angles given in radians."""
        g = _quantize(gamma / math.pi) % 4.0
        if g > 2.0:
            g -= 4.0
        g = _quantize(g)
        if g == 0.0:
            return RotationKey(0.0, 0.0)
        p = _quantize(phi / math.pi) % 2.0
        p = _quantize(p)
        if p == 2.0:
            p = 0.0
        return RotationKey(p, g)

    @staticmethod
    def from_pi_units(phi_over_pi: float, gamma_over_pi: float) -> "RotationKey":
        return RotationKey.make(phi_over_pi * math.pi, gamma_over_pi * math.pi)

    @property
    def phi(self) -> float:
        """Azimuth in radians, in [0, 2*pi)."""
        return self.phi_over_pi * math.pi

    @property
    def gamma(self) -> float:
        """Rotation angle in radians, in (-2*pi, 2*pi]."""
        return self.gamma_over_pi * math.pi

    def sort_index(self) -> tuple[float, float]:
        return (self.phi_over_pi, self.gamma_over_pi)

    def __repr__(self) -> str:
        return f"RotationKey({self.phi_over_pi!r}*pi, {self.gamma_over_pi!r}*pi)"


# --- instructions ------------------------------------------------------------


@dataclass(frozen=True)
class Rxy:
    qubit: int
    key: RotationKey

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class CZ:
    """Symmetric controlled-Z; operand order is preserved for display only."""

    qa: int
    qb: int

    def __post_init__(self):
        if self.qa == self.qb:
            raise ValidationError(f"cz operands must differ, got q{self.qa} twice")

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qa, self.qb)


@dataclass(frozen=True)
class Measure:
    qubit: int
    register: str

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


@dataclass(frozen=True)
class Reset:
    qubit: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.qubit,)


Instruction = Rxy | CZ | Measure | Reset
NATIVE_KINDS = (Rxy, CZ, Measure, Reset)


@dataclass(frozen=True)
class TimeSlot:
    """Instructions executed in parallel; a qubit may appear at most once."""

    instructions: tuple

    def __post_init__(self):
        seen: set[int] = set()
        for instr in self.instructions:
            for q in instr.qubits:
                if q in seen:
                    raise ValidationError(f"qubit q{q} appears twice in one slot")
                seen.add(q)

    @property
    def qubits(self) -> frozenset[int]:
        return frozenset(q for i in self.instructions for q in i.qubits)

    def is_unitary(self) -> bool:
        return all(isinstance(i, (Rxy, CZ)) for i in self.instructions)


def slot(*instructions) -> TimeSlot:
    return TimeSlot(tuple(instructions))


@dataclass(frozen=True)
class QuantumProgram:
    """A sequence of time slots over native instructions."""

    n_qubits: int
    slots: tuple

    def __post_init__(self):
        for s in self.slots:
            for instr in s.instructions:
                if not isinstance(instr, NATIVE_KINDS):
                    raise ValidationError(f"non-native instruction {instr!r}")
                for q in instr.qubits:
                    if not 0 <= q < self.n_qubits:
                        raise ValidationError(
                            f"qubit q{q} out of range for {self.n_qubits}-qubit program")

    @property
    def registers(self) -> tuple[str, ...]:
        """Classical registers, in order of first measurement."""
        names: list[str] = []
        for s in self.slots:
            for instr in s.instructions:
                if isinstance(instr, Measure) and instr.register not in names:
                    names.append(instr.register)
        return tuple(names)

    def instructions(self):
        for s in self.slots:
            yield from s.instructions


# --- matrix semantics ---------------------------------------------------------


def rxy_matrix(key: RotationKey) -> np.ndarray:
    """2x2 unitary of a gamma rotation about the xy-plane axis at azimuth phi."""
    c = math.cos(key.gamma / 2)
    s = math.sin(key.gamma / 2)
    e = np.exp(1j * key.phi)
    return np.array([[c, -1j * s / e], [-1j * s * e, c]], dtype=complex)


def cz_matrix() -> np.ndarray:
    """diag(1, 1, 1, -1) in the |00>,|01>,|10>,|11> basis."""
    return np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)


def _embed_1q(U: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(n_qubits - 1, -1, -1):
        out = np.kron(out, U if q == qubit else np.eye(2, dtype=complex))
    return out


def _embed_cz(qa: int, qb: int, n_qubits: int) -> np.ndarray:
    dim = 1 << n_qubits
    diag = np.ones(dim, dtype=complex)
    for idx in range(dim):
        if (idx >> qa) & 1 and (idx >> qb) & 1:
            diag[idx] = -1.0
    return np.diag(diag)


def instruction_unitary(instr, n_qubits: int) -> np.ndarray:
    if isinstance(instr, Rxy):
        return _embed_1q(rxy_matrix(instr.key), instr.qubit, n_qubits)
    if isinstance(instr, CZ):
        return _embed_cz(instr.qa, instr.qb, n_qubits)
    raise NonUnitarySlot(f"{type(instr).__name__} has no unitary")


@lru_cache(maxsize=16384)
def _slot_unitary_cached(s: TimeSlot, n_qubits: int) -> np.ndarray:
    U = np.eye(1 << n_qubits, dtype=complex)
    for instr in s.instructions:
        U = instruction_unitary(instr, n_qubits) @ U
    U.setflags(write=False)
    return U


def slot_unitary(s: TimeSlot, n_qubits: int) -> np.ndarray:
    """Tensor-product unitary of a slot; identity on untouched qubits."""
    if not s.is_unitary():
        raise NonUnitarySlot("slot contains measure/reset")
    return _slot_unitary_cached(s, n_qubits)


def program_segment_unitary(program: QuantumProgram, start: int = 0,
                            stop: int | None = None) -> np.ndarray:
    """Ordered product of slot unitaries; the earliest slot is applied first."""
    stop = len(program.slots) if stop is None else stop
    U = np.eye(1 << program.n_qubits, dtype=complex)
    for s in program.slots[start:stop]:
        U = slot_unitary(s, program.n_qubits) @ U
    return U


# --- assembly text format ------------------------------------------------------
#
# One statement per line; '#' starts a comment.  Statements:
#   rxy q<N>, <phi_over_pi>, <gamma_over_pi>
#   cz q<A>, q<B>
#   measure q<N> -> <reg>
#   reset q<N>
#   { stmt | stmt | ... }        parallel slot
# A bare statement occupies its own slot.


def _parse_qubit(tok: str, line: int) -> int:
    tok = tok.strip()
    if not tok.startswith("q") or not tok[1:].isdigit():
        raise ParseError(f"expected qubit operand, got {tok!r}", line)
    return int(tok[1:])


def _parse_angle(tok: str, line: int) -> float:
    try:
        return float(tok.strip())
    except ValueError:
        raise ParseError(f"expected angle in units of pi, got {tok.strip()!r}", line) from None


def _parse_statement(text: str, line: int):
    text = text.strip()
    parts = text.split(None, 1)
    if not parts:
        raise ParseError("empty statement", line)
    mnemonic, rest = parts[0], (parts[1] if len(parts) > 1 else "")
    if mnemonic == "rxy":
        ops = rest.split(",")
        if len(ops) != 3:
            raise ParseError("rxy takes qubit, phi, gamma", line)
        q = _parse_qubit(ops[0], line)
        key = RotationKey.from_pi_units(_parse_angle(ops[1], line), _parse_angle(ops[2], line))
        return Rxy(q, key)
    if mnemonic == "cz":
        ops = rest.split(",")
        if len(ops) != 2:
            raise ParseError("cz takes two qubits", line)
        return CZ(_parse_qubit(ops[0], line), _parse_qubit(ops[1], line))
    if mnemonic == "measure":
        if "->" not in rest:
            raise ParseError("measure takes q<N> -> <reg>", line)
        qtok, reg = rest.split("->", 1)
        reg = reg.strip()
        if not reg.isidentifier():
            raise ParseError(f"invalid register name {reg!r}", line)
        return Measure(_parse_qubit(qtok, line), reg)
    if mnemonic == "reset":
        return Reset(_parse_qubit(rest, line))
    raise ParseError(f"unknown mnemonic {mnemonic!r}", line)


def parse_slots(text: str, statement_parser=_parse_statement) -> tuple[int, tuple]:
    """Parse assembly text into (n_qubits, slots).

    ``statement_parser`` is an extension hook used by the compiler module to
    accept source-level mnemonics through the same slot grammar.
    """
    slots: list[TimeSlot] = []
    max_q = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        if stripped.startswith("{"):
            if not stripped.endswith("}"):
                raise ParseError("parallel slot must close on the same line", lineno)
            body = stripped[1:-1].strip()
            stmts = [s for s in (p.strip() for p in body.split("|")) if s] if body else []
            try:
                instrs = tuple(statement_parser(s, lineno) for s in stmts)
                slots.append(TimeSlot(instrs))
            except ValidationError as exc:
                raise ValidationError(f"line {lineno}: {exc}") from exc
        else:
            slots.append(TimeSlot((statement_parser(stripped, lineno),)))
        for instr in slots[-1].instructions:
            max_q = max(max_q, *instr.qubits)
    return (max_q + 1 if max_q >= 0 else 0), tuple(slots)


def parse_program(text: str) -> QuantumProgram:
    """Parse native assembly text into a program."""
    n_qubits, slots = parse_slots(text)
    return QuantumProgram(n_qubits=n_qubits, slots=slots)


def _format_angle(angle_over_pi: float) -> str:
    return repr(float(angle_over_pi))


def emit_statement(instr) -> str:
    if isinstance(instr, Rxy):
        return (f"rxy q{instr.qubit}, {_format_angle(instr.key.phi_over_pi)}, "
                f"{_format_angle(instr.key.gamma_over_pi)}")
    if isinstance(instr, CZ):
        return f"cz q{instr.qa}, q{instr.qb}"
    if isinstance(instr, Measure):
        return f"measure q{instr.qubit} -> {instr.register}"
    if isinstance(instr, Reset):
        return f"reset q{instr.qubit}"
    raise ValidationError(f"cannot emit {instr!r}")


def emit_program(program: QuantumProgram, statement_emitter=emit_statement) -> str:
    """Render a program as assembly text; inverse of :func:`parse_program`."""
    lines = []
    for s in program.slots:
        if len(s.instructions) == 1:
            lines.append(statement_emitter(s.instructions[0]))
        else:
            lines.append("{ " + " | ".join(statement_emitter(i) for i in s.instructions) + " }")
    return "\n".join(lines) + "\n"
