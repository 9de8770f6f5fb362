"""Execution backends for native programs plus the exact-evolution oracle.

The ideal backend evolves a state vector slot by slot.  The noisy backend
evolves a density matrix and applies per-qubit amplitude-damping and
pure-dephasing channels after every slot, parameterized by per-qubit T1/T2
and gate durations (single-qubit 20 ns, cZ 40 ns by default; qubits idling
during a slot decohere for the full slot duration).

Measurement records either exact probabilities (no collapse, the default for
the deterministic experiment pipeline) or per-shot sampled bits with collapse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (InvalidNoise, InvalidProgram, NotHermitian, NotNormalized,
                     ValidationError)
from .isa import (CZ, Measure, QuantumProgram, Reset, RotationKey, Rxy, TimeSlot,
                  rxy_matrix, slot_unitary)

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValidationError("amplitude count must be 2**n_qubits")
        if abs(np.sum(np.abs(self.amplitudes) ** 2) - 1.0) > 1e-10:
            raise NotNormalized("state vector norm differs from 1 beyond 1e-10")

    @staticmethod
    def ground(n_qubits: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[0] = 1.0
        return StateVector(n_qubits, amps)

    def prob_one(self, qubit: int) -> float:
        idx = np.arange(len(self.amplitudes))
        mask = (idx >> qubit) & 1 == 1
        return float(np.sum(np.abs(self.amplitudes[mask]) ** 2))


@dataclass
class DensityMatrix:
    n_qubits: int
    entries: np.ndarray

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        dim = 1 << self.n_qubits
        if self.entries.shape != (dim, dim):
            raise ValidationError("density matrix must be 2**n x 2**n")

    @staticmethod
    def ground(n_qubits: int) -> "DensityMatrix":
        dim = 1 << n_qubits
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
        return DensityMatrix(n_qubits, rho)

    def validate(self, trace_tol: float = 1e-10, herm_tol: float = 1e-10,
                 psd_tol: float = -1e-9) -> None:
        if abs(np.trace(self.entries).real - 1.0) > trace_tol:
            raise ValidationError(f"trace {np.trace(self.entries):.3e} != 1")
        if np.max(np.abs(self.entries - self.entries.conj().T)) > herm_tol:
            raise ValidationError("density matrix is not Hermitian")
        if np.min(np.linalg.eigvalsh((self.entries + self.entries.conj().T) / 2)) < psd_tol:
            raise ValidationError("density matrix has a significantly negative eigenvalue")

    def prob_one(self, qubit: int) -> float:
        diag = np.real(np.diag(self.entries))
        idx = np.arange(len(diag))
        return float(np.sum(diag[(idx >> qubit) & 1 == 1]))


@dataclass(frozen=True)
class NoiseParams:
    """Per-qubit relaxation/coherence times and slot durations, in seconds."""

    t1: tuple
    t2: tuple
    single_qubit_gate_duration: float = 20e-9
    cz_duration: float = 40e-9

    def __post_init__(self):
        if self.single_qubit_gate_duration <= 0 or self.cz_duration <= 0:
            raise InvalidNoise("gate durations must be positive")
        if len(self.t1) != len(self.t2):
            raise InvalidNoise("t1 and t2 must cover the same qubits")
        for q, (t1, t2) in enumerate(zip(self.t1, self.t2)):
            if t1 <= 0 or t2 <= 0:
                raise InvalidNoise(f"q{q}: T1 and T2 must be positive")
            if t2 > 2 * t1 + 1e-18:
                raise InvalidNoise(f"q{q}: T2 = {t2} exceeds 2*T1 = {2 * t1}")

    @staticmethod
    def octobox_defaults() -> "NoiseParams":
        """Measured values of the two-transmon test chip."""
        return NoiseParams(t1=(28e-6, 22e-6), t2=(4.2e-6, 38e-6))

    @staticmethod
    def noiseless(n_qubits: int = 2) -> "NoiseParams":
        return NoiseParams(t1=(math.inf,) * n_qubits, t2=(math.inf,) * n_qubits)

    def slot_duration(self, s: TimeSlot) -> float:
        d = 0.0
        for instr in s.instructions:
            if isinstance(instr, Rxy):
                d = max(d, self.single_qubit_gate_duration)
            elif isinstance(instr, CZ):
                d = max(d, self.cz_duration)
        return d


@dataclass
class MeasurementRecord:
    """Per-register outcome: exact probability of |1>, or per-shot bits."""

    mode: str
    registers: dict
    n_avg: int | None = None
    seed: int | None = None

    def probabilities(self) -> dict:
        """Collapse to {register: P(|1>)} in either mode."""
        out = {}
        for name, value in self.registers.items():
            out[name] = float(value) if isinstance(value, float) \
                else float(np.mean(value)) if len(value) else 0.0
        return out

    def to_json_dict(self) -> dict:
        body: dict = {"mode": self.mode}
        if self.mode == "sampled":
            body["n_avg"] = self.n_avg
        body["registers"] = {
            name: (value if isinstance(value, float) else list(map(int, value)))
            for name, value in self.registers.items()
        }
        return body


def _validate_program(program: QuantumProgram) -> None:
    if program.n_qubits < 1:
        raise InvalidProgram("program has no qubits")
    seen: dict[str, int] = {}
    for instr in program.instructions():
        if isinstance(instr, Measure):
            seen[instr.register] = seen.get(instr.register, 0) + 1
    for name, count in seen.items():
        if count > 1:
            raise InvalidProgram(f"register {name!r} is measured {count} times")


def _measures_are_terminal(program: QuantumProgram) -> bool:
    """True when nothing but further measurements follows the first measurement."""
    seen_measure = False
    for s in program.slots:
        has_measure = any(isinstance(i, Measure) for i in s.instructions)
        has_other = any(not isinstance(i, Measure) for i in s.instructions)
        if has_measure and has_other:
            return False
        if seen_measure and not has_measure:
            return False
        seen_measure = seen_measure or has_measure
    return True


def run_ideal(program: QuantumProgram, mode: str = "exact", n_avg: int = 1000,
              seed: int | None = None) -> MeasurementRecord:
    """Execute on the state-vector backend starting from |0...0>.

    Exact mode records P(|1>) at the moment of measurement without collapsing;
    sampled mode draws ``n_avg`` shots with collapse (vectorized over shots
    when every measurement is terminal).
    """
    _validate_program(program)
    if mode == "exact":
        state = StateVector.ground(program.n_qubits)
        registers: dict = {}
        for s in program.slots:
            _ideal_apply_slot(state, s, registers)
        _check_norm(state)
        return MeasurementRecord(mode="exact", registers=registers)
    if mode != "sampled":
        raise InvalidProgram(f"unknown measurement mode {mode!r}")

    rng = np.random.default_rng(seed)
    if _measures_are_terminal(program):
        state = StateVector.ground(program.n_qubits)
        measures: list[Measure] = []
        for s in program.slots:
            if any(isinstance(i, Measure) for i in s.instructions):
                measures.extend(s.instructions)
            else:
                _ideal_apply_slot(state, s, {})
        _check_norm(state)
        probs = np.abs(state.amplitudes) ** 2
        probs = probs / probs.sum()
        outcomes = rng.choice(len(probs), size=n_avg, p=probs)
        registers = {m.register: ((outcomes >> m.qubit) & 1).tolist() for m in measures}
    else:
        bits: dict[str, list[int]] = {}
        for _ in range(n_avg):
            state = StateVector.ground(program.n_qubits)
            for s in program.slots:
                _ideal_apply_slot(state, s, {}, collapse_rng=rng, shot_bits=bits)
        registers = dict(bits)
    return MeasurementRecord(mode="sampled", registers=registers, n_avg=n_avg, seed=seed)


def _check_norm(state: StateVector) -> None:
    norm = float(np.sum(np.abs(state.amplitudes) ** 2))
    if abs(norm - 1.0) > 1e-10:
        raise InvalidProgram(f"state norm drifted to {norm}")


def _ideal_apply_slot(state: StateVector, s: TimeSlot, registers: dict,
                      collapse_rng=None, shot_bits=None) -> None:
    if s.is_unitary():
        state.amplitudes = slot_unitary(s, state.n_qubits) @ state.amplitudes
        return
    for instr in s.instructions:
        if isinstance(instr, Measure):
            if collapse_rng is None:
                registers[instr.register] = state.prob_one(instr.qubit)
            else:
                p1 = state.prob_one(instr.qubit)
                outcome = int(collapse_rng.random() < p1)
                _project(state, instr.qubit, outcome)
                shot_bits.setdefault(instr.register, []).append(outcome)
        elif isinstance(instr, Reset):
            _project(state, instr.qubit, 0, err="reset")
        else:
            state.amplitudes = rxy_embed(instr, state.n_qubits) @ state.amplitudes


def rxy_embed(instr, n_qubits: int) -> np.ndarray:
    return slot_unitary(TimeSlot((instr,)), n_qubits)


def _project(state: StateVector, qubit: int, outcome: int, err: str = "measurement") -> None:
    idx = np.arange(len(state.amplitudes))
    keep = ((idx >> qubit) & 1) == outcome
    prob = float(np.sum(np.abs(state.amplitudes[keep]) ** 2))
    if prob < 1e-12:
        raise InvalidProgram(f"{err} outcome {outcome} on q{qubit} has probability {prob:.3e}")
    state.amplitudes = np.where(keep, state.amplitudes, 0.0) / math.sqrt(prob)


# --- noisy backend ---------------------------------------------------------------


def _embed_kraus(K: np.ndarray, qubit: int, n_qubits: int) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for q in range(n_qubits - 1, -1, -1):
        out = np.kron(out, K if q == qubit else np.eye(2, dtype=complex))
    return out


def _apply_kraus(rho: np.ndarray, ops: list[np.ndarray]) -> np.ndarray:
    return sum(K @ rho @ K.conj().T for K in ops)


def _noise_channels(noise: NoiseParams, qubit: int, duration: float,
                    n_qubits: int) -> list[list[np.ndarray]]:
    if duration <= 0.0:
        return []
    channels = []
    p = 1.0 - math.exp(-duration / noise.t1[qubit])
    if p > 0.0:
        k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
        k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
        channels.append([_embed_kraus(k0, qubit, n_qubits), _embed_kraus(k1, qubit, n_qubits)])
    # pure dephasing rate: 1/Tphi = 1/T2 - 1/(2 T1)
    rate = 1.0 / noise.t2[qubit] - 0.5 / noise.t1[qubit]
    flip = (1.0 - math.exp(-duration * rate)) / 2.0 if rate > 0 else 0.0
    if flip > 0.0:
        ki = math.sqrt(1 - flip) * np.eye(2, dtype=complex)
        kz = math.sqrt(flip) * _PAULI_Z
        channels.append([_embed_kraus(ki, qubit, n_qubits), _embed_kraus(kz, qubit, n_qubits)])
    return channels


def run_noisy(program: QuantumProgram, noise: NoiseParams, mode: str = "exact",
              n_avg: int = 1000, seed: int | None = None,
              check_invariants: bool = False) -> MeasurementRecord:
    """Execute on the density-matrix backend with T1/T2 decay after every slot."""
    _validate_program(program)
    if len(noise.t1) < program.n_qubits:
        raise InvalidNoise(f"noise parameters cover {len(noise.t1)} qubits, "
                           f"program uses {program.n_qubits}")
    if mode == "exact":
        rho = DensityMatrix.ground(program.n_qubits)
        registers: dict = {}
        for s in program.slots:
            _noisy_apply_slot(rho, s, noise, registers)
            if check_invariants:
                rho.validate()
        return MeasurementRecord(mode="exact", registers=registers)
    if mode != "sampled":
        raise InvalidProgram(f"unknown measurement mode {mode!r}")

    rng = np.random.default_rng(seed)
    if _measures_are_terminal(program):
        rho = DensityMatrix.ground(program.n_qubits)
        measures: list[Measure] = []
        for s in program.slots:
            if any(isinstance(i, Measure) for i in s.instructions):
                measures.extend(s.instructions)
                _apply_slot_noise(rho, s, noise)
            else:
                _noisy_apply_slot(rho, s, noise, {})
            if check_invariants:
                rho.validate()
        probs = np.real(np.diag(rho.entries)).clip(min=0.0)
        probs = probs / probs.sum()
        outcomes = rng.choice(len(probs), size=n_avg, p=probs)
        registers = {m.register: ((outcomes >> m.qubit) & 1).tolist() for m in measures}
    else:
        bits: dict[str, list[int]] = {}
        for _ in range(n_avg):
            rho = DensityMatrix.ground(program.n_qubits)
            for s in program.slots:
                _noisy_apply_slot(rho, s, noise, {}, collapse_rng=rng, shot_bits=bits)
        registers = dict(bits)
    return MeasurementRecord(mode="sampled", registers=registers, n_avg=n_avg, seed=seed)


def _apply_slot_noise(rho: DensityMatrix, s: TimeSlot, noise: NoiseParams) -> None:
    duration = noise.slot_duration(s)
    for q in range(rho.n_qubits):
        for channel in _noise_channels(noise, q, duration, rho.n_qubits):
            rho.entries = _apply_kraus(rho.entries, channel)


def _noisy_apply_slot(rho: DensityMatrix, s: TimeSlot, noise: NoiseParams,
                      registers: dict, collapse_rng=None, shot_bits=None) -> None:
    if s.is_unitary():
        U = slot_unitary(s, rho.n_qubits)
        rho.entries = U @ rho.entries @ U.conj().T
    else:
        for instr in s.instructions:
            if isinstance(instr, Measure):
                p1 = rho.prob_one(instr.qubit)
                if collapse_rng is None:
                    registers[instr.register] = p1
                else:
                    outcome = int(collapse_rng.random() < p1)
                    _project_rho(rho, instr.qubit, outcome)
                    shot_bits.setdefault(instr.register, []).append(outcome)
            elif isinstance(instr, Reset):
                # trace out the qubit and re-prepare |0>
                k0 = np.array([[1, 0], [0, 0]], dtype=complex)
                k1 = np.array([[0, 1], [0, 0]], dtype=complex)
                rho.entries = _apply_kraus(rho.entries, [
                    _embed_kraus(k0, instr.qubit, rho.n_qubits),
                    _embed_kraus(k1, instr.qubit, rho.n_qubits)])
            else:
                U = rxy_embed(instr, rho.n_qubits)
                rho.entries = U @ rho.entries @ U.conj().T
    _apply_slot_noise(rho, s, noise)


def _project_rho(rho: DensityMatrix, qubit: int, outcome: int) -> None:
    dim = 1 << rho.n_qubits
    idx = np.arange(dim)
    keep = ((idx >> qubit) & 1) == outcome
    P = np.diag(keep.astype(complex))
    projected = P @ rho.entries @ P
    prob = float(np.trace(projected).real)
    if prob < 1e-12:
        raise InvalidProgram(f"measurement outcome {outcome} on q{qubit} has "
                             f"probability {prob:.3e}")
    rho.entries = projected / prob


# --- spin-chain Hamiltonian and exact evolution -------------------------------------


def _two_qubit_pauli(op0: np.ndarray | None, op1: np.ndarray | None) -> np.ndarray:
    eye = np.eye(2, dtype=complex)
    return np.kron(op1 if op1 is not None else eye, op0 if op0 is not None else eye)


def hamiltonian_matrix(w: float, h0x: float, h0z: float, h1x: float, h1z: float) -> np.ndarray:
    """Two-spin nearest-neighbor Heisenberg exchange plus disordered x/z fields.

    H = sigma0.sigma1 + w*(h0x X0 + h1x X1 + h0z Z0 + h1z Z1), qubit 0 = LSB.
    """
    H = (_two_qubit_pauli(_PAULI_X, _PAULI_X)
         + _two_qubit_pauli(_PAULI_Y, _PAULI_Y)
         + _two_qubit_pauli(_PAULI_Z, _PAULI_Z))
    H = H + w * (h0x * _two_qubit_pauli(_PAULI_X, None)
                 + h1x * _two_qubit_pauli(None, _PAULI_X)
                 + h0z * _two_qubit_pauli(_PAULI_Z, None)
                 + h1z * _two_qubit_pauli(None, _PAULI_Z))
    return H


def evolution_operator(H: np.ndarray, t: float) -> np.ndarray:
    """exp(-iHt) via eigendecomposition, with a unitarity self-check at 1e-12."""
    if np.max(np.abs(H - H.conj().T)) > 1e-12:
        raise NotHermitian("Hamiltonian must be Hermitian")
    evals, evecs = np.linalg.eigh(H)
    U = evecs @ np.diag(np.exp(-1j * evals * t)) @ evecs.conj().T
    defect = np.max(np.abs(U.conj().T @ U - np.eye(len(evals))))
    if defect > 1e-12:
        raise NotHermitian(f"propagator unitarity defect {defect:.3e}")
    return U


def exact_evolution(H: np.ndarray, t: float, initial: StateVector) -> StateVector:
    """exp(-iHt)|initial>; this eigendecomposition route is the oracle for
    every Trotter-convergence check."""
    return StateVector(initial.n_qubits, evolution_operator(H, t) @ initial.amplitudes)


# --- Bloch-sphere utilities -----------------------------------------------------------


@dataclass(frozen=True)
class BlochVector:
    theta: float
    phi: float


def bloch_angles(state: StateVector | np.ndarray) -> BlochVector:
    """(theta, phi) of a normalized single-qubit pure state.

    theta = 2*arccos(|a0|); phi = arg(a1) - arg(a0) mod 2*pi, defined as 0 at
    the poles.
    """
    amps = state.amplitudes if isinstance(state, StateVector) else np.asarray(state, complex)
    if amps.shape != (2,):
        raise NotNormalized("expected a single-qubit state")
    if abs(float(np.sum(np.abs(amps) ** 2)) - 1.0) > 1e-10:
        raise NotNormalized("state is not normalized")
    a0 = min(1.0, abs(amps[0]))
    theta = 2.0 * math.acos(a0)
    if math.sin(theta / 2.0) < 1e-12:
        return BlochVector(theta=theta, phi=0.0)
    phi = (np.angle(amps[1]) - np.angle(amps[0])) % (2 * math.pi)
    return BlochVector(theta=theta, phi=float(phi))


def rotation_trajectory(key: RotationKey, n_steps: int = 20) -> list[BlochVector]:
    """Bloch angles of Rxy(phi, gamma*s/n)|0> for s = 0..n_steps."""
    if n_steps < 1:
        raise ValidationError("n_steps must be >= 1")
    ground = np.array([1.0, 0.0], dtype=complex)
    points = []
    for s in range(n_steps + 1):
        partial = RotationKey.make(key.phi, key.gamma * s / n_steps)
        points.append(bloch_angles(rxy_matrix(partial) @ ground))
    return points
