"""Disorder-induced metal-insulator transition workload.

One disorder realization draws four field strengths h uniformly from [-1, 1].
The z-type disorder is carried along y (the generator works in the frame where
z has been rotated to y, which turns the two disorder Rz gates into
single-pulse Ry rotations), so a realization stores h0x, h0y, h1x, h1y.

The memory-retention observable is the imbalance I = P0 - P1, with Pj the
probability of finding qubit j in |1>.  Starting from q0=|1>, q1=|0> it is 1,
stays near a nonzero plateau in the strongly disordered (insulating) phase and
oscillates away in the weakly disordered (metallic) phase.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import compiler, simulator, wavemem
from .compiler import CNOT, CRx, Rx, Rz, SourceProgram
from .errors import CapacityExceeded, OutOfRange, StepOutOfRange, ValidationError
from .isa import (CZ, Measure, QuantumProgram, Reset, RotationKey, Rxy, TimeSlot,
                  program_segment_unitary, slot)
from .simulator import NoiseParams, StateVector, hamiltonian_matrix

HALF_PI = math.pi / 2
DEFAULT_TAU = 0.04 * math.pi


@dataclass(frozen=True)
class DisorderRealization:
    """One random disorder configuration of the two-spin chain."""

    w: float
    tau: float
    n_steps: int
    h0x: float
    h0y: float
    h1x: float
    h1y: float
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValidationError("tau must be positive")
        if self.n_steps < 0:
            raise ValidationError("n_steps must be >= 0")
        for name in ("h0x", "h0y", "h1x", "h1y"):
            if abs(getattr(self, name)) > 1.0:
                raise ValidationError(f"{name} must lie in [-1, 1]")

    def to_json_dict(self) -> dict:
        return {"w": self.w, "seed": self.seed, "h0x": self.h0x, "h0y": self.h0y,
                "h1x": self.h1x, "h1y": self.h1y}


def sample_disorder(w: float, tau: float, n_steps: int,
                    rng: np.random.Generator, seed: int = 0) -> DisorderRealization:
    """Draw h0x, h0y, h1x, h1y independently and uniformly from [-1, 1]."""
    h0x, h0y, h1x, h1y = rng.uniform(-1.0, 1.0, 4)
    return DisorderRealization(w=w, tau=tau, n_steps=n_steps, h0x=float(h0x),
                               h0y=float(h0y), h1x=float(h1x), h1y=float(h1y),
                               seed=seed)


def _check_step(r: DisorderRealization, k: int) -> None:
    if not 0 <= k <= r.n_steps:
        raise StepOutOfRange(f"k = {k} outside 0..{r.n_steps}")


def build_source_circuit(r: DisorderRealization, k: int) -> SourceProgram:
    """Source-level circuit for step k: prepare q0=|1>, k evolution intervals,
    measure both.

    The h^z angles carry the realization's h^y values (to be reinterpreted by
    the frame-rotation pass).  cnot q1,q0 flips q1 conditioned on q0; the
    controlled rotation acts on q0 conditioned on q1: together with the fixed
    rz(2*tau) on q1 one interval realizes the exchange coupling exactly, and
    the remaining single-qubit rotations the disorder fields.
    """
    _check_step(r, k)
    w, tau = r.w, r.tau
    slots = [slot(Reset(0)), slot(Reset(1)), slot(Rx(0, math.pi))]
    for _ in range(k):
        slots.append(slot(CNOT(1, 0)))
        slots.append(slot(Rz(0, 2 * w * r.h0y * tau), Rz(1, 2 * tau)))
        slots.append(slot(CRx(4 * tau, 0, 1)))
        slots.append(slot(CNOT(1, 0)))
        slots.append(slot(Rz(1, 2 * w * r.h1y * tau)))
        slots.append(slot(Rx(0, 2 * w * r.h0x * tau), Rx(1, 2 * w * r.h1x * tau)))
    slots.append(slot(Measure(0, "q0mZ"), Measure(1, "q1mZ")))
    return SourceProgram(n_qubits=2, slots=tuple(slots))


def _interval_slots(r: DisorderRealization) -> list[TimeSlot]:
    """One native evolution interval: 10 single-qubit rotations and 4 cZ."""
    w, tau = r.w, r.tau
    key = RotationKey.make
    return [
        slot(Rxy(0, key(HALF_PI, 2 * w * r.h0y * tau)), Rxy(1, key(HALF_PI, -HALF_PI))),
        slot(CZ(1, 0)),
        slot(Rxy(1, key(HALF_PI, -HALF_PI))),
        slot(Rxy(1, key(tau - HALF_PI, math.pi))),
        slot(CZ(0, 1)),
        slot(Rxy(0, key(0.0, -2 * tau))),
        slot(CZ(0, 1)),
        slot(Rxy(0, key(0.0, 2 * tau)), Rxy(1, key(HALF_PI, -HALF_PI))),
        slot(CZ(1, 0)),
        slot(Rxy(1, key(HALF_PI, HALF_PI + 2 * w * r.h1y * tau))),
        slot(Rxy(0, key(0.0, 2 * w * r.h0x * tau)), Rxy(1, key(0.0, 2 * w * r.h1x * tau))),
    ]


def build_native_circuit(r: DisorderRealization, k: int) -> QuantumProgram:
    """Native circuit for step k, as the coprocessor runs it.

    Prologue rotates the prepared state into the working frame, every interval
    is 10 Rxy + 4 cZ, the epilogue rotates back before parallel measurement.
    """
    _check_step(r, k)
    key = RotationKey.make
    slots = [slot(Reset(0)), slot(Reset(1)),
             slot(Rxy(0, key(0.0, HALF_PI)), Rxy(1, key(0.0, -HALF_PI)))]
    for _ in range(k):
        slots.extend(_interval_slots(r))
    slots.append(slot(Rxy(0, key(0.0, HALF_PI)), Rxy(1, key(0.0, HALF_PI))))
    slots.append(slot(Measure(0, "q0mZ"), Measure(1, "q1mZ")))
    return QuantumProgram(n_qubits=2, slots=tuple(slots))


def trotter_interval_unitary(r: DisorderRealization) -> np.ndarray:
    """Unitary of one native interval, conjugated back to the z frame.

    Comparable (up to O(tau^2) Trotter error and global phase) to
    exp(-i H tau) with H = hamiltonian_matrix(w, h0x, h0y, h1x, h1y).
    """
    interval = QuantumProgram(n_qubits=2, slots=tuple(_interval_slots(r)))
    U = program_segment_unitary(interval)
    v = compiler.source_gate_unitary(Rx(0, -HALF_PI), 1)  # 2x2 Rx(-pi/2)
    V = np.kron(v, v)
    return V.conj().T @ U @ V


def imbalance(p0: float, p1: float) -> float:
    """I = P0 - P1."""
    if not (0.0 <= p0 <= 1.0 and 0.0 <= p1 <= 1.0):
        raise OutOfRange(f"probabilities must lie in [0, 1], got ({p0}, {p1})")
    return p0 - p1


@dataclass(frozen=True)
class GateCensus:
    single_qubit: int
    two_qubit: int
    measures: int
    resets: int

    @property
    def per_kind(self) -> dict:
        return {"rxy": self.single_qubit, "cz": self.two_qubit,
                "measure": self.measures, "reset": self.resets}


def gate_census(program: QuantumProgram) -> GateCensus:
    """Count native instructions by kind (measure/reset reported separately)."""
    counts = {"rxy": 0, "cz": 0, "measure": 0, "reset": 0}
    for instr in program.instructions():
        if isinstance(instr, Rxy):
            counts["rxy"] += 1
        elif isinstance(instr, CZ):
            counts["cz"] += 1
        elif isinstance(instr, Measure):
            counts["measure"] += 1
        else:
            counts["reset"] += 1
    return GateCensus(single_qubit=counts["rxy"], two_qubit=counts["cz"],
                      measures=counts["measure"], resets=counts["reset"])


# --- experiment runner -----------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    w_values: tuple = (1.0, 25.0)
    n_realizations: int = 60
    tau: float = DEFAULT_TAU
    n_steps: int = 10
    master_seed: int = 2034
    backend: str = "ideal"
    noise: NoiseParams | None = None
    measurement_mode: str = "exact"
    n_avg: int = 1000
    capacity: int = 128
    share_realizations_across_w: bool = False

    def __post_init__(self):
        if self.n_realizations < 1:
            raise ValidationError("n_realizations must be >= 1")
        if self.backend not in ("ideal", "noisy"):
            raise ValidationError(f"unknown backend {self.backend!r}")
        if self.measurement_mode not in ("exact", "sampled"):
            raise ValidationError(f"unknown measurement mode {self.measurement_mode!r}")

    _JSON_FIELDS = ("w_values", "n_realizations", "tau_over_pi", "n_steps",
                    "master_seed", "backend", "noise", "measurement_mode",
                    "n_avg", "capacity", "share_realizations_across_w")

    @staticmethod
    def from_json_dict(data: dict) -> "ExperimentConfig":
        """Strict loader: unknown fields are rejected, angles are in units of pi."""
        unknown = set(data) - set(ExperimentConfig._JSON_FIELDS)
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        kwargs: dict = {}
        if "w_values" in data:
            kwargs["w_values"] = tuple(float(w) for w in data["w_values"])
        if "tau_over_pi" in data:
            kwargs["tau"] = float(data["tau_over_pi"]) * math.pi
        for name in ("n_realizations", "n_steps", "master_seed", "n_avg", "capacity"):
            if name in data:
                kwargs[name] = int(data[name])
        for name in ("backend", "measurement_mode"):
            if name in data:
                kwargs[name] = str(data[name])
        if "share_realizations_across_w" in data:
            kwargs["share_realizations_across_w"] = bool(data["share_realizations_across_w"])
        noise = data.get("noise")
        if noise is not None:
            known = {"t1", "t2", "single_qubit_gate_duration", "cz_duration"}
            unknown = set(noise) - known
            if unknown:
                raise ValidationError(f"unknown noise fields: {sorted(unknown)}")
            kwargs["noise"] = NoiseParams(
                t1=tuple(float(x) for x in noise["t1"]),
                t2=tuple(float(x) for x in noise["t2"]),
                single_qubit_gate_duration=float(
                    noise.get("single_qubit_gate_duration", 20e-9)),
                cz_duration=float(noise.get("cz_duration", 40e-9)))
        return ExperimentConfig(**kwargs)

    def to_json_dict(self) -> dict:
        body = {
            "w_values": [float(w) for w in self.w_values],
            "n_realizations": self.n_realizations,
            "tau_over_pi": round(self.tau / math.pi, 12),
            "n_steps": self.n_steps,
            "master_seed": self.master_seed,
            "backend": self.backend,
            "measurement_mode": self.measurement_mode,
            "n_avg": self.n_avg,
            "capacity": self.capacity,
            "share_realizations_across_w": self.share_realizations_across_w,
        }
        if self.noise is not None:
            body["noise"] = {
                "t1": list(self.noise.t1), "t2": list(self.noise.t2),
                "single_qubit_gate_duration": self.noise.single_qubit_gate_duration,
                "cz_duration": self.noise.cz_duration,
            }
        return body


def derive_seed(master_seed: int, w_index: int, realization_index: int) -> int:
    """Stable integer seed for one realization's RNG stream."""
    ss = np.random.SeedSequence((master_seed, w_index, realization_index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ImbalanceSeries:
    """Imbalance vs Trotter step, per realization and averaged across them."""

    w: float
    mean: tuple
    stderr: tuple
    per_realization: tuple  # tuple of per-realization tuples, I(k) for k = 0..N

    def __post_init__(self):
        for row in self.per_realization + (self.mean,):
            for value in row:
                if abs(value) > 1.0 + 1e-9:
                    raise ValidationError(f"imbalance {value} outside [-1, 1]")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    series: dict                      # w -> ImbalanceSeries
    page_reports: list = field(default_factory=list)  # (w, realization, k, PageReport)
    realizations: dict = field(default_factory=dict)  # w -> list[DisorderRealization]
    total_loads: int = 0
    total_hits: int = 0

    def paging_summary(self) -> dict:
        return {"total_loads": self.total_loads, "total_hits": self.total_hits,
                "capacity": self.config.capacity}


def _execute(program: QuantumProgram, config: ExperimentConfig, shot_seed: int):
    if config.backend == "ideal":
        return simulator.run_ideal(program, mode=config.measurement_mode,
                                   n_avg=config.n_avg, seed=shot_seed)
    noise = config.noise if config.noise is not None else NoiseParams.octobox_defaults()
    return simulator.run_noisy(program, noise, mode=config.measurement_mode,
                               n_avg=config.n_avg, seed=shot_seed)


def run_experiment(config: ExperimentConfig, rct: wavemem.RCT | None = None,
                   qos: wavemem.QOSRegistry | None = None) -> ExperimentResult:
    """Run the full disorder sweep.

    For every w and realization, each Trotter step k = 0..N is built as its
    own program, paged through the shared waveform context in canonical order
    (w index, realization index, k), executed, and reduced to the imbalance.
    Deterministic for a given master seed.
    """
    rct = rct if rct is not None else wavemem.RCT(capacity=config.capacity)
    qos = qos if qos is not None else wavemem.QOSRegistry()
    evict_rng = np.random.default_rng(derive_seed(config.master_seed, 0xE, 0xE))
    result = ExperimentResult(config=config, series={})

    for w_index, w in enumerate(config.w_values):
        per_real: list[tuple] = []
        realizations: list[DisorderRealization] = []
        for i in range(config.n_realizations):
            seed_index = 0 if config.share_realizations_across_w else w_index
            seed = derive_seed(config.master_seed, seed_index, i)
            r = sample_disorder(w, config.tau, config.n_steps,
                                np.random.default_rng(seed), seed=seed)
            realizations.append(r)
            curve = []
            for k in range(config.n_steps + 1):
                program = build_native_circuit(r, k)
                wavemem.dgs_scan(program, qos)
                try:
                    _, report = wavemem.page_update(program, rct, evict_rng)
                except CapacityExceeded as exc:
                    raise CapacityExceeded(
                        f"w={w:g} realization {i} (seed {r.seed}) k={k}: {exc}") from exc
                result.page_reports.append((w, i, k, report))
                result.total_loads += len(report.loaded)
                result.total_hits += report.hits
                record = _execute(program, config, shot_seed=derive_seed(seed, 0, k))
                probs = record.probabilities()
                curve.append(imbalance(probs["q0mZ"], probs["q1mZ"]))
            per_real.append(tuple(curve))
        matrix = np.array(per_real)
        mean = matrix.mean(axis=0)
        if config.n_realizations > 1:
            stderr = matrix.std(axis=0, ddof=1) / math.sqrt(config.n_realizations)
        else:
            stderr = np.zeros_like(mean)
        result.series[w] = ImbalanceSeries(
            w=w, mean=tuple(float(x) for x in mean),
            stderr=tuple(float(x) for x in stderr),
            per_realization=tuple(per_real))
        result.realizations[w] = realizations
    return result


# --- serialization (CSV / JSON surfaces) -----------------------------------------


def experiment_csv(result: ExperimentResult) -> str:
    """Rows of (w, k, imbalance_mean, imbalance_stderr, n_realizations)."""
    lines = ["w,k,imbalance_mean,imbalance_stderr,n_realizations"]
    for w in result.config.w_values:
        series = result.series[w]
        for k, (m, s) in enumerate(zip(series.mean, series.stderr)):
            lines.append(f"{float(w)!r},{k},{float(m)!r},{float(s)!r},"
                         f"{result.config.n_realizations}")
    return "\n".join(lines) + "\n"


def experiment_json(result: ExperimentResult) -> str:
    body = {repr(float(w)): {"mean": list(result.series[w].mean),
                             "stderr": list(result.series[w].stderr)}
            for w in result.config.w_values}
    return json.dumps({"n_realizations": result.config.n_realizations,
                       "imbalance": body}, indent=2, sort_keys=True)


def realizations_json(result: ExperimentResult) -> str:
    """Per-realization dump: disorder fields and the imbalance curve."""
    rows = []
    for w in result.config.w_values:
        series = result.series[w]
        for r, curve in zip(result.realizations[w], series.per_realization):
            rows.append({**r.to_json_dict(), "I": list(curve)})
    return json.dumps(rows, indent=2)


def exact_imbalance_curve(r: DisorderRealization) -> list[float]:
    """Imbalance under the exact (non-Trotterized) evolution, via the
    eigendecomposition oracle; reference curve for convergence studies."""
    H = hamiltonian_matrix(r.w, r.h0x, r.h0y, r.h1x, r.h1y)
    initial = StateVector(2, np.array([0, 1, 0, 0], dtype=complex))  # q0=|1>, q1=|0>
    curve = []
    for k in range(r.n_steps + 1):
        state = simulator.exact_evolution(H, k * r.tau, initial)
        curve.append(imbalance(state.prob_one(0), state.prob_one(1)))
    return curve
