"""Command-line front end.

Subcommands: gen, compile, run, experiment, trajectory, paging-report.
Every command is deterministic given its full flag set (seeds included).

Exit codes: 0 success, 2 parse error, 3 validation error, 4 codeword capacity
exceeded, 5 golden-record mismatch, 6 I/O failure, 1 anything else.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, compiler, isa, simulator, wavemem, workload
from .errors import (CapacityExceeded, GoldenConfigError, GoldenMismatch,
                     ParseError, QcoprocError, ValidationError)

EXIT_CODES = (
    (ParseError, 2),
    (ValidationError, 3),
    (CapacityExceeded, 4),
    (GoldenMismatch, 5),
)


def _write(path: str, text: str) -> None:
    Path(path).write_text(text)


def config_hash(config: workload.ExperimentConfig) -> str:
    canonical = json.dumps(config.to_json_dict(), sort_keys=True)
    return hashlib.sha256(canonical.encode()).hexdigest()


def _realization_from_args(args) -> workload.DisorderRealization:
    tau = args.tau_over_pi * math.pi
    if args.seed is not None:
        rng = np.random.default_rng(args.seed)
        r = workload.sample_disorder(args.w, tau, args.n_steps, rng, seed=args.seed)
    else:
        missing = [n for n in ("h0x", "h0y", "h1x", "h1y") if getattr(args, n) is None]
        if missing:
            raise ValidationError(f"give --seed or all of --h0x/--h0y/--h1x/--h1y "
                                  f"(missing {missing})")
        r = workload.DisorderRealization(w=args.w, tau=tau, n_steps=args.n_steps,
                                         h0x=args.h0x, h0y=args.h0y,
                                         h1x=args.h1x, h1y=args.h1y, seed=0)
    overrides = {n: getattr(args, n) for n in ("h0x", "h0y", "h1x", "h1y")
                 if getattr(args, n) is not None}
    if overrides and args.seed is not None:
        r = workload.DisorderRealization(**{**r.__dict__, **overrides})
    return r


def cmd_gen(args) -> int:
    r = _realization_from_args(args)
    program = workload.build_native_circuit(r, args.k)
    text = isa.emit_program(program)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_compile(args) -> int:
    source = compiler.parse_source_program(Path(args.infile).read_text())
    passes = args.passes.split(",") if args.passes else list(compiler.PASSES)
    compiled = compiler.run_passes(source, passes)
    text = compiler.emit_source_program(compiled)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    try:
        U = compiler.source_program_unitary(source)
        V = compiler.source_program_unitary(compiled)
        report = compiler.equivalence_check(U, V, tol=args.tolerance)
        print(f"phase-invariant distance: {report.phase_invariant_distance:.3e} "
              f"(equivalent at {report.tolerance:g}: {report.equivalent})",
              file=sys.stderr)
    except QcoprocError:
        pass  # programs with measure/reset have no circuit unitary to compare
    return 0


def cmd_run(args) -> int:
    program = isa.parse_program(Path(args.infile).read_text())
    if args.backend == "ideal":
        record = simulator.run_ideal(program, mode=args.mode, n_avg=args.n_avg,
                                     seed=args.seed)
    else:
        noise = _noise_from_args(args)
        record = simulator.run_noisy(program, noise, mode=args.mode,
                                     n_avg=args.n_avg, seed=args.seed)
    text = json.dumps(record.to_json_dict(), indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _noise_from_args(args) -> simulator.NoiseParams:
    if args.t1 is None and args.t2 is None:
        return simulator.NoiseParams.octobox_defaults()
    if args.t1 is None or args.t2 is None:
        raise ValidationError("--t1 and --t2 must be given together")
    return simulator.NoiseParams(t1=tuple(args.t1), t2=tuple(args.t2))


def _load_config(args) -> workload.ExperimentConfig:
    data = json.loads(Path(args.config).read_text())
    config = workload.ExperimentConfig.from_json_dict(data)
    overrides = {}
    if getattr(args, "backend", None):
        overrides["backend"] = args.backend
    if getattr(args, "capacity", None):
        overrides["capacity"] = args.capacity
    if overrides:
        config = workload.ExperimentConfig(**{**config.__dict__, **overrides})
    return config


def _golden_dict(config: workload.ExperimentConfig,
                 result: workload.ExperimentResult) -> dict:
    return {
        "config_hash": config_hash(config),
        "tool_version": __version__,
        "values": {repr(float(w)): list(result.series[w].mean)
                   for w in config.w_values},
    }


def compare_golden(config: workload.ExperimentConfig,
                   result: workload.ExperimentResult, golden: dict,
                   tol: float = 1e-9) -> None:
    if golden.get("config_hash") != config_hash(config):
        raise GoldenConfigError("golden record was produced under a different config")
    offending = []
    for w in config.w_values:
        recorded = golden["values"][repr(float(w))]
        for k, (a, b) in enumerate(zip(result.series[w].mean, recorded)):
            if abs(a - b) > tol:
                offending.append((float(w), k, a, b))
    if offending:
        listing = ", ".join(f"(w={w:g}, k={k}: {a!r} != {b!r})"
                            for w, k, a, b in offending)
        raise GoldenMismatch(f"golden mismatch at {listing}")


def cmd_experiment(args) -> int:
    config = _load_config(args)
    result = workload.run_experiment(config)
    out_dir = Path(args.out or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.format == "json":
        _write(str(out_dir / "imbalance.json"), workload.experiment_json(result))
    else:
        _write(str(out_dir / "imbalance.csv"), workload.experiment_csv(result))
    _write(str(out_dir / "paging.json"),
           json.dumps(result.paging_summary(), indent=2, sort_keys=True) + "\n")
    if args.dump_realizations:
        _write(str(out_dir / "realizations.json"), workload.realizations_json(result))
    if args.write_golden:
        _write(args.write_golden,
               json.dumps(_golden_dict(config, result), indent=2, sort_keys=True) + "\n")
    if args.golden:
        golden = json.loads(Path(args.golden).read_text())
        compare_golden(config, result, golden)
        print("golden record matched", file=sys.stderr)
    return 0


def cmd_trajectory(args) -> int:
    key = isa.RotationKey.from_pi_units(args.phi_over_pi, args.gamma_over_pi)
    points = simulator.rotation_trajectory(key, n_steps=args.steps)
    if args.format == "json":
        text = json.dumps([{"step": s,
                            "theta_over_pi": p.theta / math.pi,
                            "phi_over_pi": p.phi / math.pi}
                           for s, p in enumerate(points)], indent=2) + "\n"
    else:
        lines = ["step,theta_over_pi,phi_over_pi"]
        lines += [f"{s},{float(p.theta / math.pi)!r},{float(p.phi / math.pi)!r}"
                  for s, p in enumerate(points)]
        text = "\n".join(lines) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_paging_report(args) -> int:
    """Replay the experiment's program sequence through the waveform memory only."""
    config = _load_config(args)
    rct = wavemem.RCT(capacity=config.capacity)
    qos = wavemem.QOSRegistry()
    evict_rng = np.random.default_rng(workload.derive_seed(config.master_seed, 0xE, 0xE))
    runs = []
    total_loads = total_hits = 0
    for w_index, w in enumerate(config.w_values):
        for i in range(config.n_realizations):
            seed_index = 0 if config.share_realizations_across_w else w_index
            seed = workload.derive_seed(config.master_seed, seed_index, i)
            r = workload.sample_disorder(w, config.tau, config.n_steps,
                                         np.random.default_rng(seed), seed=seed)
            for k in range(config.n_steps + 1):
                program = workload.build_native_circuit(r, k)
                wavemem.dgs_scan(program, qos)
                _, report = wavemem.page_update(program, rct, evict_rng)
                total_loads += len(report.loaded)
                total_hits += report.hits
                runs.append({"w": float(w), "realization": i, "k": k,
                             **report.to_json_dict()})
    body = {"capacity": config.capacity, "total_loads": total_loads,
            "total_hits": total_hits, "runs": runs}
    text = json.dumps(body, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcoproc",
                                     description="two-qubit coprocessor toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a native disorder-evolution circuit")
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n-steps", type=int, default=10)
    p.add_argument("--tau-over-pi", type=float, default=0.04)
    p.add_argument("--seed", type=int, default=None)
    for h in ("h0x", "h0y", "h1x", "h1y"):
        p.add_argument(f"--{h}", type=float, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("compile", help="run compiler passes over a source program")
    p.add_argument("infile")
    p.add_argument("--passes", default=None,
                   help="comma list from: frame-rotate,lower,schedule (default: all)")
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="execute a native program")
    p.add_argument("infile")
    p.add_argument("--backend", choices=("ideal", "noisy"), default="ideal")
    p.add_argument("--mode", choices=("exact", "sampled"), default="exact")
    p.add_argument("--n-avg", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--t1", type=float, nargs="+", default=None)
    p.add_argument("--t2", type=float, nargs="+", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("experiment", help="run the full disorder sweep")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--backend", choices=("ideal", "noisy"), default=None)
    p.add_argument("--capacity", type=int, default=None)
    p.add_argument("--golden", default=None, help="compare against a golden record")
    p.add_argument("--write-golden", default=None, help="write a golden record")
    p.add_argument("--dump-realizations", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("trajectory", help="Bloch trajectory of one rotation")
    p.add_argument("--phi-over-pi", type=float, required=True)
    p.add_argument("--gamma-over-pi", type=float, required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("paging-report", help="waveform paging trace for a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_paging_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except QcoprocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for err_type, code in EXIT_CODES:
            if isinstance(exc, err_type):
                return code
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 6


if __name__ == "__main__":
    sys.exit(main())
