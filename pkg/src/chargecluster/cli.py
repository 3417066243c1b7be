"""Command-line entry point: ``chargecluster <subcommand> [options]``.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 resource guard exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import engine
from .config import ConfigError, RunConfig, load_config
from .engine import (
    StateVector,
    evolve_dense,
    evolve_diagonal,
    hadamard_all,
    initial_all_zero,
    random_state,
)
from .errors import CalibrationError, DomainError, ResourceError
from .model import IsingXModel, build_chain, build_longrange
from .noise import (
    QubitNoiseProfile,
    cluster_T2,
    rates,
    time_to_json,
)
from .params import calibrate_chain, calibrate_common, effective_ej, epsilon
from .states import closed_form_chain, closed_form_longrange, entanglement_entropy, fidelity
from .sweep import run_chain_sweep, run_common_sweep, run_t2_sweep

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_RESOURCE = 3

GEN_TOL = 1e-9
BENCH_SPEEDUP = 100.0

BUILDERS: dict[str, tuple[Callable[[int, float], IsingXModel], Callable[[int], StateVector]]] = {
    "chain": (build_chain, closed_form_chain),
    "longrange": (build_longrange, closed_form_longrange),
}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _calibrate(cfg: RunConfig, *, strict: bool = True):
    if cfg.topology == "chain":
        return calibrate_chain(
            cfg.qubits, cfg.couplers, cfg.g_target, tune_bias=cfg.tune_bias, tol=cfg.tol, strict=strict
        )
    return calibrate_common(cfg.qubits, cfg.coupler, cfg.n)


def _diag_limit(args) -> int:
    return engine.MAX_DIAGONAL_QUBITS if args.max_qubits is None else args.max_qubits


# ---------------------------------------------------------------- calibrate


def cmd_calibrate(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    try:
        cal = _calibrate(cfg)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        if exc.result is not None:
            _emit(_json(exc.result.to_dict()), args.out)
        return EXIT_FAIL
    status = EXIT_OK if cal.max_residual <= cfg.tol else EXIT_FAIL
    if status:
        print(f"residual {cal.max_residual:.3e} exceeds {cfg.tol:g}", file=sys.stderr)
    _emit(_json(cal.to_dict()), args.out)
    return status


# ---------------------------------------------------------------- generate


def generation_curve(topology: str, n: int, steps: int) -> list[tuple[float, float, float]]:
    """Fidelity with the closed form at gt = 2*pi*k/steps for k = 0..steps-1.

    Works in the x basis, where the evolution is a phase per amplitude and the
    overlap with the target is unchanged by the shared Hadamard transform.
    """
    build, target = BUILDERS[topology]
    m = build(n, 1.0)
    energies = m.x_energies()
    start = hadamard_all(initial_all_zero(n).amplitudes, n)
    goal = hadamard_all(target(n).amplitudes, n)
    rows = []
    for k in range(steps):
        gt = 2 * math.pi * k / steps
        psi = start * np.exp(-1j * energies * gt)
        rows.append((gt, float(abs(np.vdot(goal, psi)) ** 2), float(np.vdot(psi, psi).real)))
    return rows


def cmd_generate(args) -> int:
    topology, n = args.topology, args.n
    if args.config:
        cfg = load_config(args.config, seed=args.seed)
        n = n or cfg.n
        topology = topology or ("chain" if cfg.topology == "chain" else "longrange")
    topology = topology or "chain"
    if n is None:
        raise ConfigError("give --n or a config with N", "/N")
    if n < 2:
        raise ConfigError("cluster generation needs N >= 2", "/N")
    if args.steps < 1:
        raise ConfigError("--steps must be positive", "/steps")
    limit = _diag_limit(args)
    if n > limit:
        raise ResourceError(f"N = {n} exceeds the qubit guard {limit}")
    rows = generation_curve(topology, n, args.steps)
    _emit(_csv(["gt", "fidelity_vs_closed_form", "norm_check"], [[repr(c) for c in r] for r in rows]), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- verify


def verify_one(topology: str, n: int, rng: np.random.Generator, periodicity_states: int) -> dict:
    build, target = BUILDERS[topology]
    m = build(n, 1.0)
    psi0 = initial_all_zero(n)
    ideal = target(n)
    fids = {label: fidelity(evolve_diagonal(psi0, m, k * math.pi, max_qubits=n), ideal)
            for label, k in (("pi", 1), ("3pi", 3), ("5pi", 5))}
    half = fidelity(evolve_diagonal(psi0, m, 0.5 * math.pi, max_qubits=n), ideal)
    period = min(
        fidelity(evolve_diagonal(s, m, 2 * math.pi, max_qubits=n), s)
        for s in (random_state(n, rng) for _ in range(periodicity_states))
    )
    entropies = [entanglement_entropy(ideal, k) for k in range(1, n)]
    checks = {
        "generation": all(f >= 1 - GEN_TOL for f in fids.values()),
        "periodicity": period >= 1 - GEN_TOL,
        # every cut of a connected cluster state carries entanglement
        "entropy": all(e > 0.5 for e in entropies),
    }
    if topology == "chain":
        checks["entropy"] = all(abs(e - 1.0) <= 1e-9 for e in entropies)
    return {
        "topology": topology,
        "n": n,
        "fidelity": fids,
        "fidelity_half_pi": half,
        "periodicity_min_fidelity": period,
        "entropies_bits": entropies,
        "checks": checks,
        "pass": all(checks.values()),
    }


def cmd_verify(args) -> int:
    topologies = [t.strip() for t in args.topologies.split(",") if t.strip()]
    unknown = [t for t in topologies if t not in BUILDERS]
    if unknown:
        raise ConfigError(f"unknown topology {unknown[0]!r}", "/topologies")
    if args.n_min < 2 or args.n_max < args.n_min:
        raise ConfigError(f"bad range {args.n_min}..{args.n_max}", "/n")
    limit = _diag_limit(args)
    if args.n_max > limit:
        raise ResourceError(f"N = {args.n_max} exceeds the qubit guard {limit}")
    rng = np.random.default_rng(0 if args.seed is None else args.seed)
    results = [
        verify_one(t, n, rng, args.random_states)
        for t in topologies
        for n in range(args.n_min, args.n_max + 1)
    ]
    report: dict = {"results": results}
    ok = all(r["pass"] for r in results)
    if args.state:
        try:
            snap = StateVector.from_json(Path(args.state).read_text(encoding="utf-8"))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"unreadable state snapshot: {exc}", "/state") from exc
        if snap.basis != engine.Z_BASIS:
            snap = engine.from_x_basis(snap)
        fids = {t: fidelity(snap, BUILDERS[t][1](snap.n_qubits)) for t in topologies}
        snap_ok = max(fids.values()) >= 1 - GEN_TOL
        report["snapshot"] = {"n": snap.n_qubits, "fidelity": fids, "pass": snap_ok}
        ok = ok and snap_ok
    report["pass"] = ok
    _emit(_json(report), args.out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- decohere


def decoherence_report(cfg: RunConfig) -> dict:
    nz = cfg.noise
    if nz is None:
        raise ConfigError("decohere needs a noise block", "/noise")
    cal = None
    if cfg.n >= 2:
        try:
            cal = _calibrate(cfg, strict=False)
        except CalibrationError as exc:
            cal = exc.result
    if cal is not None and cfg.topology == "chain":
        ebar = list(cal.effective_ej)
    elif cal is not None:
        ebar = [cal.effective_ej[0]] * cfg.n
    else:
        ebar = [effective_ej(q.E_J, q.flux) for q in cfg.qubits]

    per_qubit = []
    if nz.qubit_T2_ns is not None:
        gamma2 = [1.0 / nz.qubit_T2_ns] * cfg.n
        for k in range(cfg.n):
            per_qubit.append({"qubit": k + 1, "gamma1": None, "T_phi": None,
                              "gamma2": gamma2[k], "T2": time_to_json(nz.qubit_T2_ns)})
    else:
        if nz.spectrum is None:
            raise ConfigError("noise block needs a spectrum or qubit_T2_ns", "/noise")
        cache: dict[QubitNoiseProfile, object] = {}
        gamma2 = []
        for k, (q, eb) in enumerate(zip(cfg.qubits, ebar)):
            eps = nz.epsilon_ratio * eb if nz.epsilon_ratio is not None else epsilon(q)
            p = QubitNoiseProfile(eps, eb, nz.spectrum)
            if p not in cache:
                cache[p] = rates(p)
            r = cache[p]
            t_phi = math.inf if r.gamma_phi == 0 else 1.0 / r.gamma_phi
            gamma2.append(r.gamma2)
            per_qubit.append({
                "qubit": k + 1,
                "epsilon": eps,
                "ebar": eb,
                "gamma1": r.gamma1,
                "T_phi": time_to_json(t_phi),
                "gamma2": r.gamma2,
                "T2": time_to_json(math.inf if r.gamma2 == 0 else 1.0 / r.gamma2),
            })

    t2 = cluster_T2(gamma2)
    t_s = nz.t_s_ns if nz.t_s_ns is not None else (cal.t_s if cal is not None else None)
    ratio = None if t_s is None else t2 / t_s
    return {
        "n_qubits": cfg.n,
        "per_qubit": per_qubit,
        "cluster_T2": time_to_json(t2),
        "t_s": t_s,
        "ratio_T2_over_t_s": time_to_json(ratio) if ratio is not None else None,
    }


def _time_cell(d: dict | None) -> str:
    if d is None:
        return ""
    return "inf" if d["infinite"] else repr(d["value"])


def cmd_decohere(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    report = decoherence_report(cfg)
    if args.format == "csv":
        rows = [
            [q["qubit"], "" if q["gamma1"] is None else repr(q["gamma1"]),
             _time_cell(q["T_phi"]), repr(q["gamma2"])]
            for q in report["per_qubit"]
        ]
        text = _csv(["qubit", "gamma1", "T_phi", "gamma2"], rows)
        text += f"# cluster_T2,{_time_cell(report['cluster_T2'])}\n"
        text += f"# ratio_T2_over_t_s,{_time_cell(report['ratio_T2_over_t_s'])}\n"
    else:
        text = _json(report)
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- sweep


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, seed=args.seed)
    v = cfg.variations
    if v is None:
        raise ConfigError("sweep needs a variations block", "/variations")
    reports = {}
    if cfg.topology == "chain":
        if cfg.n < 2:
            raise ConfigError("a chain needs N >= 2", "/N")
        modes = [True, False] if cfg.with_bias == "both" else [cfg.with_bias]
        for mode in modes:
            key = "with_bias" if mode else "without_bias"
            reports[key] = run_chain_sweep(cfg.qubits, cfg.couplers, v, mode, method=cfg.method,
                                           workers=args.workers)
    else:
        reports["common"] = run_common_sweep(cfg.qubits, cfg.coupler, v, method=cfg.method,
                                             workers=args.workers)
    if cfg.noise is not None and cfg.noise.spectrum is not None and cfg.noise.epsilon_ratio is not None:
        cal = _calibrate(cfg, strict=False)
        ebar = list(cal.effective_ej) if cfg.topology == "chain" else [cal.effective_ej[0]] * cfg.n
        profiles = [QubitNoiseProfile(cfg.noise.epsilon_ratio * e, e, cfg.noise.spectrum) for e in ebar]
        reports["t2"] = run_t2_sweep(profiles, v)

    doc = {key: r.to_dict() for key, r in reports.items()}
    if "with_bias" in reports and "without_bias" in reports:
        pairs = [
            (a.fidelity, b.fidelity)
            for a, b in zip(reports["with_bias"].samples, reports["without_bias"].samples)
            if a.ok and b.ok
        ]
        diff = [a - b for a, b in pairs]
        doc["paired"] = {
            "pairs": len(pairs),
            "mean_fidelity_gain": float(np.mean(diff)) if diff else None,
            "with_bias_not_worse": int(sum(d >= -1e-12 for d in diff)),
        }
    if args.out:
        base = Path(args.out)
        base.write_text(_json(doc), encoding="utf-8", newline="\n")
        for key, r in reports.items():
            base.with_name(f"{base.stem}.{key}.csv").write_text(r.to_csv(), encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(_json(doc))
    return EXIT_OK


# ---------------------------------------------------------------- bench


def _best_time(fn, repeat: int) -> float:
    best = math.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_table(n_min: int, n_max: int, repeat: int, dense_limit: int) -> list[dict]:
    rows = []
    for n in range(n_min, n_max + 1):
        m = build_chain(n, 1.0)
        terms = m.terms()
        psi0 = initial_all_zero(n)
        # the first diagonal call fills the model's cached weights; time steady state
        evolve_diagonal(psi0, m, math.pi, max_qubits=n)
        t_diag = _best_time(lambda: evolve_diagonal(psi0, m, math.pi, max_qubits=n), repeat)
        t_dense = None
        if n <= dense_limit:
            t_dense = _best_time(lambda: evolve_dense(psi0, terms, math.pi, max_qubits=n), repeat)
        rows.append({
            "n": n,
            "diagonal_s": t_diag,
            "dense_s": t_dense,
            "speedup": None if t_dense is None else t_dense / t_diag,
        })
    return rows


def cmd_bench(args) -> int:
    limit = _diag_limit(args)
    if args.n_max > limit:
        raise ResourceError(f"N = {args.n_max} exceeds the qubit guard {limit}")
    if args.n_min < 2 or args.n_max < args.n_min:
        raise ConfigError(f"bad range {args.n_min}..{args.n_max}", "/n")
    rows = bench_table(args.n_min, args.n_max, args.repeat, engine.MAX_DENSE_QUBITS)
    at10 = next((r for r in rows if r["n"] == 10 and r["speedup"] is not None), None)
    ok = at10 is None or at10["speedup"] >= BENCH_SPEEDUP
    _emit(_json({"rows": rows, "required_speedup_at_10": BENCH_SPEEDUP, "pass": ok}), args.out)
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--max-qubits", type=int, default=None, dest="max_qubits")

    parser = argparse.ArgumentParser(prog="chargecluster", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", parents=[common], help="solve fluxes and bias currents")
    p.set_defaults(func=cmd_calibrate, needs_config=True)

    p = sub.add_parser("generate", parents=[common], help="fidelity versus gt over one period")
    p.add_argument("--n", type=int)
    p.add_argument("--topology", choices=sorted(BUILDERS))
    p.add_argument("--steps", type=int, default=256)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("verify", parents=[common], help="generation, periodicity and entropy checks")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--topologies", default="chain,longrange")
    p.add_argument("--random-states", type=int, default=10)
    p.add_argument("--state", metavar="PATH", help="state snapshot JSON to check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("decohere", parents=[common], help="per-qubit rates and cluster T2")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_decohere, needs_config=True)

    p = sub.add_parser("sweep", parents=[common], help="Monte Carlo fabrication-spread study")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep, needs_config=True)

    p = sub.add_parser("bench", parents=[common], help="diagonal versus dense timing")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--repeat", type=int, default=3)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    if getattr(args, "needs_config", False) and not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as exc:
        print(f"resource guard: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except DomainError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
