"""Command-line front end: JSON config in, JSON/CSV report out.

Usage::

    fieldlab --config experiment.json [--seed N] [--out path] [--quiet]

The config's ``experiment`` field selects the run kind.  Exit codes:
0 pass, 1 verdict fail, 2 config error.  Reports embed the fully
resolved config and seed, so re-running an emitted config reproduces
the report byte for byte (modulo the timestamp field).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import borntests, deviation
from .detection import (
    DetectorSpec,
    DiscreteObservable,
    detect_discrete,
    detect_local,
    detect_power24_region,
    detect_quadratic_region,
    trace_probability,
)
from .ensembles import mixed_ensemble, pure_ensemble, quantum_state_of
from .fields import ComplexField, WaveFunction, box_state
from .grid import Grid1D, Region, build_grid
from .montecarlo import RunConfig, estimate_detection

EXPERIMENT_KINDS = (
    "born_check",
    "deviation_scan",
    "local_check",
    "discrete_check",
    "stochasticity",
    "interference",
    "tests",
    "average_check",
)


class ConfigError(Exception):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _build_state(spec: dict, grid: Grid1D) -> WaveFunction:
    kind = spec.get("type")
    if kind == "box":
        return box_state(grid)
    if kind == "indicator":
        a, b = spec["interval"]
        return box_state(grid, Region(((float(a), float(b)),)))
    if kind == "step":
        return deviation.build_step_state(float(spec["H"]), float(spec["k"]), grid)
    if kind == "amplitudes":
        pairs = np.asarray(spec["amplitudes"], dtype=np.float64)
        return WaveFunction.normalize(ComplexField(grid, pairs[:, 0] + 1j * pairs[:, 1]))
    raise ConfigError(f"unknown state type {kind!r}")


def _build_grid(spec: dict) -> Grid1D:
    if "step" in spec:
        s = spec["step"]
        return deviation.step_grid(float(s["H"]), float(s["k"]), int(s["n"]))
    return build_grid(float(spec["x_min"]), float(spec["x_max"]), int(spec["n"]))


def _build_ensemble(spec: dict, grid: Grid1D) -> EnsembleSpec:
    states = {ref: _build_state(s, grid) for ref, s in spec["states"].items()}
    components = [(float(c["weight"]), states[c["state_ref"]]) for c in spec["components"]]
    return mixed_ensemble(components, float(spec["kappa"]), spec.get("modulus_model", "gaussian"))


def _run_config(spec: dict, seed_override: int | None) -> RunConfig:
    spec = dict(spec)
    if seed_override is not None:
        spec["seed"] = seed_override
    return RunConfig(
        n_samples=int(spec["n_samples"]),
        seed=int(spec["seed"]),
        n_streams=int(spec.get("n_streams", 1)),
        batch_count=int(spec.get("batch_count", 32)),
    )


def _mc_pass(mean: float, truth: float, stderr: float) -> bool:
    # the floor keeps zero-variance estimates (deterministic selection
    # weights) from failing on float rounding alone
    return abs(mean - truth) <= max(4.0 * stderr, 1e-12)


def run_born_check(cfg: dict, seed_override, out_path, quiet) -> int:
    grid = _build_grid(cfg["grid"])
    ens = _build_ensemble(cfg["ensemble"], grid)
    rho = quantum_state_of(ens)
    mc_cfg = _run_config(cfg["mc"], seed_override) if "mc" in cfg else None
    det = DetectorSpec("quadratic")
    rows = []
    ok = True
    for interval in cfg.get("regions", [[grid.x_min, grid.x_max]]):
        region = Region((tuple(interval),))
        born = detect_quadratic_region(ens, region)
        trace = trace_probability(rho, region)
        row = {"region": list(interval), "born_value": born, "trace_value": trace}
        row_ok = abs(born - trace) <= 1e-10
        if mc_cfg is not None:
            est = estimate_detection(ens, det, region, mc_cfg)
            row["mc_estimate"] = est.mean
            row["mc_stderr"] = est.stderr
            row_ok = row_ok and _mc_pass(est.mean, born, est.stderr)
        row["pass"] = row_ok
        ok = ok and row_ok
        rows.append(row)
    report = _report("born_check", cfg, mc_cfg, {"rows": rows}, ok)
    return _emit_json(report, out_path or cfg.get("out", "born_check.json"), quiet, ok)


def run_deviation_scan(cfg: dict, seed_override, out_path, quiet) -> int:
    h_val = float(cfg.get("H", 1.0))
    k_values = [float(k) for k in cfg.get("k_values", [])]
    kappas = [float(kv) for kv in cfg.get("kappa_values", [])]
    for kv in kappas:
        if kv <= 0:
            raise ConfigError(f"kappa values must be positive, got {kv}")
    model = cfg.get("modulus_model", "phase_only")
    n = int(cfg.get("grid_n", 512))
    mc_cfg = _run_config(cfg["mc"], seed_override) if "mc" in cfg else None

    header = [
        "k", "H", "kappa", "modulus_model", "born_prob", "exact_prob",
        "delta_analytic", "delta_exact", "mc_estimate", "mc_stderr",
    ]
    rows = []
    fit_orders = {}
    for k in k_values:
        grid = deviation.step_grid(h_val, k, n)
        psi = deviation.build_step_state(h_val, k, grid)
        region = Region(((grid.x_min, 0.0),))
        remainders = []
        for kv in kappas:
            ens = pure_ensemble(psi, kv, model)
            born = detect_quadratic_region(ens, region)
            exact = detect_power24_region(ens, region)
            d_analytic = deviation.delta_step_analytic(h_val, k, kv, model)
            d_exact = exact - born
            remainders.append(abs(d_exact - d_analytic))
            mc_mean = mc_stderr = ""
            if mc_cfg is not None:
                est = estimate_detection(ens, DetectorSpec("two_plus_four"), region, mc_cfg)
                mc_mean, mc_stderr = _fmt(est.mean), _fmt(est.stderr)
            rows.append([
                _fmt(k), _fmt(h_val), _fmt(kv), model, _fmt(born), _fmt(exact),
                _fmt(d_analytic), _fmt(d_exact), mc_mean, mc_stderr,
            ])
        if len(kappas) >= 2 and max(kappas) / min(kappas) >= 100 and max(remainders) > 1e-14:
            slope = np.polyfit(np.log(kappas), np.log(remainders), 1)[0]
            fit_orders[k] = float(slope)

    out = out_path or cfg.get("out", "deviation_scan.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    if not quiet:
        for k, slope in sorted(fit_orders.items()):
            print(f"k={_fmt(k)}: remainder fit order {_fmt(slope)}")
        print(f"PASS deviation_scan -> {out}")
    return 0


def run_tests(cfg: dict, seed_override, out_path, quiet, kind: str) -> int:
    cases = int(cfg.get("cases", 10000))
    if cases < 1:
        raise ConfigError("case count must be at least 1")
    seed = int(seed_override if seed_override is not None else cfg.get("seed", 0))
    rng = np.random.Generator(np.random.Philox(key=seed))
    body: dict = {}
    ok = True

    if kind in ("stochasticity", "tests"):
        max_residual = 0.0
        worst = None
        for _ in range(cases):
            pair = borntests.random_observable_pair(rng)
            m = borntests.transition_matrix(pair)
            r = borntests.double_stochasticity_residual(m)
            if r >= max_residual:
                max_residual = r
                worst = {"pair": pair.to_json(), "matrix": m.entries.tolist(), "residual": r}
        body["stochasticity"] = {"cases": cases, "max_residual": max_residual, "worst": worst}
        ok = ok and max_residual <= 1e-12

    if kind in ("interference", "tests"):
        max_ratio = 0.0
        max_recon_err = 0.0
        worst = None
        done = 0
        while done < cases:
            pair = borntests.random_observable_pair(rng)
            psi = borntests.random_qubit(rng)
            try:
                recon, theta = borntests.interference_reconstruct(psi, pair, +1)
            except borntests.DegenerateConfigurationError:
                continue
            direct = abs(borntests.overlap(pair.basis_b[0], psi)) ** 2
            q = (
                abs(borntests.overlap(pair.basis_a[0], psi)) ** 2,
                abs(borntests.overlap(pair.basis_a[1], psi)) ** 2,
            )
            m = borntests.transition_matrix(pair)
            ratio = borntests.interference_ratio(direct, q, m, +1)
            err = abs(recon - direct)
            if ratio >= max_ratio:
                max_ratio = ratio
                worst = {"pair": pair.to_json(), "ratio": ratio, "theta": theta, "reconstruction_error": err}
            max_recon_err = max(max_recon_err, err)
            done += 1
        body["interference"] = {
            "cases": cases,
            "max_ratio": max_ratio,
            "max_reconstruction_error": max_recon_err,
            "worst": worst,
        }
        ok = ok and max_ratio <= 1.0 + 1e-9 and max_recon_err <= 1e-12

    if "harness" in cfg:
        h = cfg["harness"]
        result = borntests.frequency_harness(
            (float(h["p_plus"]), float(h["q_plus"])),
            int(h["n_trials"]),
            seed,
            float(h.get("z_level", 3.0)),
        )
        body["harness"] = {
            "p_hat": result.p_hat,
            "q_hat": result.q_hat,
            "margin": result.margin,
            "margin_stderr": result.margin_stderr,
            "violation_significant": result.significant,
        }
        if "expect_violation" in h:
            ok = ok and (result.significant == bool(h["expect_violation"]))

    report = _report(kind, cfg, None, body, ok, seed=seed)
    return _emit_json(report, out_path or cfg.get("out", f"{kind}.json"), quiet, ok)


def run_local_check(cfg: dict, seed_override, out_path, quiet) -> int:
    grid = _build_grid(cfg["grid"])
    ens = _build_ensemble(cfg["ensemble"], grid)
    domain = Region((tuple(cfg["domain"]),))
    mc_cfg = _run_config(cfg["mc"], seed_override) if "mc" in cfg else None
    det = DetectorSpec("quadratic", locality=domain)
    rows = []
    ok = True
    for interval in cfg["regions"]:
        region = Region((tuple(interval),))
        closed = detect_local(ens, domain, region)
        row = {"region": list(interval), "closed_form": closed}
        row_ok = True
        if mc_cfg is not None:
            est = estimate_detection(ens, det, region, mc_cfg)
            row["mc_estimate"] = est.mean
            row["mc_stderr"] = est.stderr
            row_ok = _mc_pass(est.mean, closed, est.stderr)
        row["pass"] = row_ok
        ok = ok and row_ok
        rows.append(row)
    report = _report("local_check", cfg, mc_cfg, {"domain": list(cfg["domain"]), "rows": rows}, ok)
    return _emit_json(report, out_path or cfg.get("out", "local_check.json"), quiet, ok)


def run_discrete_check(cfg: dict, seed_override, out_path, quiet) -> int:
    grid = _build_grid(cfg["grid"])
    ens = _build_ensemble(cfg["ensemble"], grid)
    obs_cfg = cfg["observable"]
    states = {ref: _build_state(s, grid) for ref, s in obs_cfg["states"].items()}
    observable = DiscreteObservable(
        tuple(float(a) for a in obs_cfg["eigenvalues"]),
        tuple(states[r] for r in obs_cfg["eigenvector_refs"]),
    )
    probs = detect_discrete(ens, observable)
    rho = quantum_state_of(ens)
    rows = []
    ok = True
    for a, e_a in zip(observable.eigenvalues, observable.eigenvectors):
        proj = grid.h * np.outer(e_a.amp, e_a.amp.conj())
        trace = float(np.trace(rho.entries @ proj).real)
        row_ok = abs(probs[a] - trace) <= 1e-10
        ok = ok and row_ok
        rows.append({"eigenvalue": a, "probability": probs[a], "trace_value": trace, "pass": row_ok})
    total = sum(probs.values())
    ok = ok and abs(total - 1.0) <= 1e-10
    report = _report("discrete_check", cfg, None, {"rows": rows, "total_probability": total}, ok)
    return _emit_json(report, out_path or cfg.get("out", "discrete_check.json"), quiet, ok)


def run_average_check(cfg: dict, seed_override, out_path, quiet) -> int:
    grid = _build_grid(cfg["grid"])
    ens = _build_ensemble(cfg["ensemble"], grid)
    weight = cfg.get("weight", "position")
    g = grid.points if weight == "position" else np.asarray(cfg["weight_values"], dtype=np.float64)
    f = deviation.PolynomialVariable(np.diag(g).astype(np.complex128), float(cfg.get("quartic_weight", 0.0)))
    kappas = [float(kv) for kv in cfg["kappa_values"]]
    result = deviation.asymptotic_check(ens, kappas, f)
    body = {
        "exact": result.exact,
        "slope": result.slope,
        "kappas": list(result.kappas),
        "remainders": list(result.remainders),
        "normalized_average_error": result.normalized_average_error,
    }
    ok = result.exact or (result.slope is not None and abs(result.slope - 2.0) <= 0.2)
    if result.normalized_average_error is not None:
        ok = ok and result.normalized_average_error <= 1e-10
    report = _report("average_check", cfg, None, body, ok)
    return _emit_json(report, out_path or cfg.get("out", "average_check.json"), quiet, ok)


def _report(kind: str, cfg: dict, mc_cfg: RunConfig | None, body: dict, ok: bool, seed=None) -> dict:
    report = {
        "experiment": kind,
        "config": cfg,
        "verdict": "pass" if ok else "fail",
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S"),
    }
    if mc_cfg is not None:
        report["mc_config"] = mc_cfg.to_json()
        report["seed"] = mc_cfg.seed
    if seed is not None:
        report["seed"] = seed
    report.update(body)
    return report


def _emit_json(report: dict, out: str, quiet: bool, ok: bool) -> int:
    with open(out, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not quiet:
        print(f"{'PASS' if ok else 'FAIL'} {report['experiment']} -> {out}")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fieldlab", description="Run a field-detection experiment from a JSON config.")
    parser.add_argument("--config", required=True, help="path to the experiment config (JSON)")
    parser.add_argument("--seed", type=int, default=None, help="override the config's RNG seed")
    parser.add_argument("--out", default=None, help="override the config's output path")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    kind = cfg.get("experiment")
    try:
        if kind == "born_check":
            return run_born_check(cfg, args.seed, args.out, args.quiet)
        if kind == "deviation_scan":
            return run_deviation_scan(cfg, args.seed, args.out, args.quiet)
        if kind in ("stochasticity", "interference", "tests"):
            return run_tests(cfg, args.seed, args.out, args.quiet, kind)
        if kind == "local_check":
            return run_local_check(cfg, args.seed, args.out, args.quiet)
        if kind == "discrete_check":
            return run_discrete_check(cfg, args.seed, args.out, args.quiet)
        if kind == "average_check":
            return run_average_check(cfg, args.seed, args.out, args.quiet)
        print(f"config error: unknown experiment kind {kind!r}; expected one of {EXPERIMENT_KINDS}", file=sys.stderr)
        return 2
    except (ConfigError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
