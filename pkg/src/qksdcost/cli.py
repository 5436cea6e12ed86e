"""Command-line driver.

Subcommands: decompose, shift, ics, cost, simulate, report.
Exit codes: 0 success, 2 config error, 3 input error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .chem.fcidump import FcidumpError
from .gevp import ThresholdError, default_threshold
from .pipeline import (
    RunConfig,
    cost_report,
    decompose_report,
    load_molecule,
    prepare_plan,
    run_trials,
    shift_for,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4


class ConfigError(ValueError):
    pass


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True,
                   help="fixture name (h2, h4, lih, beh2, h2o) or FCIDUMP path")
    p.add_argument("--mode", choices=["lcu", "fh"], default="fh")
    p.add_argument("--shift", choices=["none", "closed-form", "refined"],
                   default="none")
    p.add_argument("--ics", choices=["off", "cisd", "true-state"], default="off")
    p.add_argument("--order", type=int, default=None,
                   help="Krylov order n (default: qubit count + 1)")
    p.add_argument("--dt", default="auto",
                   help="propagator step, or 'auto' for pi over the first gap")
    p.add_argument("--shots", default="1e8",
                   help="shots per matrix element; 'inf' for the noiseless limit")
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold-c", type=float, default=1.0)
    p.add_argument("--noise", choices=["gaussian", "projective"], default="gaussian")
    p.add_argument("--out", default=None, help="output directory (default: stdout)")


def _parse_config(args) -> RunConfig:
    try:
        dt = None if args.dt == "auto" else float(args.dt)
        shots = float(args.shots)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    cfg = RunConfig(
        input=args.input, mode=args.mode, shift=args.shift, ics=args.ics,
        order=args.order, dt=dt, shots=shots, trials=args.trials,
        seed=args.seed, threshold_constant=args.threshold_c, noise=args.noise,
        out=args.out,
    )
    try:
        cfg.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg


def _emit(payload: dict, out_dir, stem: str) -> None:
    text = json.dumps(payload, indent=2, default=float)
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / f"{stem}.json").write_text(text + "\n")
        print(path / f"{stem}.json")
    else:
        print(text)


def _stamp(cfg: RunConfig, mol) -> dict:
    return {
        "version": __version__,
        "config_hash": cfg.config_hash(),
        "fixture_hash": hashlib.sha256(mol.path.read_bytes()).hexdigest()[:16],
        "config": {k: (str(v) if v in (float("inf"),) else v)
                   for k, v in cfg.__dict__.items()},
    }


def cmd_decompose(args) -> int:
    cfg = _parse_config(args)
    mol = load_molecule(cfg.input)
    report = decompose_report(cfg.input, mode=cfg.mode,
                              shift=cfg.shift if cfg.shift != "none" else "closed-form")
    report["provenance"] = _stamp(cfg, mol)
    _emit(report, cfg.out, f"decompose_{mol.name}_{cfg.mode}")
    return EXIT_OK


def cmd_shift(args) -> int:
    cfg = _parse_config(args)
    mol = load_molecule(cfg.input)
    sp = shift_for(mol, cfg if cfg.shift != "none"
                   else RunConfig(input=cfg.input, shift="closed-form"))
    from .shift import annihilation_check
    payload = sp.to_json_dict()
    payload["annihilation_residual"] = annihilation_check(sp, mol.ref, mol.n_qubits)
    payload["provenance"] = _stamp(cfg, mol)
    _emit(payload, cfg.out, f"shift_{mol.name}")
    return EXIT_OK


def cmd_ics(args) -> int:
    cfg = _parse_config(args)
    if cfg.ics == "off":
        cfg.ics = "cisd"
    mol = load_molecule(cfg.input)
    plan = prepare_plan(cfg, mol)
    payload = {
        "molecule": mol.name,
        "mode": cfg.mode,
        "per_k": [sol.to_json_dict() if sol else None for sol in plan.ics_solutions],
        "element_costs": plan.element_costs().tolist(),
        "provenance": _stamp(cfg, mol),
    }
    _emit(payload, cfg.out, f"ics_{mol.name}_{cfg.mode}")
    return EXIT_OK


def cmd_cost(args) -> int:
    cfg = _parse_config(args)
    mol = load_molecule(cfg.input)
    report = cost_report(cfg.input, mode=cfg.mode, order=cfg.order, dt=cfg.dt)
    report["provenance"] = _stamp(cfg, mol)
    _emit(report, cfg.out, f"cost_{mol.name}_{cfg.mode}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _parse_config(args)
    mol = load_molecule(cfg.input)
    plan = prepare_plan(cfg, mol)
    results = run_trials(plan)
    errors = np.array([r.error_mha for r in results])
    eps = default_threshold(plan.n, cfg.shots, cfg.threshold_constant)
    lines = ["trial,error_mha,n_kept"]
    for r in results:
        lines.append(f"{r.trial},{r.error_mha!r},{r.n_kept}")
    csv_text = "\n".join(lines) + "\n"
    summary = {
        "molecule": mol.name,
        "n": plan.n,
        "dt": plan.dt,
        "threshold": eps,
        "trials": cfg.trials,
        "fci_energy": mol.fci_energy,
        "quantiles_mha": {
            "q05": float(np.percentile(errors, 5)),
            "q25": float(np.percentile(errors, 25)),
            "q50": float(np.percentile(errors, 50)),
            "q75": float(np.percentile(errors, 75)),
            "q95": float(np.percentile(errors, 95)),
        },
        "within_chemical_accuracy": float(np.mean(np.abs(errors) <= 1.6)),
        "n_kept_mode": int(np.bincount([r.n_kept for r in results]).argmax()),
        "provenance": _stamp(cfg, mol),
    }
    if cfg.out:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        stem = f"simulate_{mol.name}_{cfg.mode}_{cfg.shift}_{cfg.ics}"
        (out / f"{stem}.csv").write_text(csv_text)
        (out / f"{stem}.json").write_text(json.dumps(summary, indent=2, default=float) + "\n")
        print(out / f"{stem}.csv")
    else:
        sys.stdout.write(csv_text)
        print(json.dumps(summary, indent=2, default=float))
    return EXIT_OK


def cmd_report(args) -> int:
    """Summarize the JSON artifacts accumulated in an output directory."""
    path = Path(args.dir)
    if not path.is_dir():
        raise FileNotFoundError(f"not a directory: {path}")
    rows = []
    for f in sorted(path.glob("*.json")):
        try:
            data = json.loads(f.read_text())
        except json.JSONDecodeError:
            continue
        kind = f.stem.split("_")[0]
        entry = {"file": f.name, "kind": kind}
        if "raw_norm" in data:
            entry["raw_norm"] = data["raw_norm"]
            entry["shifted_norm"] = data.get("shifted_norm")
        if "rows" in data:
            entry["costs"] = {k: v["mean_cost"] for k, v in data["rows"].items()}
        if "quantiles_mha" in data:
            entry["median_error_mha"] = data["quantiles_mha"]["q50"]
            entry["within_chemical_accuracy"] = data["within_chemical_accuracy"]
        rows.append(entry)
    print(json.dumps({"artifacts": rows}, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qksdcost",
        description="Sampling-cost models and reduction strategies for "
                    "quantum Krylov subspace diagonalization.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, fn in [("decompose", cmd_decompose), ("shift", cmd_shift),
                     ("ics", cmd_ics), ("cost", cmd_cost),
                     ("simulate", cmd_simulate)]:
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(func=fn)
    rep = sub.add_parser("report")
    rep.add_argument("dir", help="directory of JSON artifacts to summarize")
    rep.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, FcidumpError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ThresholdError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
