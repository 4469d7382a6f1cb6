"""Command-line front end.

Exit codes: 0 ok, 2 invalid input, 3 degenerate model, 4 size cap, 5 divergence.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .axials import CONSENSUS, DISSENSUS, catalog, catalog_notes
from .constants import SCHEMA_VERSION
from .errors import (DegenerateDenominator, DimensionMismatch, Diverged, GroupTooLarge,
                     OpinionError, SchemaError, SizeExceeded)
from .io import Scenario, dump_json, model_from_json, write_plot_data, write_svg_lines
from .oracle import brute_force_axials, compare_with_catalog
from .presets import PRESETS, EPSILON, SEED
from .simulation import (RampSpec, SimConfig, Trajectory, default_inits, integrate,
                         phase_sequence, random_init, sweep_bifurcation, write_sweep_csv,
                         write_trajectory_csv)
from .spectral import BifurcationKind, analysis_report, critical_lambdas, numeric_critical_lambda
from .state import group_mean_norm, max_agent_norm
from .symmetry import check_equivariance, full_group_generators

EXIT_OK, EXIT_SCHEMA, EXIT_DEGENERATE, EXIT_SIZE, EXIT_DIVERGED = 0, 2, 3, 4, 5

# keep reproduced trajectory CSVs to roughly this many samples
_CSV_SAMPLES = 1000


def _out_dir(args, scenario: Optional[Scenario] = None) -> Path:
    out = args.out or (scenario.raw.get("output_dir") if scenario else None) or "out"
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load(args) -> tuple[Scenario, object, int]:
    if not args.scenario:
        raise SchemaError("--scenario is required for this command")
    sc = Scenario.load(args.scenario)
    seed = sc.seed if args.seed is None else args.seed
    model = model_from_json(sc.model_spec, epsilon=args.epsilon)
    return sc, model, seed


def _nominal(spec: dict) -> tuple[float, float, float, float]:
    return spec["alpha"], spec["beta"], spec["gamma"], spec["delta"]


def cmd_analyze(args) -> int:
    sc, model, seed = _load(args)
    opts = sc.section("analysis")
    spec = sc.model_spec
    pred = critical_lambdas(*_nominal(spec), model.na, model.no)
    h = opts.get("fd_step", 1e-5)
    eq = check_equivariance(model, full_group_generators(model.na, model.no),
                            n_samples=opts.get("equivariance_samples", 20), seed=seed)
    report = analysis_report(model, h=h, prediction=pred)
    report.update({
        "schema_version": SCHEMA_VERSION,
        "equivariance": eq.to_json(),
        "kind": pred.kind.value,
        "lambda_crit": pred.critical_lambda,
        "c1_at_crit": pred.c1,
        "c2_at_crit": pred.c2,
        "lambda_consensus": pred.lambda_consensus,
        "lambda_dissensus": pred.lambda_dissensus,
    })
    if pred.kind is BifurcationKind.MODE_INTERACTION:
        report["warning"] = "gamma == delta: consensus and dissensus lose stability together (mode interaction)"
    elif opts.get("numeric_check", False):
        space = "Wc" if pred.kind is BifurcationKind.CONSENSUS else "Wd"
        report["lambda_crit_numeric"] = numeric_critical_lambda(model, space, h)
    out = _out_dir(args, sc)
    dump_json(report, out / "analysis.json")
    print(f"{pred.kind.value} lambda_crit={pred.critical_lambda} -> {out / 'analysis.json'}")
    return EXIT_OK


def cmd_axials(args) -> int:
    mode = args.mode
    records = catalog(args.na, args.no, mode)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "na": args.na, "no": args.no, "mode": mode,
        "notes": catalog_notes(args.na, args.no, mode),
        "records": [r.to_json() for r in records],
    }
    if args.oracle:
        classes = brute_force_axials(args.na, args.no, mode)
        cmp = compare_with_catalog(classes, records)
        payload["oracle"] = {
            "classes": [{"fix_vector": c.fix.tolist(), "isotropy_order": c.isotropy_order} for c in classes],
            **cmp.to_json(),
        }
    out = _out_dir(args)
    path = out / f"axials_{args.na}x{args.no}_{mode}.json"
    dump_json(payload, path)
    verdict = f" oracle={payload['oracle']['verdict']}" if args.oracle else ""
    print(f"{len(records)} records{verdict} -> {path}")
    return EXIT_OK


def _sim_config(sc: Scenario, seed: int) -> tuple[SimConfig, dict]:
    opts = sc.section("simulation")
    keys = ("dt", "t_max", "steady_tol", "init_scale", "divergence_bound", "record_every", "theta")
    cfg = SimConfig(seed=seed, **{k: opts[k] for k in keys if k in opts})
    return cfg, opts


def _initial_state(model, cfg: SimConfig, opts: dict) -> np.ndarray:
    if "initial_state" in opts:
        z0 = np.asarray(opts["initial_state"], dtype=float)
        if z0.shape != (model.na, model.no):
            raise DimensionMismatch(f"initial_state has shape {z0.shape}")
        return z0
    return random_init(model.na, model.no, cfg.init_scale, cfg.seed)


def _write_run(out: Path, name: str, traj: Trajectory, stride: int) -> None:
    write_trajectory_csv(traj, out / f"{name}.csv", stride)
    norms = traj.norms
    means = [group_mean_norm(s) for s in traj.states]
    peaks = [max_agent_norm(s) for s in traj.states]
    write_plot_data(out / f"{name}.dat", {"t": traj.times, "lambda": traj.lambdas, "norm": norms,
                                          "mean_agent_norm": means, "max_agent_norm": peaks})
    write_svg_lines(out / f"{name}.svg", traj.times, {"||z||": norms, "||mean agent||": means},
                    title=name, xlabel="t")


def cmd_simulate(args) -> int:
    sc, model, seed = _load(args)
    cfg, opts = _sim_config(sc, seed)
    ramp = RampSpec(**sc.section("ramp")) if "ramp" in sc.raw else None
    traj = integrate(model, _initial_state(model, cfg, opts), cfg, ramp)
    out = _out_dir(args, sc)
    _write_run(out, "trajectory", traj, opts.get("csv_stride", 1))
    dump_json({
        "schema_version": SCHEMA_VERSION,
        "seed": seed,
        "steady": traj.steady,
        "t_end": float(traj.times[-1]),
        "final_class": traj.labels[-1],
        "final_norm": float(np.linalg.norm(traj.final)),
        "timeline": [p.to_json() for p in phase_sequence(traj)],
    }, out / "simulation.json")
    print(f"final class {traj.labels[-1]} at t={traj.times[-1]:g} -> {out / 'trajectory.csv'}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc, model, seed = _load(args)
    cfg, _ = _sim_config(sc, seed)
    n_random = sc.section("sweep").get("n_random", 2)
    inits = default_inits(model.na, model.no, cfg.init_scale, seed, n_random)
    rows = sweep_bifurcation(model, sc.sweep_lambdas(), inits, cfg)
    out = _out_dir(args, sc)
    write_sweep_csv(rows, out / "sweep.csv")
    dump_json({"schema_version": SCHEMA_VERSION, "seed": seed, "rows": len(rows),
               "inits": [i for i, _ in inits]}, out / "sweep.json")
    print(f"{len(rows)} sweep rows -> {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    seed = SEED if args.seed is None else args.seed
    epsilon = EPSILON if args.epsilon is None else args.epsilon
    result = PRESETS[args.figure](seed=seed, epsilon=epsilon)
    out = _out_dir(args) / args.figure
    out.mkdir(parents=True, exist_ok=True)
    for name, traj in result.runs.items():
        _write_run(out, name, traj, max(1, len(traj) // _CSV_SAMPLES))
    dump_json(result.summary, out / "summary.json")
    print(f"{args.figure}: {len(result.runs)} runs -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output directory (default: scenario output_dir or ./out)")
    common.add_argument("--seed", type=int, help="random seed override")
    common.add_argument("--epsilon", type=float, help="perturbation size override")

    parser = argparse.ArgumentParser(prog="equiopinion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (("analyze", cmd_analyze, "linear analysis report for a scenario"),
                            ("simulate", cmd_simulate, "integrate one scenario"),
                            ("sweep", cmd_sweep, "lambda sweep with warm starts")):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.set_defaults(func=fn)

    p = sub.add_parser("axials", parents=[common], help="axial subgroup catalog")
    p.add_argument("na", type=int)
    p.add_argument("no", type=int)
    p.add_argument("mode", choices=[CONSENSUS, DISSENSUS])
    p.add_argument("--oracle", action="store_true", help="cross-check by exhaustive search")
    p.set_defaults(func=cmd_axials)

    p = sub.add_parser("reproduce", parents=[common], help="run a figure preset")
    p.add_argument("figure", choices=sorted(PRESETS))
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SchemaError, DimensionMismatch) as exc:
        code, msg = EXIT_SCHEMA, f"invalid input: {exc}"
    except DegenerateDenominator as exc:
        code, msg = EXIT_DEGENERATE, f"degenerate model: {exc}"
    except (SizeExceeded, GroupTooLarge) as exc:
        code, msg = EXIT_SIZE, f"size cap: {exc}"
    except Diverged as exc:
        code, msg = EXIT_DIVERGED, f"diverged: {exc}"
    except (OpinionError, ValueError) as exc:
        code, msg = EXIT_SCHEMA, f"invalid input: {exc}"
    print(f"error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
