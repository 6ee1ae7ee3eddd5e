"""Command line front end: ``antijam simulate|compare|train|beampattern|spectrum``."""

import argparse
import json
import logging
import os
import sys

import numpy as np

from .array_model import Direction, steering_vector
from .beamforming import beampattern, fixed_weights, mvdr_weights, write_beampattern_csv
from .errors import AntijamError, ValidationError
from .estimation import CovarianceEstimate, estimate_covariance, music_spectrum, write_spectrum_csv
from .pipeline import (Algorithm, build_run_config, collection_seed, config_as_dict,
                       emit_comparison, emit_results, load_run_config, run_comparison,
                       run_mitigation_loop, summarize, train_predictor, write_json)
from .predictor import coefficient_significance
from .scenario import DEFAULT_SUITE, world_at
from .signals import synth_snapshot

log = logging.getLogger("antijam")


def _parse_set(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ValidationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def _parse_direction(text):
    """``AZ`` or ``AZ/EL`` in degrees."""
    parts = str(text).split("/")
    if len(parts) > 2:
        raise ValidationError(f"direction must be AZ or AZ/EL, got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError as exc:
        raise ValidationError(f"direction must be AZ or AZ/EL, got {text!r}") from exc
    return Direction(values[0], values[1] if len(values) == 2 else 0.0)


def _config(args):
    overrides = _parse_set(args.set)
    for key in ("algorithm", "seed", "output_dir", "collections", "num_seeds"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = str(value)
    if getattr(args, "rx", None):
        overrides["rx_trajectory"] = args.rx.upper()
    if getattr(args, "jammer", None):
        overrides["jammer_trajectory"] = args.jammer.upper()
    if args.config:
        return load_run_config(args.config, overrides)
    return build_run_config(overrides)


def _print_summary(name, summary):
    acc = " ".join(f"acc@{k}={v:.3f}" for k, v in summary["accuracy"].items())
    print(f"{name}: mean_improvement={summary['mean_improvement_db']:.2f} dB "
          f"max={summary['max_improvement_db']:.2f} dB {acc} "
          f"ml_activations={summary['ml_activations']}")


def cmd_simulate(args):
    cfg = _config(args)
    records = run_mitigation_loop(cfg)
    sc = cfg.scenario
    name = args.name or f"{cfg.algorithm.value}_{sc.rx_trajectory.value}-{sc.jammer_trajectory.value}_s{sc.seed}"
    csv_path, json_path = emit_results(records, cfg.output_dir, name, cfg.thresholds)
    _print_summary(name, summarize(records, cfg.thresholds))
    print(f"wrote {csv_path} and {json_path}")
    return 0


def cmd_compare(args):
    cfg = _config(args)
    table = run_comparison(cfg, DEFAULT_SUITE)
    paths = emit_comparison(table, cfg.output_dir, cfg.thresholds)
    write_json(config_as_dict(cfg), os.path.join(cfg.output_dir, "config.json"))
    for alg, row in table.rows.items():
        _print_summary(alg, row)
    print(f"wrote {len(paths) + 1} files to {cfg.output_dir}")
    return 0


def cmd_train(args):
    cfg = _config(args)
    model, x, y = train_predictor(cfg)
    report = coefficient_significance(model)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = args.model or os.path.join(cfg.output_dir, "predictor.json")
    with open(path, "w") as fh:
        fh.write(model.to_json() + "\n")
    print(f"trained on {len(y)} windows, R^2 = {model.r_squared:.6f}, dof = {model.dof}")
    print(f"{'term':<12} {'coef':>12} {'stderr':>12} {'t':>10} {'p':>12}")
    for row in report.rows:
        print(f"{row.name:<12} {row.coefficient:12.6f} {row.stderr:12.3e} {row.t:10.2f} {row.p:12.3e}")
    print(f"wrote {path}")
    return 0


def _covariance_for(args, cfg):
    """Analytic covariance from --source/--jammer, or one simulated collection."""
    geom = cfg.geometry
    if args.source is not None:
        spec = cfg.signal
        src = _parse_direction(args.source)
        a_s = steering_vector(geom, src)
        r = spec.desired_power * np.outer(a_s, a_s.conj())
        if args.jammer_dir is not None:
            a_j = steering_vector(geom, _parse_direction(args.jammer_dir))
            r = r + spec.jammer_power * np.outer(a_j, a_j.conj())
        r = r + spec.noise_power * np.eye(geom.num_elements)
        return CovarianceEstimate(r, 0), src
    if args.jammer_dir is not None:
        raise ValidationError("--jammer-dir needs --source")
    world = world_at(cfg.scenario, args.collection)
    snap = synth_snapshot(world, geom, cfg.signal, collection_seed(cfg.scenario, args.collection))
    return estimate_covariance(snap), world.true_src_doa


def cmd_beampattern(args):
    cfg = _config(args)
    cov, src = _covariance_for(args, cfg)
    look = _parse_direction(args.look) if args.look else src
    if args.kind == "fixed":
        w = fixed_weights(cfg.geometry, look)
    else:
        w = mvdr_weights(cov, cfg.geometry, look)
    el = (float(args.elevation),) if args.elevation is not None else None
    pattern = beampattern(w, cfg.geometry, cfg.grid_step, el_grid=el)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = args.out or os.path.join(cfg.output_dir, "beampattern.csv")
    write_beampattern_csv(pattern, path)
    print(f"{args.kind} beam at ({look.azimuth:g}, {look.elevation:g}); wrote {path}")
    return 0


def cmd_spectrum(args):
    cfg = _config(args)
    cov, _ = _covariance_for(args, cfg)
    el = (float(args.elevation),) if args.elevation is not None else None
    spec = music_spectrum(cov, cfg.geometry, cfg.grid_step, num_sources=args.num_sources, el_grid=el)
    os.makedirs(cfg.output_dir, exist_ok=True)
    path = args.out or os.path.join(cfg.output_dir, "spectrum.csv")
    write_spectrum_csv(spec, path)
    i, j = np.unravel_index(np.argmax(spec.values), spec.values.shape)
    print(f"spectrum maximum at ({spec.az_grid[i]:g}, {spec.el_grid[j]:g}); wrote {path}")
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")
    common.add_argument("--seed", type=int)
    common.add_argument("--output-dir", dest="output_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="antijam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run one trajectory pair")
    p.add_argument("--algorithm", type=str.upper, choices=[a.value for a in Algorithm])
    p.add_argument("--rx", help="receiver trajectory (NS, NW, SN, SW, WN, WS)")
    p.add_argument("--jammer", help="jammer trajectory")
    p.add_argument("--collections", type=int)
    p.add_argument("--name", help="base name of the output files")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="run all algorithms over the suite")
    p.add_argument("--num-seeds", dest="num_seeds", type=int)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("train", parents=[common], help="fit the azimuth predictor")
    p.add_argument("--model", help="output path of the model JSON")
    p.set_defaults(func=cmd_train)

    for name, func, helptext in (("beampattern", cmd_beampattern, "beampattern CSV"),
                                 ("spectrum", cmd_spectrum, "MUSIC spectrum CSV")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--source", help="analytic source direction AZ[/EL]")
        p.add_argument("--jammer-dir", dest="jammer_dir", help="analytic jammer direction AZ[/EL]")
        p.add_argument("--collection", type=int, default=0,
                       help="simulated collection index when no --source is given")
        p.add_argument("--elevation", type=float, help="evaluate a single elevation cut")
        p.add_argument("--out", help="output CSV path")
        if name == "beampattern":
            p.add_argument("--look", help="look direction AZ[/EL] (default: the source)")
            p.add_argument("--kind", choices=("mvdr", "fixed"), default="mvdr")
        else:
            p.add_argument("--num-sources", dest="num_sources", type=int, default=2)
        p.set_defaults(func=func)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (AntijamError, ValueError, OSError, ArithmeticError, LookupError) as exc:
        line = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(line), file=sys.stderr)
        return 2 if isinstance(exc, (ValidationError, ValueError)) else 1


if __name__ == "__main__":
    sys.exit(main())
