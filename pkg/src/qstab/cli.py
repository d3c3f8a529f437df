"""Command-line front end.

    qstab synth       --days 31 --seed 7 --out jan.csv
    qstab fit         --data jan.csv --month 2022-01 --out model.json
    qstab experiment  --data jan.csv --out report.json --plot-data plots/
    qstab projection  --data jan.csv --metrics x0,x12 --samples 10000 --out proj.csv

Exit codes: 0 ok, 1 I/O failure, 2 usage or domain error, 3 bound violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from .channels import GateDurations
from .copula import CopulaModel, sample
from .ingest import IngestError, epoch_slice, fit_epoch_model, load_csv, synth_generate
from .metrics import metric_by_name
from .presets import SIGMA_PRESETS, washington_like_model
from .stability import ExperimentConfig, hellinger_max, run_experiment

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VIOLATION = 0, 1, 2, 3

log = logging.getLogger("qstab")


class UsageError(Exception):
    pass


def _schema() -> dict:
    return json.loads(resources.files("qstab").joinpath("report_schema.json").read_text(encoding="utf-8"))


def _baseline(args, month: str) -> CopulaModel:
    if args.data is None:
        return washington_like_model(epoch_label=month)
    table = epoch_slice(load_csv(args.data), month)
    return fit_epoch_model(table)


def cmd_synth(args) -> int:
    truth = washington_like_model(args.sigma_preset)
    synth_generate(truth, args.days, args.seed, args.out)
    print(f"wrote {args.days} days x {truth.dim} metrics to {args.out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    model = _baseline(args, args.month)
    text = json.dumps(model.to_dict(), indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return EXIT_OK


def _write_plot_data(report, outdir: Path, gnuplot: bool):
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = report.config
    with (outdir / "hellinger.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epoch", "hellinger", "hellinger_stderr", "hellinger_max"))
        for e in report.epochs:
            w.writerow((e.label, repr(e.hellinger), repr(e.hellinger_stderr), repr(report.hellinger_cap)))
    with (outdir / "stability.csv").open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("epoch", "stability", "stability_stderr", "bound", "s_tol"))
        for e in report.epochs:
            w.writerow((e.label, repr(e.stability), repr(e.stability_stderr), repr(e.bound), repr(cfg.s_tol)))
    if gnuplot:
        (outdir / "stability.gp").write_text(
            "set datafile separator ','\n"
            "set key autotitle columnhead\n"
            "set xtics rotate\n"
            "set multiplot layout 2,1\n"
            "set ylabel 's'\n"
            "plot 'stability.csv' using 0:2:xtic(1) with linespoints, '' using 0:5 with lines\n"
            "set ylabel 'H'\n"
            "plot 'hellinger.csv' using 0:2:xtic(1) with linespoints, '' using 0:4 with lines\n"
            "unset multiplot\n",
            encoding="utf-8",
        )


def cmd_experiment(args) -> int:
    try:
        hellinger_max(args.s_tol, args.c)
        config = ExperimentConfig(
            s_tol=args.s_tol,
            c=args.c,
            n_noise_samples_hellinger=args.hellinger_samples,
            n_circuit_samples=args.circuit_samples,
            shots=args.shots,
            months=args.months,
            perturb_step=args.step,
            seed=args.seed,
            durations=GateDurations(args.single_qubit_ns, args.two_qubit_ns),
            secret=args.secret,
            perturb_metric=metric_by_name(args.perturb_metric).index,
            readout_asymmetry=args.readout_asymmetry,
        )
    except (ValueError, KeyError) as exc:
        raise UsageError(str(exc)) from exc
    baseline = _baseline(args, args.baseline_month)
    report = run_experiment(config, baseline)
    payload = report.to_dict()
    jsonschema.validate(payload, _schema())
    out = Path(args.out)
    out.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    if args.plot_data:
        _write_plot_data(report, Path(args.plot_data), args.gnuplot)
    s = report.summary
    print(
        f"{s['n_epochs']} epochs: max H = {s['max_hellinger']:.4f} (cap {s['hellinger_max_allowed']:.4f}), "
        f"max s = {s['max_stability']:.4g}, mean s = {s['mean_stability']:.4g} (tol {config.s_tol})"
    )
    if not s["all_satisfied"]:
        print(f"{s['violations']} epoch(s) violate the stability tolerance", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_projection(args) -> int:
    try:
        ids = [metric_by_name(m.strip()) for m in args.metrics.split(",")]
    except KeyError as exc:
        raise UsageError(exc.args[0]) from exc
    if len(ids) != 2:
        raise UsageError("--metrics takes exactly two metric ids")
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    model = _baseline(args, args.month)
    draws = sample(model, args.samples, args.seed)
    with Path(args.out).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([m.name for m in ids])
        for row in draws[:, [m.index for m in ids]]:
            w.writerow([repr(float(v)) for v in row])
    print(f"wrote {args.samples} rows of ({ids[0].describe()}; {ids[1].describe()}) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qstab", description="Device reliability vs. program stability")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="write a synthetic daily characterization CSV")
    s.add_argument("--days", type=int, default=31)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--sigma-preset", choices=sorted(SIGMA_PRESETS), default="washington-like")
    s.set_defaults(func=cmd_synth)

    f = sub.add_parser("fit", help="fit one month's copula model and print it as JSON")
    f.add_argument("--data")
    f.add_argument("--month", default="2022-01")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("experiment", help="run the monthly perturbation experiment")
    e.add_argument("--data", help="characterization CSV; omit to use the built-in synthetic baseline")
    e.add_argument("--baseline-month", default="2022-01")
    e.add_argument("--months", type=int, default=15)
    e.add_argument("--s-tol", type=float, default=0.20)
    e.add_argument("--c", type=float, default=1.0)
    e.add_argument("--secret", default="0011")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--hellinger-samples", type=int, default=100_000)
    e.add_argument("--circuit-samples", type=int, default=100)
    e.add_argument("--shots", type=int, default=8192)
    e.add_argument("--step", type=float, default=0.05, help="relative perturbation step")
    e.add_argument("--perturb-metric", default="x5")
    e.add_argument("--readout-asymmetry", type=float, default=1.0)
    e.add_argument("--single-qubit-ns", type=float, default=35.0)
    e.add_argument("--two-qubit-ns", type=float, default=300.0)
    e.add_argument("--out", default="report.json")
    e.add_argument("--plot-data", help="directory for per-epoch CSV series")
    e.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script")
    e.set_defaults(func=cmd_experiment)

    j = sub.add_parser("projection", help="sample a 2-D projection of the fitted joint law")
    j.add_argument("--data")
    j.add_argument("--month", default="2022-01")
    j.add_argument("--metrics", default="x0,x12")
    j.add_argument("--samples", type=int, default=10_000)
    j.add_argument("--seed", type=int, default=0)
    j.add_argument("--out", required=True)
    j.set_defaults(func=cmd_projection)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qstab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IngestError as exc:
        print(f"qstab {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"qstab {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"qstab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
