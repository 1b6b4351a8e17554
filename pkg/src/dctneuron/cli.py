"""Command line: ``dctneuron run <config>`` and ``dctneuron sweep <config>``.

Output files (all in the run directory):

* ``summary.json``: final metrics plus the full effective config;
* ``trace.csv``: ``run_id,index,metric,value``;
* ``curves.csv``: ``run_id,curve,x,value``;
* ``sweep.csv`` (sweeps only): ``run_id,nonlinearity,snr_db,estimator,nmse,function_nmse,seed``;
* ``plot.gp`` when ``[output] gnuplot = true``.

Exit status is 0 on success, 2 for configuration errors and 3 for numeric
failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .config import load_config
from .errors import ConfigError, ContractError, DctNeuronError, NumericError
from .experiments import run_experiment, run_sweep

__all__ = ["main", "write_outputs", "TRACE_HEADER", "CURVES_HEADER", "SWEEP_HEADER"]

TRACE_HEADER = ("run_id", "index", "metric", "value")
CURVES_HEADER = ("run_id", "curve", "x", "value")
SWEEP_HEADER = ("run_id", "nonlinearity", "snr_db", "estimator", "nmse", "function_nmse", "seed")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _num(v):
    """Shortest round-trip text for a number; non-finite values as words."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return _num(obj)
    if hasattr(obj, "item"):  # numpy scalars
        return _jsonable(obj.item())
    return obj


def _write_csv(path: Path, header, rows):
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) if isinstance(v, (int, float)) else v for v in row])


def _gnuplot(result, sweep: bool) -> str:
    names = list(dict.fromkeys(c[0] for c in result.curves))
    lines = [
        "# gnuplot script; run from this directory",
        'set datafile separator ","',
        "set key outside",
        "set grid",
    ]
    if sweep:
        lines += ['set logscale y', 'set xlabel "SNR (dB)"', 'set ylabel "NMSE"']
    plots = [
        f"'curves.csv' every ::1 using (strcol(2) eq \"{name}\" ? $3 : NaN):4 with linespoints title \"{name}\""
        for name in names
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def write_outputs(result, cfg, out_dir: Path, sweep: bool = False) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {
        "run_id": result.run_id,
        "version": __version__,
        "config": cfg.to_dict(),
        "metrics": result.summary,
    }
    written = []
    path = out_dir / "summary.json"
    path.write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")
    written.append(path)
    if not sweep:
        path = out_dir / "trace.csv"
        _write_csv(path, TRACE_HEADER, ((result.run_id, *row) for row in result.trace))
        written.append(path)
    path = out_dir / "curves.csv"
    _write_csv(path, CURVES_HEADER, ((result.run_id, *row) for row in result.curves))
    written.append(path)
    if sweep:
        path = out_dir / "sweep.csv"
        _write_csv(path, SWEEP_HEADER, ([row[k] for k in SWEEP_HEADER] for row in result.cells))
        written.append(path)
    if cfg.gnuplot:
        path = out_dir / "plot.gp"
        path.write_text(_gnuplot(result, sweep), encoding="utf-8")
        written.append(path)
    return written


def _parser():
    p = argparse.ArgumentParser(prog="dctneuron", description="DCT-neuron channel estimation experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run one experiment"), ("sweep", "run an SNR x nonlinearity sweep")):
        s = sub.add_parser(name, help=text)
        s.add_argument("config", help="INI experiment config")
        s.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
        s.add_argument("--out", help="output directory (default: [experiment] output_dir)")
        s.add_argument("--quiet", action="store_true", help="print nothing on success")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    sweep = args.command == "sweep"
    try:
        cfg = load_config(args.config, sweep=sweep)
        seed = args.seed
        if seed is None and os.environ.get("SEED"):
            try:
                seed = int(os.environ["SEED"])
            except ValueError:
                raise ConfigError(f"SEED={os.environ['SEED']!r} is not an integer") from None
        if seed is not None:
            if not 0 <= seed < 2**64:
                raise ConfigError(f"seed {seed} is not an unsigned 64-bit integer")
            cfg.seed = seed
        if cfg.experiment == "snr_sweep":
            sweep = True
    except ConfigError as exc:
        print(f"dctneuron: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_sweep(cfg) if sweep else run_experiment(cfg)
    except (NumericError, ArithmeticError) as exc:
        print(f"dctneuron: numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ContractError as exc:
        print(f"dctneuron: config error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DctNeuronError as exc:
        print(f"dctneuron: numeric error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out_dir = Path(args.out if args.out else cfg.output_dir)
    written = write_outputs(result, cfg, out_dir, sweep)
    if not args.quiet:
        for key, value in sorted(result.summary.items()):
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                print(f"{key:>26s}  {_num(value)}")
        for path in written:
            print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
