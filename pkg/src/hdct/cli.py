"""Command-line front end.

    hdct test-one data.csv [--alpha 0.05] [--mu0 mu0.csv]
    hdct test-two g1.csv g2.csv | hdct test-two data.csv --group-column group
    hdct simulate size|power|null-check --dist A1 --cov B1 --p 200 --n 200 --seed 42
    hdct version

Exit codes: 0 success, 2 input/validation error, 3 numerical failure,
4 configuration error.
"""

import argparse
import csv
import io
import json
import os
import sys
import traceback

import numpy as np

from . import __version__
from .clr import clr_transform
from .core import CompositionMatrix, close, replace_zeros
from .errors import ConfigError, GroupError, HdctError, NonPositiveEntry, ParseError
from .meantests import mu0_to_clr, one_sample_tests, two_sample_tests
from .sim import ExperimentConfig, Mode, resolve_threads, run_experiment


def _parse_float(cell, row, col):
    try:
        return float(cell)
    except ValueError:
        raise ParseError(row, col, f"not a number: {cell!r}") from None


def _looks_like_header(cells):
    for c in cells:
        try:
            float(c)
        except ValueError:
            return True
    return False


def read_table(path, has_header=None):
    """Read a rectangular CSV into ``(header, rows)`` with cells as strings.

    ``has_header=None`` treats the first line as a header when any of its
    cells is non-numeric.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        lines = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not lines:
        raise ParseError(0, 0, "empty file")
    lines = [[c.strip() for c in r] for r in lines]
    if has_header is None:
        has_header = _looks_like_header(lines[0])
    header = lines[0] if has_header else None
    body = lines[1:] if has_header else lines
    width = len(lines[0])
    for i, r in enumerate(body):
        if len(r) != width:
            raise ParseError(i, len(r), f"expected {width} columns, found {len(r)}")
    return header, body


def _group_index(header, group_column, width):
    try:
        idx = int(group_column)
    except (TypeError, ValueError):
        if header is None or group_column not in header:
            raise GroupError(f"group column {group_column!r} not found") from None
        return header.index(group_column)
    if not 0 <= idx < width:
        raise GroupError(f"group column index {idx} out of range")
    return idx


def _to_composition(values, auto_close, pseudocount):
    bad = values < 0 if pseudocount > 0 else values <= 0
    if np.any(bad):
        r, c = np.argwhere(bad)[0]
        raise NonPositiveEntry(r, c, values[r, c])
    if pseudocount > 0 and np.any(values == 0):
        return replace_zeros(values, pseudocount)
    if auto_close:
        return close(values)
    return CompositionMatrix(values)


def ingest_csv(path, has_header=None, group_column=None, auto_close=False, pseudocount=0.0):
    """Load compositions from CSV.

    Returns a :class:`CompositionMatrix`, or a pair of them when
    ``group_column`` (name or 0-based index) splits the rows into exactly two
    groups; groups are ordered by first appearance. With ``pseudocount > 0``
    zeros are replaced and rows re-closed.
    """
    header, body = read_table(path, has_header)
    width = len(body[0]) if body else 0
    gidx = None if group_column is None else _group_index(header, group_column, width)
    labels = []
    numeric = []
    for i, r in enumerate(body):
        if gidx is not None:
            labels.append(r[gidx])
        numeric.append(
            [_parse_float(c, i, j) for j, c in enumerate(r) if j != gidx]
        )
    values = np.array(numeric, dtype=float)
    if not np.all(np.isfinite(values)):
        r, c = np.argwhere(~np.isfinite(values))[0]
        raise ParseError(int(r), int(c), "non-finite value")
    comp = _to_composition(values, auto_close, pseudocount)
    if gidx is None:
        return comp
    distinct = list(dict.fromkeys(labels))
    if len(distinct) != 2:
        raise GroupError(f"group column must hold exactly two labels, found {distinct}")
    labels = np.array(labels)
    groups = tuple(
        CompositionMatrix(comp.values[labels == g], pseudocount=comp.pseudocount)
        for g in distinct
    )
    return groups


def _read_vector(path):
    _, body = read_table(path, has_header=None)
    cells = [c for r in body for c in r]
    return np.array([_parse_float(c, 0, j) for j, c in enumerate(cells)])


TEST_COLUMNS = ["test", "statistic", "pvalue", "threshold", "alpha", "reject", "n", "p"]


def format_test_report(outcomes, meta):
    buf = io.StringIO()
    buf.write("# hdct-test " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TEST_COLUMNS)
    for name in ("sum", "max", "com"):
        o = outcomes[name]
        w.writerow(
            [name, repr(o.statistic), repr(o.pvalue), repr(o.threshold), repr(o.alpha),
             str(o.reject).lower(), o.n_effective, o.p]
        )
    return buf.getvalue()


def _summary(outcomes):
    lines = []
    for name in ("sum", "max", "com"):
        o = outcomes[name]
        verdict = "reject" if o.reject else "fail to reject"
        op = "<" if o.family.is_combo else ">="
        lines.append(
            f"{name:>4}: statistic={o.statistic:.6g} p-value={o.pvalue:.6g} "
            f"(reject if {op} {o.threshold:.6g}) -> {verdict}"
        )
    return "\n".join(lines)


def _emit(text_report, summary, out):
    # stdout carries only the machine-readable report when no --out is given
    if out:
        print(summary)
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text_report)
    else:
        print(summary, file=sys.stderr)
        sys.stdout.write(text_report)


def cmd_test_one(args):
    x = ingest_csv(args.input, args.has_header, None, args.auto_close, args.pseudocount)
    y = clr_transform(x)
    mu0 = None
    if args.mu0:
        mu0 = mu0_to_clr(_read_vector(args.mu0))
    outcomes = one_sample_tests(y, args.alpha, mu0, unbiased=args.unbiased_cov)
    meta = {
        "command": "test-one",
        "input": args.input,
        "mu0": args.mu0,
        "alpha": args.alpha,
        "pseudocount": x.pseudocount,
        "auto_close": args.auto_close,
        "unbiased_cov": args.unbiased_cov,
    }
    _emit(format_test_report(outcomes, meta), _summary(outcomes), args.out)
    return 0


def cmd_test_two(args):
    if len(args.inputs) == 2:
        if args.group_column is not None:
            raise GroupError("--group-column needs a single input file")
        x1 = ingest_csv(args.inputs[0], args.has_header, None, args.auto_close, args.pseudocount)
        x2 = ingest_csv(args.inputs[1], args.has_header, None, args.auto_close, args.pseudocount)
    elif len(args.inputs) == 1:
        if args.group_column is None:
            raise GroupError("one input file needs --group-column")
        x1, x2 = ingest_csv(
            args.inputs[0], args.has_header, args.group_column, args.auto_close, args.pseudocount
        )
    else:
        raise GroupError("test-two takes one or two input files")
    outcomes = two_sample_tests(clr_transform(x1), clr_transform(x2), args.alpha, args.unbiased_cov)
    meta = {
        "command": "test-two",
        "inputs": args.inputs,
        "group_column": args.group_column,
        "alpha": args.alpha,
        "pseudocount": max(x1.pseudocount, x2.pseudocount),
        "auto_close": args.auto_close,
        "unbiased_cov": args.unbiased_cov,
    }
    _emit(format_test_report(outcomes, meta), _summary(outcomes), args.out)
    return 0


def parse_m_grid(text):
    """``"1:20"`` (inclusive range) or ``"1,5,10"``."""
    try:
        if ":" in text:
            lo, hi = text.split(":")
            return tuple(range(int(lo), int(hi) + 1))
        return tuple(int(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse m grid {text!r}") from None


_SIM_KEYS = (
    "dist", "cov", "n", "n1", "n2", "p", "alpha", "reps", "m", "energy", "seed",
    "build_seed", "redraw_cov_per_rep", "unbiased_cov",
)


def _load_config_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    unknown = set(data) - set(_SIM_KEYS) - {"threads"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return data


def build_sim_config(args):
    settings = {}
    if args.config:
        settings.update(_load_config_file(args.config))
    for key in _SIM_KEYS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            settings[key] = v
    if settings.get("seed") is None:
        raise ConfigError("--seed is required for simulations")
    two = settings.get("n1") is not None or settings.get("n2") is not None
    if two and settings.get("n") is not None:
        raise ConfigError("give either --n or --n1/--n2, not both")
    if settings.get("p") is None:
        raise ConfigError("--p is required")
    mode = {
        "size": Mode.SizeTwo if two else Mode.SizeOne,
        "power": Mode.PowerTwo if two else Mode.PowerOne,
        "null-check": Mode.NullDiagnostics,
    }[args.kind]
    m = settings.get("m")
    if isinstance(m, str):
        m = parse_m_grid(m)
    if mode in (Mode.PowerOne, Mode.PowerTwo) and not m:
        raise ConfigError("power simulations need --m")
    threads = args.threads if args.threads is not None else settings.get("threads")
    try:
        return ExperimentConfig(
            mode=mode,
            p=int(settings["p"]),
            master_seed=int(settings["seed"]),
            dist=settings.get("dist", "A1"),
            cov=settings.get("cov", "B1"),
            n=settings.get("n"),
            n1=settings.get("n1"),
            n2=settings.get("n2"),
            alpha=float(settings.get("alpha", 0.05)),
            reps=int(settings.get("reps", 1000)),
            m_grid=tuple(m or ()),
            energy=float(settings.get("energy", 0.5)),
            threads=resolve_threads(threads),
            build_seed=settings.get("build_seed"),
            redraw_cov_per_rep=bool(settings.get("redraw_cov_per_rep", False)),
            unbiased_cov=bool(settings.get("unbiased_cov", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_simulate(args):
    config = build_sim_config(args)
    report = run_experiment(config)
    _emit(report.to_csv(), report.summary(), args.out)
    return 0


def cmd_version(args):
    print(f"hdct {__version__}")
    return 0


def _add_input_flags(p):
    p.add_argument("--alpha", type=float, default=0.05)
    header = p.add_mutually_exclusive_group()
    header.add_argument("--header", dest="has_header", action="store_true", default=None)
    header.add_argument("--no-header", dest="has_header", action="store_false")
    p.add_argument("--auto-close", action="store_true", help="normalize rows to sum to one")
    p.add_argument("--pseudocount", type=float, default=0.0, metavar="EPS",
                   help="replace zeros by EPS and re-close (departs from the strict model)")
    p.add_argument("--unbiased-cov", action="store_true")
    p.add_argument("--out", metavar="PATH")


def build_parser():
    parser = argparse.ArgumentParser(prog="hdct", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p1 = sub.add_parser("test-one", help="one-sample mean tests")
    p1.add_argument("input")
    p1.add_argument("--mu0", metavar="PATH", help="log-basis null mean, one value per component")
    _add_input_flags(p1)
    p1.set_defaults(func=cmd_test_one)

    p2 = sub.add_parser("test-two", help="two-sample mean tests")
    p2.add_argument("inputs", nargs="+")
    p2.add_argument("--group-column", metavar="NAME|INDEX")
    _add_input_flags(p2)
    p2.set_defaults(func=cmd_test_two)

    ps = sub.add_parser("simulate", help="Monte-Carlo size, power and null-law experiments")
    ps.add_argument("kind", choices=["size", "power", "null-check"])
    ps.add_argument("--config", metavar="PATH", help="JSON file with experiment settings")
    ps.add_argument("--dist", choices=["A1", "A2", "A3"])
    ps.add_argument("--cov", choices=["B1", "B2", "B3"])
    ps.add_argument("--n", type=int)
    ps.add_argument("--n1", type=int)
    ps.add_argument("--n2", type=int)
    ps.add_argument("--p", type=int)
    ps.add_argument("--alpha", type=float)
    ps.add_argument("--reps", type=int)
    ps.add_argument("--m", metavar="GRID", help="sparsity levels, e.g. 1:20 or 1,5,10")
    ps.add_argument("--energy", type=float)
    ps.add_argument("--seed", type=int)
    ps.add_argument("--build-seed", type=int)
    ps.add_argument("--threads", metavar="N|auto")
    ps.add_argument("--redraw-cov-per-rep", action="store_true")
    ps.add_argument("--unbiased-cov", action="store_true")
    ps.add_argument("--out", metavar="PATH")
    ps.set_defaults(func=cmd_simulate)

    pv = sub.add_parser("version")
    pv.set_defaults(func=cmd_version)
    return parser


def _origin(exc):
    """Name of the innermost package module the exception passed through."""
    frames = [f for f in traceback.extract_tb(exc.__traceback__) if "hdct" in f.filename]
    if not frames:
        return "hdct"
    return os.path.splitext(os.path.basename(frames[-1].filename))[0]


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except HdctError as exc:
        module = _origin(exc)
        print(f"hdct: {type(exc).__name__} [{module}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"hdct: input error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
