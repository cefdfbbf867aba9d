"""Command line interface: ``riemcompat check | tensors | catalog``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .abc_tensors import weyl_tensor
from .catalog import Fixture, catalog, names
from .curvature import ChartedMetric, CurvaturePack
from .errors import DomainError, RiemCompatError, SingularMetric
from .files import dump, field_to_dict, load_field, load_metric, metric_to_dict
from .suite import parse_suites, run_suite, to_json

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN = 0, 1, 2, 3
TENSORS = ("christoffel", "riemann", "ricci", "scalar", "weyl")


def _parse_params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, val = item.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"parameter {item!r} must look like name=value")
        try:
            out[key] = int(val)
        except ValueError:
            try:
                out[key] = float(val)
            except ValueError:
                out[key] = val
    return out


def _cmd_check(args) -> int:
    metric = load_metric(args.metric)
    fields = {}
    for path in args.field or ():
        f = load_field(path)
        fields[f.name] = f
    suites = parse_suites(args.suite)
    report = run_suite(metric, suites, args.points, args.seed, args.tol, fields)
    if not args.quiet:
        for line in report.summary_lines():
            print(line)
    text = report.to_json()
    if args.json:
        Path(args.json).write_text(text)
    if report.domain_error:
        return EXIT_DOMAIN
    return EXIT_OK if report.ok else EXIT_FAIL


def _format_components(label: str, arr: np.ndarray, tol: float = 0.0) -> list[str]:
    arr = np.asarray(arr)
    if arr.ndim == 0:
        return [f"{label} = {float(arr):.17g}"]
    out = []
    for idx in np.ndindex(arr.shape):
        v = float(arr[idx])
        if abs(v) > tol:
            out.append(f"{label}[{','.join(map(str, idx))}] = {v:.17g}")
    return out or [f"{label}: all components zero"]


def _cmd_tensors(args) -> int:
    metric = load_metric(args.metric)
    try:
        point = np.array([float(t) for t in args.at.split(",")])
    except ValueError:
        print(f"error: --at must be comma separated numbers, got {args.at!r}", file=sys.stderr)
        return EXIT_INPUT
    if point.size != metric.dim:
        print(f"error: --at needs {metric.dim} coordinates, got {point.size}", file=sys.stderr)
        return EXIT_INPUT
    what = [w.strip() for w in args.what.split(",") if w.strip()]
    unknown = [w for w in what if w not in TENSORS]
    if unknown:
        print(f"error: unknown tensors {unknown}; choose from {', '.join(TENSORS)}", file=sys.stderr)
        return EXIT_INPUT
    metric.check_point(point)
    pack = CurvaturePack(metric, point, order=2)
    table = {
        "christoffel": ("Gamma^m_jk [m,j,k]", lambda: pack.christoffel.values),
        "riemann": ("R_jkl^m [j,k,l,m]", lambda: pack.riemann.values),
        "ricci": ("R_kl", lambda: pack.ricci.values),
        "scalar": ("R", lambda: pack.scalar.values),
        "weyl": ("C_jkl^m [j,k,l,m]", lambda: weyl_tensor(pack).values),
    }
    for w in what:
        label, get = table[w]
        for line in _format_components(label, get(), args.zero_tol):
            print(line)
    return EXIT_OK


def _cmd_catalog(args) -> int:
    if args.action == "list":
        for n in names():
            print(n)
        return EXIT_OK
    if not args.name:
        print("error: catalog emit needs a name", file=sys.stderr)
        return EXIT_INPUT
    entry = catalog(args.name, **_parse_params(args.param))
    if isinstance(entry, ChartedMetric):
        metric, flds = entry, {}
    elif isinstance(entry, Fixture) and entry.metric is not None:
        metric, flds = entry.metric, entry.fields
    else:
        data = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in entry.data.items()}
        text = to_json({"name": entry.name, "data": data}) + "\n"
        _emit(text, args.output)
        return EXIT_OK
    _emit(dump(metric_to_dict(metric)), args.output)
    if flds:
        if args.fields_dir:
            d = Path(args.fields_dir)
            d.mkdir(parents=True, exist_ok=True)
            for name, f in flds.items():
                (d / f"{name}.json").write_text(dump(field_to_dict(f)))
        else:
            print(f"note: fixture has fields {sorted(flds)}; pass --fields-dir to write them", file=sys.stderr)
    return EXIT_OK


def _emit(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="riemcompat", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="run identity suites on a metric file")
    c.add_argument("metric")
    c.add_argument("--field", action="append", help="field file; its name picks the role (b, X, gbar)")
    c.add_argument("--suite", default="all", help="comma separated subset of suites, or 'all'")
    c.add_argument("--points", type=int, default=10)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=None, help="override every check tolerance")
    c.add_argument("--json", help="write the report here")
    c.add_argument("--quiet", action="store_true")
    c.set_defaults(func=_cmd_check)

    t = sub.add_parser("tensors", help="print curvature components at a point")
    t.add_argument("metric")
    t.add_argument("--at", required=True, help="comma separated coordinates")
    t.add_argument("--what", default="riemann,ricci,scalar")
    t.add_argument("--zero-tol", type=float, default=0.0, help="hide components at or below this size")
    t.set_defaults(func=_cmd_tensors)

    k = sub.add_parser("catalog", help="list or emit built-in metrics and fixtures")
    k.add_argument("action", choices=("list", "emit"))
    k.add_argument("name", nargs="?")
    k.add_argument("--param", action="append", help="name=value passed to the catalog entry")
    k.add_argument("-o", "--output", help="write the metric file here instead of stdout")
    k.add_argument("--fields-dir", help="directory for a fixture's field files")
    k.set_defaults(func=_cmd_catalog)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            return args.func(args)
    except (DomainError, SingularMetric, FloatingPointError) as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (RiemCompatError, argparse.ArgumentTypeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
