"""Command-line front end: ``rif-lab <command> --poly p.json ...``.

Variable indices on the command line are 1-based.  Output is JSON on
stdout (or ``--json PATH``); curves go to ``--csv PATH``.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

import jsonschema
import numpy as np

from . import __version__
from .dirichlet import DEFAULT_MARGIN, DEFAULT_SCHEDULE, classify_membership
from .embeddings import hp_embed_feasible, membership_gain_verdict
from .hardy import HardyGrid, ThresholdSearch, hp_norm_partial, hp_threshold, omega_measure
from .loja import LojaConfig, loj_verdict, loja_probe
from .polycore import MultiPoly, reflect
from .rif import ProbeConfig, RIFError, build_rif
from .series import MAX_COEFFS, expand_ratio

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64


class PolyParseError(ValueError):
    pass


class UsageError(Exception):
    pass


def _schema(name: str) -> dict:
    return json.loads(resources.files("riflab").joinpath("schemas", name).read_text())


def parse_poly(doc) -> MultiPoly:
    """``{"vars": n, "terms": [{"exp": [...], "re": x, "im": y}, ...]}`` to a polynomial."""
    try:
        jsonschema.validate(doc, _schema("poly.schema.json"))
    except jsonschema.ValidationError as e:
        raise PolyParseError(f"malformed polynomial: {e.message}") from None
    n = doc["vars"]
    terms = {}
    for t in doc["terms"]:
        e = tuple(t["exp"])
        if len(e) != n:
            raise PolyParseError(f"exponent {list(e)} has {len(e)} entries, expected {n}")
        if e in terms:
            raise PolyParseError(f"duplicate exponent {list(e)}")
        terms[e] = complex(t["re"], t.get("im", 0.0))
    return MultiPoly(n, terms)


def poly_to_doc(p: MultiPoly) -> dict:
    return {
        "vars": p.n,
        "terms": [{"exp": list(e), "re": float(c.real), "im": float(c.imag)} for e, c in p],
    }


def _clean(x):
    # JSON has no infinities; encode them as strings
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    return x


def _floats(s: str) -> list:
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _ints(s: str) -> list:
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=0, help="master seed for every sampler (default 0)")
    g.add_argument("--max-coeffs", type=int, default=MAX_COEFFS, help=f"largest coefficient box (default {MAX_COEFFS})")
    g.add_argument("--tol", type=float, default=1e-9, help="unimodularity tolerance on the torus (default 1e-9)")
    g.add_argument("--schedule", type=_ints, default=list(DEFAULT_SCHEDULE), help="box orders for the classifier")
    g.add_argument("--margin", type=float, default=DEFAULT_MARGIN, help="classifier margin (default 0.15)")
    g.add_argument("--json", dest="json_out", metavar="PATH", help="write JSON here instead of stdout")
    g.add_argument("--csv", dest="csv_out", metavar="PATH", help="write partial-sum or level-set curves as CSV")
    g.add_argument("--workers", type=int, default=1, help="threads for independent requests (default 1)")
    g.add_argument("--no-timings", action="store_true", help="zero all timings for byte-stable output")

    ap = _Parser(prog="rif-lab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        c = sub.add_parser(name, parents=[common], help=help_)
        c.add_argument("--poly", required=name != "embed", help="polynomial JSON file ('-' for stdin)")
        return c

    cmd("reflect", "reflection polynomial at the multidegree")
    cmd("validate", "check stability and unimodularity")
    c = cmd("expand", "Taylor coefficients of ptilde/p")
    c.add_argument("--orders", type=_ints, required=True, help="box orders, e.g. 8,8")
    c = cmd("classify", "Dirichlet-type membership verdict")
    c.add_argument("--alpha", type=_floats, action="append", required=True)
    c = cmd("hp", "H^p norm or threshold of a partial derivative")
    c.add_argument("--k", type=int, required=True, help="variable (1-based)")
    c.add_argument("--p", type=float, help="exponent; omit to search for the threshold")
    c = cmd("omega", "level-set measure of small slice distances")
    c.add_argument("--k", type=int, required=True, help="variable (1-based)")
    c.add_argument("--samples", type=int, default=100_000)
    c = cmd("embed", "feasibility of a weight vector against derivative thresholds")
    c.add_argument("--alpha", type=_floats, required=True)
    c.add_argument("--thresholds", type=_floats, help="per-variable thresholds ('inf' allowed)")
    c.add_argument("--closed", action="store_true", help="treat the thresholds as attained")
    c = cmd("loja", "decay exponent of |p| at a torus zero")
    c.add_argument("--point", type=_floats, required=True, help="re,im pairs per coordinate")
    c.add_argument("--alpha", type=float, help="negative weight for the membership verdict")
    c = cmd("report", "run the full pipeline")
    c.add_argument("--alpha", type=_floats, action="append", default=[])
    c.add_argument("--hardy", action="store_true", help="include H^p thresholds and embedding feasibility")
    c.add_argument("--point", type=_floats, help="torus zero for the decay-exponent stage (re,im pairs)")
    c.add_argument("--loja-alpha", type=float, default=-0.5)
    return ap


def _load_poly(path: str) -> tuple[dict, MultiPoly]:
    try:
        text = sys.stdin.read() if path == "-" else open(path).read()
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError) as e:
        raise PolyParseError(f"cannot read polynomial: {e}") from None
    return doc, parse_poly(doc)


def _point(vals: list, n: int) -> tuple:
    if len(vals) != 2 * n:
        raise UsageError(f"--point needs {2 * n} numbers (re,im per coordinate)")
    return tuple(complex(vals[2 * i], vals[2 * i + 1]) for i in range(n))


def _var(k: int, n: int) -> int:
    if not 1 <= k <= n:
        raise UsageError(f"--k must be in 1..{n}")
    return k - 1


class _Stages:
    """Runs named stages, recording results, errors and wall time."""

    def __init__(self, timed: bool):
        self.stages, self.timings, self.timed = {}, {}, timed
        self.failed_validation = False
        self.failed_numeric = False

    def run(self, name, fn, method=None):
        t = time.perf_counter()
        try:
            res = fn()
        except RIFError as e:
            self.failed_validation = True
            self.stages[name] = {"status": "error", "error": str(e), "error_type": type(e).__name__}
            res = None
        except (ValueError, ArithmeticError, MemoryError, RuntimeError) as e:
            self.failed_numeric = True
            self.stages[name] = {"status": "error", "error": str(e), "error_type": type(e).__name__}
            res = None
        else:
            entry = {"status": "ok", "result": res.to_dict() if hasattr(res, "to_dict") else res}
            if method:
                entry["method"] = method
            self.stages[name] = entry
        self.timings[name] = round(time.perf_counter() - t, 6) if self.timed else 0.0
        return res

    def skip(self, name, why):
        self.stages[name] = {"status": "skipped", "error": why}
        self.timings[name] = 0.0


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _options(args) -> dict:
    # the worker count never changes results, so it stays out of the report
    skip = {"json_out", "csv_out", "poly", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _classify_many(f, alphas, args):
    n = f.n
    N = max(args.schedule)
    # one expansion shared by every weight vector
    box = expand_ratio(f.ptilde, f.p, (N,) * n, max_coeffs=args.max_coeffs)

    def one(a):
        if len(a) == 1:
            a = a * n
        return classify_membership(box, a, args.schedule, args.margin)

    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as ex:
        return list(ex.map(one, alphas))


def _probe(args) -> ProbeConfig:
    return ProbeConfig(seed=args.seed, unimodular_tol=args.tol)


def _validate(st: _Stages, p: MultiPoly, args):
    f = st.run("validate", lambda: build_rif(p, _probe(args)))
    if f is not None:
        st.stages["validate"]["result"] = {
            "ptilde": poly_to_doc(f.ptilde),
            "multidegree": list(f.multidegree),
            "certificate": f.stability_certificate,
        }
    return f


def run(args) -> tuple[dict, int]:
    st = _Stages(not args.no_timings)
    doc, p = None, None
    if args.poly is not None:
        doc, p = _load_poly(args.poly)
    c = args.command
    f = None
    if c in ("validate", "expand", "classify", "hp", "omega", "report"):
        f = _validate(st, p, args)
        if f is None:
            return _finish(doc, args, st)
    if c in ("reflect", "report"):
        st.run("reflect", lambda: {"ptilde": poly_to_doc(reflect(p)), "multidegree": list(p.multidegree)})
    if c == "expand":
        box = st.run("expand", lambda: expand_ratio(f.ptilde, f.p, args.orders, max_coeffs=args.max_coeffs))
        if box is not None:
            idx = np.indices(box.coeffs.shape).reshape(box.n, -1).T
            flat = box.coeffs.ravel()
            st.stages["expand"]["result"] = {
                "orders": list(box.orders),
                "coefficients": [{"exp": list(map(int, e)), "re": v.real, "im": v.imag} for e, v in zip(idx, flat)],
            }
            if args.csv_out:
                _write_csv(args.csv_out, [f"k{i + 1}" for i in range(box.n)] + ["re", "im"],
                           [list(map(int, e)) + [v.real, v.imag] for e, v in zip(idx, flat)])
    if c in ("classify", "report") and args.alpha:
        verdicts = st.run("classify", lambda: [v.to_dict() for v in _classify_many(f, args.alpha, args)], "series-classifier")
        if verdicts is not None:
            for a, v in zip(args.alpha, verdicts):
                v["alpha"] = a
            if args.csv_out:
                _write_csv(args.csv_out, ["alpha", "order", "partial_sum"],
                           [[",".join(map(str, a)), o, s] for a, v in zip(args.alpha, verdicts) for o, s in v["partial_sums"]])
    if c == "hp":
        k = _var(args.k, f.n)
        if args.p is None:
            st.run("hardy", lambda: hp_threshold(f, k, ThresholdSearch(seed=args.seed)), "levelset+quadrature")
        else:
            st.run("hardy", lambda: hp_norm_partial(f, k, args.p, HardyGrid()), "quadrature")
    if c == "omega":
        k = _var(args.k, f.n)
        prof = st.run("omega", lambda: omega_measure(f, k, m=args.samples, seed=args.seed), "levelset")
        if prof is not None and args.csv_out:
            _write_csv(args.csv_out, ["x", "measure", "stderr"], zip(prof.xs, prof.measure, prof.stderr))
    if c == "embed":
        if args.thresholds is None:
            if p is None:
                raise UsageError("embed needs --thresholds or --poly")
            f = _validate(st, p, args)
            if f is None:
                return _finish(doc, args, st)
            prof = st.run("hardy", lambda: [hp_threshold(f, k, ThresholdSearch(seed=args.seed)) for k in range(f.n)])
            if prof is None:
                return _finish(doc, args, st)
            ts = prof
        else:
            ts = [(t, "closed" if args.closed else "open") for t in args.thresholds]
        st.run("embed", lambda: hp_embed_feasible(args.alpha, ts), "theorem-implication")
    if c == "report" and args.hardy:
        prof = st.run(
            "hardy", lambda: {"entries": [hp_threshold(f, k, ThresholdSearch(seed=args.seed)).to_dict() for k in range(f.n)]},
            "levelset+quadrature",
        )
        if prof is not None and args.alpha:
            ents = [(e["threshold"] if not e["bounded"] else math.inf, e["endpoint"]) for e in prof["entries"]]
            st.run("embed", lambda: [
                dict(hp_embed_feasible(a * f.n if len(a) == 1 else a, ents).to_dict(), alpha=a) for a in args.alpha
            ], "theorem-implication")
    if c == "loja" or (c == "report" and args.point is not None):
        pt = _point(args.point, p.n)
        est = st.run("loja", lambda: loja_probe(p, pt, LojaConfig(), seed=args.seed), "envelope-fit")
        a = args.alpha if c == "loja" else args.loja_alpha
        if est is not None and a is not None:
            st.run("loja_verdict", lambda: loj_verdict(est, p.n, a), "theorem-implication")
            if a < 0:
                st.run("membership_gain", lambda: membership_gain_verdict(a, p.n, est), "theorem-implication")
    return _finish(doc, args, st)


def _finish(doc, args, st: _Stages) -> tuple[dict, int]:
    report = {
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "input": {"poly": doc if doc is not None else {}, "options": _options(args)},
        "stages": st.stages,
        "timings": st.timings,
    }
    report = _clean(report)
    jsonschema.validate(report, _schema("report.schema.json"))
    code = EXIT_INVALID if st.failed_validation else EXIT_NUMERIC if st.failed_numeric else EXIT_OK
    return report, code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report, code = run(args)
    except PolyParseError as e:
        sys.stderr.write(f"rif-lab: {e}\n")
        return EXIT_INVALID
    except UsageError as e:
        sys.stderr.write(f"rif-lab: {e}\n")
        return EXIT_USAGE
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.json_out:
        with open(args.json_out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
