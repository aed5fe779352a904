"""Command-line front end.

Exit codes: 0 when every check passes, 1 on input or usage errors (including
configurations that are not fiber-commutative), 2 when a mathematical
feasibility check fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .config_model import (
    ConfigurationError,
    FiberCommutativityError,
    parse_configuration,
    serialize_configuration,
    validate_axioms,
)
from .decomposition import DEFAULT_SEED, DecompositionError, decompose, multiplicities, verify_units
from .generators import (
    GQError,
    gen_cyclic_scheme,
    gen_directed_cycle_scheme,
    gen_gq_dualgrid,
    gen_gq_grid,
    gen_gq_w2,
    gen_hamming_2_2,
    gen_s3_with_point,
    gq_closed_form,
    gq_feasibility,
    gq_to_configuration,
    triple_label,
)
from .krein import ClosureError, analyze, krein_all

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    source: str
    tol_eig: float = 1e-7
    tol_psd: float = 1e-8
    tol_rank: float = 1e-8
    tol_int: float = 1e-6
    seed: int = DEFAULT_SEED
    format: str = "json"
    jobs: int = 1

    def __post_init__(self):
        for name in ("tol_eig", "tol_psd", "tol_rank", "tol_int"):
            if not getattr(self, name) > 0:
                raise UsageError(f"--{name.replace('_', '-')} must be positive")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")


GENERATORS = {
    "gq-w2": (0, lambda: gq_to_configuration(gen_gq_w2())),
    "gq-grid": (1, lambda s: gq_to_configuration(gen_gq_grid(s))),
    "gq-dualgrid": (1, lambda t: gq_to_configuration(gen_gq_dualgrid(t))),
    "cyclic": (1, gen_cyclic_scheme),
    "directed-cycle": (1, gen_directed_cycle_scheme),
    "hamming-2-2": (0, gen_hamming_2_2),
    "s3-point": (0, gen_s3_with_point),
}


def load_configuration(args):
    if args.gen:
        family, *params = args.gen
        if family not in GENERATORS:
            raise UsageError(f"unknown family {family!r}; choose from {', '.join(GENERATORS)}")
        arity, make = GENERATORS[family]
        if len(params) != arity:
            raise UsageError(f"family {family} takes {arity} integer parameter(s)")
        try:
            values = [int(p) for p in params]
        except ValueError:
            raise UsageError(f"parameters of {family} must be integers") from None
        try:
            cc = make(*values)
        except ValueError as exc:
            raise UsageError(f"{family}: {exc}") from None
        return cc, "gen:" + " ".join(args.gen)
    path = args.input or "-"
    if path == "-":
        text = sys.stdin.read()
    else:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(str(exc)) from exc
    return parse_configuration(text), path


# -- serialization -----------------------------------------------------------

def _num(x: float) -> float:
    x = round(float(x), 12)
    return 0.0 if x == 0 else x


def _matrix(Q) -> dict:
    Q = np.asarray(Q)
    out = {"re": [[_num(v) for v in row] for row in Q.real]}
    if np.iscomplexobj(Q) and np.any(np.abs(Q.imag) > 1e-12):
        out["im"] = [[_num(v) for v in row] for row in Q.imag]
    return out


def _fraction(v) -> str | float:
    if isinstance(v, Fraction):
        return str(v)
    return _num(v)


def meta(cfg: RunConfig, command: str) -> dict:
    m = asdict(cfg)
    m.update(command=command, version=__version__)
    return m


def build_report(cfg: RunConfig, command: str, cc) -> tuple[dict, int]:
    """The ``{meta, validation, ideals, krein, bounds, verdict}`` report and exit code."""
    report = {"meta": meta(cfg, command), "validation": None, "ideals": None,
              "krein": None, "bounds": None, "verdict": None}
    val = validate_axioms(cc)
    report["validation"] = val.to_dict()
    if not val.ok:
        report["verdict"] = {"status": "invalid", "reason": "axioms fail"}
        return report, EXIT_INFEASIBLE
    if command == "validate":
        report["verdict"] = {"status": "pass"}
        return report, EXIT_OK

    basis = decompose(cc, seed=cfg.seed, group_tol=cfg.tol_eig)
    multiplicities(basis, cfg.tol_int)
    units = verify_units(basis)
    report["ideals"] = basis.summary()
    report["ideals"]["unit_residuals"] = units.to_dict()
    if command == "decompose":
        ok = units.ok
        report["verdict"] = {"status": "pass" if ok else "fail"}
        return report, EXIT_OK if ok else EXIT_INFEASIBLE

    table = krein_all(basis, jobs=cfg.jobs)
    fr = analyze(table, psd_tol=cfg.tol_psd, rank_tol=cfg.tol_rank)
    report["bounds"] = [
        {"pair": [b.s, b.t], "lhs": b.lhs, "rhs": b.rhs, "pass": b.passed, "tight": b.tight,
         "terms": [{"u": u, "h": h, "rank": r} for u, h, r in b.terms]}
        for b in fr.bounds.values()
    ]
    bounds_ok = all(b.passed for b in fr.bounds.values())
    if command == "bounds":
        report["verdict"] = {"status": "pass" if bounds_ok else "fail"}
        return report, EXIT_OK if bounds_ok else EXIT_INFEASIBLE

    report["krein"] = {
        "closure_residual": _num(fr.closure_residual),
        "structural": {k: {"residual": _num(r), "pass": ok} for k, (r, ok) in fr.structural.items()},
        "triples": [
            {"triple": list(k), "label": triple_label(*k), "support": list(e.support),
             "matrix": _matrix(e.matrix), "min_eigenvalue": _num(fr.psd[k].min_eigenvalue),
             "psd": fr.psd[k].passed}
            for k, e in table.entries.items()
        ],
        "boundary": [triple_label(*k) for k in fr.boundary],
    }
    failed = [triple_label(*k) for k, v in fr.psd.items() if not v.passed]
    report["verdict"] = {
        "status": "pass" if fr.ok and units.ok else "fail",
        "psd_failures": failed,
        "bound_failures": [[b.s, b.t] for b in fr.bounds.values() if not b.passed],
        "boundary": [triple_label(*k) for k in fr.boundary],
    }
    return report, EXIT_OK if fr.ok and units.ok else EXIT_INFEASIBLE


REPORT_KEYS = ("meta", "validation", "ideals", "krein", "bounds", "verdict")


def parse_report(text: str) -> dict:
    """Load a JSON report and check its top-level layout."""
    doc = json.loads(text)
    if not isinstance(doc, dict) or set(doc) != set(REPORT_KEYS):
        raise ValueError(f"report must have exactly the keys {', '.join(REPORT_KEYS)}")
    missing = {"command", "seed", "source", "version"} - set(doc["meta"])
    if missing:
        raise ValueError(f"report meta lacks {', '.join(sorted(missing))}")
    if "status" not in doc["verdict"]:
        raise ValueError("report verdict lacks a status")
    return doc


def render_text(report: dict) -> str:
    lines = [f"# {report['meta']['command']} ({report['meta']['source']}, seed {report['meta']['seed']})"]
    v = report["validation"]
    if v is not None:
        lines.append(
            f"validation: {'ok' if v['ok'] else 'FAIL'}  rank={v['rank']}  "
            f"fiber_commutative={v['fiber_commutative']}  fiber_symmetric={v['fiber_symmetric']}"
        )
        for ax, w in v["witnesses"].items():
            lines.append(f"  axiom {ax} witness: {json.dumps(w)}")
    ideals = report["ideals"]
    if ideals is not None:
        lines.append(f"ideals: {len(ideals['ideals'])}  sum e^2={ideals['sum_degree_squared']}  "
                     f"sum h*e={ideals['sum_multiplicity_degree']}")
        for I in ideals["ideals"]:
            lines.append(
                f"  C_{I['index'] + 1}: support={[f + 1 for f in I['support']]} "
                f"h={I['multiplicity']} partner=C_{I['partner'] + 1}"
            )
    kr = report["krein"]
    if kr is not None:
        lines.append(f"krein: {len(kr['triples'])} triples, closure residual {kr['closure_residual']:.1e}")
        for t in kr["triples"]:
            flag = "ok" if t["psd"] else "NOT PSD"
            lines.append(f"  {t['label']:<14} min eig {t['min_eigenvalue']: .6g}  {flag}")
        for name, s in kr["structural"].items():
            lines.append(f"  check {name}: {s['residual']:.1e} {'ok' if s['pass'] else 'FAIL'}")
        if kr["boundary"]:
            lines.append(f"  boundary (zero eigenvalue): {', '.join(kr['boundary'])}")
    if report["bounds"] is not None:
        lines.append("absolute bound:")
        for b in report["bounds"]:
            s, t = (x + 1 for x in b["pair"])
            lines.append(f"  ({s},{t}): {b['lhs']} <= {b['rhs']}  "
                         f"{'tight' if b['tight'] else ('ok' if b['pass'] else 'FAIL')}")
    lines.append(f"verdict: {report['verdict']['status']}")
    return "\n".join(lines)


def emit(obj, cfg: RunConfig, text: str | None = None, out=None):
    out = sys.stdout if out is None else out
    if cfg.format == "json" or text is None:
        out.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    else:
        out.write(text + "\n")


# -- gq subcommand -----------------------------------------------------------

def _parse_range(text: str) -> range:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise UsageError(f"bad range {text!r}; expected a..b") from None
    if lo < 1 or hi < lo:
        raise UsageError(f"bad range {text!r}")
    return range(lo, hi + 1)


def _closed_form_doc(s, t) -> dict:
    cf = gq_closed_form(s, t)
    return {
        "s": str(cf.s), "t": str(cf.t),
        "fiber_sizes": [str(x) for x in cf.fiber_sizes],
        "multiplicities": [str(x) for x in cf.multiplicities],
        "supports": [list(F) for F in cf.supports],
        "matrices": [
            {"triple": list(k), "label": triple_label(*k), "support": list(e.support),
             "matrix": _matrix(e.matrix),
             "exact": None if e.scalar is None else str(e.scalar)}
            for k, e in sorted(cf.entries.items())
        ],
    }


def _verdict_doc(v) -> dict:
    return {
        "s": str(v.s), "t": str(v.t), "verdict": v.verdict, "message": v.message(),
        "witness": None if v.witness is None else triple_label(*v.witness),
        "witness_value": None if v.witness_value is None else _fraction(v.witness_value),
        "boundary": [triple_label(*k) for k in v.boundary_triples],
        "negative": [triple_label(*k) for k in v.negative_triples],
        "other_entries_nonnegative": v.other_entries_nonnegative,
    }


def run_gq(args, cfg: RunConfig) -> int:
    def param(x):
        try:
            value = Fraction(x)
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"bad parameter {x!r}") from None
        if value < 1:
            raise UsageError("s and t must be at least 1")
        return value

    if args.action == "build":
        s, t = (int(param(x)) for x in (args.s, args.t))
        if (s, t) == (2, 2):
            inc = gen_gq_w2()
        elif t == 1:
            inc = gen_gq_grid(s)
        elif s == 1:
            inc = gen_gq_dualgrid(t)
        else:
            raise UsageError(f"no construction for GQ({s},{t}); available: (2,2), (s,1), (1,t)")
        sys.stdout.write(serialize_configuration(gq_to_configuration(inc)) + "\n")
        return EXIT_OK

    if args.action == "closed-form":
        doc = _closed_form_doc(param(args.s), param(args.t))
        text = "\n".join(
            f"{m['label']:<14} " + (m["exact"] + " * J" if m["exact"] is not None else json.dumps(m["matrix"]))
            for m in doc["matrices"]
        )
        emit(doc, cfg, text)
        return EXIT_OK

    if args.sweep:
        s_range, t_range = (_parse_range(r) for r in args.sweep)
        rows = [gq_feasibility(s, t) for s in s_range for t in t_range]
        doc = {"sweep": [_verdict_doc(v) for v in rows]}
        text = "\n".join(f"({v.s},{v.t})\t{v.verdict}\t{v.message()}" for v in rows)
        emit(doc, cfg, text)
        return EXIT_INFEASIBLE if any(v.verdict == "infeasible" for v in rows) else EXIT_OK
    if args.s is None or args.t is None:
        raise UsageError("gq feasibility needs S T or --sweep a..b c..d")
    v = gq_feasibility(param(args.s), param(args.t))
    emit(_verdict_doc(v), cfg, v.message())
    return EXIT_INFEASIBLE if v.verdict == "infeasible" else EXIT_OK


# -- entry point -------------------------------------------------------------

def _common(p):
    p.add_argument("--tol-psd", type=float, default=1e-8)
    p.add_argument("--tol-eig", type=float, default=1e-7)
    p.add_argument("--tol-rank", type=float, default=1e-8)
    p.add_argument("--tol-int", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--jobs", type=int, default=1)


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad arguments; 2 is reserved for infeasibility here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cckrein",
        description="Krein conditions and absolute bounds for fiber-commutative coherent configurations.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("validate", "check the coherent-configuration axioms"),
        ("decompose", "simple ideals and matrix units"),
        ("krein", "matrices of Krein parameters and feasibility checks"),
        ("bounds", "absolute-bound ledger"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("input", nargs="?", help="configuration JSON file, or - for stdin")
        p.add_argument("--gen", nargs="+", metavar="FAMILY",
                       help=f"use a built-in family instead of a file: {', '.join(GENERATORS)}")
        _common(p)
    p = sub.add_parser("gq", help="generalized quadrangle constructions and closed forms")
    p.add_argument("action", choices=("build", "closed-form", "feasibility"))
    p.add_argument("s", nargs="?")
    p.add_argument("t", nargs="?")
    p.add_argument("--sweep", nargs=2, metavar=("S_RANGE", "T_RANGE"))
    _common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            source="", tol_eig=args.tol_eig, tol_psd=args.tol_psd, tol_rank=args.tol_rank,
            tol_int=args.tol_int, seed=args.seed, format=args.format, jobs=args.jobs,
        )
        if args.command == "gq":
            cfg.source = "gq"
            if args.action in ("build", "closed-form") and (args.s is None or args.t is None):
                raise UsageError(f"gq {args.action} needs S T")
            return run_gq(args, cfg)
        cc, cfg.source = load_configuration(args)
        report, code = build_report(cfg, args.command, cc)
        emit(report, cfg, render_text(report))
        return code
    except FiberCommutativityError as exc:
        print(f"error: configuration is not fiber-commutative: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ConfigurationError, GQError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DecompositionError, ClosureError) as exc:
        print(f"error: numerical decomposition failed: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
