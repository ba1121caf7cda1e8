"""Command-line interface.

Exit codes: 0 success, 2 validation failure, 3 internal consistency
failure (e.g. the two Arf computations disagreeing).
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from importlib import resources
from pathlib import Path

from . import engine, knots, schema
from .gamma import PairingContext, build_gamma, coefficient_at, reduce_list, smith_oracle
from .gamma import AmbientNotFinite
from .knots import KnotError, SeifertMatrix

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3


def _data_dir(kind: str):
    return resources.files("surfemb4").joinpath("data", kind)


def _resolve(path: str, kind: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    candidate = _data_dir(kind).joinpath(path if path.endswith(".json") else path + ".json")
    if candidate.is_file():
        return Path(str(candidate))
    raise FileNotFoundError(f"no such file or shipped {kind[:-1]} '{path}'")


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def cmd_validate(args) -> int:
    inst, errors = schema.load_instance(str(_resolve(args.instance, "instances")))
    if errors:
        _emit({"ok": False, "errors": errors})
        return EXIT_VALIDATION
    _emit({"ok": True, "errors": []})
    return EXIT_OK


def _decide_one(path: str, mode: str) -> tuple[int, dict]:
    inst, errors = schema.load_instance(path)
    if errors:
        return EXIT_VALIDATION, {"ok": False, "errors": errors}
    try:
        if mode == "regular":
            verdict = engine.flowchart(inst)
        else:
            verdict = engine.homotopy_analysis(inst)
    except ValueError as exc:  # all domain errors (engine, bands, whitney, groups)
        return EXIT_VALIDATION, {"ok": False, "errors": [str(exc)]}
    return EXIT_OK, verdict.as_dict()


def cmd_decide(args) -> int:
    if args.batch:
        paths = sorted(Path(args.instance).glob("*.json"))
        if not paths:
            _emit({"ok": False, "errors": [f"no instance files in {args.instance}"]})
            return EXIT_VALIDATION
        with ThreadPoolExecutor(max_workers=min(8, len(paths))) as pool:
            results = list(pool.map(lambda p: (_decide_one(str(p), args.mode), p), paths))
        worst = EXIT_OK
        out = {}
        for (code, doc), p in results:
            out[p.name] = doc
            worst = max(worst, code)
        _emit(out)
        return worst
    code, doc = _decide_one(str(_resolve(args.instance, "instances")), args.mode)
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return code


def cmd_km(args) -> int:
    inst, errors = schema.load_instance(str(_resolve(args.instance, "instances")))
    if errors:
        _emit({"ok": False, "errors": errors})
        return EXIT_VALIDATION
    try:
        value = engine.compute_km(inst)
    except ValueError as exc:
        _emit({"ok": False, "errors": [str(exc)]})
        return EXIT_VALIDATION
    _emit({"km": value})
    return EXIT_OK


def cmd_gamma(args) -> int:
    inst, errors = schema.load_instance(str(_resolve(args.instance, "instances")))
    if errors:
        _emit({"ok": False, "errors": errors})
        return EXIT_VALIDATION
    i = args.component
    j = args.other if args.other is not None else i
    try:
        s_f = inst.component(i).subgroup
        s_g = inst.component(j).subgroup
    except engine.ValidationError as exc:
        _emit({"ok": False, "errors": [str(exc)]})
        return EXIT_VALIDATION
    parsed_queries = []
    for raw in args.query or []:
        try:
            value = json.loads(raw)
            parsed_queries.append(
                (value, inst.group.check_elem(value if inst.group.kind == "finite" else tuple(value)))
            )
        except (ValueError, TypeError) as exc:
            _emit({"ok": False, "errors": [f"bad query element {raw!r}: {exc}"]})
            return EXIT_VALIDATION
    ctx = PairingContext(inst.group, inst.wM, s_f, s_g, self_pairing=(i == j))
    gamma = build_gamma(ctx)
    report: dict = {"self_pairing": i == j}
    if gamma.finite:
        orbits = gamma.orbits()
        report["orbits"] = [
            {"rep": o.rep, "order": "Z/2" if o.order_two else "Z"} for o in orbits
        ]
        report["free_rank"] = gamma.free_rank()
        report["z2_count"] = gamma.two_count()
        oracle_rank, oracle_torsion = smith_oracle(ctx)
        report["smith_oracle"] = {"free_rank": oracle_rank, "torsion": oracle_torsion}
    else:
        report["note"] = "infinite ambient group; orbits reported per queried element"
    if i == j:
        pts = [p for p in inst.points if p.components == (i, i)]
    else:
        pts = [p for p in inst.points if set(p.components) == {i, j}]
    elem = reduce_list([(p.sign, p.eta) for p in pts], gamma)
    queries = []
    for value, g in parsed_queries:
        orbit = gamma.orbit_of(g)
        coeff = coefficient_at(elem, g)
        queries.append({
            "element": value,
            "orbit_rep": orbit.rep if gamma.finite else list(orbit.rep),
            "order": "Z/2" if orbit.order_two else "Z",
            "coefficient": coeff.value,
        })
    report["reduced_is_zero"] = elem.is_zero()
    report["queries"] = queries
    _emit(report)
    return EXIT_OK


def _load_knot(path: str) -> SeifertMatrix:
    doc = json.loads(_resolve(path, "knots").read_text())
    if not isinstance(doc, dict) or "seifert" not in doc:
        raise KnotError("knot files are objects with a 'seifert' matrix")
    return SeifertMatrix(doc["seifert"])


def cmd_knot(args) -> int:
    try:
        V = _load_knot(args.knot)
    except (OSError, json.JSONDecodeError, KnotError, FileNotFoundError) as exc:
        _emit({"ok": False, "errors": [str(exc)]})
        return EXIT_VALIDATION
    try:
        if args.invariant == "arf":
            _emit({"arf": knots.arf(V)})
        elif args.invariant == "alex":
            _emit({"alexander_at_minus_one": knots.alexander_at_minus_one(V)})
        elif args.invariant == "sig":
            try:
                p, q = args.omega.split("/") if "/" in args.omega else (args.omega, "1")
                omega = Fraction(int(p), int(q))
            except (ValueError, ZeroDivisionError) as exc:
                _emit({"ok": False, "errors": [f"bad --omega {args.omega!r}: {exc}"]})
                return EXIT_VALIDATION
            _emit({"signature": knots.levine_tristram(V, omega)})
        elif args.invariant == "sigma-d":
            _emit({"sigma_d": knots.sigma_d(V, args.d)})
        elif args.invariant == "cp2-bound":
            _emit({"lower_bound": knots.cp2_genus_lower_bound(V, args.d)})
        elif args.invariant == "cp2-verdict":
            v = knots.cp2_genus_verdict(V)
            _emit({"lower": v.lower, "upper": v.upper,
                   "exact": v.exact if v.exact is not None else "unknown",
                   "incomplete": v.incomplete, "scan_limit": v.scan_limit})
        elif args.invariant == "shake-genus":
            _emit({"shake_genus_pm1": knots.shake_genus_pm1(V)})
    except knots.ArfMethodsDisagree as exc:
        _emit({"ok": False, "errors": [str(exc)]})
        return EXIT_INTERNAL
    except KnotError as exc:
        _emit({"ok": False, "errors": [str(exc)]})
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_examples(args) -> int:
    out = {"instances": [], "knots": []}
    for kind in ("instances", "knots"):
        base = _data_dir(kind)
        out[kind] = sorted(p.name for p in base.iterdir() if p.name.endswith(".json"))
    _emit(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfemb4",
        description="Embedding obstructions for surfaces in 4-manifolds",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate an instance file")
    p.add_argument("instance")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("decide", help="run the embedding decision flowchart")
    p.add_argument("instance", help="instance file, shipped example name, or directory with --batch")
    p.add_argument("--mode", choices=("regular", "homotopy"), default="regular")
    p.add_argument("--batch", action="store_true", help="process a directory of instance files")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("km", help="compute the secondary invariant only")
    p.add_argument("instance")
    p.set_defaults(func=cmd_km)

    p = sub.add_parser("gamma", help="report the intersection-number target group")
    p.add_argument("instance")
    p.add_argument("--component", type=int, required=True)
    p.add_argument("--other", type=int, default=None,
                   help="second component (defaults to a self-pairing)")
    p.add_argument("--query", action="append",
                   help="group element (JSON) whose orbit and coefficient to report")
    p.set_defaults(func=cmd_gamma)

    p = sub.add_parser("knot", help="Seifert-matrix knot invariants")
    p.add_argument("invariant", choices=("arf", "alex", "sig", "sigma-d",
                                         "cp2-bound", "cp2-verdict", "shake-genus"))
    p.add_argument("knot", help="knot file or shipped knot name")
    p.add_argument("--omega", default="1/1", help="signature point p/q, meaning exp(i*pi*p/q)")
    p.add_argument("--d", type=int, default=2, help="homology class for sigma-d / cp2-bound")
    p.set_defaults(func=cmd_knot)

    p = sub.add_parser("examples", help="shipped example files")
    p.add_argument("what", choices=("list",))
    p.set_defaults(func=cmd_examples)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AmbientNotFinite as exc:
        _emit({"ok": False, "errors": [str(exc)]})
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        _emit({"ok": False, "errors": [str(exc)]})
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
