"""Instance-file schema: strict validation, loading, and serialization.

The interchange format is JSON.  There are no implicit defaults: every
field of every object must be present (the only optional data are the w2
and Euler fields on a component, and the Whitney collection, which must
still appear explicitly as null when absent).  Validation accumulates all
errors with JSON-pointer-style paths instead of stopping at the first.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from . import bands as _bands
from . import engine as _engine
from .bands import BandCatalog, BandRecord, RelH2, SurfaceComponent, SurfaceModel
from .engine import ComponentData, ProblemInstance, Verdict
from .groups import (
    Character,
    GroupError,
    abelian_group,
    make_finite_group,
    subgroup_closure,
)
from .whitney import DoublePoint, WhitneyCollection, WhitneyDisc

SCHEMA_VERSION = 1


class SchemaError(ValueError):
    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = errors


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, path: str, message: str) -> None:
        self.errors.append(f"{path}: {message}")

    def require(self, obj: dict, path: str, keys: dict, optional=()) -> bool:
        """Presence and type check; returns False when the object is unusable."""
        ok = True
        if not isinstance(obj, dict):
            self.fail(path, f"expected an object, got {type(obj).__name__}")
            return False
        for key, typ in keys.items():
            if key not in obj:
                if key in optional:
                    continue
                self.fail(f"{path}/{key}", "missing required field")
                ok = False
            elif typ is not None and not isinstance(obj[key], typ):
                self.fail(f"{path}/{key}", f"expected {typ}, got {type(obj[key]).__name__}")
                ok = False
        for key in obj:
            if key not in keys:
                self.fail(f"{path}/{key}", "unknown field")
                ok = False
        return ok

    def bit(self, value, path: str) -> int:
        if value not in (0, 1):
            self.fail(path, f"expected 0 or 1, got {value!r}")
            return 0
        return value


def _parse_group(doc, check: _Checker):
    if not check.require(doc, "/group", {"kind": str, "table": list, "factors": list},
                         optional=("table", "factors")):
        return None
    kind = doc.get("kind")
    if kind == "finite":
        if "table" not in doc:
            check.fail("/group/table", "finite groups need a multiplication table")
            return None
        if "factors" in doc:
            check.fail("/group/factors", "not a field of finite groups")
        try:
            return make_finite_group(doc["table"])
        except GroupError as exc:
            check.fail("/group/table", str(exc))
            return None
    if kind == "abelian":
        if "factors" not in doc:
            check.fail("/group/factors", "abelian groups need invariant factors")
            return None
        if "table" in doc:
            check.fail("/group/table", "not a field of abelian groups")
        try:
            return abelian_group(doc["factors"])
        except GroupError as exc:
            check.fail("/group/factors", str(exc))
            return None
    check.fail("/group/kind", f"unknown kind {kind!r}")
    return None


def _parse_elem(group, raw, path: str, check: _Checker):
    try:
        if group.kind == "finite":
            if not isinstance(raw, int):
                raise GroupError(f"finite-group elements are indices, got {raw!r}")
            return group.check_elem(raw)
        if not isinstance(raw, list):
            raise GroupError(f"abelian elements are integer tuples, got {raw!r}")
        return group.check_elem(tuple(raw))
    except GroupError as exc:
        check.fail(path, str(exc))
        return None


def instance_from_dict(doc: dict) -> tuple[Optional[ProblemInstance], list[str]]:
    check = _Checker()
    top = {
        "version": int, "group": dict, "characters": dict, "components": list,
        "surface": dict, "double_points": list, "whitney_collection": (dict, type(None)),
        "catalogs": dict, "flags": dict,
    }
    if not check.require(doc, "", top):
        return None, check.errors
    if doc["version"] != SCHEMA_VERSION:
        check.fail("/version", f"expected {SCHEMA_VERSION}, got {doc['version']!r}")

    group = _parse_group(doc["group"], check)

    wM = None
    if check.require(doc["characters"], "/characters", {"wM": list}) and group is not None:
        try:
            wM = Character(group, doc["characters"]["wM"])
        except GroupError as exc:
            check.fail("/characters/wM", str(exc))

    components: list[ComponentData] = []
    for i, comp in enumerate(doc["components"]):
        path = f"/components/{i}"
        fields = {"id": int, "signed_subgroup": list, "has_alg_dual": bool,
                  "dual_framed": bool, "w2": int, "e": int}
        if not check.require(comp, path, fields, optional=("w2", "e")):
            continue
        if group is None or wM is None:
            continue
        gens = []
        ok = True
        for k, pair in enumerate(comp["signed_subgroup"]):
            if not (isinstance(pair, list) and len(pair) == 2):
                check.fail(f"{path}/signed_subgroup/{k}", "expected [element, sign]")
                ok = False
                continue
            elem = _parse_elem(group, pair[0], f"{path}/signed_subgroup/{k}", check)
            if elem is None or pair[1] not in (1, -1):
                if pair[1] not in (1, -1):
                    check.fail(f"{path}/signed_subgroup/{k}", f"sign must be +-1, got {pair[1]!r}")
                ok = False
                continue
            gens.append((elem, pair[1]))
        if not ok:
            continue
        w2 = comp.get("w2")
        if w2 is not None:
            w2 = check.bit(w2, f"{path}/w2")
        components.append(ComponentData(
            id=comp["id"],
            subgroup=subgroup_closure(group, gens),
            has_alg_dual=comp["has_alg_dual"],
            dual_framed=comp["dual_framed"],
            w2=w2,
            euler=comp.get("e"),
        ))

    surface = None
    if check.require(doc["surface"], "/surface", {"components": list}):
        comps = []
        ok = True
        for i, sc in enumerate(doc["surface"]["components"]):
            path = f"/surface/components/{i}"
            if not check.require(sc, path, {"id": int, "genus": int, "orientable": bool,
                                            "boundary_circles": int}):
                ok = False
                continue
            try:
                comps.append(SurfaceComponent(sc["id"], sc["genus"], sc["orientable"],
                                              sc["boundary_circles"]))
            except _bands.BandError as exc:
                check.fail(path, str(exc))
                ok = False
        if ok:
            try:
                surface = SurfaceModel(comps)
            except _bands.BandError as exc:
                check.fail("/surface", str(exc))

    declared_ids = {c.get("id") for c in doc["components"] if isinstance(c, dict)}
    points: list[DoublePoint] = []
    seen_pids = set()
    for i, dp in enumerate(doc["double_points"]):
        path = f"/double_points/{i}"
        if not check.require(dp, path, {"id": int, "components": list, "sign": int, "eta": None}):
            continue
        if len(dp["components"]) != 2:
            check.fail(f"{path}/components", "expected a pair [i, j]")
            continue
        if not set(dp["components"]) <= declared_ids:
            check.fail(f"{path}/components", f"unknown component in {dp['components']}")
            continue
        if dp["sign"] not in (1, -1):
            check.fail(f"{path}/sign", f"sign must be +-1, got {dp['sign']!r}")
            continue
        if dp["id"] in seen_pids:
            check.fail(f"{path}/id", "duplicate double-point id")
            continue
        seen_pids.add(dp["id"])
        if group is None:
            continue
        eta = _parse_elem(group, dp["eta"], f"{path}/eta", check)
        if eta is None:
            continue
        points.append(DoublePoint(dp["id"], tuple(dp["components"]), dp["sign"], eta))

    collection = None
    wc = doc["whitney_collection"]
    if wc is not None:
        path = "/whitney_collection"
        if check.require(wc, path, {"convenient": bool, "discs": list,
                                    "boundary_intersections": list}):
            discs = []
            ok = True
            for i, d in enumerate(wc["discs"]):
                dpath = f"{path}/discs/{i}"
                if not check.require(d, dpath, {"id": int, "pairs": list, "interior": dict,
                                                "mu_boundary": int, "euler": int}):
                    ok = False
                    continue
                if len(d["pairs"]) != 2:
                    check.fail(f"{dpath}/pairs", "expected two double-point ids")
                    ok = False
                    continue
                interior = {}
                for key, count in d["interior"].items():
                    try:
                        cid = int(key)
                    except ValueError:
                        check.fail(f"{dpath}/interior/{key}", "component keys are integers")
                        ok = False
                        continue
                    if not isinstance(count, int) or count < 0:
                        check.fail(f"{dpath}/interior/{key}", "counts are nonnegative integers")
                        ok = False
                        continue
                    interior[cid] = count
                discs.append(WhitneyDisc(d["id"], tuple(d["pairs"]), interior,
                                         d["mu_boundary"], d["euler"]))
            boundary = {}
            for i, entry in enumerate(wc["boundary_intersections"]):
                bpath = f"{path}/boundary_intersections/{i}"
                if not (isinstance(entry, list) and len(entry) == 3):
                    check.fail(bpath, "expected [disc_id, disc_id, count]")
                    ok = False
                    continue
                d1, d2, count = entry
                if d1 == d2:
                    check.fail(bpath, "boundary self-intersections belong on the disc")
                    ok = False
                    continue
                boundary[frozenset((d1, d2))] = count
            if ok:
                try:
                    collection = WhitneyCollection(tuple(discs), boundary, wc["convenient"])
                except _bands.BandError as exc:
                    check.fail(path, str(exc))
                except ValueError as exc:
                    check.fail(path, str(exc))

    catalogs = doc["catalogs"]
    band_catalog = None
    spheres: list[tuple[int, int]] = []
    rp2: list[tuple[int, int]] = []
    if check.require(catalogs, "/catalogs", {"rel_h2": dict, "bands": list,
                                             "spheres": list, "rp2": list}):
        rel = None
        if check.require(catalogs["rel_h2"], "/catalogs/rel_h2", {"basis": list, "boundary": dict}):
            try:
                rel = RelH2(tuple(catalogs["rel_h2"]["basis"]),
                            {k: tuple(v) for k, v in catalogs["rel_h2"]["boundary"].items()})
            except _bands.BandError as exc:
                check.fail("/catalogs/rel_h2", str(exc))
        records = []
        ok = rel is not None and surface is not None
        for i, b in enumerate(catalogs["bands"]):
            path = f"/catalogs/bands/{i}"
            fields = {"id": str, "kind": str, "rel_class": list, "boundary_classes": list,
                      "w1_sigma": list, "w1m_core": int, "mu_boundary": int,
                      "arc_count": int, "interior": int, "euler": int}
            if not check.require(b, path, fields):
                ok = False
                continue
            try:
                records.append(BandRecord(
                    id=b["id"], kind=b["kind"],
                    rel_class=tuple(b["rel_class"]),
                    boundary_classes=tuple(tuple(c) for c in b["boundary_classes"]),
                    w1_sigma=tuple(b["w1_sigma"]),
                    w1m_core=b["w1m_core"], mu_boundary=b["mu_boundary"],
                    arc_count=b["arc_count"], interior=b["interior"], euler=b["euler"],
                ))
            except _bands.BandError as exc:
                check.fail(path, str(exc))
                ok = False
        if ok:
            try:
                band_catalog = BandCatalog(surface, rel, tuple(records))
            except _bands.BandError as exc:
                check.fail("/catalogs/bands", str(exc))
        for name, target in (("spheres", spheres), ("rp2", rp2)):
            for i, pair in enumerate(catalogs[name]):
                if not (isinstance(pair, list) and len(pair) == 2
                        and all(v in (0, 1) for v in pair)):
                    check.fail(f"/catalogs/{name}/{i}", "expected a pair of bits")
                    continue
                target.append((pair[0], pair[1]))

    good = True
    torus: frozenset[int] = frozenset()
    if check.require(doc["flags"], "/flags", {"good_group": bool, "torus_summand": list}):
        good = doc["flags"]["good_group"]
        torus = frozenset(doc["flags"]["torus_summand"])

    if check.errors:
        return None, check.errors
    try:
        inst = ProblemInstance(
            group=group, wM=wM, components=tuple(components), surface=surface,
            points=tuple(points), collection=collection,
            sphere_catalog=tuple(spheres), rp2_catalog=tuple(rp2),
            band_catalog=band_catalog, good_group=good, torus_summands=torus,
        )
    except (ValueError, _engine.EngineError) as exc:
        return None, [f"/: {exc}"]
    # cross-references the shape checks cannot see
    errors = []
    point_ids = {p.id for p in inst.points}
    if inst.collection is not None:
        for d in inst.collection.discs:
            for pid in d.pair:
                if pid not in point_ids:
                    errors.append(f"/whitney_collection: disc {d.id} pairs unknown point {pid}")
    if errors:
        return None, errors
    return inst, []


def load_instance(path) -> tuple[Optional[ProblemInstance], list[str]]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        return None, [f"/: unreadable instance file: {exc}"]
    if not isinstance(doc, dict):
        return None, ["/: instance file must hold a JSON object"]
    return instance_from_dict(doc)


def _elem_to_json(group, elem):
    if group.kind == "finite":
        return elem
    return list(elem)


def instance_to_dict(inst: ProblemInstance) -> dict:
    """Serialize an in-memory instance back to the interchange format."""
    group = inst.group
    if group.kind == "finite":
        gdoc = {"kind": "finite", "table": [list(row) for row in group.table]}
    else:
        gdoc = {"kind": "abelian", "factors": list(group.factors)}
    comps = []
    for c in inst.components:
        entry = {
            "id": c.id,
            "signed_subgroup": [[_elem_to_json(group, g), s] for g, s in c.subgroup.generators],
            "has_alg_dual": c.has_alg_dual,
            "dual_framed": c.dual_framed,
        }
        if c.w2 is not None:
            entry["w2"] = c.w2
        if c.euler is not None:
            entry["e"] = c.euler
        comps.append(entry)
    wc = None
    if inst.collection is not None:
        wc = {
            "convenient": inst.collection.convenient,
            "discs": [
                {
                    "id": d.id,
                    "pairs": list(d.pair),
                    "interior": {str(k): v for k, v in sorted(d.interior.items())},
                    "mu_boundary": d.mu_boundary,
                    "euler": d.euler,
                }
                for d in inst.collection.discs
            ],
            "boundary_intersections": [
                [min(key), max(key), count]
                for key, count in sorted(inst.collection.boundary.items(), key=lambda kv: sorted(kv[0]))
            ],
        }
    return {
        "version": SCHEMA_VERSION,
        "group": gdoc,
        "characters": {"wM": list(inst.wM.values)},
        "components": comps,
        "surface": {
            "components": [
                {"id": s.id, "genus": s.genus, "orientable": s.orientable,
                 "boundary_circles": s.boundary_circles}
                for s in inst.surface.components
            ]
        },
        "double_points": [
            {"id": p.id, "components": list(p.components), "sign": p.sign,
             "eta": _elem_to_json(group, p.eta)}
            for p in inst.points
        ],
        "whitney_collection": wc,
        "catalogs": {
            "rel_h2": {
                "basis": list(inst.band_catalog.rel.basis),
                "boundary": {k: list(v) for k, v in sorted(inst.band_catalog.rel.boundary.items())},
            },
            "bands": [
                {
                    "id": r.id, "kind": r.kind, "rel_class": list(r.rel_class),
                    "boundary_classes": [list(c) for c in r.boundary_classes],
                    "w1_sigma": list(r.w1_sigma), "w1m_core": r.w1m_core,
                    "mu_boundary": r.mu_boundary, "arc_count": r.arc_count,
                    "interior": r.interior, "euler": r.euler,
                }
                for r in inst.band_catalog.records
            ],
            "spheres": [list(p) for p in inst.sphere_catalog],
            "rp2": [list(p) for p in inst.rp2_catalog],
        },
        "flags": {"good_group": inst.good_group,
                  "torus_summand": sorted(inst.torus_summands)},
    }


def verdict_to_json(verdict: Verdict) -> str:
    """Canonical byte-stable rendering of a verdict document."""
    return json.dumps(verdict.as_dict(), sort_keys=True, indent=2) + "\n"
