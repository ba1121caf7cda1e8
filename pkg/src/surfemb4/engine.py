"""Decision procedures: the embedding flowchart and its helper computations.

The flowchart decides whether a generic immersion is regularly homotopic to
an embedding, from declared data: signed subgroups and double points feed
the primary intersection obstructions, a band catalog feeds the
characteristic decision, and a Whitney collection feeds the secondary
count.  Every verdict carries an ordered trace of the nodes visited, with
the citations needed to audit it.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

from .bands import (
    BandCatalog,
    BCharResult,
    SurfaceModel,
    is_b_characteristic,
    theta,
    validate_theta_well_defined,
)
from .gamma import PairingContext, build_gamma, coefficient_at, reduce_list
from .groups import AmbientGroup, Character, SignedSubgroup
from .whitney import (
    DoublePoint,
    UnpairedPoints,
    WhitneyCollection,
    WhitneyDisc,
    t_count,
    to_convenient,
)

TOOL_VERSION = "0.1.0"

REG_EMBED = "RegHomotopicToEmbedding"
NOT_REG_EMBED = "NotRegHomotopicToEmbedding"
HOMOTOPIC_EMBED = "HomotopicToEmbedding"
NO_CONCLUSION = "NoConclusion"


class EngineError(ValueError):
    pass


class ValidationError(EngineError):
    pass


class PrimaryObstructionNonzero(EngineError):
    pass


class NoDualSpheres(EngineError):
    pass


class MissingWhitneyData(EngineError):
    pass


class PreconditionW1Ker(EngineError):
    pass


class InvalidEulerParity(EngineError):
    pass


class NotDivisibleBy8(EngineError):
    pass


@dataclass(frozen=True)
class ComponentData:
    id: int
    subgroup: SignedSubgroup
    has_alg_dual: bool
    dual_framed: bool
    w2: Optional[int] = None
    euler: Optional[int] = None


@dataclass
class ProblemInstance:
    group: AmbientGroup
    wM: Character
    components: tuple[ComponentData, ...]
    surface: SurfaceModel
    points: tuple[DoublePoint, ...]
    collection: Optional[WhitneyCollection]
    sphere_catalog: tuple[tuple[int, int], ...]
    rp2_catalog: tuple[tuple[int, int], ...]
    band_catalog: BandCatalog
    good_group: bool
    torus_summands: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate component ids")
        known = set(ids)
        surface_ids = {c.id for c in self.surface.components}
        if known != surface_ids:
            raise ValidationError(
                f"immersion components {sorted(known)} != surface components {sorted(surface_ids)}"
            )
        for p in self.points:
            if not set(p.components) <= known:
                raise ValidationError(f"double point {p.id} references unknown components")
        if not self.torus_summands <= known:
            raise ValidationError("torus_summand flag references unknown components")
        if self.collection is not None:
            point_ids = {p.id for p in self.points}
            if not self.collection.paired_point_ids() <= point_ids:
                raise ValidationError("Whitney collection references unknown double points")

    def component(self, cid: int) -> ComponentData:
        for c in self.components:
            if c.id == cid:
                return c
        raise ValidationError(f"no component {cid}")

    def identity_elem(self):
        return self.group.identity


@dataclass
class TraceEntry:
    node: str
    paper_ref: str
    value: object

    def as_dict(self) -> dict:
        return {"node": self.node, "paper_ref": self.paper_ref, "value": self.value}


@dataclass
class Verdict:
    outcome: str
    km: Optional[int]
    t: Optional[int]
    b_char: str  # "yes" / "no" / "undefined"
    trace: list[TraceEntry]

    def as_dict(self) -> dict:
        def tag(v):
            return "undefined" if v is None else v

        return {
            "outcome": self.outcome,
            "km": tag(self.km),
            "t": tag(self.t),
            "b_char": self.b_char,
            "trace": [e.as_dict() for e in self.trace],
            "tool_version": TOOL_VERSION,
        }


# -- primary obstructions ----------------------------------------------------


def _self_points(inst: ProblemInstance, cid: int) -> list[DoublePoint]:
    return [p for p in inst.points if p.components == (cid, cid)]


def _pair_points(inst: ProblemInstance, i: int, j: int) -> list[DoublePoint]:
    return [p for p in inst.points if set(p.components) == {i, j}]


def primary_obstructions(inst: ProblemInstance) -> dict:
    """Reduce all intersection and self-intersection lists into their targets."""
    out = {}
    ids = sorted(c.id for c in inst.components)
    for i in ids:
        ctx = PairingContext(inst.group, inst.wM, inst.component(i).subgroup,
                             inst.component(i).subgroup, self_pairing=True)
        gamma = build_gamma(ctx)
        pts = _self_points(inst, i)
        out[("mu", i)] = reduce_list([(p.sign, p.eta) for p in pts], gamma)
    for a, i in enumerate(ids):
        for j in ids[a + 1:]:
            pts = _pair_points(inst, i, j)
            if not pts:
                continue
            ctx = PairingContext(inst.group, inst.wM, inst.component(i).subgroup,
                                 inst.component(j).subgroup, self_pairing=False)
            gamma = build_gamma(ctx)
            out[("lambda", i, j)] = reduce_list([(p.sign, p.eta) for p in pts], gamma)
    return out


def primary_vanishes(inst: ProblemInstance) -> bool:
    return all(v.is_zero() for v in primary_obstructions(inst).values())


def restrict_Ft(inst: ProblemInstance) -> list[int]:
    """Components whose images have no framed algebraically dual sphere."""
    return sorted(
        c.id for c in inst.components if not (c.has_alg_dual and c.dual_framed)
    )


# -- characteristic status and t ----------------------------------------------


def _catalog_for(inst: ProblemInstance, ft: Sequence[int]) -> BandCatalog:
    """Restrict the declared band catalog to records supported on F^t."""
    ft_set = set(ft)
    keep = []
    for r in inst.band_catalog.records:
        touched = set()
        for c in r.boundary_classes:
            touched |= inst.surface.components_of_vec(c)
        if touched <= ft_set:
            keep.append(r)
    return BandCatalog(inst.band_catalog.surface, inst.band_catalog.rel, tuple(keep))


def _bchar_nodes(inst: ProblemInstance, ft: Sequence[int], trace: list[TraceEntry]):
    """Run the two Fig.-2 characteristic nodes; returns a BCharResult."""
    flagged = sorted(set(ft) & inst.torus_summands)
    if flagged:
        trace.append(TraceEntry(
            "pi_1-trivial torus summand declared on F^t",
            "Prop 7.1",
            {"components": flagged},
        ))
        return BCharResult(False, tuple(flagged))
    catalog = _catalog_for(inst, ft)
    lam_bad = not _lambda_ok(catalog)
    trace.append(TraceEntry(
        "Is lambda_Sigma|_dB(F^t) != 0?",
        "Fig. 2; Def 5.6, Lemma 5.7",
        "yes" if lam_bad else "no",
    ))
    if lam_bad:
        return is_b_characteristic(catalog)
    conflict = validate_theta_well_defined(catalog)
    if conflict is not None:
        raise conflict
    nontrivial = [r.id for r in catalog.records if theta(r)]
    trace.append(TraceEntry(
        "Is Theta: B(F^t) -> Z/2 nontrivial?",
        "Fig. 2; Defs 5.8/5.9, Lemma 5.10",
        "yes" if nontrivial else "no",
    ))
    if nontrivial:
        return BCharResult(False, nontrivial[0])
    return BCharResult(True)


def _lambda_ok(catalog: BandCatalog) -> bool:
    from .bands import lambda_boundary_check

    return lambda_boundary_check(catalog)


def _normalized_collection(inst: ProblemInstance) -> Optional[WhitneyCollection]:
    if inst.collection is None:
        return None
    if inst.collection.convenient:
        return inst.collection
    return to_convenient(list(inst.points), inst.collection)


def _t_for_ft(inst: ProblemInstance, ft: Sequence[int]) -> int:
    ft_set = set(ft)
    pts = [p for p in inst.points if set(p.components) <= ft_set]
    collection = _normalized_collection(inst)
    if not pts:
        empty = WhitneyCollection((), {}, convenient=True)
        return t_count(pts, ft, empty)
    if collection is None:
        raise MissingWhitneyData(
            "F^t has double points but no Whitney collection was declared"
        )
    ids = {p.id for p in pts}
    discs = tuple(d for d in collection.discs if set(d.pair) <= ids)
    sub = WhitneyCollection(discs, {}, convenient=True)
    try:
        return t_count(pts, ft, sub)
    except UnpairedPoints as exc:
        raise MissingWhitneyData(
            f"the declared collection does not pair the double points of F^t: {exc}"
        ) from exc


def compute_km(inst: ProblemInstance) -> int:
    """The secondary invariant via the combinatorial formula.

    Requires algebraically dual spheres for every component and vanishing
    primary obstructions; equals 0 off the characteristic case and the
    t-count of F^t otherwise.
    """
    if not all(c.has_alg_dual for c in inst.components):
        raise NoDualSpheres("every component needs an algebraically dual sphere")
    if not primary_vanishes(inst):
        raise PrimaryObstructionNonzero("lambda or mu is nonzero; km is undefined")
    ft = restrict_Ft(inst)
    trace: list[TraceEntry] = []
    status = _bchar_nodes(inst, ft, trace)
    if not status.yes:
        return 0
    return _t_for_ft(inst, ft)


# -- the flowchart -------------------------------------------------------------


def flowchart(inst: ProblemInstance) -> Verdict:
    """Deterministic traversal of the embedding decision diagram."""
    trace: list[TraceEntry] = []
    obstructions = primary_obstructions(inst)
    primary_ok = all(v.is_zero() for v in obstructions.values())
    trace.append(TraceEntry(
        "Is lambda(f_i,f_j)=mu(f_i)=0 for all i != j?",
        "Fig. 2; Defs 2.9, 2.13, 2.17",
        "yes" if primary_ok else "no",
    ))
    if not primary_ok:
        trace.append(TraceEntry(
            "F is not regularly homotopic, rel. boundary, to an embedding",
            "Fig. 2; Prop 2.18/2.23 (regular homotopy invariance)",
            NOT_REG_EMBED,
        ))
        return Verdict(NOT_REG_EMBED, None, None, "undefined", trace)

    ft = restrict_Ft(inst)
    trace.append(TraceEntry(
        "F^t: components without framed algebraically dual spheres",
        "Def 5.1",
        {"components": ft},
    ))

    status = _bchar_nodes(inst, ft, trace)
    duals = all(c.has_alg_dual for c in inst.components)

    if status.yes:
        trace.append(TraceEntry("F^t is b-characteristic", "Def 5.11", "yes"))
        t = _t_for_ft(inst, ft)
        trace.append(TraceEntry(
            "Is t(F^t, W^t) = 0 in Z/2?",
            "Fig. 2; Def 5.3",
            "yes" if t == 0 else "no",
        ))
        if t == 1:
            trace.append(TraceEntry("km(F) = 1", "Thm 1.2", 1))
            trace.append(TraceEntry(
                "F is not regularly homotopic, rel. boundary, to an embedding",
                "Thm 1.3",
                NOT_REG_EMBED,
            ))
            return Verdict(NOT_REG_EMBED, 1, 1, "yes", trace)
        trace.append(TraceEntry(
            "Are there algebraically dual spheres?",
            "Fig. 2; Def 4.1",
            "yes" if duals else "no",
        ))
        if not duals:
            trace.append(TraceEntry("no conclusion", "Fig. 2", NO_CONCLUSION))
            return Verdict(NO_CONCLUSION, None, 0, "yes", trace)
        trace.append(TraceEntry("km(F) = 0", "Thm 1.2", 0))
        return _good_group_tail(inst, trace, km=0, t=0, b_char="yes")

    trace.append(TraceEntry(
        "F^t is not b-characteristic",
        "Def 5.11",
        {"witness": status.witness},
    ))
    trace.append(TraceEntry(
        "Are there algebraically dual spheres?",
        "Fig. 2; Def 4.1",
        "yes" if duals else "no",
    ))
    if not duals:
        trace.append(TraceEntry("no conclusion", "Fig. 2", NO_CONCLUSION))
        return Verdict(NO_CONCLUSION, None, None, "no", trace)
    trace.append(TraceEntry("km(F) = 0", "Thm 1.2", 0))
    return _good_group_tail(inst, trace, km=0, t=None, b_char="no")


def _good_group_tail(inst: ProblemInstance, trace: list[TraceEntry], km: int,
                     t: Optional[int], b_char: str) -> Verdict:
    trace.append(TraceEntry(
        "Is pi_1(M) good?",
        "Fig. 2; virtually solvable and subexponential-growth groups are good",
        "yes" if inst.good_group else "no",
    ))
    if not inst.good_group:
        trace.append(TraceEntry("no conclusion", "Fig. 2", NO_CONCLUSION))
        return Verdict(NO_CONCLUSION, km, t, b_char, trace)
    trace.append(TraceEntry(
        "F is regularly homotopic, rel. boundary, to an embedding",
        "Thm 1.1",
        REG_EMBED,
    ))
    return Verdict(REG_EMBED, km, t, b_char, trace)


# -- homotopy-class analysis ---------------------------------------------------


def _mu1_values(inst: ProblemInstance) -> dict[int, int]:
    out = {}
    for c in inst.components:
        ctx = PairingContext(inst.group, inst.wM, c.subgroup, c.subgroup, self_pairing=True)
        gamma = build_gamma(ctx)
        elem = reduce_list([(p.sign, p.eta) for p in _self_points(inst, c.id)], gamma)
        out[c.id] = coefficient_at(elem, inst.identity_elem()).value
    return out


def homotopy_analysis(inst: ProblemInstance) -> Verdict:
    """Decide homotopy to an embedding, splitting on the kernel character.

    Requires the normalized representative with vanishing identity
    coefficients.  When some F^t component has an orientation-reversing
    kernel class, the count t can be traded away, so dual spheres plus a
    good group give an embedding regardless of the characteristic status.
    """
    mu1 = _mu1_values(inst)
    bad = sorted(cid for cid, v in mu1.items() if v != 0)
    if bad:
        raise ValidationError(
            f"mu(f_i)_1 != 0 for components {bad}; homotope to the normalized "
            "representative before running the analysis"
        )
    trace: list[TraceEntry] = []
    primary_ok = primary_vanishes(inst)
    trace.append(TraceEntry(
        "Is lambda(f_i,f_j)=mu(f_i)=0 for all i != j?",
        "§1.4 (after normalizing mu_1 = 0)",
        "yes" if primary_ok else "no",
    ))
    if not primary_ok:
        trace.append(TraceEntry(
            "F is not homotopic to an embedding",
            "§1.4",
            NOT_REG_EMBED,
        ))
        return Verdict(NOT_REG_EMBED, None, None, "undefined", trace)
    ft = restrict_Ft(inst)
    case2 = sorted(
        cid for cid in ft if inst.component(cid).subgroup.contains_minus_one
    )
    trace.append(TraceEntry(
        "Is w_1(Sigma)|_ker nontrivial on some component of F^t?",
        "§1.4 Case 1 / Case 2; Lemma 2.16",
        {"case": 2, "components": case2} if case2 else {"case": 1},
    ))
    if not case2:
        inner = flowchart(inst)
        inner.trace = trace + inner.trace
        return inner
    duals = all(c.has_alg_dual for c in inst.components)
    trace.append(TraceEntry(
        "Are there algebraically dual spheres?",
        "Fig. 2; Def 4.1",
        "yes" if duals else "no",
    ))
    if not duals:
        trace.append(TraceEntry("no conclusion", "Fig. 2", NO_CONCLUSION))
        return Verdict(NO_CONCLUSION, None, None, "undefined", trace)
    trace.append(TraceEntry(
        "Is pi_1(M) good?",
        "Fig. 2; virtually solvable and subexponential-growth groups are good",
        "yes" if inst.good_group else "no",
    ))
    if not inst.good_group:
        trace.append(TraceEntry("no conclusion", "Fig. 2", NO_CONCLUSION))
        return Verdict(NO_CONCLUSION, None, None, "undefined", trace)
    trace.append(TraceEntry(
        "F is homotopic, rel. boundary, to an embedding",
        "Thm 1.5 (the count t can be normalized to 0 by Construction 5.16)",
        HOMOTOPIC_EMBED,
    ))
    return Verdict(HOMOTOPIC_EMBED, None, None, "undefined", trace)


# -- auxiliary operations -------------------------------------------------------


def cusp_trick(inst: ProblemInstance) -> ProblemInstance:
    """Four same-sign cusps plus two interlocking discs; flips the t-count.

    Applicable when some F^t component carries (1,-1) in its signed
    subgroup, so the four new identity-labeled points cancel in the
    order-two identity class and mu is unchanged.
    """
    ft = restrict_Ft(inst)
    eligible = [cid for cid in ft if inst.component(cid).subgroup.contains_minus_one]
    if not eligible:
        raise PreconditionW1Ker(
            "no F^t component has orientation-reversing kernel classes"
        )
    cid = min(eligible)
    identity = inst.identity_elem()
    next_pid = max((p.id for p in inst.points), default=-1) + 1
    new_points = [
        DoublePoint(next_pid + k, (cid, cid), 1, identity) for k in range(4)
    ]
    collection = _normalized_collection(inst)
    if collection is None:
        if inst.points:
            raise MissingWhitneyData("cannot rebuild t without a Whitney collection")
        collection = WhitneyCollection((), {}, convenient=True)
    next_did = max((d.id for d in collection.discs), default=-1) + 1
    w_a = WhitneyDisc(next_did, (new_points[0].id, new_points[1].id), {})
    w_b = WhitneyDisc(next_did + 1, (new_points[2].id, new_points[3].id), {})
    boundary = {frozenset((w_a.id, w_b.id)): 1}
    weak = WhitneyCollection(collection.discs + (w_a, w_b), boundary, convenient=False)
    all_points = list(inst.points) + new_points
    new_collection = to_convenient(all_points, weak)

    ctx = PairingContext(inst.group, inst.wM, inst.component(cid).subgroup,
                         inst.component(cid).subgroup, self_pairing=True)
    gamma = build_gamma(ctx)
    before = reduce_list([(p.sign, p.eta) for p in _self_points(inst, cid)], gamma)
    after_pts = [p for p in all_points if p.components == (cid, cid)]
    after = reduce_list([(p.sign, p.eta) for p in after_pts], gamma)
    assert before == after, "cusp quadruple changed mu"

    return replace(inst, points=tuple(all_points), collection=new_collection)


def rp2_euler_parity(e: int) -> int:
    """t of a projective plane in 4-space from its normal Euler number.

    Walks from the base Euler numbers +-2 (where t = 0) in steps of 8,
    flipping t at each step; equivalently t = 0 iff e = +-2 mod 16.
    """
    if e % 4 != 2:
        raise InvalidEulerParity(f"normal Euler number must be 2 mod 4, got {e}")
    base = 2 if e % 8 == 2 else -2
    t = 0
    cur = base
    while cur < e:
        cur += 8
        t ^= 1
    while cur > e:
        cur -= 8
        t ^= 1
    return t


def stong_t_formula(sigma_m: int, self_int: int) -> int:
    """t of a characteristic sphere from (signature - self-intersection)/8."""
    if (sigma_m - self_int) % 8:
        raise NotDivisibleBy8(
            f"signature {sigma_m} minus self-intersection {self_int} is not divisible by 8"
        )
    return ((sigma_m - self_int) // 8) % 2


@dataclass(frozen=True)
class EulerBoundResult:
    ok: bool
    chi: int
    bound: int


def abelian_euler_bound_check(surface: SurfaceModel, n_generators: int) -> EulerBoundResult:
    """Euler-characteristic bound for closed characteristic surfaces.

    A closed connected surface declared b-characteristic over an abelian
    fundamental group with n generators must satisfy chi >= -2n; a failure
    flags the instance as inconsistent.
    """
    if len(surface.components) != 1:
        raise ValidationError("the bound applies to a connected surface")
    comp = surface.components[0]
    if comp.boundary_circles:
        raise ValidationError("the bound applies to closed surfaces")
    chi = comp.euler_characteristic()
    bound = -2 * n_generators
    return EulerBoundResult(chi >= bound, chi, bound)
