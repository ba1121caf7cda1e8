"""Surface homology models, the band invariant, and characteristic checks.

The surface carries a GF(2) intersection form on a fixed basis (symplectic
pairs for orientable components, self-dual classes for cross-caps, inert
boundary-parallel classes).  Band records declare the four parity
ingredients of the invariant Theta for a generating set of classes in the
relative second homology; the checks here validate the declarations and
decide the b-/r-/s-characteristic conditions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .whitney import DoublePoint, WhitneyCollection, WhitneyDisc, t_alt, t_count, to_convenient


class BandError(ValueError):
    pass


class MixedW1Annulus(BandError):
    """Annulus with exactly one orientation-reversing boundary curve.

    Theta is undefined here, but the self-pairing of the boundary class is
    then 1, which already forces the secondary obstruction to vanish.
    """

    def __init__(self, band_id):
        super().__init__(
            f"band {band_id}: annulus with exactly one w1-nontrivial boundary; "
            "Theta undefined, and the boundary class has lambda(dS,dS)=1, forcing km=0"
        )
        self.verdict_hint = "km=0"


class NotLinearizable(BandError):
    pass


class ThetaConflict(BandError):
    def __init__(self, rel_class, id1, id2):
        super().__init__(
            f"records {id1!r} and {id2!r} share class {list(rel_class)} but disagree on Theta; "
            "inconsistent declaration"
        )
        self.rel_class = rel_class
        self.witnesses = (id1, id2)


class InconsistentCut(BandError):
    pass


@dataclass(frozen=True)
class SurfaceComponent:
    id: int
    genus: int  # cross-cap number when nonorientable
    orientable: bool
    boundary_circles: int = 0

    def __post_init__(self):
        if self.genus < 0 or self.boundary_circles < 0:
            raise BandError("negative genus or boundary count")
        if not self.orientable and self.genus == 0:
            raise BandError("nonorientable components need cross-cap number >= 1")

    def euler_characteristic(self) -> int:
        closed = 2 - 2 * self.genus if self.orientable else 2 - self.genus
        return closed - self.boundary_circles

    def basis_names(self) -> list[str]:
        names = []
        if self.orientable:
            for i in range(1, self.genus + 1):
                names += [f"a{i}", f"b{i}"]
        else:
            names += [f"e{i}" for i in range(1, self.genus + 1)]
        names += [f"d{i}" for i in range(1, self.boundary_circles)]
        return names


class SurfaceModel:
    """GF(2) first homology of a disjoint union of compact surfaces."""

    def __init__(self, components: Sequence[SurfaceComponent]):
        ids = [c.id for c in components]
        if len(set(ids)) != len(ids):
            raise BandError("duplicate surface component ids")
        self.components = tuple(sorted(components, key=lambda c: c.id))
        self.basis: list[tuple[int, str]] = []
        self._slices: dict[int, tuple[int, int]] = {}
        for comp in self.components:
            start = len(self.basis)
            self.basis += [(comp.id, name) for name in comp.basis_names()]
            self._slices[comp.id] = (start, len(self.basis))
        self.dim = len(self.basis)
        self.w1 = tuple(
            1 if (not self._by_id(cid).orientable and name.startswith("e")) else 0
            for cid, name in self.basis
        )
        self._form = [[0] * self.dim for _ in range(self.dim)]
        for i, (cid, name) in enumerate(self.basis):
            comp = self._by_id(cid)
            if comp.orientable and name.startswith("a"):
                j = i + 1  # the matching b-class follows immediately
                self._form[i][j] = self._form[j][i] = 1
            if not comp.orientable and name.startswith("e"):
                self._form[i][i] = 1
        assert all(self._form[i][i] == self.w1[i] for i in range(self.dim))

    def _by_id(self, cid: int) -> SurfaceComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise BandError(f"no surface component {cid}")

    def check_vec(self, vec) -> tuple[int, ...]:
        if len(vec) != self.dim or any(x not in (0, 1) for x in vec):
            raise BandError(f"bad H1 vector {vec!r}; expected {self.dim} bits")
        return tuple(vec)

    def form(self, x, y) -> int:
        x, y = self.check_vec(x), self.check_vec(y)
        return sum(x[i] * self._form[i][j] * y[j] for i in range(self.dim) for j in range(self.dim)) % 2

    def w1_of(self, vec) -> int:
        vec = self.check_vec(vec)
        return sum(a * b for a, b in zip(vec, self.w1)) % 2

    def components_of_vec(self, vec) -> set[int]:
        vec = self.check_vec(vec)
        out = set()
        for cid, (lo, hi) in self._slices.items():
            if any(vec[lo:hi]):
                out.add(cid)
        return out

    def zero_vec(self) -> tuple[int, ...]:
        return (0,) * self.dim


@dataclass(frozen=True)
class RelH2:
    """Named GF(2) basis of the relative second homology with its boundary map."""

    basis: tuple[str, ...]
    boundary: dict  # basis name -> H1 vector

    def __post_init__(self):
        if len(set(self.basis)) != len(self.basis):
            raise BandError("duplicate RelH2 basis names")
        if set(self.boundary) != set(self.basis):
            raise BandError("boundary map must be defined exactly on the basis")

    def check_class(self, vec) -> tuple[int, ...]:
        if len(vec) != len(self.basis) or any(x not in (0, 1) for x in vec):
            raise BandError(f"bad RelH2 vector {vec!r}")
        return tuple(vec)

    def boundary_of(self, vec) -> tuple[int, ...]:
        vec = self.check_class(vec)
        total = None
        for bit, name in zip(vec, self.basis):
            b = tuple(self.boundary[name])
            if total is None:
                total = (0,) * len(b)
            if bit:
                total = tuple(x ^ y for x, y in zip(total, b))
        return total if total is not None else ()


@dataclass(frozen=True)
class BandRecord:
    """One declared generator of the representable classes, with Theta data.

    ``kind`` is "annulus", "mobius", or "surface"; general surfaces stand in
    for bands of the same class.  All count fields are parities.
    """

    id: str
    kind: str
    rel_class: tuple[int, ...]
    boundary_classes: tuple[tuple[int, ...], ...]
    w1_sigma: tuple[int, ...]  # <w1(Sigma), boundary component>, one per circle
    w1m_core: int  # <w1(M), core>
    mu_boundary: int
    arc_count: int  # |dB ^ A|
    interior: int  # |Int B ^ F|
    euler: int

    def __post_init__(self):
        if self.kind not in ("annulus", "mobius", "surface"):
            raise BandError(f"unknown band kind {self.kind!r}")
        for bit in (self.w1m_core, self.mu_boundary, self.arc_count, self.interior, self.euler):
            if bit not in (0, 1):
                raise BandError(f"parity fields must be 0 or 1 on band {self.id!r}")
        if len(self.w1_sigma) != len(self.boundary_classes):
            raise BandError(f"band {self.id!r}: one w1 value per boundary circle")
        if self.kind == "annulus" and len(self.boundary_classes) != 2:
            raise BandError(f"annulus {self.id!r} needs exactly two boundary circles")
        if self.kind == "mobius" and len(self.boundary_classes) != 1:
            raise BandError(f"mobius band {self.id!r} needs exactly one boundary circle")

    def total_boundary(self, dim: int) -> tuple[int, ...]:
        total = (0,) * dim
        for c in self.boundary_classes:
            total = tuple(x ^ y for x, y in zip(total, c))
        return total


def validate_record(record: BandRecord, surface: SurfaceModel, rel: Optional[RelH2] = None) -> None:
    """Admissibility and declaration consistency for one record."""
    for c, w in zip(record.boundary_classes, record.w1_sigma):
        if surface.w1_of(c) != w:
            raise BandError(
                f"band {record.id!r}: declared w1(Sigma) value {w} disagrees with the class"
            )
    if (record.w1m_core + sum(record.w1_sigma)) % 2 != 0:
        raise BandError(f"band {record.id!r} violates the w1 admissibility condition")
    if record.kind == "mobius" and record.w1_sigma[0] != 0:
        raise BandError(
            f"mobius band {record.id!r} with orientation-reversing boundary is excluded"
        )
    if record.kind == "surface" and any(record.w1_sigma):
        raise BandError(f"surface record {record.id!r} needs w1-trivial boundary circles")
    if rel is not None:
        declared = record.total_boundary(surface.dim)
        if rel.boundary_of(record.rel_class) != declared:
            raise BandError(
                f"band {record.id!r}: boundary map of its class disagrees with the "
                "declared boundary circles"
            )


@dataclass(frozen=True)
class BandCatalog:
    """User-declared generators of the representable-band subset."""

    surface: SurfaceModel
    rel: RelH2
    records: tuple[BandRecord, ...]

    def __post_init__(self):
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise BandError("duplicate band ids")
        for r in self.records:
            self.rel.check_class(r.rel_class)
            validate_record(r, self.surface, self.rel)


def theta(record: BandRecord) -> int:
    """The four-term parity invariant of a band or surface record.

    An annulus with both boundary curves orientation-reversing uses the
    cut-open Euler term, declared in the same field; the mixed annulus case
    has no invariant and raises with a verdict hint.
    """
    if record.kind == "annulus" and sorted(record.w1_sigma) == [0, 1]:
        raise MixedW1Annulus(record.id)
    return (record.mu_boundary + record.arc_count + record.interior + record.euler) % 2


def lambda_boundary_check(catalog: BandCatalog) -> bool:
    """True when the intersection form vanishes on all declared boundaries."""
    surface = catalog.surface
    totals = [r.total_boundary(surface.dim) for r in catalog.records]
    for i, x in enumerate(totals):
        for y in totals[i:]:
            if surface.form(x, y):
                return False
    return True


def validate_theta_well_defined(catalog: BandCatalog) -> Optional[ThetaConflict]:
    """Records with equal class must agree on Theta; returns the conflict if not."""
    if not lambda_boundary_check(catalog):
        raise NotLinearizable("Theta is undefined while the boundary form is nonzero")
    seen: dict[tuple, tuple[str, int]] = {}
    for r in catalog.records:
        value = theta(r)
        if r.rel_class in seen:
            other_id, other_value = seen[r.rel_class]
            if other_value != value:
                return ThetaConflict(r.rel_class, other_id, r.id)
        else:
            seen[r.rel_class] = (r.id, value)
    return None


class ThetaFunctional:
    """GF(2)-linear extension of the record values to the span of the classes."""

    def __init__(self, rows: list[tuple[tuple[int, ...], int]]):
        self._rows: list[tuple[list[int], int]] = []  # reduced echelon rows
        self._pivots: list[int] = []
        for vec, rhs in rows:
            v, r = list(vec), rhs
            v, r = self._reduce(v, r)
            if any(v):
                piv = next(i for i, x in enumerate(v) if x)
                self._rows.append((v, r))
                self._pivots.append(piv)
            elif r:
                raise ThetaConflict(tuple(vec), "<span>", "<span>")

    def _reduce(self, v: list[int], r: int) -> tuple[list[int], int]:
        for (row, rhs), piv in zip(self._rows, self._pivots):
            if v[piv]:
                v = [a ^ b for a, b in zip(v, row)]
                r ^= rhs
        return v, r

    def evaluate(self, vec) -> int:
        v, r = self._reduce(list(vec), 0)
        if any(v):
            raise BandError(f"class {list(vec)} is outside the declared span")
        return r

    def is_zero(self) -> bool:
        return all(rhs == 0 for _, rhs in self._rows)


def theta_on_span(catalog: BandCatalog) -> ThetaFunctional:
    """Linear functional given by the records; needs the boundary form to vanish."""
    if not lambda_boundary_check(catalog):
        raise NotLinearizable("the cross-term lambda(C,C') obstructs linearity")
    conflict = validate_theta_well_defined(catalog)
    if conflict is not None:
        raise conflict
    return ThetaFunctional([(r.rel_class, theta(r)) for r in catalog.records])


@dataclass(frozen=True)
class BCharResult:
    yes: bool
    witness: object = None  # violating record id or pair of ids

    def __bool__(self):
        return self.yes


def is_b_characteristic(catalog: BandCatalog) -> BCharResult:
    """Boundary form zero and Theta identically zero on the declared generators."""
    surface = catalog.surface
    totals = [(r.id, r.total_boundary(surface.dim)) for r in catalog.records]
    for i, (id1, x) in enumerate(totals):
        for id2, y in totals[i:]:
            if surface.form(x, y):
                return BCharResult(False, (id1, id2))
    conflict = validate_theta_well_defined(catalog)
    if conflict is not None:
        raise conflict
    for r in catalog.records:
        if theta(r):
            return BCharResult(False, r.id)
    return BCharResult(True)


def is_s_characteristic(sphere_catalog: Sequence[tuple[int, int]]) -> bool:
    """Each pair is (F.a mod 2, a.a mod 2) over declared sphere generators."""
    return all(fa % 2 == aa % 2 for fa, aa in sphere_catalog)


def is_r_characteristic(rp2_catalog: Sequence[tuple[int, int]]) -> bool:
    """Each pair is (F.R mod 2, R.R mod 2) over projective planes with trivial w1 pullback."""
    return all(fr % 2 == rr % 2 for fr, rr in rp2_catalog)


def union_records(r1: BandRecord, r2: BandRecord, surface: SurfaceModel,
                  new_id: Optional[str] = None) -> BandRecord:
    """Formal union: counts add, and the boundary pairing corrects mu.

    Implements the quadratic law Theta(S u S') = Theta(S) + Theta(S') +
    lambda(C, C').
    """
    if len(r1.rel_class) != len(r2.rel_class):
        raise BandError("records live over different RelH2 bases")
    lam = surface.form(r1.total_boundary(surface.dim), r2.total_boundary(surface.dim))
    return BandRecord(
        id=new_id or f"{r1.id}+{r2.id}",
        kind="surface",
        rel_class=tuple(a ^ b for a, b in zip(r1.rel_class, r2.rel_class)),
        boundary_classes=r1.boundary_classes + r2.boundary_classes,
        w1_sigma=r1.w1_sigma + r2.w1_sigma,
        w1m_core=(r1.w1m_core + r2.w1m_core) % 2,
        mu_boundary=(r1.mu_boundary + r2.mu_boundary + lam) % 2,
        arc_count=(r1.arc_count + r2.arc_count) % 2,
        interior=(r1.interior + r2.interior) % 2,
        euler=(r1.euler + r2.euler) % 2,
    )


def band_fibre_finger_move(points, collection: WhitneyCollection, record: BandRecord,
                           surface: SurfaceModel, components, identity):
    """Finger move along a band fibre: two new double points, one new disc.

    The new disc inherits the band's four parities; after normalising to a
    convenient collection the t-count changes by exactly Theta of the band,
    which is asserted.  Returns (points, collection, delta_t).
    """
    expected = theta(record)
    comps_touched = sorted(
        set().union(*(surface.components_of_vec(c) for c in record.boundary_classes))
        if record.boundary_classes
        else set()
    )
    if record.kind == "annulus":
        cands = [surface.components_of_vec(c) for c in record.boundary_classes]
        pair_comps = (
            min(cands[0]) if cands[0] else min(components),
            min(cands[1]) if cands[1] else min(components),
        )
    else:
        pair_comps = (
            (min(comps_touched), min(comps_touched)) if comps_touched
            else (min(components), min(components))
        )
    before = t_alt(points, components, collection)

    next_pid = max((p.id for p in points), default=-1) + 1
    next_did = max((d.id for d in collection.discs), default=-1) + 1
    p = DoublePoint(next_pid, pair_comps, 1, identity)
    q = DoublePoint(next_pid + 1, pair_comps, -1, identity)
    new_points = list(points) + [p, q]
    interior = {pair_comps[0]: record.interior} if record.interior else {}
    new_disc = WhitneyDisc(next_did, (p.id, q.id), interior,
                           mu_boundary=record.mu_boundary, euler=record.euler)
    boundary = dict(collection.boundary)
    if record.arc_count:
        if not collection.discs:
            raise BandError(
                f"band {record.id!r} declares an arc intersection but there are no Whitney arcs"
            )
        boundary[frozenset((new_disc.id, collection.discs[0].id))] = record.arc_count
    weak = WhitneyCollection(tuple(collection.discs) + (new_disc,), boundary, convenient=False)
    out = to_convenient(new_points, weak)
    after = t_count(new_points, components, out)
    delta = (after - before) % 2
    assert delta == expected, "finger move changed t by a value other than Theta"
    return new_points, out, delta


def split_cut_components(nodes: Sequence[int], edges: Sequence[tuple[int, int, int]]):
    """Select the subset of cut pieces on the even side of the cut curves.

    Nodes are the pieces of the cut-open surface; each edge is a cut curve
    with a crossing parity.  An odd-parity cycle means the cut is not
    null-homologous and no selection exists.
    """
    labels: dict[int, int] = {}
    adj: dict[int, list[tuple[int, int]]] = {n: [] for n in nodes}
    for u, v, parity in edges:
        if u not in adj or v not in adj:
            raise BandError(f"edge ({u},{v}) references an unknown node")
        if parity not in (0, 1):
            raise BandError("crossing parities must be 0 or 1")
        adj[u].append((v, parity))
        adj[v].append((u, parity))
    for base in sorted(adj):
        if base in labels:
            continue
        labels[base] = 0
        queue = [base]
        while queue:
            u = queue.pop(0)
            for v, parity in adj[u]:
                want = labels[u] ^ parity
                if v not in labels:
                    labels[v] = want
                    queue.append(v)
                elif labels[v] != want:
                    raise InconsistentCut(
                        "a cut curve has an odd crossing cycle; the cut is not null-homologous"
                    )
    return sorted(n for n in adj if labels[n] == 0)
