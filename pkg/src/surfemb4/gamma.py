"""Targets of equivariant intersection numbers and reduction into them.

An intersection list (signed fundamental-group elements) reduces to an
element of an abelian group built from the ambient group by dividing out
the signed double-coset action of two signed subgroups, plus an inversion
relation in the self-intersection case.  The group splits as a direct sum
of Z summands (one per "infinite" orbit, with a chosen section sign) and
Z/2 summands (one per orbit containing both signs of an element).

``smith_oracle`` recomputes the same invariants by brute force from the
relation presentation via Smith normal form and is kept independent of
the orbit enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .groups import AmbientGroup, Character, SignedSubgroup, _sign_bit
from .intlinalg import HermiteLattice, smith_diagonal


class GammaError(ValueError):
    pass


class AmbientNotFinite(GammaError):
    pass


class InconsistentEulerData(GammaError):
    pass


class ParityMismatch(GammaError):
    pass


@dataclass(frozen=True)
class PairingContext:
    """Data determining the target group of an intersection number.

    With ``self_pairing`` the second subgroup is forced equal to the first
    and the inversion relation gamma ~ wM(gamma) * gamma^-1 is added.
    """

    ambient: AmbientGroup
    wM: Character
    s_f: SignedSubgroup
    s_g: SignedSubgroup
    self_pairing: bool = False

    def __post_init__(self):
        if self.wM.group is not self.ambient:
            raise GammaError("character not over the ambient group")
        if self.s_f.ambient is not self.ambient or self.s_g.ambient is not self.ambient:
            raise GammaError("subgroup not over the ambient group")
        if self.self_pairing and self.s_g is not self.s_f:
            object.__setattr__(self, "s_g", self.s_f)


@dataclass(frozen=True)
class Orbit:
    rep: object  # canonical element: int index or reduced tuple
    order_two: bool


class GammaGroup:
    """Orbit decomposition of the quotient; backend chosen by the ambient."""

    def __init__(self, ctx: PairingContext):
        self.ctx = ctx
        if ctx.ambient.kind == "finite":
            self._build_finite()
        else:
            self._build_abelian()

    # -- finite backend -------------------------------------------------

    def _build_finite(self):
        G = self.ctx.ambient
        wM = self.ctx.wM
        left = sorted(self.ctx.s_f.members())
        right = sorted(self.ctx.s_g.members())
        orbit_id: dict[tuple, int] = {}
        next_id = 0
        for e in G.elements():
            for s in (1, -1):
                if (e, s) in orbit_id:
                    continue
                oid = next_id
                next_id += 1
                stack = [(e, s)]
                orbit_id[(e, s)] = oid
                while stack:
                    g, t = stack.pop()
                    nbrs = []
                    for a, ea in left:
                        nbrs.append((G.mul(a, g), t * ea))
                    for b, eb in right:
                        nbrs.append((G.mul(g, b), t * eb * wM(b)))
                    if self.ctx.self_pairing:
                        nbrs.append((G.inv(g), t * wM(g)))
                    for node in nbrs:
                        if node not in orbit_id:
                            orbit_id[node] = oid
                            stack.append(node)
        # project signed orbits to element orbits
        self._elem_info: dict[int, tuple[int, bool, Optional[int]]] = {}
        orbits: dict[int, Orbit] = {}
        for e in G.elements():
            plus = orbit_id[(e, 1)]
            members = sorted(g for (g, s), oid in orbit_id.items() if oid == plus)
            rep = members[0]
            two = orbit_id[(e, 1)] == orbit_id[(e, -1)]
            if rep not in orbits:
                orbits[rep] = Orbit(rep, two)
            if two:
                self._elem_info[e] = (rep, True, None)
            else:
                rep_plus = orbit_id[(rep, 1)]
                sign = 1 if orbit_id[(e, 1)] == rep_plus else -1
                self._elem_info[e] = (rep, False, sign)
        self._orbits = [orbits[r] for r in sorted(orbits)]

    # -- abelian backend ------------------------------------------------

    def _build_abelian(self):
        G = self.ctx.ambient
        wM = self.ctx.wM
        k = G.rank
        hat_rows: list[list[int]] = []
        proj_rows: list[list[int]] = []
        gen_pairs = [(g, s) for g, s in self.ctx.s_f.generators]
        gen_pairs += [
            (g, s * wM(G.canon(g))) for g, s in self.ctx.s_g.generators
        ]
        wm_nontrivial_on_span = False
        for g, s in gen_pairs:
            v = list(G.canon(g))
            hat_rows.append(v + [_sign_bit(s)])
            proj_rows.append(v)
            if wM(tuple(v)) == -1:
                wm_nontrivial_on_span = True
        for i, f in enumerate(G.factors):
            if f:
                row = [f if j == i else 0 for j in range(k)]
                hat_rows.append(row + [0])
                proj_rows.append(row)
        hat_rows.append([0] * k + [2])
        if self.ctx.self_pairing and wm_nontrivial_on_span:
            # double-inversion paths make the sign ambiguous everywhere
            hat_rows.append([0] * k + [1])
        self._hat = HermiteLattice(hat_rows, k + 1)
        self._proj = HermiteLattice(proj_rows, k) if proj_rows else HermiteLattice([], k)
        self._global_two = self._hat.contains([0] * k + [1])
        self._orbit_cache: dict[tuple, Orbit] = {}

    # -- shared API ------------------------------------------------------

    @property
    def finite(self) -> bool:
        return self.ctx.ambient.kind == "finite"

    def orbits(self) -> list[Orbit]:
        if not self.finite:
            raise GammaError("orbits of an infinite group are computed per query")
        return list(self._orbits)

    def free_rank(self) -> int:
        return sum(1 for o in self.orbits() if not o.order_two)

    def two_count(self) -> int:
        return sum(1 for o in self.orbits() if o.order_two)

    def orbit_of(self, elem) -> Orbit:
        G = self.ctx.ambient
        e = G.check_elem(elem)
        if self.finite:
            rep, two, _ = self._elem_info[e]
            return Orbit(rep, two)
        if e in self._orbit_cache:
            return self._orbit_cache[e]
        k = G.rank
        r_plus = self._proj.reduce(e)
        if self.ctx.self_pairing:
            r_minus = self._proj.reduce([-x for x in e])
            rep = min(r_plus, r_minus)
        else:
            rep = r_plus
        if self._global_two:
            two = True
        elif self.ctx.self_pairing:
            wbit = _sign_bit(self.ctx.wM(e))
            double = [2 * x for x in e]
            two = self._hat.contains(double + [wbit ^ 1])
        else:
            two = False
        orbit = Orbit(rep, two)
        self._orbit_cache[e] = orbit
        return orbit

    def section_sign(self, elem) -> int:
        """Sign of ``elem`` relative to its orbit representative (+1 there)."""
        G = self.ctx.ambient
        e = G.check_elem(elem)
        orbit = self.orbit_of(e)
        if orbit.order_two:
            raise GammaError("section signs only exist on infinite-order orbits")
        if self.finite:
            return self._elem_info[e][2]
        rep = orbit.rep
        diff = [x - y for x, y in zip(e, rep)]
        if self._proj.contains(diff):
            if self._hat.contains(diff + [0]):
                return 1
            assert self._hat.contains(diff + [1])
            return -1
        # inversion branch: elem = -rep + m
        summ = [x + y for x, y in zip(e, rep)]
        assert self.ctx.self_pairing and self._proj.contains(summ)
        wr = self.ctx.wM(G.canon(rep))
        if self._hat.contains(summ + [0]):
            return wr
        assert self._hat.contains(summ + [1])
        return -wr


def build_gamma(ctx: PairingContext) -> GammaGroup:
    """Orbit decomposition of the intersection-number target group."""
    return GammaGroup(ctx)


@dataclass
class GammaElement:
    """Coefficient vector over the orbits of a GammaGroup.

    Infinite-orbit coefficients are integers relative to the stored section
    (representative has sign +1); order-two orbits carry GF(2) coefficients.
    """

    gamma: GammaGroup
    coeffs: dict = field(default_factory=dict)

    def _normalized(self) -> dict:
        return {k: v for k, v in self.coeffs.items() if v}

    def is_zero(self) -> bool:
        return not self._normalized()

    def __eq__(self, other) -> bool:
        if not isinstance(other, GammaElement):
            return NotImplemented
        return self.gamma is other.gamma and self._normalized() == other._normalized()

    def __add__(self, other: "GammaElement") -> "GammaElement":
        assert self.gamma is other.gamma
        out = dict(self.coeffs)
        for orbit, v in other.coeffs.items():
            out[orbit] = out.get(orbit, 0) + v
            if orbit.order_two:
                out[orbit] %= 2
        return GammaElement(self.gamma, {k: v for k, v in out.items() if v})


@dataclass(frozen=True)
class Coefficient:
    value: int
    order: str  # "Z" or "Z/2"


def reduce_list(entries: Iterable, gamma: GammaGroup) -> GammaElement:
    """Reduce a list of (sign, group element) pairs into the quotient."""
    coeffs: dict = {}
    for sign, elem in entries:
        if sign not in (1, -1):
            raise GammaError(f"sign must be +1 or -1, got {sign!r}")
        orbit = gamma.orbit_of(elem)
        if orbit.order_two:
            coeffs[orbit] = (coeffs.get(orbit, 0) + 1) % 2
        else:
            coeffs[orbit] = coeffs.get(orbit, 0) + sign * gamma.section_sign(elem)
    return GammaElement(gamma, {k: v for k, v in coeffs.items() if v})


def coefficient_at(elem: GammaElement, g) -> Coefficient:
    """Coefficient at g, with the convention that the section sends [g] to g."""
    orbit = elem.gamma.orbit_of(g)
    raw = elem.coeffs.get(orbit, 0)
    if orbit.order_two:
        return Coefficient(raw % 2, "Z/2")
    return Coefficient(raw * elem.gamma.section_sign(g), "Z")


def mu1_home(ctx: PairingContext) -> str:
    """Home of the identity coefficient of a self-intersection number.

    Returns "Z" when the surface character is trivial on the kernel (no
    (1,-1) in the signed subgroup) and the ambient character is trivial on
    the image; otherwise "Z/2".  Cross-checked against the order tag of the
    identity orbit.
    """
    if not ctx.self_pairing:
        raise GammaError("mu1_home needs a self-pairing context")
    s = ctx.s_f
    home_z = (not s.contains_minus_one) and s.character_trivial_on_projection(ctx.wM)
    gamma = build_gamma(ctx)
    identity = (
        ctx.ambient.identity if ctx.ambient.kind == "finite" else ctx.ambient.identity
    )
    tag_two = gamma.orbit_of(identity).order_two
    assert home_z == (not tag_two), "identity orbit tag disagrees with subgroup criterion"
    return "Z" if home_z else "Z/2"


@dataclass(frozen=True)
class EulerData:
    lambda1: int
    mu1: int
    e: int


def euler_relation(lambda1: Optional[int] = None, mu1: Optional[int] = None,
                   e: Optional[int] = None) -> EulerData:
    """Check or complete lambda_1 = 2*mu_1 + e (integer-valued case)."""
    unknowns = [x is None for x in (lambda1, mu1, e)]
    if sum(unknowns) > 1:
        raise GammaError("need at least two of lambda1, mu1, e")
    if lambda1 is None:
        lambda1 = 2 * mu1 + e
    elif mu1 is None:
        if (lambda1 - e) % 2:
            raise InconsistentEulerData(f"lambda1 - e = {lambda1 - e} is odd")
        mu1 = (lambda1 - e) // 2
    elif e is None:
        e = lambda1 - 2 * mu1
    if lambda1 != 2 * mu1 + e:
        raise InconsistentEulerData(f"{lambda1} != 2*{mu1} + {e}")
    return EulerData(lambda1, mu1, e)


def regular_homotopy_fiber(w1_pullback_trivial: bool, w2: Optional[int], value: int) -> int:
    """Index of a regular homotopy class within a homotopy class.

    In the w1-trivial case ``value`` is the normal Euler number and the
    index is e/2 or (e-1)/2 according to w2; otherwise classes are indexed
    by the mod-2 identity coefficient of the self-intersection number.
    """
    if not w1_pullback_trivial:
        return value % 2
    if w2 not in (0, 1):
        raise GammaError("w2 must be 0 or 1 in the w1-trivial case")
    if value % 2 != w2:
        raise ParityMismatch(f"Euler number {value} has parity != w2 = {w2}")
    return value // 2 if w2 == 0 else (value - 1) // 2


def smith_oracle(ctx: PairingContext) -> tuple[int, list[int]]:
    """Brute-force invariants (free rank, torsion) of the quotient group.

    Builds one relation row per (subgroup generator, group element) pair,
    plus the inversion rows in the self-pairing case, and reads the
    cokernel off the Smith normal form.  Independent of the orbit code.
    """
    G = ctx.ambient
    if G.kind != "finite":
        raise AmbientNotFinite("the Smith oracle needs a finite ambient group")
    n = G.order
    wM = ctx.wM
    rows = []
    for a, ea in ctx.s_f.generators:
        for g in G.elements():
            row = [0] * n
            row[g] += 1
            row[G.mul(a, g)] -= ea
            rows.append(row)
    for b, eb in ctx.s_g.generators:
        for g in G.elements():
            row = [0] * n
            row[g] += 1
            row[G.mul(g, b)] -= eb * wM(b)
            rows.append(row)
    if ctx.self_pairing:
        for g in G.elements():
            row = [0] * n
            row[g] += 1
            row[G.inv(g)] -= wM(g)
            rows.append(row)
    diag = smith_diagonal(rows, n)
    free_rank = n - len(diag)
    torsion = [d for d in diag if d > 1]
    return free_rank, torsion
