"""Fundamental-group backends, orientation characters, and signed subgroups.

Two group backends are supported: finite groups given by a multiplication
table (elements are indices 0..n-1) and finitely generated abelian groups
given by invariant factors (elements are reduced integer tuples, a factor
of 0 denoting an infinite cyclic summand).  A signed subgroup is a subgroup
of G x {+1,-1} recording the image of a surface group together with the
surface's orientation character.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .intlinalg import HermiteLattice


class GroupError(ValueError):
    pass


class NotAssociative(GroupError):
    pass


class NoIdentity(GroupError):
    pass


class NoInverse(GroupError):
    pass


class FiniteTableGroup:
    """Finite group as a Cayley table on indices 0..n-1."""

    kind = "finite"

    def __init__(self, table: Sequence[Sequence[int]], identity: int, inverse: Sequence[int]):
        self.table = tuple(tuple(row) for row in table)
        self.identity = identity
        self.inverse = tuple(inverse)
        self.order = len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def elements(self) -> range:
        return range(self.order)

    def check_elem(self, a) -> int:
        if not isinstance(a, int) or not (0 <= a < self.order):
            raise GroupError(f"invalid element {a!r} for group of order {self.order}")
        return a

    def canon(self, a: int) -> int:
        return a

    def __repr__(self):
        return f"FiniteTableGroup(order={self.order})"


class FGAbelianGroup:
    """F.g. abelian group with invariant factors; elements are tuples."""

    kind = "abelian"

    def __init__(self, factors: Sequence[int]):
        for f in factors:
            if f < 0:
                raise GroupError("invariant factors must be >= 0 (0 denotes Z)")
        self.factors = tuple(int(f) for f in factors)
        self.rank = len(self.factors)
        self.identity = tuple(0 for _ in self.factors)

    def canon(self, a: Sequence[int]) -> tuple[int, ...]:
        return tuple(
            x % f if f else x for x, f in zip(a, self.factors)
        )

    def check_elem(self, a) -> tuple[int, ...]:
        if not isinstance(a, (tuple, list)) or len(a) != self.rank:
            raise GroupError(f"invalid element {a!r} for factors {self.factors}")
        return self.canon(tuple(int(x) for x in a))

    def mul(self, a, b):
        return self.canon(tuple(x + y for x, y in zip(a, b)))

    def inv(self, a):
        return self.canon(tuple(-x for x in a))

    def is_finite(self) -> bool:
        return all(f != 0 for f in self.factors)

    def elements(self):
        if not self.is_finite():
            raise GroupError("cannot enumerate an infinite abelian group")
        out = [()]
        for f in self.factors:
            out = [e + (x,) for e in out for x in range(f)]
        return [self.canon(e) for e in out]

    def __repr__(self):
        return f"FGAbelianGroup(factors={self.factors})"


AmbientGroup = FiniteTableGroup | FGAbelianGroup


def make_finite_group(table: Sequence[Sequence[int]]) -> FiniteTableGroup:
    """Validate a multiplication table and build the group.

    Checks are exhaustive and report the first failing axiom, in the order
    associativity, identity, inverses.
    """
    n = len(table)
    if n == 0:
        raise GroupError("empty table")
    for i, row in enumerate(table):
        if len(row) != n:
            raise GroupError(f"row {i} has length {len(row)}, expected {n}")
        for v in row:
            if not isinstance(v, int) or not (0 <= v < n):
                raise GroupError(f"entry {v!r} out of range in row {i}")
    for a in range(n):
        for b in range(n):
            for c in range(n):
                if table[table[a][b]][c] != table[a][table[b][c]]:
                    raise NotAssociative(f"({a}*{b})*{c} != {a}*({b}*{c})")
    identity = None
    for e in range(n):
        if all(table[e][x] == x and table[x][e] == x for x in range(n)):
            identity = e
            break
    if identity is None:
        raise NoIdentity("no two-sided identity")
    inverse = [None] * n
    for a in range(n):
        for b in range(n):
            if table[a][b] == identity and table[b][a] == identity:
                inverse[a] = b
                break
        if inverse[a] is None:
            raise NoInverse(f"element {a} has no inverse")
    return FiniteTableGroup(table, identity, inverse)


def cyclic_group(n: int) -> AmbientGroup:
    """C_n as a table for n >= 1; the infinite cyclic group Z for n = 0."""
    if n < 0:
        raise GroupError("n must be >= 0")
    if n == 0:
        return FGAbelianGroup((0,))
    table = [[(a + b) % n for b in range(n)] for a in range(n)]
    return make_finite_group(table)


def abelian_group(factors: Sequence[int]) -> FGAbelianGroup:
    return FGAbelianGroup(factors)


class Character:
    """A homomorphism G -> {+1,-1}.

    For a finite group the values are given per element and multiplicativity
    is checked exhaustively; for an abelian group they are given per
    invariant-factor generator and compatibility with the factors is checked.
    """

    def __init__(self, group: AmbientGroup, values: Sequence[int]):
        self.group = group
        self.values = tuple(int(v) for v in values)
        if any(v not in (1, -1) for v in self.values):
            raise GroupError("character values must be +1 or -1")
        if group.kind == "finite":
            if len(self.values) != group.order:
                raise GroupError("need one value per group element")
            for a in group.elements():
                for b in group.elements():
                    if self.values[group.mul(a, b)] != self.values[a] * self.values[b]:
                        raise GroupError(f"not multiplicative at ({a},{b})")
        else:
            if len(self.values) != group.rank:
                raise GroupError("need one value per invariant factor")
            for f, v in zip(group.factors, self.values):
                if f % 2 == 1 and f != 0 and v == -1:
                    raise GroupError(f"value -1 incompatible with odd factor {f}")

    def __call__(self, a) -> int:
        if self.group.kind == "finite":
            return self.values[a]
        out = 1
        for x, v in zip(a, self.values):
            if v == -1 and x % 2:
                out = -out
        return out

    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.values)


def trivial_character(group: AmbientGroup) -> Character:
    n = group.order if group.kind == "finite" else group.rank
    return Character(group, [1] * n)


def _sign_bit(s: int) -> int:
    return 0 if s == 1 else 1


@dataclass(frozen=True)
class SignedSubgroup:
    """Subgroup of G x {+1,-1} generated by (element, sign) pairs.

    Either the sign component is a homomorphism on the projection, or the
    closure contains (1,-1); both are legal, and ``contains_minus_one``
    distinguishes them.  Finite groups store the full closure; abelian
    groups store a Hermite lattice with the sign encoded as an extra
    mod-2 coordinate.
    """

    ambient: AmbientGroup
    generators: tuple
    closure: frozenset = field(default=None, compare=False)
    lattice: HermiteLattice = field(default=None, compare=False)

    @property
    def contains_minus_one(self) -> bool:
        if self.ambient.kind == "finite":
            return (self.ambient.identity, -1) in self.closure
        return self.lattice.contains((0,) * self.ambient.rank + (1,))

    def members(self) -> frozenset:
        if self.ambient.kind != "finite":
            raise GroupError("cannot enumerate an abelian signed subgroup")
        return self.closure

    def contains(self, elem, sign: int) -> bool:
        if self.ambient.kind == "finite":
            return (elem, sign) in self.closure
        return self.lattice.contains(tuple(elem) + (_sign_bit(sign),))

    def projection(self) -> frozenset:
        """Image of the subgroup in G (finite backend only)."""
        return frozenset(g for g, _ in self.members())

    def sign_is_homomorphism(self) -> bool:
        return not self.contains_minus_one

    def character_trivial_on_projection(self, chi: Character) -> bool:
        if self.ambient.kind == "finite":
            return all(chi(g) == 1 for g in self.projection())
        return all(chi(self.ambient.canon(g)) == 1 for g, _ in self.generators)


def subgroup_closure(ambient: AmbientGroup, generators: Iterable) -> SignedSubgroup:
    """Close a list of (element, sign) pairs inside G x {+1,-1}."""
    gens = []
    for g, s in generators:
        if s not in (1, -1):
            raise GroupError(f"sign must be +1 or -1, got {s!r}")
        gens.append((ambient.check_elem(g), s))
    gens = tuple(gens)
    if ambient.kind == "finite":
        closure = {(ambient.identity, 1)}
        frontier = list(closure)
        while frontier:
            g, s = frontier.pop()
            for h, t in gens:
                for cand in ((ambient.mul(g, h), s * t), (ambient.mul(g, ambient.inv(h)), s * t)):
                    if cand not in closure:
                        closure.add(cand)
                        frontier.append(cand)
        return SignedSubgroup(ambient, gens, closure=frozenset(closure))
    k = ambient.rank
    rows = [list(g) + [_sign_bit(s)] for g, s in gens]
    for i, f in enumerate(ambient.factors):
        if f:
            rows.append([f if j == i else 0 for j in range(k)] + [0])
    rows.append([0] * k + [2])
    return SignedSubgroup(ambient, gens, lattice=HermiteLattice(rows, k + 1))
