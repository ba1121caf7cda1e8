"""Shared test fixtures: small-group catalog, characters, random subgroups."""

from __future__ import annotations

import itertools
import random

from surfemb4.groups import (
    Character,
    FiniteTableGroup,
    cyclic_group,
    make_finite_group,
    subgroup_closure,
)


def direct_product(a: FiniteTableGroup, b: FiniteTableGroup) -> FiniteTableGroup:
    nb = b.order
    n = a.order * nb

    def enc(x, y):
        return x * nb + y

    table = [[0] * n for _ in range(n)]
    for x1 in a.elements():
        for y1 in b.elements():
            for x2 in a.elements():
                for y2 in b.elements():
                    table[enc(x1, y1)][enc(x2, y2)] = enc(a.mul(x1, x2), b.mul(y1, y2))
    return make_finite_group(table)


def _perm_group(generators: list[tuple[int, ...]]) -> FiniteTableGroup:
    degree = len(generators[0])
    identity = tuple(range(degree))

    def compose(p, q):  # apply q first, then p
        return tuple(p[q[i]] for i in range(degree))

    elements = {identity}
    frontier = [identity]
    while frontier:
        p = frontier.pop()
        for g in generators:
            for q in (compose(g, p), compose(p, g)):
                if q not in elements:
                    elements.add(q)
                    frontier.append(q)
    elems = sorted(elements)
    index = {p: i for i, p in enumerate(elems)}
    table = [[index[compose(p, q)] for q in elems] for p in elems]
    return make_finite_group(table)


def symmetric3() -> FiniteTableGroup:
    return _perm_group([(1, 0, 2), (1, 2, 0)])


def dihedral4() -> FiniteTableGroup:
    return _perm_group([(1, 2, 3, 0), (0, 3, 2, 1)])


def quaternion8() -> FiniteTableGroup:
    units = []
    for axis in range(4):  # 1, i, j, k
        for sign in (1, -1):
            q = [0, 0, 0, 0]
            q[axis] = sign
            units.append(tuple(q))
    units = sorted(units)
    index = {q: i for i, q in enumerate(units)}

    def hamilton(a, b):
        w1, x1, y1, z1 = a
        w2, x2, y2, z2 = b
        return (
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    table = [[index[hamilton(a, b)] for b in units] for a in units]
    return make_finite_group(table)


def all_groups_up_to_8() -> list[tuple[str, FiniteTableGroup]]:
    """All isomorphism classes of groups of order <= 8."""
    c = {n: cyclic_group(n) for n in range(1, 9)}
    return [
        ("C1", c[1]), ("C2", c[2]), ("C3", c[3]),
        ("C4", c[4]), ("C2xC2", direct_product(c[2], c[2])),
        ("C5", c[5]),
        ("C6", c[6]), ("S3", symmetric3()),
        ("C7", c[7]),
        ("C8", c[8]), ("C4xC2", direct_product(c[4], c[2])),
        ("C2xC2xC2", direct_product(direct_product(c[2], c[2]), c[2])),
        ("D4", dihedral4()), ("Q8", quaternion8()),
    ]


def all_characters(group: FiniteTableGroup) -> list[Character]:
    """Every homomorphism to {+1,-1}, found by exhaustive filtering."""
    n = group.order
    out = []
    for signs in itertools.product((1, -1), repeat=n):
        if signs[group.identity] != 1:
            continue
        if all(
            signs[group.mul(a, b)] == signs[a] * signs[b]
            for a in range(n)
            for b in range(n)
        ):
            out.append(Character(group, signs))
    return out


def random_signed_subgroup(group: FiniteTableGroup, rng: random.Random):
    gens = [
        (rng.randrange(group.order), rng.choice((1, -1)))
        for _ in range(rng.randrange(3))
    ]
    return subgroup_closure(group, gens)


def random_seifert_rows(rng: random.Random, max_genus: int = 3) -> list[list[int]]:
    """Random Seifert matrix with entries in [-2, 2] and V - V^T symplectic."""
    g = rng.randrange(1, max_genus + 1)
    n = 2 * g
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        rows[i][i] = rng.randrange(-2, 3)
    for i in range(n):
        for j in range(i + 1, n):
            target = 1 if (j == i + 1 and i % 2 == 0) else 0
            vji = rng.randrange(-2, 3 - target)
            rows[j][i] = vji
            rows[i][j] = vji + target
    return rows
