"""Seifert-matrix knot invariants and topological genus bounds.

Signatures are evaluated by adaptive-precision Hermitian eigenvalue
computation with an exact singularity pre-check against the cyclotomic
minimal polynomial; the Arf invariant is computed two independent ways
(mod-8 determinant rule and brute-force counting of a quadratic form over
GF(2)) and the two must agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import mpmath

from .intlinalg import bareiss_det, cyclotomic, linear_pencil_det, poly_divmod


class KnotError(ValueError):
    pass


class ArfMethodsDisagree(KnotError):
    pass


class SingularAtOmega(KnotError):
    pass


class SignRefinementFailed(KnotError):
    pass


class DNotCovered(KnotError):
    pass


class NotDivisibleBy8(KnotError):
    pass


class RankZero(KnotError):
    pass


class SeifertMatrix:
    """Square integer matrix of even size with unimodular antisymmetrisation."""

    def __init__(self, rows: Sequence[Sequence[int]]):
        self.rows = tuple(tuple(int(v) for v in row) for row in rows)
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise KnotError("matrix must be square")
        if n % 2:
            raise KnotError("Seifert matrices have even size")
        anti = [[self.rows[i][j] - self.rows[j][i] for j in range(n)] for i in range(n)]
        if abs(bareiss_det(anti)) != 1:
            raise KnotError("V - V^T must be unimodular")
        self.size = n

    def transpose(self) -> list[list[int]]:
        return [[self.rows[j][i] for j in range(self.size)] for i in range(self.size)]

    def symmetrized(self) -> list[list[int]]:
        return [
            [self.rows[i][j] + self.rows[j][i] for j in range(self.size)]
            for i in range(self.size)
        ]

    def block_sum(self, other: "SeifertMatrix") -> "SeifertMatrix":
        n, m = self.size, other.size
        out = [[0] * (n + m) for _ in range(n + m)]
        for i in range(n):
            for j in range(n):
                out[i][j] = self.rows[i][j]
        for i in range(m):
            for j in range(m):
                out[n + i][n + j] = other.rows[i][j]
        return SeifertMatrix(out)


@dataclass(frozen=True)
class KnotSpec:
    name: str
    matrix: SeifertMatrix

    def __add__(self, other: "KnotSpec") -> "KnotSpec":
        return KnotSpec(f"{self.name}#{other.name}", self.matrix.block_sum(other.matrix))


def alexander_at_minus_one(V: SeifertMatrix) -> int:
    """det(V + V^T), the knot determinant up to sign."""
    return bareiss_det(V.symmetrized())


def arf(V: SeifertMatrix) -> int:
    """Arf invariant, via the mod-8 determinant rule and a counting oracle.

    Rule (a): 0 iff |det(V+V^T)| = +-1 mod 8.  Oracle (b): the majority
    value of q(x) = x V x^T mod 2 over GF(2)^(2g).  Disagreement is an
    internal-consistency failure and raises.
    """
    det = abs(alexander_at_minus_one(V))
    if det % 2 == 0:
        raise KnotError("knot determinant must be odd")
    by_det = 0 if det % 8 in (1, 7) else 1
    n = V.size
    counts = [0, 0]
    for mask in range(1 << n):
        x = [(mask >> i) & 1 for i in range(n)]
        q = 0
        for i in range(n):
            if x[i]:
                for j in range(n):
                    if x[j]:
                        q += V.rows[i][j]
        counts[q % 2] += 1
    if counts[0] == counts[1]:
        raise ArfMethodsDisagree("quadratic form has no majority value")
    by_form = 0 if counts[0] > counts[1] else 1
    if by_det != by_form:
        raise ArfMethodsDisagree(
            f"determinant rule gives {by_det}, quadratic-form count gives {by_form}"
        )
    return by_det


def _omega_order(r: Fraction) -> int:
    """Order of exp(i*pi*r) as a root of unity."""
    half = (Fraction(r) % 2) / 2  # exp(2*pi*i * (r/2))
    return half.denominator


def _alexander_poly(V: SeifertMatrix) -> list[int]:
    """det(tV - V^T) as integer coefficients, low degree first."""
    pairs = [
        [(V.rows[i][j], V.rows[j][i]) for j in range(V.size)] for i in range(V.size)
    ]
    return linear_pencil_det(pairs)


def _is_alexander_root(V: SeifertMatrix, r: Fraction) -> bool:
    m = _omega_order(r)
    poly = _alexander_poly(V)
    if not any(poly):
        return True
    _, rem = poly_divmod(poly, cyclotomic(m))
    return not rem


def levine_tristram(V: SeifertMatrix, omega: Fraction, max_dps: int = 400) -> int:
    """Signature of (1-w)V + (1-conj(w))V^T at w = exp(i*pi*omega).

    Eigenvalue signs are resolved by raising the working precision until no
    eigenvalue interval straddles zero; values of w where the matrix is
    singular (roots of the Alexander polynomial, where the signature jumps)
    raise instead of guessing.
    """
    if V.size == 0:
        return 0
    r = Fraction(omega) % 2
    if r == 0:
        raise SingularAtOmega("omega = 1 annihilates the pairing")
    if _is_alexander_root(V, r):
        raise SingularAtOmega(f"exp(i*pi*{r}) is a root of the Alexander polynomial")
    n = V.size
    dps = 40
    while dps <= max_dps:
        with mpmath.workdps(dps):
            w = mpmath.expjpi(mpmath.mpf(r.numerator) / r.denominator)
            one = mpmath.mpf(1)
            a = one - w
            ac = one - mpmath.conj(w)
            mat = mpmath.matrix(n, n)
            for i in range(n):
                for j in range(n):
                    mat[i, j] = a * V.rows[i][j] + ac * V.rows[j][i]
            eigs = mpmath.eighe(mat, eigvals_only=True)
            norm = max(abs(mat[i, j]) for i in range(n) for j in range(n)) * n
            tol = norm * mpmath.mpf(10) ** (12 - dps)
            if all(abs(e) > tol for e in eigs):
                return sum(1 if e > 0 else -1 for e in eigs)
        dps *= 2
    raise SignRefinementFailed(
        f"could not separate eigenvalue signs from zero at {max_dps} digits"
    )


def sigma_d(V: SeifertMatrix, d: int) -> int:
    """Levine-Tristram signature at exp(i*pi*(d-1)/d)."""
    if abs(d) < 2:
        raise KnotError("sigma_d needs |d| >= 2")
    return levine_tristram(V, Fraction(d - 1, d))


def _bounds_for_d(V: SeifertMatrix, d: int) -> list[int]:
    """Right-hand sides 2g+1 >= |...| applicable to homology class d."""
    out = []
    if d % 2 == 0:
        sigma = levine_tristram(V, Fraction(1))
        out.append(abs(Fraction(d * d, 2) - 1 - sigma))
    if d != 0:
        primes = _odd_prime_divisors(abs(d))
        if primes:
            try:
                s = sigma_d(V, d)
            except SingularAtOmega:
                primes = []  # signature jump point: no usable bound at this d
            for p in primes:
                out.append(abs(Fraction((p * p - 1) * d * d, 2 * p * p) - 1 - s))
    assert all(b.denominator == 1 for b in out)
    return [int(b) for b in out]


def _odd_prime_divisors(n: int) -> list[int]:
    out = []
    p = 3
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 2
    if n > 1 and n % 2:
        out.append(n)
    return out


def cp2_genus_lower_bound(V: SeifertMatrix, d: int) -> int:
    """Genus lower bound for a surface in class d, from the signature bounds."""
    if d in (1, -1):
        raise DNotCovered("classes +-1 are governed by the Arf invariant")
    bounds = _bounds_for_d(V, d)
    if not bounds:
        return 0
    return max(0, max(b // 2 for b in bounds))


@dataclass(frozen=True)
class CP2GenusVerdict:
    lower: int
    upper: int
    exact: Optional[int]
    incomplete: bool = False
    scan_limit: int = 0


def cp2_genus_verdict(V: SeifertMatrix, scan_cap: int = 64) -> CP2GenusVerdict:
    """Minimal genus of a surface bounded by the knot in the punctured manifold.

    The upper bound 1 always holds by a stabilisation argument.  Arf = 0
    gives a degree +-1 disc, so genus 0 exactly.  Arf = 1 rules out genus 0
    in classes +-1, and the verdict is exactly 1 when the signature bounds
    rule out genus 0 in every other class; the class scan window is finite
    because the bounds grow quadratically in d.
    """
    a = arf(V)
    if a == 0:
        return CP2GenusVerdict(lower=0, upper=1, exact=0)
    n = V.size
    # |sigma| <= n bounds the tail: both formulas give RHS >= 2 beyond this
    need = max(2 * n + 6, (9 * (n + 3) + 3) // 4)
    window = math.isqrt(need) + 1
    incomplete = window > scan_cap
    window = min(window, scan_cap)
    for d in range(-window, window + 1):
        if d in (-1, 1):
            continue
        if cp2_genus_lower_bound(V, d) < 1:
            return CP2GenusVerdict(lower=0, upper=1, exact=None,
                                   incomplete=incomplete, scan_limit=window)
    if incomplete:
        return CP2GenusVerdict(lower=0, upper=1, exact=None,
                               incomplete=True, scan_limit=window)
    return CP2GenusVerdict(lower=1, upper=1, exact=1, scan_limit=window)


def shake_genus_pm1(V: SeifertMatrix) -> int:
    """Minimal genus generating the second homology of the +-1 trace."""
    return arf(V)


@dataclass(frozen=True)
class MGenusResult:
    genus: Optional[int]
    routed: bool
    cp2: Optional[CP2GenusVerdict] = None
    note: str = ""


def m_genus_simply_connected(rank: int, V: SeifertMatrix,
                             diag_parities=None) -> MGenusResult:
    """M-genus of a knot in a closed simply connected 4-manifold.

    Rank >= 2 intersection forms always contain a primitive class of even
    square, which forces genus 0.  Rank-1 forms are routed through the
    degree scan (this covers both the complex projective plane and its
    Chern-manifold twin, which is flagged rather than silently folded in).
    """
    if rank == 0:
        raise RankZero("the 4-sphere is outside this corollary")
    if rank >= 2:
        return MGenusResult(genus=0, routed=False)
    if diag_parities is True or (
        isinstance(diag_parities, (list, tuple)) and any(p % 2 == 0 for p in diag_parities)
    ):
        return MGenusResult(genus=0, routed=False,
                            note="declared primitive even-square class")
    verdict = cp2_genus_verdict(V)
    return MGenusResult(
        genus=verdict.exact,
        routed=True,
        cp2=verdict,
        note="rank-1 form: projective-plane logic applies (Chern manifold included, flagged)",
    )
