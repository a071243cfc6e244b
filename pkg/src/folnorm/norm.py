"""Simplicial and foliated Gromov norms of homology classes by exact L1 minimization.

For a class represented by a k-cycle z0, the norm is

    min  sum |a_s|   over  a = z0 + ∂b,

with a supported on the allowed k-simplices and b an arbitrary (k+1)-chain.
Relative problems work modulo the chains of a subcomplex L. The LP dual is
a k-cochain y with |y| <= 1 on allowed simplices and δy = 0; the value
y.z0 certifies optimality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .lp import solve_lp
from .rational import fmt, nullspace, q, rref, solve
from .sset import Chain, FlaggedSSet, HomologyClass, boundary, boundary_matrix

SUPPORTS = ("all", "transverse", "strong")
BRUTE_CAP = 6


class Infeasible(ValueError):
    """No representative of the class is supported on the allowed simplices."""


class TooLarge(ValueError):
    pass


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class NormProblem:
    complex: FlaggedSSet
    cls: Chain
    support: str = "all"
    subcomplex: frozenset[str] | None = None

    def __post_init__(self):
        if isinstance(self.cls, HomologyClass):
            object.__setattr__(self, "cls", self.cls.representative)
        if self.support not in SUPPORTS:
            raise ValueError(f"support must be one of {SUPPORTS}")
        if self.subcomplex is not None:
            object.__setattr__(self, "subcomplex", frozenset(self.subcomplex))

    @property
    def dim(self) -> int:
        return self.cls.dim

    def with_support(self, support: str) -> "NormProblem":
        return NormProblem(self.complex, self.cls, support, self.subcomplex)

    def scaled(self, lam) -> "NormProblem":
        return NormProblem(self.complex, self.cls.scale(lam), self.support, self.subcomplex)


@dataclass(frozen=True)
class NormCertificate:
    value: Fraction | None  # None means infinity
    chain: Chain | None = None
    filling: Chain | None = None  # b with chain = cls + ∂b (mod L)
    dual: tuple[tuple[str, Fraction], ...] = ()  # cochain y

    @property
    def feasible(self) -> bool:
        return self.value is not None

    def to_dict(self) -> dict:
        if self.value is None:
            return {"value": "infinity", "farkas": {k: fmt(v) for k, v in self.dual}}
        return {
            "value": fmt(self.value),
            "chain": self.chain.to_dict(),
            "filling": self.filling.to_dict(),
            "dual": {k: fmt(v) for k, v in self.dual},
            "dual_bound": fmt(self.value),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NormCertificate":
        if data["value"] == "infinity":
            return cls(None, dual=tuple(sorted((k, q(v)) for k, v in data.get("farkas", {}).items())))
        return cls(
            q(data["value"]),
            Chain.from_dict(data["chain"]),
            Chain.from_dict(data["filling"]),
            tuple(sorted((k, q(v)) for k, v in data["dual"].items())),
        )


# ---- problem data ----

def _check_problem(p: NormProblem) -> None:
    K = p.complex.require_valid()
    k = p.dim
    if k > K.kmax:
        raise ValueError(f"class dimension {k} exceeds the truncation level {K.kmax}")
    L = p.subcomplex or frozenset()
    unknown = L - {s.id for s in K.all_simplices()}
    if unknown:
        raise ValueError(f"subcomplex names unknown simplices {sorted(unknown)}")
    for sid in L:
        for _, base in K.simplex(sid).faces:
            if base not in L:
                raise ValueError(f"subcomplex is not closed under faces: {sid} has face {base}")
    bad = set(p.cls.as_dict()) - set(K.ids(k))
    if bad:
        raise ValueError(f"class representative uses unknown {k}-simplices {sorted(bad)}")
    if k > 0:
        rest = [s for s, _ in boundary(K, p.cls).coeffs if s not in L]
        if rest:
            raise ValueError("class representative is not a (relative) cycle")


def _allowed(p: NormProblem, sid: str) -> bool:
    if p.subcomplex and sid in p.subcomplex:
        return False
    return p.support == "all" or p.complex.flagged(sid, p.support)


def _system(p: NormProblem):
    """Rows (k-simplices outside L), allowed a-columns, b-columns, ∂ restricted to rows."""
    K, k = p.complex, p.dim
    L = p.subcomplex or frozenset()
    rows = [s for s in K.ids(k) if s not in L]
    acols = [s for s in rows if _allowed(p, s)]
    bcols = K.ids(k + 1) if k + 1 <= K.kmax else []
    if bcols:
        brow, _, mat = boundary_matrix(K, k + 1)
        index = {s: i for i, s in enumerate(brow)}
        d = [mat[index[s]] for s in rows]
    else:
        d = [[] for _ in rows]
    z0 = [p.cls.get(s) for s in rows]
    return rows, acols, bcols, d, z0


def _farkas(p: NormProblem, rows, acols, bcols, d, z0) -> tuple[tuple[str, Fraction], ...] | None:
    """A cochain y vanishing on allowed simplices with δy = 0 and y.z0 = 1."""
    n = len(rows)
    eqs = [[Fraction(int(r == s)) for s in rows] for r in acols]
    eqs += [[d[i][j] for i in range(n)] for j in range(len(bcols))]
    eqs.append(list(z0))
    rhs = [Fraction(0)] * (len(eqs) - 1) + [Fraction(1)]
    y = solve(eqs, rhs, n)
    return None if y is None else tuple(sorted((s, v) for s, v in zip(rows, y) if v != 0))


def _solve(p: NormProblem) -> NormCertificate:
    _check_problem(p)
    rows, acols, bcols, d, z0 = _system(p)
    if not rows or not any(z0):
        zero = Chain(p.dim)
        return NormCertificate(Fraction(0), zero, Chain(p.dim + 1), ())
    na, nb = len(acols), len(bcols)
    aidx = {s: i for i, s in enumerate(acols)}
    # columns: a+, a-, b+, b-
    A = []
    for i, s in enumerate(rows):
        row = [Fraction(0)] * (2 * na + 2 * nb)
        if s in aidx:
            row[aidx[s]] = Fraction(1)
            row[na + aidx[s]] = Fraction(-1)
        for j in range(nb):
            row[2 * na + j] = -d[i][j]
            row[2 * na + nb + j] = d[i][j]
        A.append(row)
    cost = [Fraction(1)] * (2 * na) + [Fraction(0)] * (2 * nb)
    res = solve_lp(A, z0, cost)
    if res.status == "infeasible":
        far = _farkas(p, rows, acols, bcols, d, z0)
        return NormCertificate(None, dual=far or ())
    if res.status != "optimal":  # pragma: no cover - the objective is bounded below by 0
        raise ArithmeticError(f"unexpected LP status {res.status}")
    x = res.x
    a = Chain(p.dim, {s: x[i] - x[na + i] for i, s in enumerate(acols)})
    b = Chain(p.dim + 1, {s: x[2 * na + j] - x[2 * na + nb + j] for j, s in enumerate(bcols)})
    dual = tuple(sorted((s, v) for s, v in zip(rows, res.y) if v != 0))
    return NormCertificate(res.value, a, b, dual)


def simplicial_norm(p: NormProblem) -> NormCertificate:
    p = p.with_support("all")
    return _raise_if_infinite(_solve(p))


def foliated_norm(p: NormProblem, support: str = "strong") -> NormCertificate:
    if support not in ("transverse", "strong"):
        raise ValueError("foliated norms restrict to transverse or strong simplices")
    return _raise_if_infinite(_solve(p.with_support(support)))


def relative_norm(p: NormProblem) -> NormCertificate:
    if p.subcomplex is None:
        p = NormProblem(p.complex, p.cls, p.support, frozenset())
    return _raise_if_infinite(_solve(p))


def solve_norm(p: NormProblem) -> NormCertificate:
    """Like the named entry points but returns an infinite certificate instead of raising."""
    return _solve(p)


def _raise_if_infinite(cert: NormCertificate) -> NormCertificate:
    if cert.value is None:
        raise Infeasible("the class has no representative on the allowed simplices")
    return cert


def verify_certificate(p: NormProblem, cert: NormCertificate) -> bool:
    """Check primal feasibility, dual feasibility and equal objectives; raise on failure."""
    _check_problem(p)
    rows, acols, bcols, d, z0 = _system(p)
    K = p.complex
    y = dict(cert.dual)
    if set(y) - set(rows):
        raise CertificateError("dual cochain lives outside the constraint rows")
    yv = [y.get(s, Fraction(0)) for s in rows]
    delta = [sum((d[i][j] * yv[i] for i in range(len(rows))), Fraction(0)) for j in range(len(bcols))]
    if any(delta):
        raise CertificateError("dual cochain is not a cocycle")
    pairing = sum((a * b for a, b in zip(yv, z0)), Fraction(0))
    if cert.value is None:
        if any(y.get(s, 0) != 0 for s in acols) or pairing <= 0:
            raise CertificateError("Farkas certificate does not separate")
        return True
    a, b = cert.chain, cert.filling
    if any(not _allowed(p, s) for s in a.as_dict()):
        raise CertificateError("chain uses simplices outside the allowed support")
    lhs = a - p.cls
    if b.coeffs:
        lhs = lhs - boundary(K, b)
    L = p.subcomplex or frozenset()
    if any(s not in L for s, _ in lhs.coeffs):
        raise CertificateError("chain does not represent the class")
    if a.l1() != cert.value:
        raise CertificateError("L1 mass differs from the reported value")
    if any(abs(y.get(s, 0)) > 1 for s in acols):
        raise CertificateError("dual cochain exceeds 1 on an allowed simplex")
    if pairing != cert.value:
        raise CertificateError("dual bound differs from the value")
    return True


# ---- brute-force oracle ----

def brute_norm(p: NormProblem) -> Fraction | None:
    """Minimum L1 mass by enumerating vertices of the feasible affine slice.

    The feasible chains form an affine space a = a0 + N t; the L1 minimum sits
    where dim N independent coordinates vanish, so trying every such set of
    coordinates finds it. Returns None when the class is not representable.
    """
    _check_problem(p)
    K, k = p.complex, p.dim
    sizes = (len(K.ids(k)), len(K.ids(k + 1)) if k + 1 <= K.kmax else 0)
    if max(sizes) > BRUTE_CAP:
        raise TooLarge(f"brute force is capped at {BRUTE_CAP} simplices per dimension, got {sizes}")
    rows, acols, bcols, d, z0 = _system(p)
    na, nb = len(acols), len(bcols)
    if not rows:
        return Fraction(0)
    aidx = {s: i for i, s in enumerate(acols)}
    mat = []
    for i, s in enumerate(rows):
        row = [Fraction(0)] * (na + nb)
        if s in aidx:
            row[aidx[s]] = Fraction(1)
        for j in range(nb):
            row[na + j] = -d[i][j]
        mat.append(row)
    base = solve(mat, z0, na + nb)
    if base is None:
        return None
    a0 = base[:na]
    dirs = [v[:na] for v in nullspace(mat, na + nb)]
    dirs = rref(dirs, na)[0] if dirs else []
    m = len(dirs)
    best = sum((abs(v) for v in a0), Fraction(0)) if m == 0 else None
    for zeros in itertools.combinations(range(na), m):
        sub = [[dirs[j][i] for j in range(m)] for i in zeros]
        t = solve(sub, [-a0[i] for i in zeros], m)
        if t is None or _rank_deficient(sub, m):
            continue
        a = [a0[i] + sum((dirs[j][i] * t[j] for j in range(m)), Fraction(0)) for i in range(na)]
        val = sum((abs(v) for v in a), Fraction(0))
        if best is None or val < best:
            best = val
    return best


def _rank_deficient(rows, m) -> bool:
    return len(rref(rows, m)[1]) < m


# ---- comparison audit (foliated <= (1 + (n+1)L) simplicial) ----

@dataclass(frozen=True)
class Thm10Report:
    n: int
    L: int
    simplicial: NormCertificate
    foliated: NormCertificate
    bound: Fraction | None
    holds: bool
    equality_required: bool
    equality_holds: bool | None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "L": self.L,
            "factor": 1 + (self.n + 1) * self.L,
            "simplicial": self.simplicial.to_dict(),
            "foliated_strong": self.foliated.to_dict(),
            "bound": "infinity" if self.bound is None else fmt(self.bound),
            "holds": self.holds,
            "equality_required": self.equality_required,
            "equality_holds": self.equality_holds,
        }


def thm10_audit(K: FlaggedSSet, h: Chain | HomologyClass, L: int) -> Thm10Report:
    """Check ‖h‖_st <= (1 + (n+1) L) ‖h‖ with both sides solved exactly."""
    if isinstance(h, HomologyClass):
        h = h.representative
    if L < 0:
        raise ValueError("L is a nonnegative integer")
    p = NormProblem(K, h)
    simp = simplicial_norm(p)
    fol = foliated_norm(p, "strong")
    n = h.dim
    bound = (1 + (n + 1) * L) * simp.value
    holds = fol.value <= bound
    eq = fol.value == simp.value if L == 0 else None
    return Thm10Report(n, L, simp, fol, bound, holds and (eq is not False), L == 0, eq)
