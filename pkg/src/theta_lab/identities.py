"""Residual evaluators, one per identity family.

Each evaluator computes both sides of its identity with the theta engine and
returns a normalized residual: |LHS - RHS| divided by the largest absolute
summand across both sides (floored at 1, so cancellation-heavy instances are
judged fairly and near-zero instances never divide by dust).

Families: linear tau <-> n^2 tau relations, Schroter products, standard /
inverse / shifted binary identities, Jacobi and Riemann quartic identities in
Whittaker-Watson and Jacobi dual variables, naive Weierstrass four-term
relations, the odd half-period product decomposition, and the Pfaffian
identity of order 2^g + 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product as _cartesian
from typing import Callable

import numpy as np

from .duals import Quadruple, jacobi_dual, ww_dual
from .numerics import SkewMatrix, compensated_sum, perfect_matchings, pfaffian, unit_phase
from .theta import (
    Characteristic,
    DEFAULT_SETTINGS,
    EvalSettings,
    HalfPeriod,
    RiemannMatrix,
    ThetaPoint,
    theta_values,
)

__all__ = [
    "CosetVector",
    "IdentityInstance",
    "ResidualReport",
    "IDENTITY_NAMES",
    "binary_residual",
    "budget_epsilon",
    "coset_enumerate",
    "equivalence_suite",
    "evaluate",
    "jacobi_residual",
    "lemma_decomposition_residual",
    "linear_identity_residual",
    "naive_weierstrass_residual",
    "orthogonality_check",
    "riemann_residual",
    "schroter_residual",
    "weierstrass_pfaffian_residual",
]

DEFAULT_TARGET = 1e-9


# ---------------------------------------------------------------- types --


@dataclass(frozen=True, eq=False)
class CosetVector:
    """Representative of Z^g / n Z^g with entries in {0, ..., n-1}."""

    v: np.ndarray
    modulus: int

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.v, dtype=np.int64))
        if self.modulus < 1:
            raise ValueError("modulus must be >= 1")
        if v.ndim != 1 or (v < 0).any() or (v >= self.modulus).any():
            raise ValueError("entries must lie in {0, ..., n-1}")
        object.__setattr__(self, "v", v)


def coset_enumerate(g: int, n: int) -> list[CosetVector]:
    """All n^g coset representatives, lexicographically ordered."""
    if g < 1 or n < 1:
        raise ValueError("g and n must be >= 1")
    return [CosetVector(np.array(t, dtype=np.int64), n) for t in _cartesian(range(n), repeat=g)]


def _coset_array(g: int, n: int) -> np.ndarray:
    """(n^g, g) int64 array of representatives in lexicographic order."""
    if n == 1:
        return np.zeros((1, g), dtype=np.int64)
    return np.indices((n,) * g).reshape(g, -1).T.astype(np.int64)


@dataclass(frozen=True, eq=False)
class IdentityInstance:
    """One randomized instance: tau, argument points, characteristics, and
    any integer parameters the identity needs."""

    g: int
    tau: RiemannMatrix
    points: tuple[ThetaPoint, ...]
    chars: tuple[Characteristic, ...]
    extra: dict = field(default_factory=dict)
    eval: EvalSettings = DEFAULT_SETTINGS
    digest: str = "adhoc"

    def __post_init__(self):
        if self.g != self.tau.g:
            raise ValueError("instance g disagrees with tau")
        for p in self.points:
            if p.g != self.g:
                raise ValueError("point dimension disagrees with g")
        for c in self.chars:
            if c.g != self.g:
                raise ValueError("characteristic dimension disagrees with g")
        for v in self.extra.values():
            if int(v) < 1:
                raise ValueError("extra parameters must be >= 1")


@dataclass(frozen=True)
class ResidualReport:
    """Both sides of one identity instance plus the normalized residual."""

    identity_name: str
    lhs: complex
    rhs: complex
    scale: float
    residual: float
    instance_digest: str


def _finish(name: str, lhs_terms, rhs_terms, digest: str) -> ResidualReport:
    lhs = compensated_sum(lhs_terms)
    rhs = compensated_sum(rhs_terms)
    mags = [abs(t) for t in lhs_terms] + [abs(t) for t in rhs_terms]
    scale = max(mags) if mags else 0.0
    residual = abs(lhs - rhs) / max(1.0, scale)
    return ResidualReport(name, lhs, rhs, scale, residual, digest)


def _expect(inst: IdentityInstance, points: int, chars: int) -> None:
    if len(inst.points) != points or len(inst.chars) != chars:
        raise ValueError(
            f"arity mismatch: expected {points} points / {chars} characteristics, "
            f"got {len(inst.points)} / {len(inst.chars)}"
        )


def _theta(rm: RiemannMatrix, a, u, b, s: EvalSettings) -> complex:
    values, _, _ = theta_values(rm, a, u, [b], s)
    return values[0]


# -------------------------------------------------------- orthogonality --


def orthogonality_check(g: int, n: int) -> bool:
    """Root-of-unity orthogonality sum_q e^{+-2 pi i <p,q>/n} = n^g delta_{p,0}
    over all p; for n = 2 the summands are +-1 and the check runs in exact
    integer arithmetic (which also covers sum_q e^{pi i <p,q>} = 2^g delta)."""
    if g < 1 or n < 1:
        raise ValueError("g and n must be >= 1")
    reps = _coset_array(g, n)
    if n == 2:
        target = 2**g
        for i, p in enumerate(reps):
            dots = reps @ p
            total = int(np.where(dots % 2 == 0, 1, -1).sum())
            if total != (target if i == 0 else 0):
                return False
        return True
    size = n**g
    for sign in (1.0, -1.0):
        for i, p in enumerate(reps):
            dots = (reps @ p).astype(float)
            total = complex(np.exp(sign * 2j * math.pi * dots / n).sum())
            want = size if i == 0 else 0.0
            if abs(total - want) > 1e-12 * max(1.0, size * 1e-3):
                return False
    return True


# ------------------------------------------------------ linear identities --


def linear_identity_residual(kind: str, inst: IdentityInstance) -> ResidualReport:
    """Linear relations between tau and n^2 tau:

      sr1a:  theta_[a;b](u|tau) = sum_p theta_[(a+p)/n; nb](nu | n^2 tau)
      sr1b:  theta_[a;b](nu|n^2 tau)
                 = n^-g sum_q e^{-2 pi i <a,q>} theta_[na; (b+q)/n](u | tau)
    """
    if kind not in ("sr1a", "sr1b"):
        raise ValueError(f"unknown linear identity kind {kind!r}")
    _expect(inst, 1, 1)
    n = int(inst.extra.get("n", 1))
    rm, s, g = inst.tau, inst.eval, inst.g
    u = inst.points[0].u
    a, b = inst.chars[0].a, inst.chars[0].b
    rm_n2 = rm.scaled(n * n) if n > 1 else rm
    reps = _coset_array(g, n)
    name = f"linear_{kind}"
    if kind == "sr1a":
        lhs = [_theta(rm, a, u, b, s)]
        rhs = [_theta(rm_n2, (a + p) / n, n * u, n * b, s) for p in reps]
    else:
        lhs = [_theta(rm_n2, a, n * u, b, s)]
        vals, _, _ = theta_values(rm, n * a, u, [(b + q) / n for q in reps], s)
        w = float(n) ** (-g)
        rhs = [w * unit_phase(-float(np.dot(a, q))) * v for q, v in zip(reps, vals)]
    return _finish(name, lhs, rhs, inst.digest)


# ----------------------------------------------------- Schroter / binary --


def schroter_residual(inst: IdentityInstance) -> ResidualReport:
    """General binary product expansion,

      theta_[a1;b1](u1|n1 tau) theta_[a2;b2](u2|n2 tau)
        = sum_{p mod n1+n2} theta_[(n1 a1+n2 a2+n1 p)/(n1+n2); b1+b2](u1+u2 | (n1+n2) tau)
                          * theta_[(a1-a2+p)/(n1+n2); n2 b1 - n1 b2](n2 u1 - n1 u2 | n1 n2 (n1+n2) tau).
    """
    _expect(inst, 2, 2)
    n1 = int(inst.extra.get("n1", 1))
    n2 = int(inst.extra.get("n2", 1))
    rm, s, g = inst.tau, inst.eval, inst.g
    u1, u2 = (p.u for p in inst.points)
    (a1, b1), (a2, b2) = ((c.a, c.b) for c in inst.chars)
    m = n1 + n2
    rm1 = rm.scaled(n1) if n1 > 1 else rm
    rm2 = rm.scaled(n2) if n2 > 1 else rm
    rm_sum = rm.scaled(m)
    rm_prod = rm.scaled(n1 * n2 * m)
    lhs = [_theta(rm1, a1, u1, b1, s) * _theta(rm2, a2, u2, b2, s)]
    rhs = []
    for p in _coset_array(g, m):
        t1 = _theta(rm_sum, (n1 * a1 + n2 * a2 + n1 * p) / m, u1 + u2, b1 + b2, s)
        t2 = _theta(rm_prod, (a1 - a2 + p) / m, n2 * u1 - n1 * u2, n2 * b1 - n1 * b2, s)
        rhs.append(t1 * t2)
    return _finish("schroter", lhs, rhs, inst.digest)


def binary_residual(direction: str, inst: IdentityInstance) -> ResidualReport:
    """Standard binary identities between tau and 2 tau.

    forward:  theta(u1|tau) theta(u2|tau) as a 2^g-term sum over 2 tau.
    inverse:  the 2 tau product as 2^-g sum with phases e^{-2 pi i <a1, p>}.
    shifted:  the forward relation with both b_k shifted by q/2 and phases
              e^{-pi i <a1+a2, q>} / e^{pi i <p, q>}; all q are checked and
              the worst coset is reported.
    """
    if direction not in ("forward", "inverse", "shifted"):
        raise ValueError(f"unknown binary direction {direction!r}")
    _expect(inst, 2, 2)
    rm, s, g = inst.tau, inst.eval, inst.g
    u1, u2 = (p.u for p in inst.points)
    (a1, b1), (a2, b2) = ((c.a, c.b) for c in inst.chars)
    rm2 = rm.scaled(2)
    reps = _coset_array(g, 2)

    def forward_pair(p: np.ndarray) -> complex:
        t1 = _theta(rm2, (a1 + a2 + p) / 2, u1 + u2, b1 + b2, s)
        t2 = _theta(rm2, (a1 - a2 + p) / 2, u1 - u2, b1 - b2, s)
        return t1 * t2

    if direction == "forward":
        lhs = [_theta(rm, a1, u1, b1, s) * _theta(rm, a2, u2, b2, s)]
        rhs = [forward_pair(p) for p in reps]
        return _finish("binary_forward", lhs, rhs, inst.digest)

    if direction == "inverse":
        lhs = [_theta(rm2, a1, u1 + u2, b1, s) * _theta(rm2, a2, u1 - u2, b2, s)]
        v1, _, _ = theta_values(rm, a1 + a2, u1, [(b1 + b2 + p) / 2 for p in reps], s)
        v2, _, _ = theta_values(rm, a1 - a2, u2, [(b1 - b2 + p) / 2 for p in reps], s)
        w = 2.0 ** (-g)
        rhs = [
            w * unit_phase(-float(np.dot(a1, p))) * t1 * t2 for p, t1, t2 in zip(reps, v1, v2)
        ]
        return _finish("binary_inverse", lhs, rhs, inst.digest)

    pairs = [forward_pair(p) for p in reps]
    f1, _, _ = theta_values(rm, a1, u1, [b1 + q / 2 for q in reps], s)
    f2, _, _ = theta_values(rm, a2, u2, [b2 + q / 2 for q in reps], s)
    a12 = a1 + a2
    worst: ResidualReport | None = None
    for qi, q in enumerate(reps):
        lhs_q = [unit_phase(-float(np.dot(a12, q)) / 2) * f1[qi] * f2[qi]]
        rhs_q = [unit_phase(float(np.dot(p, q)) / 2) * pairs[pi] for pi, p in enumerate(reps)]
        digest = inst.digest + ";q=" + "".join(str(int(x)) for x in q)
        rep = _finish("binary_shifted", lhs_q, rhs_q, digest)
        if worst is None or rep.residual > worst.residual:
            worst = rep
    assert worst is not None
    return worst


# ------------------------------------------------------ Jacobi quartics --


def _stacked(inst: IdentityInstance):
    A = np.stack([c.a for c in inst.chars])
    B = np.stack([c.b for c in inst.chars])
    U = np.stack([p.u for p in inst.points])
    return A, B, U


def _dual_rows(dual_fn, M: np.ndarray) -> np.ndarray:
    return np.stack(dual_fn(Quadruple(M[0], M[1], M[2], M[3])).rows())


def jacobi_residual(kind: str, inst: IdentityInstance) -> ResidualReport:
    """Quartic Jacobi identities: coset-summed four-fold products agree in
    original and dual variables.

      first / tilde_first:   sum_q prod_k e^{-pi i <a_k,q>} theta_[a_k; b_k+q/2](u_k)
      second / tilde_second: sum_p prod_k theta_[a_k+p/2; b_k](u_k)

    with Whittaker-Watson duals for first/second and Jacobi tildes for the
    tilde forms.
    """
    if kind not in ("first", "second", "tilde_first", "tilde_second"):
        raise ValueError(f"unknown jacobi kind {kind!r}")
    _expect(inst, 4, 4)
    rm, s, g = inst.tau, inst.eval, inst.g
    A, B, U = _stacked(inst)
    dual_fn = jacobi_dual if kind.startswith("tilde") else ww_dual
    A2, B2, U2 = (_dual_rows(dual_fn, M) for M in (A, B, U))
    reps = _coset_array(g, 2)

    def side_q(Am, Bm, Um) -> list[complex]:
        asum = Am.sum(axis=0)
        per_k = [theta_values(rm, Am[k], Um[k], [Bm[k] + q / 2 for q in reps], s)[0] for k in range(4)]
        terms = []
        for qi, q in enumerate(reps):
            phase = unit_phase(-float(np.dot(asum, q)) / 2)
            terms.append(phase * per_k[0][qi] * per_k[1][qi] * per_k[2][qi] * per_k[3][qi])
        return terms

    def side_p(Am, Bm, Um) -> list[complex]:
        terms = []
        for p in reps:
            prod = 1 + 0j
            for k in range(4):
                prod *= _theta(rm, Am[k] + p / 2, Um[k], Bm[k], s)
            terms.append(prod)
        return terms

    side = side_q if kind.endswith("first") else side_p
    return _finish(f"jacobi_{kind}", side(A, B, U), side(A2, B2, U2), inst.digest)


# ----------------------------------------------------- Riemann quartics --


def riemann_residual(kind: str, inst: IdentityInstance) -> ResidualReport:
    """Quartic Riemann identities: a single four-fold product equals the
    2^-g-weighted double coset sum over shifted characteristics.

      ww:            product in Whittaker-Watson duals, sum in originals,
                     phases e^{-pi i <p,q>} prod_k e^{-pi i <a_k,q>}
      ww_inverse:    roles of original/dual variables exchanged
      tilde:         product in Jacobi tildes, sum in originals, no <p,q> phase
      tilde_inverse: product in originals, sum in tildes, no <p,q> phase
    """
    if kind not in ("ww", "ww_inverse", "tilde", "tilde_inverse"):
        raise ValueError(f"unknown riemann kind {kind!r}")
    _expect(inst, 4, 4)
    rm, s, g = inst.tau, inst.eval, inst.g
    A, B, U = _stacked(inst)
    dual_fn = jacobi_dual if kind.startswith("tilde") else ww_dual
    A2, B2, U2 = (_dual_rows(dual_fn, M) for M in (A, B, U))
    if kind in ("ww", "tilde"):
        Ap, Bp, Up = A2, B2, U2  # product side: dual variables
        As, Bs, Us = A, B, U  # sum side: originals
    else:
        Ap, Bp, Up = A, B, U
        As, Bs, Us = A2, B2, U2
    with_pq_phase = kind in ("ww", "ww_inverse")
    reps = _coset_array(g, 2)

    prod = 1 + 0j
    for k in range(4):
        prod *= _theta(rm, Ap[k], Up[k], Bp[k], s)
    lhs = [prod]

    asum = As.sum(axis=0)
    weight = 2.0 ** (-g)
    rhs = []
    for p in reps:
        per_k = [theta_values(rm, As[k] + p / 2, Us[k], [Bs[k] + q / 2 for q in reps], s)[0] for k in range(4)]
        for qi, q in enumerate(reps):
            t = -float(np.dot(asum, q)) / 2
            if with_pq_phase:
                t -= float(np.dot(p, q)) / 2
            rhs.append(weight * unit_phase(t) * per_k[0][qi] * per_k[1][qi] * per_k[2][qi] * per_k[3][qi])
    return _finish(f"riemann_{kind}", lhs, rhs, inst.digest)


# ----------------------------------------------- naive Weierstrass forms --


def naive_weierstrass_residual(kind: str, inst: IdentityInstance) -> ResidualReport:
    """Four-term addition formulas relating all three variable sets:

      general: prod theta(u_k) - prod theta(u'_k)
                 = 2^-g sum_{p,q} (1 - e^{-pi i <p,q>})
                   prod_k e^{-pi i <a~_k,q>} theta_[a~_k+p/2; b~_k+q/2](u~_k)
      onedim (g = 1): the right side collapses to the single term
                 e^{-2 pi i a_1} prod_k theta_[a~_k+1/2; b~_k+1/2](u~_k).
    """
    if kind not in ("general", "onedim"):
        raise ValueError(f"unknown naive Weierstrass kind {kind!r}")
    _expect(inst, 4, 4)
    rm, s, g = inst.tau, inst.eval, inst.g
    if kind == "onedim" and g != 1:
        raise ValueError("the one-dimensional form requires g = 1")
    A, B, U = _stacked(inst)
    Aw, Bw, Uw = (_dual_rows(ww_dual, M) for M in (A, B, U))
    At, Bt, Ut = (_dual_rows(jacobi_dual, M) for M in (A, B, U))

    def quad_product(Am, Bm, Um) -> complex:
        prod = 1 + 0j
        for k in range(4):
            prod *= _theta(rm, Am[k], Um[k], Bm[k], s)
        return prod

    lhs = [quad_product(A, B, U), -quad_product(Aw, Bw, Uw)]
    name = f"weierstrass_{kind}"
    if kind == "onedim":
        coef = unit_phase(-float(A[0][0]))
        prod = 1 + 0j
        for k in range(4):
            prod *= _theta(rm, At[k] + 0.5, Ut[k], Bt[k] + 0.5, s)
        return _finish(name, lhs, [coef * prod], inst.digest)

    reps = _coset_array(g, 2)
    atsum = At.sum(axis=0)
    weight = 2.0 ** (-g)
    rhs = []
    for p in reps:
        if not p.any():
            continue  # <0, q> is always even: zero coefficient for every q
        per_k = [theta_values(rm, At[k] + p / 2, Ut[k], [Bt[k] + q / 2 for q in reps], s)[0] for k in range(4)]
        for qi, q in enumerate(reps):
            coef = 1.0 - unit_phase(-float(np.dot(p, q)) / 2)
            if coef == 0:
                continue
            phase = unit_phase(-float(np.dot(atsum, q)) / 2)
            rhs.append(weight * coef * phase * per_k[0][qi] * per_k[1][qi] * per_k[2][qi] * per_k[3][qi])
    return _finish(name, lhs, rhs, inst.digest)


# ------------------------------------ odd half-period product structure --


def lemma_decomposition_residual(
    hp: HalfPeriod,
    w1,
    w2,
    tau: RiemannMatrix,
    settings: EvalSettings = DEFAULT_SETTINGS,
    digest: str = "adhoc",
) -> ResidualReport:
    """Decomposition of an odd theta product over doubled variables:

      theta(w1+w2) theta(w1-w2)
        = e^{4 pi i <a,b>} sum_p e^{2 pi i <p,b>}
          theta_[a+p/2; 0](2 w1 | 2 tau) theta_[p/2; 0](2 w2 | 2 tau)

    The product is antisymmetric under w1 <-> w2 (odd theta); the swap is
    re-evaluated and a violation beyond 1e-10 relative raises.
    """
    if not isinstance(hp, HalfPeriod):
        hp = HalfPeriod(hp.a, hp.b)
    if hp.parity_flag != 1:
        raise ValueError("the decomposition requires an odd half-period")
    p1 = (w1 if isinstance(w1, ThetaPoint) else ThetaPoint(np.asarray(w1))).u
    p2 = (w2 if isinstance(w2, ThetaPoint) else ThetaPoint(np.asarray(w2))).u
    a, b = hp.a, hp.b
    g = hp.g
    rm2 = tau.scaled(2)
    zero = np.zeros(g)

    def odd_product(x, y) -> complex:
        return _theta(tau, a, x + y, b, settings) * _theta(tau, a, x - y, b, settings)

    f12 = odd_product(p1, p2)
    f21 = odd_product(p2, p1)
    dev = abs(f12 + f21) / max(1.0, abs(f12), abs(f21))
    if dev > 1e-10:
        raise ArithmeticError(f"odd product failed to negate under swap (deviation {dev:.3e})")

    sign = unit_phase(2.0 * float(np.dot(a, b)))  # e^{4 pi i <a,b>} = -1 for odd
    rhs = []
    for p in _coset_array(g, 2):
        coef = sign * unit_phase(float(np.dot(p, b)))
        t1 = _theta(rm2, a + p / 2, 2 * p1, zero, settings)
        t2 = _theta(rm2, p / 2, 2 * p2, zero, settings)
        rhs.append(coef * t1 * t2)
    return _finish("lemma_decomposition", [f12], rhs, digest)


def weierstrass_pfaffian_residual(
    g: int,
    hp: HalfPeriod,
    w,
    tau: RiemannMatrix,
    settings: EvalSettings = EvalSettings(epsilon=1e-12),
    digest: str = "adhoc",
) -> ResidualReport:
    """Pfaffian identity of order 2^g + 2 for an odd theta function:

      Pf || theta(w_i + w_j) theta(w_i - w_j) ||_{i,j=1..2^g+2} = 0.

    The matrix is built from its upper triangle (skew by construction) and
    the residual is |Pf| over the largest perfect-matching product.
    """
    if not isinstance(hp, HalfPeriod):
        hp = HalfPeriod(hp.a, hp.b)
    if hp.parity_flag != 1:
        raise ValueError("the Pfaffian identity requires an odd half-period")
    n = 2**g + 2
    pts = [(p if isinstance(p, ThetaPoint) else ThetaPoint(np.asarray(p))).u for p in w]
    if len(pts) != n:
        raise ValueError(f"expected {n} points for g={g}, got {len(pts)}")
    if tau.g != g:
        raise ValueError("tau dimension disagrees with g")
    a, b = hp.a, hp.b
    A = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for j in range(i + 1, n):
            A[i, j] = _theta(tau, a, pts[i] + pts[j], b, settings) * _theta(
                tau, a, pts[i] - pts[j], b, settings
            )
    skew = SkewMatrix.from_upper(A)
    pf = pfaffian(skew)
    scale = 0.0
    for matching in perfect_matchings(range(n)):
        prod = 1.0
        for i, j in matching:
            prod *= abs(A[i, j])
        scale = max(scale, prod)
    residual = abs(pf) / max(1.0, scale)
    return ResidualReport("weierstrass_pfaffian", pf, 0j, scale, residual, digest)


# ------------------------------------------------------------ equivalence --


def equivalence_suite(inst: IdentityInstance) -> list[ResidualReport]:
    """Both Jacobi forms, the Riemann identity, and the naive Weierstrass
    relation on one shared instance: the numerical witness that the four
    families express the same content."""
    _expect(inst, 4, 4)
    return [
        jacobi_residual("first", inst),
        jacobi_residual("second", inst),
        riemann_residual("ww", inst),
        naive_weierstrass_residual("general", inst),
    ]


# --------------------------------------------------------------- registry --


@dataclass(frozen=True)
class IdentityDef:
    """Arity, cost model, and dispatch for one named identity."""

    name: str
    n_points: Callable[[int], int]
    n_chars: int
    theta_factors: int
    term_count: Callable[[int, dict], int]
    run: Callable[[IdentityInstance], list[ResidualReport]]
    supports_g: Callable[[int], bool] = lambda g: True
    draw_extra: Callable[[np.random.Generator], dict] | None = None
    char_mode: str = "any"  # "any" or "odd_half_period"
    fixed_epsilon: float | None = None


def _draw_n(rng: np.random.Generator) -> dict:
    return {"n": int(rng.integers(1, 5))}


def _draw_n1n2(rng: np.random.Generator) -> dict:
    return {"n1": int(rng.integers(1, 4)), "n2": int(rng.integers(1, 4))}


def _single(fn: Callable[[IdentityInstance], ResidualReport]) -> Callable[[IdentityInstance], list[ResidualReport]]:
    return lambda inst: [fn(inst)]


def _run_lemma(inst: IdentityInstance) -> list[ResidualReport]:
    hp = HalfPeriod(inst.chars[0].a, inst.chars[0].b)
    return [
        lemma_decomposition_residual(
            hp, inst.points[0], inst.points[1], inst.tau, inst.eval, digest=inst.digest
        )
    ]


def _run_pfaffian(inst: IdentityInstance) -> list[ResidualReport]:
    hp = HalfPeriod(inst.chars[0].a, inst.chars[0].b)
    return [
        weierstrass_pfaffian_residual(
            inst.g, hp, inst.points, inst.tau, inst.eval, digest=inst.digest
        )
    ]


def _defs() -> dict[str, IdentityDef]:
    two = lambda g: 2
    four = lambda g: 4
    defs = [
        IdentityDef(
            "linear_sr1a",
            lambda g: 1,
            1,
            1,
            lambda g, ex: 1 + int(ex.get("n", 1)) ** g,
            _single(lambda inst: linear_identity_residual("sr1a", inst)),
            draw_extra=_draw_n,
        ),
        IdentityDef(
            "linear_sr1b",
            lambda g: 1,
            1,
            1,
            lambda g, ex: 1 + int(ex.get("n", 1)) ** g,
            _single(lambda inst: linear_identity_residual("sr1b", inst)),
            draw_extra=_draw_n,
        ),
        IdentityDef(
            "schroter",
            two,
            2,
            2,
            lambda g, ex: 1 + (int(ex.get("n1", 1)) + int(ex.get("n2", 1))) ** g,
            _single(schroter_residual),
            draw_extra=_draw_n1n2,
        ),
        IdentityDef(
            "binary_forward", two, 2, 2, lambda g, ex: 1 + 2**g,
            _single(lambda inst: binary_residual("forward", inst)),
        ),
        IdentityDef(
            "binary_inverse", two, 2, 2, lambda g, ex: 1 + 2**g,
            _single(lambda inst: binary_residual("inverse", inst)),
        ),
        IdentityDef(
            "binary_shifted", two, 2, 2, lambda g, ex: 1 + 2**g,
            _single(lambda inst: binary_residual("shifted", inst)),
        ),
        IdentityDef(
            "jacobi_first", four, 4, 4, lambda g, ex: 2 ** (g + 1),
            _single(lambda inst: jacobi_residual("first", inst)),
        ),
        IdentityDef(
            "jacobi_second", four, 4, 4, lambda g, ex: 2 ** (g + 1),
            _single(lambda inst: jacobi_residual("second", inst)),
        ),
        IdentityDef(
            "jacobi_tilde_first", four, 4, 4, lambda g, ex: 2 ** (g + 1),
            _single(lambda inst: jacobi_residual("tilde_first", inst)),
        ),
        IdentityDef(
            "jacobi_tilde_second", four, 4, 4, lambda g, ex: 2 ** (g + 1),
            _single(lambda inst: jacobi_residual("tilde_second", inst)),
        ),
        IdentityDef(
            "riemann_ww", four, 4, 4, lambda g, ex: 1 + 4**g,
            _single(lambda inst: riemann_residual("ww", inst)),
        ),
        IdentityDef(
            "riemann_ww_inverse", four, 4, 4, lambda g, ex: 1 + 4**g,
            _single(lambda inst: riemann_residual("ww_inverse", inst)),
        ),
        IdentityDef(
            "riemann_tilde", four, 4, 4, lambda g, ex: 1 + 4**g,
            _single(lambda inst: riemann_residual("tilde", inst)),
        ),
        IdentityDef(
            "riemann_tilde_inverse", four, 4, 4, lambda g, ex: 1 + 4**g,
            _single(lambda inst: riemann_residual("tilde_inverse", inst)),
        ),
        IdentityDef(
            "weierstrass_general", four, 4, 4, lambda g, ex: 2 + 4**g,
            _single(lambda inst: naive_weierstrass_residual("general", inst)),
        ),
        IdentityDef(
            "weierstrass_onedim", four, 4, 4, lambda g, ex: 3,
            _single(lambda inst: naive_weierstrass_residual("onedim", inst)),
            supports_g=lambda g: g == 1,
        ),
        IdentityDef(
            "lemma_decomposition", two, 1, 2, lambda g, ex: 1 + 2**g,
            _run_lemma,
            char_mode="odd_half_period",
        ),
        IdentityDef(
            "weierstrass_pfaffian",
            lambda g: 2**g + 2,
            1,
            2,
            lambda g, ex: 1 + 2**g,
            _run_pfaffian,
            char_mode="odd_half_period",
            fixed_epsilon=1e-12,
        ),
        IdentityDef(
            "equivalence", four, 4, 4, lambda g, ex: 1 + 4**g,
            equivalence_suite,
        ),
    ]
    return {d.name: d for d in defs}


REGISTRY: dict[str, IdentityDef] = _defs()
IDENTITY_NAMES: tuple[str, ...] = tuple(REGISTRY)


def budget_epsilon(name: str, g: int, extra: dict, target: float = DEFAULT_TARGET) -> float:
    """Per-evaluation theta tolerance: target / (8 * factors * terms)."""
    d = REGISTRY[name]
    if d.fixed_epsilon is not None:
        return d.fixed_epsilon
    eps = target / (8.0 * d.theta_factors * d.term_count(g, extra))
    return min(eps, 1e-3)


def evaluate(name: str, inst: IdentityInstance) -> list[ResidualReport]:
    """Dispatch one instance to its identity family."""
    if name not in REGISTRY:
        raise ValueError(f"unknown identity {name!r}; valid names: {', '.join(IDENTITY_NAMES)}")
    return REGISTRY[name].run(inst)
