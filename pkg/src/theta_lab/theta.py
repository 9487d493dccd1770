"""Theta functions with characteristics.

Riemann matrices (Siegel upper half-space), truncated lattice-sum evaluation
of theta_[a;b](u | tau), characteristic transforms, parity, and half-period
enumeration.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import product as _cartesian

import numpy as np

from .numerics import LatticeShell, _enumerate_core, compensated_sum, unit_phase

__all__ = [
    "Characteristic",
    "EvalSettings",
    "HalfPeriod",
    "RiemannMatrix",
    "ThetaPoint",
    "DEFAULT_SETTINGS",
    "enumerate_half_periods",
    "parity",
    "quasi_shift",
    "reduce_characteristic",
    "reflect",
    "shift_characteristic",
    "theta_eval",
    "theta_eval_info",
    "theta_values",
    "truncation_radius",
]


def _is_pd(M: np.ndarray) -> bool:
    try:
        np.linalg.cholesky(M)
        return True
    except np.linalg.LinAlgError:
        return False


def _lambda_lower_bound(Y: np.ndarray, iters: int = 60) -> float:
    """Lower bound on the smallest eigenvalue of a PD matrix by bisecting the
    Cholesky-success predicate of Y - lambda*I (no eigensolver involved)."""
    hi = float(Y.diagonal().min())  # lambda_min <= min diagonal entry
    lo = 0.0
    eye = np.eye(Y.shape[0])
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if _is_pd(Y - mid * eye):
            lo = mid
        else:
            hi = mid
    if lo <= 0.0:
        raise ValueError("Im(tau) is numerically singular")
    return lo




class RiemannMatrix:
    """Symmetric g x g complex matrix tau with positive-definite Im(tau).

    The stored matrix mirrors the upper triangle, so tau == tau.T exactly.
    Y = Im(tau), its Cholesky factor, and a lower bound on the smallest
    eigenvalue of Y are cached at construction and never mutated.
    """

    __slots__ = ("tau", "g", "Y", "lambda_min", "lambda_max_bound", "_chol", "_shells")

    def __init__(self, tau, *, _lambda_min: float | None = None, _lambda_max: float | None = None):
        T = np.asarray(tau, dtype=complex)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] < 1:
            raise ValueError("tau must be a square matrix of dimension >= 1")
        if not np.isfinite(T).all():
            raise ValueError("tau entries must be finite")
        dev = float(np.abs(T - T.T).max())
        if dev > 1e-12 * max(1.0, float(np.abs(T).max())):
            raise ValueError(f"tau must be symmetric (max asymmetry {dev:.3e})")
        T = np.triu(T) + np.triu(T, 1).T
        self.tau = T
        self.g = T.shape[0]
        self.Y = np.ascontiguousarray(T.imag)
        try:
            self._chol = np.linalg.cholesky(self.Y).T
        except np.linalg.LinAlgError as exc:
            raise ValueError("Im(tau) must be positive definite") from exc
        self.lambda_min = float(_lambda_min) if _lambda_min is not None else _lambda_lower_bound(self.Y)
        self.lambda_max_bound = (
            float(_lambda_max) if _lambda_max is not None else _lambda_upper_bound(self.Y)
        )
        self._shells: dict[tuple[bytes, float], LatticeShell] = {}

    def scaled(self, factor: float) -> "RiemannMatrix":
        """factor * tau; the eigenvalue bounds scale along."""
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return RiemannMatrix(
            self.tau * factor,
            _lambda_min=self.lambda_min * factor,
            _lambda_max=self.lambda_max_bound * factor,
        )

    def shell(self, center: np.ndarray, radius: float) -> LatticeShell:
        """Memoised lattice enumeration for <Y(k+center), k+center> <= radius^2."""
        key = (center.tobytes(), float(radius))
        got = self._shells.get(key)
        if got is None:
            got = _enumerate_core(center, self._chol, radius)
            self._shells[key] = got
        return got

    def __repr__(self) -> str:  # pragma: no cover
        return f"RiemannMatrix(g={self.g}, lambda_min={self.lambda_min:.4g})"


def _real_vector(x, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"{name} must be a vector")
    if not np.isfinite(v).all():
        raise ValueError(f"{name} entries must be finite")
    return v


@dataclass(frozen=True, eq=False)
class Characteristic:
    """Characteristic pair [a; b] of real g-vectors (no range restriction)."""

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = _real_vector(self.a, "a")
        b = _real_vector(self.b, "b")
        if a.shape != b.shape:
            raise ValueError("a and b must have equal dimension")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def g(self) -> int:
        return self.a.shape[0]


class HalfPeriod(Characteristic):
    """Characteristic with every entry 0 or 1/2."""

    def __post_init__(self):
        super().__post_init__()
        if not (np.isin(self.a, (0.0, 0.5)).all() and np.isin(self.b, (0.0, 0.5)).all()):
            raise ValueError("half-period entries must be exactly 0 or 1/2")

    @property
    def parity_flag(self) -> int:
        """(4<a,b>) mod 2: 0 for even, 1 for odd."""
        return int(round(float(np.dot(2.0 * self.a, 2.0 * self.b)))) % 2


def parity(hp) -> str:
    """'even' iff 4<a,b> = 0 (mod 2); input must be a half-period."""
    if not isinstance(hp, HalfPeriod):
        hp = HalfPeriod(hp.a, hp.b)  # raises for non-half-period entries
    return "odd" if hp.parity_flag else "even"


def enumerate_half_periods(g: int) -> tuple[list[HalfPeriod], list[HalfPeriod]]:
    """All 4^g half-periods, partitioned as (even, odd).

    Counts are 2^{g-1}(2^g+1) even and 2^{g-1}(2^g-1) odd.
    """
    if g < 1:
        raise ValueError("g must be >= 1")
    even: list[HalfPeriod] = []
    odd: list[HalfPeriod] = []
    for bits in _cartesian((0.0, 0.5), repeat=2 * g):
        hp = HalfPeriod(np.array(bits[:g]), np.array(bits[g:]))
        (odd if hp.parity_flag else even).append(hp)
    return even, odd


@dataclass(frozen=True, eq=False)
class ThetaPoint:
    """Argument u in C^g."""

    u: np.ndarray

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=complex))
        if u.ndim != 1:
            raise ValueError("u must be a vector")
        if not np.isfinite(u).all():
            raise ValueError("u entries must be finite")
        object.__setattr__(self, "u", u)

    @property
    def g(self) -> int:
        return self.u.shape[0]


@dataclass(frozen=True)
class EvalSettings:
    """Evaluation knobs: absolute tail tolerance and extra radius padding."""

    epsilon: float = 1e-12
    radius_margin: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.epsilon <= 1e-3):
            raise ValueError("epsilon must lie in (0, 1e-3]")
        if self.radius_margin < 0.0:
            raise ValueError("radius_margin must be >= 0")


DEFAULT_SETTINGS = EvalSettings()


def truncation_radius(g: int, lambda_min: float, epsilon: float, im_norm: float, center_offset: float) -> float:
    """Conservative truncation radius for the theta lattice sum.

    Gaussian tail bound padded by a per-shell lattice-count estimate:
        R = rho + sqrt(max(0, (g/2) ln(4g) + ln(1/eps) + g ln(2 + 2/sqrt(lam))) / (pi lam)),
    followed by fixed-point passes that fold the oscillatory growth
    exp(2 pi |Im u| R) into the tolerance.  The update is a monotone
    contraction (rate <= 1/2 near its fixed point), and it is iterated to
    convergence: stopping after a fixed couple of passes leaves the bound
    dishonest when the linear growth dominates the quadratic decay, e.g. for
    arguments n*u against moduli n^2 tau.  Deliberately loose; soundness is
    enforced by the radius-doubling checks in the test-suite.
    """
    pad = 0.5 * g * math.log(4.0 * g) + g * math.log(2.0 + 2.0 / math.sqrt(lambda_min))
    log_inv_eps = -math.log(epsilon)

    def r_of(li: float) -> float:
        return center_offset + math.sqrt(max(0.0, pad + li) / (math.pi * lambda_min))

    r = r_of(log_inv_eps)
    if im_norm > 0.0:
        for _ in range(64):
            step = r_of(log_inv_eps + 2.0 * math.pi * im_norm * r)
            if step - r <= 1e-9 * max(1.0, r):
                r = step
                break
            r = step
    return r


def theta_values(
    rm: RiemannMatrix,
    a,
    u,
    b_list,
    settings: EvalSettings = DEFAULT_SETTINGS,
) -> tuple[list[complex], float, int]:
    """Evaluate theta_[a; b](u | tau) for one (a, u) and a batch of real b.

    The lattice shell and quadratic part depend only on (tau, a, u), so the
    whole batch shares them; each b contributes one linear phase pass.
    Returns (values, radius, number_of_lattice_points).
    """
    av = _real_vector(a, "a")
    uv = np.atleast_1d(np.asarray(u, dtype=complex))
    if av.shape[0] != rm.g or uv.shape[0] != rm.g:
        raise ValueError(f"dimension mismatch with g={rm.g}")
    # Reduce Im(u) by integer tau-periods first: theta(u) = pref * theta(u0)
    # with u0 = u + tau n and pref = e^{pi i <n, 2u + 2b + tau n>} (exact
    # quasi-periodicity), which keeps the lattice sum short for arguments far
    # from the real axis.  The tail budget is rescaled by |pref| so the
    # absolute-epsilon contract still refers to the requested u.
    nvec = -np.round(np.linalg.solve(rm.Y, uv.imag))
    if nvec.any():
        u_eval = uv + rm.tau.dot(nvec)
        base = cmath.exp(1j * math.pi * complex(np.dot(nvec, 2.0 * uv + rm.tau.dot(nvec))))
    else:
        u_eval = uv
        base = 1.0 + 0.0j
    y = u_eval.imag
    im_norm = float(math.sqrt(float((y * y).sum())))
    epsilon = settings.epsilon / max(abs(base), 1e-300)
    wrapped = av - np.round(av)  # integer translations of the center are free
    rho = math.sqrt(float((wrapped * wrapped).sum()))
    ball = truncation_radius(rm.g, rm.lambda_min, epsilon, im_norm, rho)
    # The tail bound lives on the Euclidean ball |k+a| <= ball; the summation
    # domain is the circumscribing ellipsoid <Y(k+a), k+a> <= radius^2.
    radius = ball * math.sqrt(rm.lambda_max_bound) + settings.radius_margin
    shell = rm.shell(av, radius)
    K = shell.points[::-1]  # descending quadratic form: smallest terms first
    V = K + av
    tau_v = (V[:, None, :] * rm.tau[None, :, :]).sum(axis=2)
    quad = (tau_v * V).sum(axis=1)
    values: list[complex] = []
    for b in b_list:
        bv = _real_vector(b, "b")
        w = u_eval + bv
        lin = (V * w[None, :]).sum(axis=1)
        core = compensated_sum(np.exp(1j * math.pi * quad + 2j * math.pi * lin))
        if nvec.any():
            core *= base * unit_phase(float(np.dot(nvec, bv)))
        values.append(core)
    return values, radius, int(K.shape[0])


def theta_eval(u, tau: RiemannMatrix, ch: Characteristic, settings: EvalSettings = DEFAULT_SETTINGS) -> complex:
    """theta_[a;b](u | tau) = sum_{k in Z^g} exp{pi i <tau(k+a), k+a> + 2 pi i <k+a, u+b>},

    truncated to the ellipsoid <Y(k+a), k+a> <= R^2 with R chosen so the
    discarded tail stays below settings.epsilon in absolute value.
    """
    value, _, _ = theta_eval_info(u, tau, ch, settings)
    return value


def theta_eval_info(
    u, tau: RiemannMatrix, ch: Characteristic, settings: EvalSettings = DEFAULT_SETTINGS
) -> tuple[complex, float, int]:
    """Like theta_eval, additionally reporting (radius, lattice point count)."""
    point = u.u if isinstance(u, ThetaPoint) else u
    values, radius, nterms = theta_values(tau, ch.a, point, [ch.b], settings)
    return values[0], radius, nterms


def _int_vector(x, g: int, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x))
    if v.shape != (g,):
        raise ValueError(f"{name} must be an integer vector of dimension {g}")
    r = np.round(v)
    if not np.all(np.abs(v - r) == 0):
        raise ValueError(f"{name} must have integer entries")
    return r.astype(np.int64)


def shift_characteristic(ch: Characteristic, m, n) -> tuple[Characteristic, complex]:
    """[a; b] -> [a+m; b+n] for integer m, n, with factor e^{2 pi i <a, n>}.

    Theta at the shifted characteristic equals factor times theta at the
    original; pure bookkeeping, nothing is evaluated.
    """
    mv = _int_vector(m, ch.g, "m")
    nv = _int_vector(n, ch.g, "n")
    factor = unit_phase(float(np.dot(ch.a, nv)))
    return Characteristic(ch.a + mv, ch.b + nv), factor


def reflect(ch: Characteristic, u) -> tuple[Characteristic, ThetaPoint]:
    """[a; b], u -> [-a; -b], -u; theta is invariant under this involution."""
    point = u if isinstance(u, ThetaPoint) else ThetaPoint(np.asarray(u))
    return Characteristic(-ch.a, -ch.b), ThetaPoint(-point.u)


def quasi_shift(
    ch: Characteristic, u, tau: RiemannMatrix, a_prime, b_prime
) -> tuple[Characteristic, ThetaPoint, complex]:
    """Shift of the argument by tau*a' + b' traded for a characteristic shift:

        theta_[a;b](u + tau a' + b') = prefactor * theta_[a+a'; b+b'](u)

    with prefactor e^{-pi i <tau a', a'> - 2 pi i <a', u+b+b'>}.
    """
    ap = _real_vector(a_prime, "a_prime")
    bp = _real_vector(b_prime, "b_prime")
    point = u if isinstance(u, ThetaPoint) else ThetaPoint(np.asarray(u))
    if ap.shape[0] != ch.g or bp.shape[0] != ch.g or point.g != ch.g:
        raise ValueError("dimension mismatch")
    z = -1j * math.pi * complex(np.dot(tau.tau.dot(ap), ap)) - 2j * math.pi * complex(
        np.dot(ap, point.u + ch.b + bp)
    )
    return Characteristic(ch.a + ap, ch.b + bp), point, cmath.exp(z)


def reduce_characteristic(ch: Characteristic) -> tuple[Characteristic, complex]:
    """Reduce both entries of [a; b] to [0, 1).

    Returns the reduced characteristic and the phase with
    theta_original = factor * theta_reduced.
    """
    m = np.floor(ch.a)
    n = np.floor(ch.b)
    reduced = Characteristic(ch.a - m, ch.b - n)
    factor = unit_phase(float(np.dot(reduced.a, n)))
    return reduced, factor
