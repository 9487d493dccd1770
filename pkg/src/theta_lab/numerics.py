"""Numeric substrate: bilinear products, ellipsoidal lattice enumeration,
compensated summation, unit phases, and Pfaffians of skew matrices."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

__all__ = [
    "LatticeShell",
    "SkewMatrix",
    "compensated_sum",
    "enumerate_lattice",
    "perfect_matchings",
    "pfaffian",
    "scalar_product",
    "unit_phase",
]


def scalar_product(x, y) -> complex:
    """Bilinear pairing <x, y> = sum_j x_j y_j (no complex conjugation)."""
    xv = np.atleast_1d(np.asarray(x))
    yv = np.atleast_1d(np.asarray(y))
    if xv.ndim != 1 or yv.ndim != 1 or xv.shape != yv.shape:
        raise ValueError(f"dimension mismatch: {xv.shape} vs {yv.shape}")
    return complex(np.sum(xv * yv))


def unit_phase(t: float) -> complex:
    """e^{2 pi i t}, snapped to an exact power of i whenever 4t is an integer.

    Snapping keeps the +-1 and +-i phases that occur for half-period
    characteristics free of pi-rounding noise.
    """
    q = 4.0 * float(t)
    m = round(q)
    if abs(q - m) <= 1e-12:
        return 1j ** (int(m) % 4)
    return cmath.exp(2j * math.pi * float(t))


def compensated_sum(terms) -> complex:
    """Error-compensated sum of complex terms.

    Real and imaginary parts are accumulated with math.fsum (Shewchuk exact
    partials), so the result is the correctly rounded sum regardless of
    term ordering; in particular it is a deterministic function of the input.
    """
    if not isinstance(terms, (list, tuple, np.ndarray)):
        terms = list(terms)
    arr = np.asarray(terms, dtype=complex).ravel()
    if arr.size == 0:
        return 0j
    return complex(math.fsum(arr.real.tolist()), math.fsum(arr.imag.tolist()))


@dataclass(frozen=True, eq=False)
class LatticeShell:
    """Integer points inside an ellipsoid, in canonical order.

    Points k satisfy <Y(k+center), k+center> <= radius^2 and are sorted by
    ascending quadratic-form value with lexicographic tie-break.
    """

    points: np.ndarray  # (n_points, g) int64
    radius: float


def _cholesky_upper(Y: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(Y).T
    except np.linalg.LinAlgError as exc:
        raise ValueError("matrix is not positive definite") from exc


def _enumerate_core(center: np.ndarray, upper: np.ndarray, radius: float) -> LatticeShell:
    """Recursive coordinate bounding on the factor U (Y = U^T U).

    Each level confines one coordinate to the exact interval allowed by the
    remaining budget, so no bounding box wider than necessary is scanned.
    The innermost coordinate is vectorised.
    """
    g = center.shape[0]
    r2 = radius * radius
    slack = 1e-9 * (1.0 + radius)
    blocks: list[np.ndarray] = []
    qblocks: list[np.ndarray] = []
    chosen = np.zeros(g, dtype=np.int64)

    def descend(i: int, used: float, lin: np.ndarray) -> None:
        t = math.sqrt(max(0.0, r2 - used)) + slack
        uii = upper[i, i]
        lo = math.ceil((-t - lin[i]) / uii - center[i])
        hi = math.floor((t - lin[i]) / uii - center[i])
        if hi < lo:
            return
        if i == 0:
            k0 = np.arange(lo, hi + 1, dtype=np.int64)
            row = uii * (k0 + center[0]) + lin[0]
            q = used + row * row
            keep = q <= r2
            if keep.any():
                pts = np.empty((int(keep.sum()), g), dtype=np.int64)
                pts[:, 0] = k0[keep]
                pts[:, 1:] = chosen[1:]
                blocks.append(pts)
                qblocks.append(q[keep])
            return
        for k in range(lo, hi + 1):
            v = k + center[i]
            row = uii * v + lin[i]
            used2 = used + row * row
            if used2 > r2 + slack:
                continue
            chosen[i] = k
            descend(i - 1, used2, lin + upper[:, i] * v)

    descend(g - 1, 0.0, np.zeros(g))
    if not blocks:
        return LatticeShell(np.zeros((0, g), dtype=np.int64), float(radius))
    pts = np.vstack(blocks)
    qs = np.concatenate(qblocks)
    order = np.lexsort(tuple(pts[:, j] for j in range(g - 1, -1, -1)) + (qs,))
    return LatticeShell(pts[order], float(radius))


def enumerate_lattice(center, Y, radius) -> LatticeShell:
    """All k in Z^g with <Y(k+center), k+center> <= radius^2.

    Y must be real symmetric positive definite (a failed Cholesky-style
    factorisation raises ValueError).
    """
    c = np.atleast_1d(np.asarray(center, dtype=float))
    Ym = np.asarray(Y, dtype=float)
    if Ym.ndim != 2 or Ym.shape[0] != Ym.shape[1] or Ym.shape[0] != c.shape[0]:
        raise ValueError("center and matrix dimensions disagree")
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return _enumerate_core(c, _cholesky_upper(Ym), float(radius))


@dataclass(frozen=True, eq=False)
class SkewMatrix:
    """Skew-symmetric matrix stored via its strict upper triangle, so that
    entries[j, i] == -entries[i, j] holds exactly (diagonal is zero)."""

    entries: np.ndarray

    @classmethod
    def from_upper(cls, upper) -> "SkewMatrix":
        A = np.asarray(upper, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("expected a square matrix")
        ut = np.triu(A, 1)
        return cls(ut - ut.T)

    @classmethod
    def from_matrix(cls, m, tol: float = 1e-12) -> "SkewMatrix":
        A = np.asarray(m, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("expected a square matrix")
        if A.size:
            dev = float(np.abs(A + A.T).max())
            if dev > tol:
                raise ValueError(f"matrix is not skew-symmetric (max |A+A^T| = {dev:.3e})")
        return cls.from_upper(A)

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def pfaffian(A) -> complex:
    """Pfaffian of an even-dimensional skew-symmetric matrix.

    Parlett-Reid style skew tridiagonalisation with partial pivoting, O(n^3);
    every pivot interchange contributes an exact factor -1.  Satisfies
    pfaffian(A)^2 == det(A).
    """
    if isinstance(A, SkewMatrix):
        M = A.entries.astype(complex, copy=True)
    else:
        M = SkewMatrix.from_matrix(A).entries.astype(complex, copy=True)
    n = M.shape[0]
    if n % 2:
        raise ValueError("Pfaffian requires an even dimension")
    if n == 0:
        return 1 + 0j
    sign = 1
    val = 1 + 0j
    for k in range(0, n - 2, 2):
        kp = k + 1 + int(np.abs(M[k + 1 :, k]).argmax())
        if kp != k + 1:
            M[[k + 1, kp], :] = M[[kp, k + 1], :]
            M[:, [k + 1, kp]] = M[:, [kp, k + 1]]
            sign = -sign
        piv = M[k, k + 1]
        if piv == 0:
            return 0j
        val *= piv
        tau = M[k, k + 2 :] / piv
        col = M[k + 2 :, k + 1]
        M[k + 2 :, k + 2 :] += np.outer(tau, col) - np.outer(col, tau)
    val *= M[n - 2, n - 1]
    return sign * val


def perfect_matchings(items: Iterable[int]) -> Iterator[list[tuple[int, int]]]:
    """Yield every partition of the items into unordered pairs."""
    pool = list(items)
    if len(pool) % 2:
        raise ValueError("perfect matchings need an even number of items")
    if not pool:
        yield []
        return
    first, rest = pool[0], pool[1:]
    for idx, second in enumerate(rest):
        for sub in perfect_matchings(rest[:idx] + rest[idx + 1 :]):
            yield [(first, second)] + sub
