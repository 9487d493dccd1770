"""Two linear involutions on quadruples of vectors.

The Whittaker-Watson primes x -> x' and the Jacobi tildes x -> x~ act
uniformly on arguments and on characteristics.  Both are exact on
dyadic-rational inputs (all arithmetic is sums and halvings).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Quadruple", "jacobi_dual", "ww_dual", "ww_to_jacobi_sign_relation"]


@dataclass(frozen=True, eq=False)
class Quadruple:
    """Four vectors of equal dimension (real or complex, caller's choice)."""

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    x4: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(getattr(self, f"x{k}")) for k in (1, 2, 3, 4)]
        if len({a.shape for a in arrs}) != 1:
            raise ValueError("quadruple entries must share one dimension")
        for k, a in zip((1, 2, 3, 4), arrs):
            object.__setattr__(self, f"x{k}", a)

    def rows(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.x1, self.x2, self.x3, self.x4


def ww_dual(q: Quadruple) -> Quadruple:
    """Whittaker-Watson duals: x'_k = (x1+x2+x3+x4)/2 - x_k.

    An involution that preserves the sum x1+x2+x3+x4.
    """
    s = (q.x1 + q.x2 + q.x3 + q.x4) / 2
    return Quadruple(s - q.x1, s - q.x2, s - q.x3, s - q.x4)


def jacobi_dual(q: Quadruple) -> Quadruple:
    """Jacobi duals:

        x~1 = (x1+x2+x3+x4)/2        x~2 = (x1+x2-x3-x4)/2
        x~3 = (x1-x2+x3-x4)/2        x~4 = (x1-x2-x3+x4)/2

    also an involution.
    """
    s = (q.x1 + q.x2 + q.x3 + q.x4) / 2
    return Quadruple(s, s - (q.x3 + q.x4), s - (q.x2 + q.x4), s - (q.x2 + q.x3))


def ww_to_jacobi_sign_relation(q: Quadruple) -> Quadruple:
    """Whittaker-Watson dual of (-x1, x2, x3, x4), which equals
    (x~1, -x~2, -x~3, -x~4); both routes are computed and cross-checked."""
    out = ww_dual(Quadruple(-q.x1, q.x2, q.x3, q.x4))
    t = jacobi_dual(q)
    for got, want in zip(out.rows(), (t.x1, -t.x2, -t.x3, -t.x4)):
        if not np.allclose(got, want, rtol=1e-12, atol=1e-12):
            raise ArithmeticError("prime/tilde sign relation violated")
    return out
