"""Regularized incomplete beta function and its (s, a) parameterization.

The augmentation policy and the epoch schedule both shape their inputs with
I_x(alpha, beta), the CDF of the Beta distribution.  Shape parameters enter
as a concentration ``s`` and a skew ``a`` with alpha = s*(1-a) and
beta = s*a; the library default (s=2, a=0.5) gives alpha = beta = 1, for
which I_x is the identity on [0, 1] and every downstream formula can be
checked by hand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Parameters this far outside any plausible policy regime are rejected
# outright instead of silently losing precision.
_SHAPE_LIMIT = 1e4

_CF_EPS = 1e-16
_CF_TINY = 1e-300
_CF_MAX_ITER = 500


@dataclass(frozen=True)
class IbfParams:
    """Concentration/skew pair (s, a) with derived Beta shapes.

    s > 0 and 0 < a < 1, so alpha = s*(1-a) and beta = s*a are positive
    and alpha + beta == s up to round-off.
    """

    s: float = 2.0
    a: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.s) and self.s > 0.0):
            raise ValueError(f"s must be a positive real, got {self.s}")
        if not (math.isfinite(self.a) and 0.0 < self.a < 1.0):
            raise ValueError(f"a must lie strictly inside (0, 1), got {self.a}")
        if self.alpha > _SHAPE_LIMIT or self.beta > _SHAPE_LIMIT:
            raise ValueError(
                f"shape parameters alpha={self.alpha} beta={self.beta} exceed "
                f"the supported limit of {_SHAPE_LIMIT:g}"
            )

    @property
    def alpha(self) -> float:
        return self.s * (1.0 - self.a)

    @property
    def beta(self) -> float:
        return self.s * self.a


DEFAULT_IBF = IbfParams()


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for I_x(a, b), evaluated with modified Lentz.

    Converges fast for x < (a+1)/(a+b+2); the caller flips to the
    complementary form otherwise.
    """
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _CF_TINY:
        d = _CF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _CF_TINY:
            d = _CF_TINY
        c = 1.0 + aa / c
        if abs(c) < _CF_TINY:
            c = _CF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_EPS:
            return h
    raise ArithmeticError(
        f"incomplete beta continued fraction did not converge for "
        f"a={a} b={b} x={x}"
    )


def betainc_reg(x: float, alpha: float, beta: float) -> float:
    """I_x(alpha, beta) for raw shape parameters.

    Symmetry switch at x = (alpha+1)/(alpha+beta+2) keeps the continued
    fraction in its fast-converging region; alpha = beta = 1 short-circuits
    to x, which is exact.
    """
    if not (math.isfinite(alpha) and alpha > 0.0) or not (math.isfinite(beta) and beta > 0.0):
        raise ValueError(f"shape parameters must be positive, got alpha={alpha} beta={beta}")
    if alpha > _SHAPE_LIMIT or beta > _SHAPE_LIMIT:
        raise ValueError(
            f"shape parameters alpha={alpha} beta={beta} exceed the supported "
            f"limit of {_SHAPE_LIMIT:g}"
        )
    if not (0.0 <= x <= 1.0):  # also rejects NaN
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    if alpha == 1.0 and beta == 1.0:
        return x
    ln_front = (
        math.lgamma(alpha + beta) - math.lgamma(alpha) - math.lgamma(beta)
        + alpha * math.log(x) + beta * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (alpha + 1.0) / (alpha + beta + 2.0):
        return front * _betacf(alpha, beta, x) / alpha
    return 1.0 - front * _betacf(beta, alpha, 1.0 - x) / beta


def regularized_ibf(x: float, params: IbfParams = DEFAULT_IBF) -> float:
    """I_x(s*(1-a), s*a): the policy-facing entry point."""
    return betainc_reg(x, params.alpha, params.beta)
