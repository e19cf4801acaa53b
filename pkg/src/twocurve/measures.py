"""Forward-measure machinery.

Under the T*-forward measure (OIS bond p(., T*) as numeraire) the factors
stay Gaussian but factors 1 and 2 pick up measure-change drifts:

    dpsi1 = -[b1*psi1 + sigma1^2 * B1(u, T*)] du + sigma1 dw1*
    dpsi2 = -[b2 + 2*sigma2^2*C22(u, T*)] psi2 du + sigma2 dw2*
    dpsi3 = -b3*psi3 du + sigma3 dw3*

forward_moments integrates the induced linear mean/variance ODEs with RK4
rather than transcribing the printed closed forms, whose factor-1 entries
are dimensionally inconsistent (the printed variants are kept in
forward_moments_printed for comparison only). Factor 3 is an unchanged OU
process with textbook moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import coeffs
from .errors import InvalidTimeOrder, MomentExplosion
from .model import FactorState, ModelParams

__all__ = [
    "ForwardMoments",
    "GaussianLaw",
    "forward_moments",
    "forward_moments_printed",
    "q_conditional_law",
    "gaussian_exp_quadratic",
]


@dataclass(frozen=True)
class ForwardMoments:
    """Mean (alpha) and variance (beta) of each factor at time t under the
    T*-forward measure, started from psi0 at time 0."""

    t: float
    T_star: float
    alpha: tuple[float, float, float]
    beta: tuple[float, float, float]


@dataclass(frozen=True)
class GaussianLaw:
    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError(f"variance must be >= 0, got {self.variance}")


def _ou_moments(psi: float, b: float, sigma: float, tau: float) -> tuple[float, float]:
    mean = math.exp(-b * tau) * psi
    var = sigma * sigma * -math.expm1(-2.0 * b * tau) / (2.0 * b)
    return mean, var


def forward_moments(t: float, T_star: float, params: ModelParams) -> ForwardMoments:
    """Moments of (psi1, psi2, psi3) at time t under the T*-forward measure."""
    if t > T_star:
        raise InvalidTimeOrder(t, T_star)
    if t < 0.0:
        raise InvalidTimeOrder(0.0, t)
    p1, p2, p3 = params.psi0
    a3, b3v = _ou_moments(p3, params.b3, params.sigma3, t)
    if t == 0.0:
        return ForwardMoments(t, T_star, (p1, p2, p3), (0.0, 0.0, 0.0))

    s1sq = params.sigma1 ** 2
    s2sq = params.sigma2 ** 2

    def rhs(u: float, y: tuple[float, float, float, float]):
        a1, be1, a2, be2 = y
        u = min(u, T_star)  # guard the last RK4 stage against float overshoot
        bb = coeffs.b1(u, T_star, params)
        lam = params.b2 + 2.0 * s2sq * coeffs.c22(u, T_star, params)
        return (
            -params.b1 * a1 - s1sq * bb,
            -2.0 * params.b1 * be1 + s1sq,
            -lam * a2,
            -2.0 * lam * be2 + s2sq,
        )

    h = min(1e-3, t / 100.0)
    n = max(1, int(math.ceil(t / h)))
    h = t / n
    y = (p1, 0.0, p2, 0.0)
    u = 0.0
    for _ in range(n):
        k1 = rhs(u, y)
        k2 = rhs(u + 0.5 * h, tuple(yi + 0.5 * h * ki for yi, ki in zip(y, k1)))
        k3 = rhs(u + 0.5 * h, tuple(yi + 0.5 * h * ki for yi, ki in zip(y, k2)))
        k4 = rhs(u + h, tuple(yi + h * ki for yi, ki in zip(y, k3)))
        y = tuple(
            yi + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
            for yi, a, b, c, d in zip(y, k1, k2, k3, k4)
        )
        u += h
    a1, be1, a2, be2 = y
    return ForwardMoments(t, T_star, (a1, a2, a3), (be1, be2, b3v))


def forward_moments_printed(t: float, T_star: float, params: ModelParams) -> ForwardMoments:
    """The closed-form factor-1/2 moments exactly as printed, for comparison
    tests only.  The factor-1 entries are known to be inconsistent with the
    dynamics (wrong sign in the mean correction, extra 1/b1 in the variance);
    production code uses forward_moments."""
    if t > T_star:
        raise InvalidTimeOrder(t, T_star)
    b1_, b2_ = params.b1, params.b2
    s1sq, s2sq = params.sigma1 ** 2, params.sigma2 ** 2
    p1, p2, p3 = params.psi0

    a1 = math.exp(-b1_ * t) * (
        p1
        - s1sq / (2.0 * b1_ ** 2) * math.exp(-b1_ * T_star) * (1.0 - math.exp(2.0 * b1_ * t))
        - s1sq / (b1_ ** 2) * (1.0 - math.exp(b1_ * t))
    )
    be1 = math.exp(-2.0 * b1_ * t) * (math.exp(2.0 * b1_ * t) - 1.0) * s1sq / (2.0 * b1_ ** 2)

    # the printed "C22 integral" symbol is read as the running time-integral
    # of C22(s, T*) over [0, t]
    from scipy.integrate import quad

    c22_int, _ = quad(lambda s: coeffs.c22(s, T_star, params), 0.0, t, epsrel=1e-10)
    a2 = math.exp(-(b2_ * t + 2.0 * s2sq * c22_int)) * p2
    inner, _ = quad(
        lambda s: math.exp(
            2.0 * b2_ * s
            + 4.0 * s2sq * quad(lambda u: coeffs.c22(u, T_star, params), 0.0, s, epsrel=1e-8)[0]
        )
        * s2sq,
        0.0,
        t,
        epsrel=1e-8,
    )
    be2 = math.exp(-(2.0 * b2_ * t + 4.0 * s2sq * c22_int)) * inner

    a3, be3 = _ou_moments(p3, params.b3, params.sigma3, t)
    return ForwardMoments(t, T_star, (a1, a2, a3), (be1, be2, be3))


def q_conditional_law(
    i: int, t: float, T: float, state: FactorState, params: ModelParams
) -> GaussianLaw:
    """Law of factor i at T given its value at t under the risk-neutral
    measure: a plain OU transition."""
    if t > T:
        raise InvalidTimeOrder(t, T)
    mean, var = _ou_moments(state.psi[i - 1], params.b(i), params.sigma(i), T - t)
    return GaussianLaw(mean=mean, variance=var)


def gaussian_exp_quadratic(law: GaussianLaw, c: float) -> float:
    """E[exp(c Z^2)] for Z ~ N(mean, variance).

    Finite iff 1 - 2*c*variance > 0; otherwise raises MomentExplosion
    rather than silently truncating.
    """
    denom = 1.0 - 2.0 * c * law.variance
    if denom <= 0.0:
        raise MomentExplosion(
            f"E[exp(c Z^2)] diverges: c={c}, variance={law.variance}"
        )
    return math.exp(c * law.mean ** 2 / denom) / math.sqrt(denom)
