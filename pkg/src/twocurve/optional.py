"""Semi-closed caplet, floorlet and payer-swaption pricers.

Both option payoffs are positive parts of exponential-quadratic functions
of the three Gaussian factors at expiry.  The z-integral (spread factor)
is carried out in closed Gaussian form after locating the exercise
boundary z = zbar(x, y); the remaining (x, y) integral is done by tensor
Gauss-Legendre quadrature on a +/- 8 standard-deviation box, with each
x-line split at the exercise-region boundary so every sub-integrand is
smooth and the quadrature converges spectrally.

Stability note: wherever the assembled formulas call for
exp(C33*zbar^2)-type boundary terms, the caplet pricer folds them back
into the strike level (the defining equation of zbar makes the product
equal to Rtilde exactly), avoiding overflow for far-out boundary points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from . import coeffs
from .curves import ois_bond
from .errors import (
    CapletConditionViolated,
    DegenerateSpreadFactor,
    InvalidTimeOrder,
    MixedCase,
    MomentExplosion,
    QuadratureFailure,
    RootNotBracketed,
)
from .linear import FraSpec, SwapSpec, expectation_coeffs, fra_price
from .measures import forward_moments
from .model import FactorState, ModelParams

__all__ = [
    "CapletSpec",
    "SwaptionSpec",
    "RegionBoundary",
    "QuadratureConfig",
    "caplet_region",
    "caplet_price",
    "floorlet_price",
    "swaption_case",
    "swaption_region",
    "swaption_price",
]


@dataclass(frozen=True)
class CapletSpec:
    """Caplet on the period [T, T+delta]: pays delta*(L - R)^+ at T+delta."""

    T: float
    delta: float
    R: float
    notional: float = 1.0

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        if 1.0 + self.delta * self.R <= 0.0:
            raise ValueError("require 1 + delta*R > 0")

    @property
    def r_tilde(self) -> float:
        return 1.0 + self.delta * self.R


@dataclass(frozen=True)
class SwaptionSpec:
    """Option expiring at the swap's first reset date T0 to enter the swap."""

    swap: SwapSpec


@dataclass(frozen=True)
class RegionBoundary:
    """Exercise-region membership of an (x, y) point and, when defined,
    the two symmetric boundary roots z1 <= 0 <= z2 in the spread factor."""

    in_region: bool
    z1: float = math.nan
    z2: float = math.nan


@dataclass(frozen=True)
class QuadratureConfig:
    n_nodes_per_axis: int = 128
    truncation: float = 8.0
    rel_tol: float = 1e-7
    max_refinements: int = 3

    def __post_init__(self):
        if self.n_nodes_per_axis < 16:
            raise ValueError("n_nodes_per_axis must be >= 16")


# ---------------------------------------------------------------------------
# caplet


def _caplet_coeffs(caplet: CapletSpec, params: ModelParams):
    cb = coeffs.bundle(caplet.T, caplet.T + caplet.delta, params)
    if cb.C33_bar == 0.0:
        raise DegenerateSpreadFactor(
            "C33 coefficient vanishes over the accrual period"
        )
    return cb


def caplet_region(
    x: float, y: float, caplet: CapletSpec, params: ModelParams
) -> RegionBoundary:
    """Membership of (x, y) in the continuation set M (where the exercise
    function crosses the strike level in z) and the closed-form roots.

    The exercise function exp[Abar + (1+kappa)B1*x + C22*y^2 + C33*z^2]
    is even and increasing in |z|, so membership reduces to the value at
    z = 0 and the roots are +/- sqrt(slack / C33).
    """
    cb = _caplet_coeffs(caplet, params)
    slack = (
        math.log(caplet.r_tilde)
        - cb.A_bar
        - (1.0 + params.kappa) * cb.B1 * x
        - cb.C22 * y * y
    )
    if slack < 0.0:
        return RegionBoundary(in_region=False)
    z2 = math.sqrt(slack / cb.C33_bar)
    return RegionBoundary(in_region=True, z1=-z2, z2=z2)


def _refine(estimate, quad: QuadratureConfig) -> float:
    n = quad.n_nodes_per_axis
    prev = estimate(n)
    for _ in range(quad.max_refinements):
        n *= 2
        cur = estimate(n)
        if abs(cur - prev) <= quad.rel_tol * abs(cur) + 1e-15:
            return cur
        prev = cur
    raise QuadratureFailure(
        f"node doubling did not converge to rel {quad.rel_tol}: last={prev}"
    )


def caplet_price(
    caplet: CapletSpec,
    params: ModelParams,
    quad: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Time-0 caplet price.

    The z-integral over the exercise region is in closed Gaussian form; the
    (x, y) integral is tensor Gauss-Legendre with each x-line split at the
    closed-form membership boundary so the integrand is smooth per panel.
    """
    if caplet.T <= 0.0:
        raise InvalidTimeOrder(caplet.T, 0.0)
    cb = _caplet_coeffs(caplet, params)
    c33 = cb.C33_bar
    kb = (1.0 + params.kappa) * cb.B1
    r_t = caplet.r_tilde
    ln_rt = math.log(r_t)

    fm = forward_moments(caplet.T, caplet.T + caplet.delta, params)
    a1, a2, a3 = fm.alpha
    b1v, b2v, b3v = fm.beta
    disc = 1.0 - 2.0 * b3v * c33
    if disc <= 0.0:
        raise CapletConditionViolated(
            f"1 - 2*beta3*C33 = {disc} <= 0: the spread-factor expectation diverges"
        )
    sq = math.sqrt(disc)
    s3 = math.sqrt(b3v)
    theta = a3 * (1.0 - 1.0 / sq) / b3v
    gam = math.exp(0.5 * theta * theta * b3v - a3 * theta) / sq
    shift = a3 - theta * b3v

    s1, s2 = math.sqrt(b1v), math.sqrt(b2v)
    p0 = ois_bond(FactorState(0.0, params.psi0), caplet.T + caplet.delta, params).value

    def estimate(n: int) -> float:
        gx, gw = np.polynomial.legendre.leggauss(n)
        y_lo, y_hi = a2 - quad.truncation * s2, a2 + quad.truncation * s2
        x_lo, x_hi = a1 - quad.truncation * s1, a1 + quad.truncation * s1
        ys = 0.5 * (y_hi + y_lo) + 0.5 * (y_hi - y_lo) * gx
        wys = 0.5 * (y_hi - y_lo) * gw
        total = 0.0
        for yj, wyj in zip(ys, wys):
            w0 = ln_rt - cb.A_bar - cb.C22 * yj * yj
            # partition the x-line by membership in M: kb*x <= w0
            if kb > 0.0:
                xs_star = w0 / kb
                panels = [(x_lo, min(max(xs_star, x_lo), x_hi), True),
                          (min(max(xs_star, x_lo), x_hi), x_hi, False)]
            elif kb < 0.0:
                xs_star = w0 / kb
                panels = [(x_lo, min(max(xs_star, x_lo), x_hi), False),
                          (min(max(xs_star, x_lo), x_hi), x_hi, True)]
            else:
                panels = [(x_lo, x_hi, w0 >= 0.0)]
            col = 0.0
            for lo, hi, in_m in panels:
                if hi <= lo:
                    continue
                xs = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gx
                wxs = 0.5 * (hi - lo) * gw
                big_e = np.exp(cb.A_bar + kb * xs + cb.C22 * yj * yj)
                if in_m:
                    z2 = np.sqrt(np.maximum(w0 - kb * xs, 0.0) / c33)
                    d1 = (sq * (-z2) - shift) / s3
                    d2 = (sq * z2 - shift) / s3
                    d3 = (-z2 - a3) / s3
                    d4 = (z2 - a3) / s3
                    # E * exp(C33*z2^2) == Rtilde on the boundary equation
                    integ = big_e * gam * (ndtr(d1) + ndtr(-d2)) - r_t * (
                        ndtr(d3) + ndtr(-d4)
                    )
                else:
                    integ = big_e * gam - r_t
                f1 = np.exp(-0.5 * ((xs - a1) / s1) ** 2) / (s1 * math.sqrt(2.0 * math.pi))
                col += float(np.sum(wxs * integ * f1))
            f2 = math.exp(-0.5 * ((yj - a2) / s2) ** 2) / (s2 * math.sqrt(2.0 * math.pi))
            total += wyj * col * f2
        return p0 * total

    return caplet.notional * _refine(estimate, quad)


def floorlet_price(
    caplet: CapletSpec,
    params: ModelParams,
    quad: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Floorlet via parity: floorlet = caplet - FRA at the same strike."""
    cpl = caplet_price(caplet, params, quad)
    state = FactorState(0.0, params.psi0)
    fra = fra_price(
        state, FraSpec(caplet.T, caplet.delta, caplet.R, caplet.notional), params
    )
    return cpl - fra


# ---------------------------------------------------------------------------
# swaption


def _swaption_period_rho3(t: float, k: int, swap: SwapSpec, params: ModelParams) -> float:
    """Closed-form rho3(t, period k) without the pole screening (used only for
    the case classification, which needs the sign)."""
    t_fix, t_pay = swap.fix_date(k), swap.pay_date(k)
    c33_k = coeffs.c33_bar(t_fix, t_pay, params)
    s3sq = params.sigma3 ** 2
    denom_h = 4.0 * s3sq * c33_k - 4.0 * params.b3
    if denom_h == 0.0:
        raise MomentExplosion("h3 denominator vanishes exactly")
    h3 = c33_k / denom_h
    e = math.exp(-2.0 * params.b3 * (t_fix - t))
    d = 4.0 * s3sq * h3 * e - 1.0
    if d == 0.0:
        raise MomentExplosion("rho3 pole at the evaluation time")
    return -4.0 * params.b3 * h3 * e / d


def swaption_case(swap: SwapSpec, params: ModelParams) -> str:
    """Classify the swaption by the sign of the spread-factor exponent
    rho3(T0, .) across periods: "case1" when all negative (payoff convex in
    |z|), "case2" when all positive.  Mixed signs are refused."""
    signs = [
        _swaption_period_rho3(swap.T0, k, swap, params) > 0.0
        for k in range(1, swap.n + 1)
    ]
    if all(signs):
        return "case2"
    if not any(signs):
        return "case1"
    raise MixedCase(
        "periods fall in both monotonicity cases; the semi-closed pricer "
        "requires a uniform sign of rho3 across periods"
    )


class _SwaptionAssembly:
    """Per-period coefficients of the exercise functions g and h at T0."""

    def __init__(self, swap: SwapSpec, params: ModelParams):
        self.swap = swap
        self.params = params
        t0 = swap.T0
        self.a0 = []
        self.d0 = []
        self.b1t = []  # B1 + rho1 (g exponent)
        self.c22t = []  # C22 + rho2
        self.c33t = []  # rho3
        self.b1 = []
        self.c22 = []
        for k in range(1, swap.n + 1):
            cbk = coeffs.bundle(t0, swap.pay_date(k), params)
            eck = expectation_coeffs(t0, k, swap, params)
            a_bar_k = coeffs.a_pair(swap.fix_date(k), swap.pay_date(k), params)[1]
            self.a0.append(cbk.A)
            self.d0.append(math.exp(a_bar_k + eck.gamma1 + eck.gamma2 + eck.gamma3))
            self.b1t.append(cbk.B1 + eck.rho1)
            self.c22t.append(cbk.C22 + eck.rho2)
            self.c33t.append(eck.rho3)
            self.b1.append(cbk.B1)
            self.c22.append(cbk.C22)
        self.rg1 = swap.R * swap.gamma + 1.0

    def g(self, x, y, z):
        out = 0.0
        for k in range(self.swap.n):
            out = out + self.d0[k] * np.exp(
                -self.a0[k]
                - self.b1t[k] * x
                - self.c22t[k] * y * y
                - self.c33t[k] * z * z
            )
        return out

    def h(self, x, y):
        out = 0.0
        for k in range(self.swap.n):
            out = out + self.rg1 * np.exp(
                -self.a0[k] - self.b1[k] * x - self.c22[k] * y * y
            )
        return out


def _boundary_root(asm: _SwaptionAssembly, x, y, case: str):
    """Positive root z2 of g(x, y, z) = h(x, y), vectorized bisection.

    Case 1: g increases in |z| from g(.,0) <= h to +inf (root exists on the
    membership set).  Case 2: g decreases in |z| from g(.,0) >= h to 0 < h
    (root exists on the complement).  g is even in z, so z1 = -z2.
    """
    x = np.asarray(x, dtype=float)
    h_val = asm.h(x, y)
    lo = np.zeros_like(x)
    hi = np.full_like(x, 1.0)
    target = asm.g(x, y, hi) - h_val
    want_pos = case == "case1"  # phi(z) = g - h crosses 0 from below (case1)
    for _ in range(80):
        done = (target > 0.0) if want_pos else (target < 0.0)
        if bool(np.all(done)):
            break
        hi = np.where(done, hi, hi * 2.0)
        target = asm.g(x, y, hi) - h_val
        if float(np.max(hi)) > 1e12:
            raise RootNotBracketed("no sign change of g - h for z up to 1e12")
    else:
        raise RootNotBracketed("bracket expansion for the z-root failed")
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        phi = asm.g(x, y, mid) - h_val
        go_up = (phi < 0.0) if want_pos else (phi > 0.0)
        lo = np.where(go_up, mid, lo)
        hi = np.where(go_up, hi, mid)
        if float(np.max(hi - lo)) <= 1e-12 * (1.0 + float(np.max(hi))):
            break
    return 0.5 * (lo + hi)


def swaption_region(
    x: float, y: float, swap: SwapSpec, params: ModelParams, case: str | None = None
) -> RegionBoundary:
    """Membership of (x, y) in the set where the time-T0 swap value at z = 0
    is at or below the fixed leg, plus the boundary roots when they exist
    (case1: on the membership set; case2: on its complement)."""
    if case is None:
        case = swaption_case(swap, params)
    asm = _SwaptionAssembly(swap, params)
    g0 = float(asm.g(x, y, 0.0))
    h0 = float(asm.h(x, y))
    in_region = g0 <= h0
    roots_exist = in_region if case == "case1" else (not in_region) or g0 == h0
    if not roots_exist:
        return RegionBoundary(in_region=in_region)
    z2 = float(_boundary_root(asm, np.array([x]), y, case)[0])
    return RegionBoundary(in_region=in_region, z1=-z2, z2=z2)


def _column_panels(asm: _SwaptionAssembly, y: float, x_lo: float, x_hi: float):
    """Split [x_lo, x_hi] at the roots of g(., y, 0) - h(., y) and tag each
    panel with its membership (g(.,0) <= h)."""
    n_scan = 256
    xs = np.linspace(x_lo, x_hi, n_scan + 1)
    phi = np.asarray(asm.g(xs, y, 0.0) - asm.h(xs, y))
    cuts = []
    for i in range(n_scan):
        a, b = phi[i], phi[i + 1]
        if a == 0.0:
            cuts.append(xs[i])
        elif (a < 0.0) != (b < 0.0):
            lo, hi = xs[i], xs[i + 1]
            flo = a
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                fm = float(asm.g(mid, y, 0.0) - asm.h(mid, y))
                if (fm < 0.0) == (flo < 0.0):
                    lo, flo = mid, fm
                else:
                    hi = mid
                if hi - lo <= 1e-13 * (1.0 + abs(hi)):
                    break
            cuts.append(0.5 * (lo + hi))
    edges = [x_lo] + cuts + [x_hi]
    panels = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi - lo <= 0.0:
            continue
        mid = 0.5 * (lo + hi)
        in_m = float(asm.g(mid, y, 0.0) - asm.h(mid, y)) <= 0.0
        panels.append((lo, hi, in_m))
    return panels


def swaption_price(
    spec: SwaptionSpec,
    params: ModelParams,
    quad: QuadratureConfig = QuadratureConfig(),
) -> float:
    """Time-0 payer-swaption price with expiry at the swap's first reset T0.

    The payoff is (g(x,y,z) - h(x,y))^+ in the T0 factor values under the
    T0-forward measure.  The z-integral is closed-form Gaussian between the
    exercise boundaries; (x, y) is tensor Gauss-Legendre with x-lines split
    at the membership boundary.  In case 2 (all period z-exponents positive)
    g decreases in |z|, so the boundary roots live on the complement of the
    membership set and the membership set itself contributes nothing.
    """
    swap = spec.swap
    if swap.T0 <= 0.0:
        raise InvalidTimeOrder(swap.T0, 0.0)
    case = swaption_case(swap, params)
    asm = _SwaptionAssembly(swap, params)

    fm = forward_moments(swap.T0, swap.T0, params)
    a1, a2, a3 = fm.alpha
    b1v, b2v, b3v = fm.beta
    s1, s2, s3 = math.sqrt(b1v), math.sqrt(b2v), math.sqrt(b3v)

    sqs, thetas, gammas = [], [], []
    for k in range(swap.n):
        disc = 1.0 + 2.0 * b3v * asm.c33t[k]
        if disc <= 0.0:
            raise MomentExplosion(
                f"1 + 2*beta3*C33_tilde = {disc} <= 0 for period {k + 1}"
            )
        sq = math.sqrt(disc)
        th = a3 * (1.0 - 1.0 / sq) / b3v
        sqs.append(sq)
        thetas.append(th)
        gammas.append(math.exp(0.5 * th * th * b3v - a3 * th) / sq)

    p0 = ois_bond(FactorState(0.0, params.psi0), swap.T0, params).value

    def estimate(n: int) -> float:
        gx, gw = np.polynomial.legendre.leggauss(n)
        y_lo, y_hi = a2 - quad.truncation * s2, a2 + quad.truncation * s2
        x_lo, x_hi = a1 - quad.truncation * s1, a1 + quad.truncation * s1
        ys = 0.5 * (y_hi + y_lo) + 0.5 * (y_hi - y_lo) * gx
        wys = 0.5 * (y_hi - y_lo) * gw
        total = 0.0
        for yj, wyj in zip(ys, wys):
            col = 0.0
            for lo, hi, in_m in _column_panels(asm, yj, x_lo, x_hi):
                xs = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gx
                wxs = 0.5 * (hi - lo) * gw
                has_roots = in_m if case == "case1" else not in_m
                if has_roots:
                    z2 = _boundary_root(asm, xs, yj, case)
                    integ = np.zeros_like(xs)
                    for k in range(swap.n):
                        e_g = asm.d0[k] * np.exp(
                            -asm.a0[k] - asm.b1t[k] * xs - asm.c22t[k] * yj * yj
                        )
                        d_out = (sqs[k] * (-z2) - (a3 - thetas[k] * b3v)) / s3
                        d_out2 = (sqs[k] * z2 - (a3 - thetas[k] * b3v)) / s3
                        d_in = (-z2 - a3) / s3
                        d_in2 = (z2 - a3) / s3
                        # boundary terms exp(-c33t*z2^2)*Phi(tail) in log space:
                        # the product is bounded whenever 1+2*beta3*c33t > 0
                        # even where the bare exponential overflows
                        lb = -asm.c33t[k] * z2 * z2
                        if case == "case1":
                            bpart = np.exp(lb + log_ndtr(d_in)) + np.exp(
                                lb + log_ndtr(-d_in2)
                            )
                            inner = gammas[k] * (ndtr(d_out) + ndtr(-d_out2)) - bpart
                        else:
                            bpart = np.exp(lb) * (ndtr(d_in2) - ndtr(d_in))
                            inner = gammas[k] * (ndtr(d_out2) - ndtr(d_out)) - bpart
                        integ = integ + e_g * inner
                elif case == "case1":
                    # g >= h for every z: the positive part is the plain mean
                    integ = np.zeros_like(xs)
                    for k in range(swap.n):
                        integ = integ + asm.d0[k] * gammas[k] * np.exp(
                            -asm.a0[k] - asm.b1t[k] * xs - asm.c22t[k] * yj * yj
                        ) - asm.rg1 * np.exp(
                            -asm.a0[k] - asm.b1[k] * xs - asm.c22[k] * yj * yj
                        )
                else:
                    # case 2 off the root set: g < h everywhere, payoff zero
                    continue
                f1 = np.exp(-0.5 * ((xs - a1) / s1) ** 2) / (s1 * math.sqrt(2.0 * math.pi))
                col += float(np.sum(wxs * integ * f1))
            f2 = math.exp(-0.5 * ((yj - a2) / s2) ** 2) / (s2 * math.sqrt(2.0 * math.pi))
            total += wyj * col * f2
        return p0 * total

    return swap.notional * _refine(estimate, quad)
