"""Linear derivatives: FRAs, the single-to-multi-curve adjustment factor,
and the payer swap pricer.

The multi-curve FRA quantity vbar (forward expectation of 1/pbar over the
accrual period) factors as

    vbar = v * Ad * Res

with v the classical single-curve bond ratio, Ad the expectation of
p/pbar at inception, and Res a deterministic residual.

The swap pricer evaluates, for each period k, the forward-measure
expectation of 1/pbar(T_{k-1}, T_k) through exponential-quadratic
expectation coefficients (rho_i, Gamma_i).  The expectation horizon is
the fixing date T_{k-1} (the factor values that set the Libor rate);
measure-change drifts are those of the payment-date forward measure
Q^{T_k}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.integrate import quad

from . import coeffs
from .curves import ois_bond
from .errors import (
    ExpectationSingularity,
    InvalidTimeOrder,
    QuadratureFailure,
)
from .measures import gaussian_exp_quadratic, q_conditional_law
from .model import FactorState, ModelParams

__all__ = [
    "FraSpec",
    "SwapSpec",
    "ExpectationCoeffs",
    "v_single",
    "adjustment",
    "residual",
    "v_multi",
    "fra_price",
    "fair_fra_rate",
    "expectation_coeffs",
    "swap_price",
    "swap_price_via_fras",
    "fair_swap_rate",
    "swap_annuity",
]


@dataclass(frozen=True)
class FraSpec:
    """Forward rate agreement: fixing at T, accrual delta, fixed rate R."""

    T: float
    delta: float
    R: float
    notional: float = 1.0

    def __post_init__(self):
        if self.delta <= 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")


@dataclass(frozen=True)
class SwapSpec:
    """Payer swap: first reset T0, n periods of length gamma, fixed rate R.

    Libor fixes in advance at T_{k-1} and both legs pay in arrears at
    T_k = T0 + k*gamma.
    """

    T0: float
    n: int
    gamma: float
    R: float
    notional: float = 1.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.gamma <= 0.0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    def pay_date(self, k: int) -> float:
        return self.T0 + k * self.gamma

    def fix_date(self, k: int) -> float:
        return self.T0 + (k - 1) * self.gamma


@dataclass(frozen=True)
class ExpectationCoeffs:
    """Coefficients of exp[Gamma_i - rho_i * psi_i(^2)] for the three
    per-period expectations of the swap pricer, evaluated at time t."""

    rho1: float
    rho2: float
    rho3: float
    gamma1: float
    gamma2: float
    gamma3: float
    k: int


def v_single(state: FactorState, T: float, delta: float, params: ModelParams) -> float:
    """Single-curve quantity v = p(t, T) / p(t, T + delta)."""
    if state.t > T:
        raise InvalidTimeOrder(state.t, T)
    return ois_bond(state, T, params).value / ois_bond(state, T + delta, params).value


def adjustment(state: FactorState, T: float, delta: float, params: ModelParams) -> float:
    """Adjustment factor Ad = E[p(T, T+delta) / pbar(T, T+delta) | F_t].

    Closed form: exp(Atilde) times a Gaussian MGF in psi1 and an
    exponential-quadratic expectation in psi3, both over [t, T].
    """
    if state.t > T:
        raise InvalidTimeOrder(state.t, T)
    at = coeffs.a_tilde(T, T + delta, params)
    b1p = coeffs.b1(T, T + delta, params)
    c33p = coeffs.c33_bar(T, T + delta, params)
    law1 = q_conditional_law(1, state.t, T, state, params)
    a = params.kappa * b1p
    e_lin = math.exp(a * law1.mean + 0.5 * a * a * law1.variance)
    law3 = q_conditional_law(3, state.t, T, state, params)
    e_quad = gaussian_exp_quadratic(law3, c33p)
    return math.exp(at) * e_lin * e_quad


def residual(t: float, T: float, delta: float, params: ModelParams) -> float:
    """Deterministic residual factor of the vbar = v * Ad * Res decomposition."""
    b = params.b1
    e_delta = -math.expm1(-b * delta)
    e_tau = -math.expm1(-b * (T - t))
    return math.exp(
        -params.kappa * params.sigma1 ** 2 / (2.0 * b ** 3) * e_delta * e_tau * e_tau
    )


def v_multi(state: FactorState, T: float, delta: float, params: ModelParams) -> float:
    """Multi-curve quantity vbar = v * Ad * Res."""
    return (
        v_single(state, T, delta, params)
        * adjustment(state, T, delta, params)
        * residual(state.t, T, delta, params)
    )


def fra_price(state: FactorState, spec: FraSpec, params: ModelParams) -> float:
    """Price of the FRA: N * p(t, T+delta) * (vbar - (1 + delta*R))."""
    vbar = v_multi(state, spec.T, spec.delta, params)
    p = ois_bond(state, spec.T + spec.delta, params).value
    return spec.notional * p * (vbar - (1.0 + spec.delta * spec.R))


def fair_fra_rate(state: FactorState, T: float, delta: float, params: ModelParams) -> float:
    """Fixed rate making the FRA costless: (vbar - 1) / delta."""
    return (v_multi(state, T, delta, params) - 1.0) / delta


def _quad10(f, lo: float, hi: float) -> float:
    val, err = quad(f, lo, hi, epsabs=1e-14, epsrel=1e-10, limit=200)
    if err > 1e-10 * max(1.0, abs(val)) * 10.0:
        raise QuadratureFailure(f"expectation-coefficient integral: err={err}")
    return val


def _rho2_backward(
    t: float, t_fix: float, t_pay: float, c22_k: float, params: ModelParams, n_steps: int
) -> tuple[float, float]:
    """Backward RK4 of the rho2 Riccati (time-dependent coefficient through
    C22(u, T_k)) from rho2(t_fix) = -c22_k, jointly accumulating
    Gamma2(t) = -sigma2^2 * integral of rho2 over [t, t_fix]."""
    s2sq = params.sigma2 ** 2
    b2 = params.b2

    def f(u: float, rho: float) -> float:
        lam = b2 + 2.0 * s2sq * coeffs.c22(u, t_pay, params)
        return 2.0 * lam * rho + 2.0 * s2sq * rho * rho

    h = (t_fix - t) / n_steps
    rho, gam = -c22_k, 0.0
    u = t_fix
    for _ in range(n_steps):
        # step backward: gamma' = sigma2^2 * rho, integrated alongside
        k1r = f(u, rho)
        k1g = s2sq * rho
        r2 = rho - 0.5 * h * k1r
        k2r = f(u - 0.5 * h, r2)
        k2g = s2sq * r2
        r3 = rho - 0.5 * h * k2r
        k3r = f(u - 0.5 * h, r3)
        k3g = s2sq * r3
        r4 = rho - h * k3r
        k4r = f(u - h, r4)
        k4g = s2sq * r4
        rho = rho - (h / 6.0) * (k1r + 2.0 * k2r + 2.0 * k3r + k4r)
        gam = gam - (h / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g)
        u -= h
        if not math.isfinite(rho) or abs(rho) > 1e8:
            raise ExpectationSingularity(
                f"rho2 Riccati blow-up at u={u}: psi2 expectation is infinite"
            )
    return rho, gam


def expectation_coeffs(
    t: float, k: int, swap: SwapSpec, params: ModelParams
) -> ExpectationCoeffs:
    """(rho_i, Gamma_i) for period k of the swap, evaluated at time t.

    Boundary values at t = T_{k-1}: rho1 = -(1+kappa)*B1_k,
    rho2 = -C22_k, rho3 = -C33bar_k, Gamma_i = 0.
    """
    t_fix = swap.fix_date(k)
    t_pay = swap.pay_date(k)
    if t > t_fix:
        raise InvalidTimeOrder(t, t_fix)
    b1_k = coeffs.b1(t_fix, t_pay, params)
    c22_k = coeffs.c22(t_fix, t_pay, params)
    c33_k = coeffs.c33_bar(t_fix, t_pay, params)
    b1_, s1sq = params.b1, params.sigma1 ** 2
    s3sq = params.sigma3 ** 2
    kp1 = 1.0 + params.kappa

    def rho1_fn(u: float) -> float:
        return -kp1 * b1_k * math.exp(-b1_ * (t_fix - u))

    rho1 = rho1_fn(t)
    span = t_fix - t
    if span == 0.0:
        return ExpectationCoeffs(rho1, -c22_k, -c33_k, 0.0, 0.0, 0.0, k)

    gamma1 = 0.5 * s1sq * _quad10(lambda u: rho1_fn(u) ** 2, t, t_fix) + s1sq * _quad10(
        lambda u: coeffs.b1(u, t_pay, params) * rho1_fn(u), t, t_fix
    )

    n_steps = max(8, int(math.ceil(span / min(1e-3, span / 200.0))))
    rho2, gamma2 = _rho2_backward(t, t_fix, t_pay, c22_k, params, n_steps)
    rho2_h, _ = _rho2_backward(t, t_fix, t_pay, c22_k, params, 2 * n_steps)
    if abs(rho2 - rho2_h) > 1e-9:
        raise QuadratureFailure(
            f"rho2 step-halving check failed: |diff|={abs(rho2 - rho2_h)}"
        )
    rho2 = rho2_h

    denom_h = 4.0 * s3sq * c33_k - 4.0 * params.b3
    if denom_h == 0.0:
        raise ExpectationSingularity("h3 denominator vanishes exactly")
    h3 = c33_k / denom_h

    def rho3_denom(u: float) -> float:
        return 4.0 * s3sq * h3 * math.exp(-2.0 * params.b3 * (t_fix - u)) - 1.0

    # refuse to integrate across a pole of the closed-form rho3
    grid_sign = rho3_denom(t)
    for j in range(1, 257):
        u = t + span * j / 256.0
        d = rho3_denom(u)
        if d == 0.0 or (d > 0.0) != (grid_sign > 0.0):
            raise ExpectationSingularity(
                f"rho3 pole inside [{t}, {t_fix}]: psi3 expectation is infinite"
            )

    def rho3_fn(u: float) -> float:
        e = math.exp(-2.0 * params.b3 * (t_fix - u))
        return -4.0 * params.b3 * h3 * e / (4.0 * s3sq * h3 * e - 1.0)

    rho3 = rho3_fn(t)
    gamma3 = -s3sq * _quad10(rho3_fn, t, t_fix)
    return ExpectationCoeffs(rho1, rho2, rho3, gamma1, gamma2, gamma3, k)


def _period_terms(
    state: FactorState, swap: SwapSpec, params: ModelParams, k: int
) -> tuple[float, float]:
    """(floating-leg exponential term, OIS bond value) for period k, i.e.
    p(t,T_k) * E^{T_k}[1/pbar(T_{k-1}, T_k)]  and  p(t,T_k)."""
    t = state.t
    p1, p2, p3 = state.psi
    t_pay = swap.pay_date(k)
    cb = coeffs.bundle(t, t_pay, params)
    a_bar_k = coeffs.a_pair(swap.fix_date(k), t_pay, params)[1]
    ec = expectation_coeffs(t, k, swap, params)
    d = math.exp(a_bar_k + ec.gamma1 + ec.gamma2 + ec.gamma3)
    float_term = d * math.exp(
        -cb.A
        - (cb.B1 + ec.rho1) * p1
        - (cb.C22 + ec.rho2) * p2 * p2
        - ec.rho3 * p3 * p3
    )
    p_k = math.exp(-cb.A - cb.B1 * p1 - cb.C22 * p2 * p2)
    return float_term, p_k


def swap_price(state: FactorState, swap: SwapSpec, params: ModelParams) -> float:
    """Payer swap price at t <= T0 via the per-period expectation coefficients."""
    if state.t > swap.T0:
        raise InvalidTimeOrder(state.t, swap.T0)
    total = 0.0
    rg1 = swap.R * swap.gamma + 1.0
    for k in range(1, swap.n + 1):
        float_term, p_k = _period_terms(state, swap, params, k)
        total += float_term - rg1 * p_k
    return swap.notional * total


def swap_price_via_fras(state: FactorState, swap: SwapSpec, params: ModelParams) -> float:
    """Independent route: assemble the swap from per-period multi-curve FRA
    quantities, each under its own payment-date forward measure."""
    if state.t > swap.T0:
        raise InvalidTimeOrder(state.t, swap.T0)
    total = 0.0
    rg1 = swap.R * swap.gamma + 1.0
    for k in range(1, swap.n + 1):
        vbar = v_multi(state, swap.fix_date(k), swap.gamma, params)
        p_k = ois_bond(state, swap.pay_date(k), params).value
        total += p_k * (vbar - rg1)
    return swap.notional * total


def swap_annuity(state: FactorState, swap: SwapSpec, params: ModelParams) -> float:
    """gamma * sum_k p(t, T_k): the slope of the swap price in -R."""
    return swap.gamma * sum(
        ois_bond(state, swap.pay_date(k), params).value for k in range(1, swap.n + 1)
    )


def fair_swap_rate(state: FactorState, swap: SwapSpec, params: ModelParams) -> float:
    """Fixed rate at which the swap prices to zero (the price is affine in R)."""
    zero_spec = SwapSpec(swap.T0, swap.n, swap.gamma, 0.0, 1.0)
    price_at_zero = swap_price(state, zero_spec, params)
    return price_at_zero / swap_annuity(state, swap, params)
