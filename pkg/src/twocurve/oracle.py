"""Monte Carlo validation engine.

Factor paths use exact Ornstein-Uhlenbeck transitions, so the simulated
factor law carries no discretization error; the only bias is the
trapezoid approximation of time-integrals (bank account, discounting),
which is monitored by re-evaluating every payoff on the half-resolution
subgrid of the same paths.  Because the exact transitions nest (two fine
steps compose to one coarse step), the fine/coarse difference isolates
the quadrature bias with no Monte Carlo noise in the proxy.

Determinism: paths are generated in fixed-size blocks of 4096 (2048
antithetic pairs), each block drawing from its own counter-derived
substream of the master seed, and block results are reduced in block
order - the estimate is bit-identical regardless of how blocks are
scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .curves import ois_bond
from .errors import BiasDominates
from .linear import FraSpec, SwapSpec
from .model import FactorState, ModelParams
from .optional import CapletSpec, SwaptionSpec, _SwaptionAssembly

__all__ = [
    "McConfig",
    "McEstimate",
    "simulate_paths",
    "mc_bond",
    "mc_forward_expectation",
    "mc_price",
]

_BLOCK = 4096  # paths per block; fixed so results never depend on scheduling

_trapz = getattr(np, "trapezoid", None) or np.trapz

ProductSpec = Union[FraSpec, SwapSpec, CapletSpec, SwaptionSpec]


@dataclass(frozen=True)
class McConfig:
    n_paths: int = 100_000
    steps_per_year: int = 512
    seed: int = 0
    antithetic: bool = True

    def __post_init__(self):
        if self.n_paths < 1000:
            raise ValueError("n_paths must be >= 1000")
        s = self.steps_per_year
        if s < 1 or (s & (s - 1)) != 0:
            raise ValueError("steps_per_year must be a positive power of two")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    n_paths: int
    bias_proxy: float

    def __post_init__(self):
        if self.std_error < 0.0:
            raise ValueError("std_error must be >= 0")


def _make_grid(dates, steps_per_year: int) -> np.ndarray:
    """Fine time grid from 0 through max(dates): every date is a grid point,
    each inter-date span is cut into equal steps near 1/steps_per_year, and
    each such step is then halved so that grid[::2] is a valid coarse grid
    containing all the dates too."""
    pts = sorted({0.0} | {float(d) for d in dates})
    times = [0.0]
    for a, b in zip(pts[:-1], pts[1:]):
        span = b - a
        m = max(1, int(math.ceil(span * steps_per_year - 1e-12)))
        for j in range(1, 2 * m + 1):
            times.append(a + span * j / (2 * m))
        times[-1] = b
    return np.asarray(times)


def _step_constants(times: np.ndarray, b: float, sigma: float):
    dt = np.diff(times)
    stds = sigma * np.sqrt(-np.expm1(-2.0 * b * dt) / (2.0 * b))
    return stds * np.exp(b * times[1:])


def _paths_from_normals(
    z: np.ndarray, times: np.ndarray, params: ModelParams
) -> np.ndarray:
    """Exact OU paths for all three factors from standard normals z of shape
    (3, n, n_steps); returns psi of shape (3, n, n_steps + 1)."""
    n = z.shape[1]
    out = np.empty((3, n, times.size))
    for i in range(3):
        b, sigma = params.b(i + 1), params.sigma(i + 1)
        scaled = _step_constants(times, b, sigma)  # (n_steps,)
        cum = np.cumsum(z[i] * scaled[None, :], axis=1)
        out[i, :, 0] = params.psi0[i]
        out[i, :, 1:] = np.exp(-b * times[1:])[None, :] * (
            params.psi0[i] + cum
        )
    return out


def _block_normals(seed: int, block_index: int, n: int, n_steps: int) -> np.ndarray:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(block_index,))
    rng = np.random.Generator(np.random.Philox(ss))
    return rng.standard_normal((3, n, n_steps))


def _run(
    params: ModelParams,
    times: np.ndarray,
    config: McConfig,
    payoff: Callable[[np.ndarray, np.ndarray], np.ndarray],
) -> McEstimate:
    """Estimate E[payoff] with the fine grid, plus the coarse-subgrid bias
    proxy evaluated on the identical paths.

    payoff(times, psi) -> per-path values; psi has shape (3, n, len(times)).
    """
    n_steps = times.size - 1
    coarse = times[::2]
    if config.antithetic:
        n_pairs_total = (config.n_paths + 1) // 2
        per_block = _BLOCK // 2
    else:
        n_pairs_total = config.n_paths
        per_block = _BLOCK
    n_samples = 0
    s1 = s2 = sc = 0.0
    block = 0
    remaining = n_pairs_total
    while remaining > 0:
        n = min(per_block, remaining)
        z = _block_normals(config.seed, block, n, n_steps)
        psi = _paths_from_normals(z, times, params)
        vals = payoff(times, psi)
        vals_c = payoff(coarse, psi[:, :, ::2])
        if config.antithetic:
            psi_a = _paths_from_normals(-z, times, params)
            vals = 0.5 * (vals + payoff(times, psi_a))
            vals_c = 0.5 * (vals_c + payoff(coarse, psi_a[:, :, ::2]))
        s1 += float(np.sum(vals))
        s2 += float(np.sum(vals * vals))
        sc += float(np.sum(vals_c))
        n_samples += n
        remaining -= n
        block += 1
    mean = s1 / n_samples
    var = max(0.0, s2 / n_samples - mean * mean)
    se = math.sqrt(var / n_samples)
    bias = abs(mean - sc / n_samples)
    est = McEstimate(
        mean=mean,
        std_error=se,
        n_paths=n_samples * (2 if config.antithetic else 1),
        bias_proxy=bias,
    )
    if bias >= 3.0 * se + 1e-15:
        raise BiasDominates(
            f"time-integral bias {bias} >= 3 * std_error {se}; refine the grid"
        )
    return est


def simulate_paths(params: ModelParams, horizon: float, config: McConfig):
    """Materialize the full factor-path ensemble up to the horizon.

    Returns (times, psi) with psi of shape (3, n_paths, len(times)).  Memory
    scales with n_paths * steps; the pricing entry points below stream in
    blocks instead and never materialize the ensemble.
    """
    times = _make_grid([horizon], config.steps_per_year)
    n_steps = times.size - 1
    if config.antithetic:
        n_pairs_total = (config.n_paths + 1) // 2
        per_block = _BLOCK // 2
    else:
        n_pairs_total = config.n_paths
        per_block = _BLOCK
    chunks = []
    block = 0
    remaining = n_pairs_total
    while remaining > 0:
        n = min(per_block, remaining)
        z = _block_normals(config.seed, block, n, n_steps)
        chunks.append(_paths_from_normals(z, times, params))
        if config.antithetic:
            chunks.append(_paths_from_normals(-z, times, params))
        remaining -= n
        block += 1
    return times, np.concatenate(chunks, axis=1)


def _short_rate_paths(psi: np.ndarray) -> np.ndarray:
    return psi[0] + psi[1] ** 2


def _spread_paths(psi: np.ndarray, params: ModelParams) -> np.ndarray:
    return params.kappa * psi[0] + psi[2] ** 2


def _cum_trapz_to(times: np.ndarray, vals: np.ndarray, t: float) -> np.ndarray:
    """Trapezoid integral of vals(u) over [0, t]; t must be a grid point."""
    idx = int(np.searchsorted(times, t))
    if idx == 0:
        return np.zeros(vals.shape[0])
    return _trapz(vals[:, : idx + 1], times[: idx + 1], axis=1)


def mc_bond(
    params: ModelParams, T: float, curve: str, config: McConfig
) -> McEstimate:
    """Bond price as E[exp(-integral of the short rate (plus spread))]."""
    times = _make_grid([T], config.steps_per_year)

    def payoff(ts, psi):
        rate = _short_rate_paths(psi)
        if curve == "LIBOR":
            rate = rate + _spread_paths(psi, params)
        return np.exp(-_cum_trapz_to(ts, rate, T))

    return _run(params, times, config, payoff)


def mc_forward_expectation(
    params: ModelParams,
    T: float,
    T_star: float,
    payoff: Callable[[np.ndarray], np.ndarray],
    config: McConfig,
) -> McEstimate:
    """E under the T_star-forward measure of payoff(psi_T), estimated under
    the risk-neutral measure with the density p(T,T*)/(B_T p(0,T*)) built
    from the closed-form bond and the trapezoid bank account.

    payoff takes the factor values at T, shape (3, n), and returns (n,).
    """
    from . import coeffs

    p0 = ois_bond(FactorState(0.0, params.psi0), T_star, params).value
    cb = coeffs.bundle(T, T_star, params)

    times = _make_grid([T, T_star], config.steps_per_year)

    def discounted(ts, psi):
        idx = int(np.searchsorted(ts, T))
        psi_t = psi[:, :, idx]
        bank = np.exp(_cum_trapz_to(ts, _short_rate_paths(psi), T))
        p_t = np.exp(-cb.A - cb.B1 * psi_t[0] - cb.C22 * psi_t[1] ** 2)
        return p_t / (bank * p0) * payoff(psi_t)

    return _run(params, times, config, discounted)


def _libor_recip(psi_t: np.ndarray, T: float, delta: float, params: ModelParams):
    """1 / pbar(T, T+delta) at the simulated factor values, vectorized via the
    closed-form exponent."""
    from . import coeffs

    cb = coeffs.bundle(T, T + delta, params)
    return np.exp(
        cb.A_bar
        + cb.B1_bar * psi_t[0]
        + cb.C22 * psi_t[1] ** 2
        + cb.C33_bar * psi_t[2] ** 2
    )


def mc_price(
    params: ModelParams,
    product: ProductSpec,
    config: McConfig,
    floorlet: bool = False,
) -> McEstimate:
    """Discounted-payoff Monte Carlo price of a FRA, swap, caplet/floorlet,
    or swaption under the risk-neutral measure.

    The swaption uses the analytic swap valuation at expiry (no nested
    simulation); that inner formula is validated separately against the
    nested-free swap estimator.
    """
    if isinstance(product, FraSpec):
        T, delta = product.T, product.delta
        times = _make_grid([T, T + delta], config.steps_per_year)
        strike = 1.0 + delta * product.R

        def payoff(ts, psi):
            idx = int(np.searchsorted(ts, T))
            recip = _libor_recip(psi[:, :, idx], T, delta, params)
            disc = np.exp(-_cum_trapz_to(ts, _short_rate_paths(psi), T + delta))
            return product.notional * disc * (recip - strike)

        return _run(params, times, config, payoff)

    if isinstance(product, CapletSpec):
        T, delta = product.T, product.delta
        times = _make_grid([T, T + delta], config.steps_per_year)
        strike = product.r_tilde

        def payoff(ts, psi):
            idx = int(np.searchsorted(ts, T))
            recip = _libor_recip(psi[:, :, idx], T, delta, params)
            disc = np.exp(-_cum_trapz_to(ts, _short_rate_paths(psi), T + delta))
            intrinsic = strike - recip if floorlet else recip - strike
            return product.notional * disc * np.maximum(intrinsic, 0.0)

        return _run(params, times, config, payoff)

    if isinstance(product, SwapSpec):
        swap = product
        dates = [swap.T0] + [swap.pay_date(k) for k in range(1, swap.n + 1)]
        times = _make_grid(dates, config.steps_per_year)

        def payoff(ts, psi):
            rate = _short_rate_paths(psi)
            total = 0.0
            for k in range(1, swap.n + 1):
                t_fix, t_pay = swap.fix_date(k), swap.pay_date(k)
                idx = int(np.searchsorted(ts, t_fix))
                recip = _libor_recip(psi[:, :, idx], t_fix, swap.gamma, params)
                disc = np.exp(-_cum_trapz_to(ts, rate, t_pay))
                total = total + disc * (recip - 1.0 - swap.gamma * swap.R)
            return swap.notional * total

        return _run(params, times, config, payoff)

    if isinstance(product, SwaptionSpec):
        swap = product.swap
        asm = _SwaptionAssembly(swap, params)
        t0 = swap.T0
        times = _make_grid([t0], config.steps_per_year)

        def payoff(ts, psi):
            x, y, z = psi[0, :, -1], psi[1, :, -1], psi[2, :, -1]
            value = asm.g(x, y, z) - asm.h(x, y)
            disc = np.exp(-_cum_trapz_to(ts, _short_rate_paths(psi), t0))
            return swap.notional * disc * np.maximum(value, 0.0)

        return _run(params, times, config, payoff)

    raise TypeError(f"unsupported product type {type(product).__name__}")
