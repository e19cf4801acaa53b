"""Independent numerical oracles used by the test suite.

Everything here deliberately avoids the production code paths it is used
to validate: the Riccati coefficients are re-solved by brute-force
backward RK4, integrals by composite Simpson with step halving, forward
rates by finite differences of log bond prices, and the caplet by direct
3-D integration of the raw discounted payoff (with the x-axis split at
the payoff kink so Gauss-Legendre converges spectrally).
"""

from __future__ import annotations

import math

import numpy as np

from twocurve import coeffs, ois_bond
from twocurve.measures import forward_moments
from twocurve.model import FactorState


def rk4_backward(f, terminal: float, t_hi: float, t_lo: float, n_steps: int) -> float:
    """Integrate y' = f(t, y) backward from y(t_hi) = terminal to t_lo."""
    h = (t_hi - t_lo) / n_steps
    y, t = terminal, t_hi
    for _ in range(n_steps):
        k1 = f(t, y)
        k2 = f(t - 0.5 * h, y - 0.5 * h * k1)
        k3 = f(t - 0.5 * h, y - 0.5 * h * k2)
        k4 = f(t - h, y - h * k3)
        y -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t -= h
    return y


def riccati_rk4(b: float, sigma: float, tau: float, n_steps: int = 2000) -> float:
    """C(t, t+tau) for dC/dt = 2bC + 2 sigma^2 C^2 - 1, C(T, T) = 0."""
    return rk4_backward(
        lambda t, c: 2.0 * b * c + 2.0 * sigma * sigma * c * c - 1.0,
        0.0, tau, 0.0, n_steps,
    )


def linear_b_rk4(b: float, tau: float, n_steps: int = 2000) -> float:
    """B(t, t+tau) for dB/dt = b B - 1, B(T, T) = 0."""
    return rk4_backward(lambda t, y: b * y - 1.0, 0.0, tau, 0.0, n_steps)


def simpson(f, lo: float, hi: float, n: int = 512) -> float:
    if n % 2:
        n += 1
    xs = np.linspace(lo, hi, n + 1)
    ys = np.array([f(x) for x in xs])
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float((hi - lo) / (3.0 * n) * np.dot(w, ys))


def simpson_adaptive(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    n = 64
    prev = simpson(f, lo, hi, n)
    for _ in range(10):
        n *= 2
        cur = simpson(f, lo, hi, n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


def fd_forward(state: FactorState, T: float, params, bond_fn, h: float = 1e-5) -> float:
    """-d/dT log bond via 4th-order central differences of the bond price."""
    vals = [math.log(bond_fn(state, T + k * h, params).value) for k in (-2, -1, 1, 2)]
    return -(-vals[3] + 8.0 * vals[2] - 8.0 * vals[1] + vals[0]) / (12.0 * h)


def caplet_3d_quadrature(caplet, params, n: int = 96, trunc: float = 8.0) -> float:
    """Direct 3-D integration of p(0,T+d) * E[(exp(quadratic) - Rtilde)^+].

    Integrates x innermost: for fixed (y, z) the payoff kinks at a single
    closed-form x*, so each x-panel is smooth.  Independent of the
    production pricer's region/assembly logic.
    """
    T, delta = caplet.T, caplet.delta
    cb = coeffs.bundle(T, T + delta, params)
    kb = (1.0 + params.kappa) * cb.B1
    rt = 1.0 + delta * caplet.R
    ln_rt = math.log(rt)
    fm = forward_moments(T, T + delta, params)
    a1, a2, a3 = fm.alpha
    s1, s2, s3 = (math.sqrt(v) for v in fm.beta)

    gx, gw = np.polynomial.legendre.leggauss(n)

    def axis(mu, s):
        lo, hi = mu - trunc * s, mu + trunc * s
        pts = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gx
        wts = 0.5 * (hi - lo) * gw * np.exp(-0.5 * ((pts - mu) / s) ** 2) / (
            s * math.sqrt(2.0 * math.pi)
        )
        return pts, wts

    ys, wys = axis(a2, s2)
    zs, wzs = axis(a3, s3)
    x_lo, x_hi = a1 - trunc * s1, a1 + trunc * s1

    total = 0.0
    for yj, wyj in zip(ys, wys):
        for zk, wzk in zip(zs, wzs):
            c0 = cb.A_bar + cb.C22 * yj * yj + cb.C33_bar * zk * zk
            if kb == 0.0:
                panels = [(x_lo, x_hi)] if c0 >= ln_rt else []
            else:
                x_star = (ln_rt - c0) / kb
                if kb > 0.0:
                    lo = min(max(x_star, x_lo), x_hi)
                    panels = [(lo, x_hi)]
                else:
                    hi = min(max(x_star, x_lo), x_hi)
                    panels = [(x_lo, hi)]
            acc = 0.0
            for lo, hi in panels:
                if hi <= lo:
                    continue
                xs = 0.5 * (hi + lo) + 0.5 * (hi - lo) * gx
                wxs = 0.5 * (hi - lo) * gw
                f1 = np.exp(-0.5 * ((xs - a1) / s1) ** 2) / (s1 * math.sqrt(2.0 * math.pi))
                acc += float(np.sum(wxs * f1 * (np.exp(c0 + kb * xs) - rt)))
            total += wyj * wzk * acc
    p0 = ois_bond(FactorState(0.0, params.psi0), T + delta, params).value
    return caplet.notional * p0 * total


def rho_riccati_rk4(lam, sigma_sq: float, terminal: float, t_hi: float,
                    t_lo: float, n_steps: int = 4000):
    """Backward RK4 for rho' = 2 lam(t) rho + 2 sigma^2 rho^2 from
    rho(t_hi) = terminal, returning (rho(t_lo), Gamma(t_lo)) with
    Gamma' = sigma^2 rho and Gamma(t_hi) = 0."""
    h = (t_hi - t_lo) / n_steps
    rho, gam, t = terminal, 0.0, t_hi

    def f(u, r):
        return 2.0 * lam(u) * r + 2.0 * sigma_sq * r * r

    for _ in range(n_steps):
        k1, g1 = f(t, rho), sigma_sq * rho
        r2 = rho - 0.5 * h * k1
        k2, g2 = f(t - 0.5 * h, r2), sigma_sq * r2
        r3 = rho - 0.5 * h * k2
        k3, g3 = f(t - 0.5 * h, r3), sigma_sq * r3
        r4 = rho - h * k3
        k4, g4 = f(t - h, r4), sigma_sq * r4
        rho -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        gam -= (h / 6.0) * (g1 + 2.0 * g2 + 2.0 * g3 + g4)
        t -= h
    return rho, gam
