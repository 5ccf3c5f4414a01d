"""Standing-wave profile eps chi' = sqrt(W(chi) + eps) and the constants Phi, c0."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from ..energy import double_well


class IntegratorError(RuntimeError):
    """The ODE integrator failed or produced a non-monotone profile."""


@dataclass(frozen=True)
class StandingWave:
    """Truncated transition profile from ``alpha`` to ``beta``.

    Internally the ODE is always solved for an increasing variable: when
    ``alpha > beta`` the profile of W~(s) = W(-s) from -alpha to -beta is
    stored and ``sign`` is -1, so ``profile(t) = sign * chi~(t)``.
    """

    eps: float
    eta: float
    alpha: float
    beta: float
    sign: float
    t: np.ndarray  # tabulation nodes on [0, eta]
    chi: np.ndarray  # increasing internal solution at those nodes
    _sol: object

    def chi_internal(self, t):
        """Truncated increasing solution chi~ (clamped outside [0, eta])."""
        t = np.asarray(t, dtype=float)
        lo, hi = self.sign * self.alpha, self.sign * self.beta
        inner = np.clip(t, 0.0, self.eta)
        v = self._sol(inner.ravel())[0].reshape(inner.shape)
        v = np.where(t <= 0.0, lo, np.where(t >= self.eta, hi, v))
        return np.clip(v, lo, hi)

    def __call__(self, t):
        """Oriented profile: alpha for t <= 0, beta for t >= eta."""
        return self.sign * self.chi_internal(t)


def solve_chi(eps: float, W: Callable = double_well, alpha: float = 0.0, beta: float = 1.0,
              rtol: float = 1e-11, atol: float = 1e-13) -> StandingWave:
    """Integrate the standing-wave ODE until the solution reaches ``beta``.

    Adaptive RK45 with dense output; the stopping point eta is located by the
    event root finder, so |chi(eta) - beta| is at rounding level.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if alpha == beta:
        raise ValueError("alpha and beta must differ")
    sign = 1.0 if alpha < beta else -1.0
    Wi = W if sign > 0 else (lambda s: W(-s))
    a, b = sign * alpha, sign * beta

    def rhs(_, y):
        return [np.sqrt(max(Wi(y[0]), 0.0) + eps) / eps]

    def reach(_, y):
        return y[0] - b
    reach.terminal = True
    reach.direction = 1

    # the slope is at least 1/sqrt(eps), so this horizon always suffices
    t_max = 2.0 * (b - a) * np.sqrt(eps) + 1.0
    res = integrate.solve_ivp(rhs, (0.0, t_max), [a], method="RK45", rtol=rtol, atol=atol,
                              events=reach, dense_output=True)
    if res.status == -1:
        raise IntegratorError(f"integration failed: {res.message}")
    if res.status != 1 or len(res.t_events[0]) == 0:
        raise IntegratorError("solution did not reach beta")
    eta = float(res.t_events[0][0])
    t = res.t[res.t < eta]
    chi = res.sol(t)[0]
    if np.any(np.diff(chi) <= 0):
        raise IntegratorError("numerical solution is not strictly increasing")
    end = float(res.sol(eta)[0])
    if abs(end - b) > 1e-10:
        raise IntegratorError(f"|chi(eta) - beta| = {abs(end - b):.3g}")
    return StandingWave(float(eps), eta, float(alpha), float(beta), sign,
                        np.append(t, eta), np.append(chi, b), res.sol)


def Phi_of(s, W: Callable = double_well) -> float:
    """Integral of sqrt(W) from 0 to s."""
    val, _ = integrate.quad(lambda r: np.sqrt(max(W(r), 0.0)), 0.0, float(s),
                            epsabs=1e-14, epsrel=1e-12)
    return float(val)


def c0(alpha: float = 1.0, beta: float = 0.0, W: Callable = double_well) -> float:
    """Integral of sqrt(W) between the wells, oriented so it is positive.

    For alpha > beta this is the integral of sqrt(W(-s)) from -alpha to -beta.
    """
    if alpha > beta:
        return c0(-alpha, -beta, lambda s: W(-s))
    val, _ = integrate.quad(lambda r: np.sqrt(max(W(r), 0.0)), alpha, beta,
                            epsabs=1e-14, epsrel=1e-12)
    return float(val)
