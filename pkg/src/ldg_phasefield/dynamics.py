"""Volume-preserving gradient flow for the reduced energy.

The flow is the plain L2 gradient flow of the discrete energy (derivatives are
divided by the interior quadrature weight h^2).  Each step picks the time step
by backtracking so the energy never increases, then restores the volume
constraint by a constant shift of the interior phase field.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from .energy import EnergyBreakdown, _breakdown, evaluate
from .fields import Grid2D, PTensorField, ScalarField, integrate
from .tensor import MaterialConstants, ModelParams, QTensor, bulk_density, bulk_gradient

logger = logging.getLogger(__name__)


class StagnationError(RuntimeError):
    """Backtracking drove the time step below ``min_dt`` without an energy decrease."""

    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


@dataclass(frozen=True)
class SolverConfig:
    max_iter: int = 20000
    tol: float = 1e-4
    dt_init: float = 1e-5
    beta: float = 0.5
    min_dt: float = 1e-14
    dt_growth: float = 1.2
    dt_max: float = 1e-2
    seed: int = 0
    method: str = "flow"  # "flow" or "lbfgs"
    record_every: int = 1

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0.0 < self.beta < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        if not self.dt_init > self.min_dt > 0:
            raise ValueError("need dt_init > min_dt > 0")
        if self.method not in ("flow", "lbfgs"):
            raise ValueError(f"unknown method {self.method!r}")


@dataclass
class SolverState:
    P: PTensorField
    phi: ScalarField
    iteration: int
    energy: EnergyBreakdown
    xi: float = 0.0
    dt: float = 1e-5
    grad_norm: float = float("inf")

    @property
    def grid(self) -> Grid2D:
        return self.P.grid


@dataclass
class MinimizeReport:
    stop_reason: str  # "converged" | "max_iter" | "stagnation" | "line_search"
    iterations: int
    grad_norm: float
    energy_history: list = field(default_factory=list)
    volume_history: list = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return self.stop_reason == "converged"


def _nodal_derivatives(P: PTensorField, phi: ScalarField, params: ModelParams):
    ev = evaluate(P.p11, P.p12, phi.values, params, P.grid, derivatives=True)
    h2 = P.grid.h ** 2
    interior = P.grid.interior_mask()
    g11 = ev.d_p11 / (2.0 * h2)
    g12 = ev.d_p12 / (2.0 * h2)
    gphi = ev.d_phi / h2
    xi = float(np.mean(gphi[interior]))
    return ev, g11, g12, gphi, xi


def var_derivative_P(P: PTensorField, phi: ScalarField, params: ModelParams) -> PTensorField:
    """L2 variational derivative of the energy with respect to the tensor P.

    Returned as the tensor entries (G11, G12) under the Frobenius pairing, so
    dE = sum_nodes h^2 * 2 * (G11 dp11 + G12 dp12).
    """
    _, g11, g12, _, _ = _nodal_derivatives(P, phi, params)
    return PTensorField(P.grid, g11, g12)


def var_derivative_phi(P: PTensorField, phi: ScalarField, params: ModelParams):
    """Unconstrained L2 derivative in phi and the volume multiplier xi.

    ``xi`` is the interior mean of the derivative, so ``field - xi`` has zero
    discrete integral over the interior.
    """
    _, _, _, gphi, xi = _nodal_derivatives(P, phi, params)
    return ScalarField(P.grid, gphi), xi


def project_volume(phi: np.ndarray, grid: Grid2D, v0: float) -> np.ndarray:
    """Shift interior values by a constant so the trapezoidal integral equals v0."""
    interior = grid.interior_mask()
    shift = (v0 - integrate(phi, grid)) / (grid.h ** 2 * interior.sum())
    out = phi.copy()
    out[interior] += shift
    return out


def _grad_norm(g11, g12, gphi, xi, interior) -> float:
    return float(max(np.max(np.abs(g11[interior])), np.max(np.abs(g12[interior])),
                     np.max(np.abs(gphi[interior] - xi))))


def _make_state(P, phi, params, iteration, dt) -> SolverState:
    ev, g11, g12, gphi, xi = _nodal_derivatives(P, phi, params)
    gn = _grad_norm(g11, g12, gphi, xi, P.grid.interior_mask())
    return SolverState(P, phi, iteration, _breakdown(ev, params), xi, dt, gn)


def step(state: SolverState, config: SolverConfig, params: ModelParams) -> SolverState:
    """One explicit gradient-flow step with backtracking on the joint energy."""
    grid = state.grid
    interior = grid.interior_mask()
    ev, g11, g12, gphi, xi = _nodal_derivatives(state.P, state.phi, params)
    e0 = ev.total
    gn = _grad_norm(g11, g12, gphi, xi, interior)
    if gn == 0.0:
        return replace(state, iteration=state.iteration + 1, xi=xi, grad_norm=0.0)
    slack = 5e-13 * abs(e0)  # margin below the 1e-12 monotonicity tolerance
    dphi = np.where(interior, gphi - xi, 0.0)
    dt = min(state.dt, config.dt_max)
    while dt >= config.min_dt:
        p11 = state.P.p11 - dt * g11
        p12 = state.P.p12 - dt * g12
        phi = project_volume(state.phi.values - dt * dphi, grid, params.v0_bar)
        e1 = evaluate(p11, p12, phi, params, grid).total
        if e1 <= e0 + slack:
            P = PTensorField(grid, p11, p12)
            new = _make_state(P, ScalarField(grid, phi), params, state.iteration + 1,
                              min(dt * config.dt_growth, config.dt_max))
            return new
        dt *= config.beta
    raise StagnationError(f"time step fell below {config.min_dt:g} at iteration {state.iteration} "
                          f"(energy {e0:.12g}, gradient norm {gn:.3g})", state)


def _minimize_flow(state, config, params, report):
    while state.iteration < config.max_iter:
        if state.grad_norm < config.tol:
            report.stop_reason = "converged"
            return state
        try:
            state = step(state, config, params)
        except StagnationError:
            report.stop_reason = "stagnation"
            report.iterations = state.iteration
            report.grad_norm = state.grad_norm
            raise
        if state.iteration % config.record_every == 0:
            report.energy_history.append(state.energy.total)
            report.volume_history.append(integrate(state.phi))
    report.stop_reason = "converged" if state.grad_norm < config.tol else "max_iter"
    return state


def _minimize_lbfgs(state, config, params, report):
    grid = state.grid
    interior = grid.interior_mask()
    n_int = int(interior.sum())
    h2 = grid.h ** 2
    v0 = params.v0_bar

    def unpack(x):
        p11 = np.zeros((grid.n, grid.n))
        p12 = np.zeros_like(p11)
        phi = np.zeros_like(p11)
        p11[interior] = x[:n_int]
        p12[interior] = x[n_int:2 * n_int]
        u = x[2 * n_int:]
        # affine elimination of the volume constraint
        phi[interior] = u + (v0 / h2 - u.sum()) / n_int
        return p11, p12, phi

    def fun(x):
        p11, p12, phi = unpack(x)
        ev = evaluate(p11, p12, phi, params, grid, derivatives=True)
        dphi = ev.d_phi[interior]
        g = np.concatenate([ev.d_p11[interior], ev.d_p12[interior], dphi - dphi.mean()])
        return ev.total, g

    def callback(xk):
        nonlocal it
        it += 1
        if it % config.record_every == 0:
            report.energy_history.append(fun(xk)[0])
            report.volume_history.append(v0)

    it = state.iteration
    x0 = np.concatenate([state.P.p11[interior], state.P.p12[interior], state.phi.values[interior]])
    res = optimize.minimize(fun, x0, jac=True, method="L-BFGS-B", callback=callback,
                            options={"maxiter": max(config.max_iter - state.iteration, 0),
                                     "maxfun": 4 * max(config.max_iter, 1),
                                     "gtol": 0.25 * config.tol * h2, "ftol": 1e-16, "maxcor": 30,
                                     "maxls": 40})
    p11, p12, phi = unpack(res.x)
    phi = project_volume(phi, grid, v0)
    new = _make_state(PTensorField(grid, p11, p12), ScalarField(grid, phi), params, it, state.dt)
    if new.grad_norm < config.tol:
        report.stop_reason = "converged"
    elif it >= config.max_iter:
        report.stop_reason = "max_iter"
    else:
        report.stop_reason = "line_search"
    logger.debug("L-BFGS finished: %s (%s)", res.message, report.stop_reason)
    return new


def minimize(init: SolverState, config: SolverConfig, params: ModelParams):
    """Iterate until the projected gradient max-norm drops below ``config.tol``.

    Returns ``(state, report)``.  ``report.stop_reason`` distinguishes
    convergence from ``max_iter`` exhaustion; stagnation of the flow raises
    :class:`StagnationError`.
    """
    state = _make_state(init.P, init.phi, params, 0, config.dt_init)
    report = MinimizeReport("max_iter", 0, state.grad_norm, [state.energy.total], [integrate(state.phi)])
    if state.grad_norm < config.tol or config.max_iter <= 0:
        report.stop_reason = "converged" if state.grad_norm < config.tol else "max_iter"
        return state, report
    if config.method == "lbfgs":
        state = _minimize_lbfgs(state, config, params, report)
    else:
        state = _minimize_flow(state, config, params, report)
    report.iterations = state.iteration
    report.grad_norm = state.grad_norm
    return state, report


def init_state(kind: str, params: ModelParams, grid: Grid2D, seed: int = 0,
               director_angle: float = 0.0, order_factor: float = 0.1,
               noise: float = 0.01) -> SolverState:
    """Centred tanh disc of area ``v0_bar`` with a uniform or noisy director.

    ``disc_tanh`` puts a uniform director (angle ``director_angle``) of order
    ``order_factor * s_+/2`` inside phi > 1/2; ``random`` uses seeded noise of
    amplitude ``noise`` instead.
    """
    if kind not in ("disc_tanh", "random"):
        raise ValueError(f"unknown initial state kind {kind!r}")
    X, Y = grid.mesh()
    r = np.sqrt(params.v0_bar / np.pi)
    d = np.hypot(X - 0.5, Y - 0.5) - r
    phi = 0.5 * (1.0 - np.tanh(d / (np.sqrt(2.0) * params.eps_bar)))
    interior = grid.interior_mask()
    phi = np.where(interior, phi, 0.0)
    phi = project_volume(phi, grid, params.v0_bar)
    if kind == "disc_tanh":
        amp = order_factor * params.s_plus / 2.0
        inside = (phi > 0.5) & interior
        p11 = np.where(inside, amp * np.cos(2 * director_angle), 0.0)
        p12 = np.where(inside, amp * np.sin(2 * director_angle), 0.0)
    else:
        rng = np.random.default_rng(seed)
        p11 = np.where(interior, noise * rng.standard_normal((grid.n, grid.n)), 0.0)
        p12 = np.where(interior, noise * rng.standard_normal((grid.n, grid.n)), 0.0)
    P = PTensorField(grid, p11, p12)
    return _make_state(P, ScalarField(grid, phi), params, 0, 1e-5)


GRADCHECK_TERMS = ("ldg", "mix", "anch", "void", "full")


def _term_params(params: ModelParams, term: str) -> ModelParams:
    keep = {"ldg": (), "mix": ("omega_p_bar",), "anch": ("omega_a_bar",), "void": ("omega_v_bar",),
            "full": ("omega_p_bar", "omega_a_bar", "omega_v_bar")}[term]
    kw = {k: (getattr(params, k) if k in keep else 0.0)
          for k in ("omega_p_bar", "omega_a_bar", "omega_v_bar")}
    return params.replace(**kw)


def gradient_check(params: ModelParams | None = None, seed: int = 0, n: int = 16, n_dirs: int = 20,
                   step: float = 1e-6, evaluator=evaluate) -> dict:
    """Max relative error of analytic directional derivatives against central differences.

    Each term is switched on alone (the LdG part is always present, so a
    term's contribution is isolated by subtracting the all-weights-zero
    energy); "full" uses every weight.  The fourth-order stencil
    (8 (f(t) - f(-t)) - (f(2t) - f(-2t))) / 12t is used on random interior
    fields.  ``bulk3d`` checks the 3D bulk gradient the same way.
    """
    if params is None:
        params = ModelParams.from_physical(MaterialConstants.mbba(), 2e-6, eps_bar=0.05,
                                           omega_a_over_L=9e7)
    grid = Grid2D(n)
    rng = np.random.default_rng(seed)
    interior = grid.interior_mask()

    def rand(scale=1.0, uniform=False):
        v = rng.uniform(size=(n, n)) if uniform else scale * rng.standard_normal((n, n))
        return np.where(interior, v, 0.0)

    base = (rand(0.5), rand(0.5), rand(uniform=True))
    zero = _term_params(params, "ldg")
    out = {}
    for term in GRADCHECK_TERMS:
        par = _term_params(params, term)
        subtract = term not in ("ldg", "full")

        def energy(s, v, par=par, subtract=subtract):
            args = [b + s * d for b, d in zip(base, v)]
            e = evaluator(*args, par, grid).total
            return e - evaluator(*args, zero, grid).total if subtract else e

        ev = evaluator(*base, par, grid, True)
        d = [ev.d_p11, ev.d_p12, ev.d_phi]
        if subtract:
            ev0 = evaluator(*base, zero, grid, True)
            d = [a - b for a, b in zip(d, [ev0.d_p11, ev0.d_p12, ev0.d_phi])]
        worst = 0.0
        for _ in range(n_dirs):
            v = (rand(), rand(), rand())
            fd = (8.0 * (energy(step, v) - energy(-step, v))
                  - (energy(2 * step, v) - energy(-2 * step, v))) / (12.0 * step)
            an = sum(float(np.sum(a * b)) for a, b in zip(d, v))
            worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
        out[term] = worst

    mat = params.material
    worst = 0.0
    for _ in range(n_dirs):
        q = QTensor(rng.standard_normal(5))
        dq = QTensor.from_matrix(rng.standard_normal((3, 3)))

        def f(s, q=q, dq=dq):
            return bulk_density(QTensor(q.q + s * dq.q), mat) / mat.C

        fd = (8.0 * (f(step) - f(-step)) - (f(2 * step) - f(-2 * step))) / (12.0 * step)
        an = float(np.sum(bulk_gradient(q, mat).matrix() * dq.matrix()))
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-300))
    out["bulk3d"] = worst
    return out
