"""JSON run configuration.

Schema (every key optional; unknown keys are rejected)::

    {
      "grid_n": 128,
      "material": {"A": null, "B": 6400.0, "C": 3500.0, "L": 4e-11},
      "lambda": 8e-7,
      "eps_bar": 0.005,
      "v0_bar": 0.09,
      "omega_p_over_L": 3e7,
      "omega_a_over_L": 1e7,
      "omega_v_over_L": 6e14,
      "solver": {"method": "lbfgs", "max_iter": 40000, "tol": 1e-3, ...},
      "init": {"kind": "disc_tanh", "director_angle": 0.0, "order_factor": 0.1, "noise": 0.01},
      "gamma": {"director_angle": 0.0, "grid_n": null, "band_halfwidth": 0.05, "profile": "ode"},
      "thresholds": {"radial_max_aspect": 1.15, ...},
      "seed": 0,
      "output": "out"
    }

``material.A = null`` means A = -B^2/(3C).  ``solver`` takes the fields of
:class:`SolverConfig`; ``thresholds`` those of :class:`Thresholds`.
``gamma.grid_n = null`` picks the grid per eps so that h <= eps / 2.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace

from .analysis import Thresholds
from .dynamics import SolverConfig
from .tensor import MaterialConstants, ModelParams


class ConfigError(ValueError):
    """Invalid or unreadable configuration."""


_MBBA = {"A": None, "B": 0.64e4, "C": 0.35e4, "L": 4e-11}


@dataclass(frozen=True)
class InitConfig:
    kind: str = "disc_tanh"
    director_angle: float = 0.0
    order_factor: float = 0.1
    noise: float = 0.01


@dataclass(frozen=True)
class GammaConfig:
    director_angle: float = 0.0
    grid_n: int | None = None
    band_halfwidth: float = 0.05
    profile: str = "ode"


DEFAULT_SOLVER = SolverConfig(max_iter=40000, tol=1e-3, method="lbfgs")


@dataclass(frozen=True)
class RunConfig:
    grid_n: int = 128
    material: dict = field(default_factory=lambda: dict(_MBBA))
    lam: float = 0.8e-6
    eps_bar: float = 0.005
    v0_bar: float = 0.09
    omega_p_over_L: float = 3e7
    omega_a_over_L: float = 1e7
    omega_v_over_L: float = 6e14
    solver: SolverConfig = DEFAULT_SOLVER
    init: InitConfig = InitConfig()
    gamma: GammaConfig = GammaConfig()
    thresholds: Thresholds = Thresholds()
    seed: int = 0
    output: str = "out"

    def __post_init__(self):
        if self.grid_n < 16:
            raise ConfigError(f"grid_n must be >= 16, got {self.grid_n}")
        if self.lam <= 0 or self.eps_bar <= 0:
            raise ConfigError("lambda and eps_bar must be positive")
        for k in ("omega_p_over_L", "omega_a_over_L", "omega_v_over_L"):
            if getattr(self, k) < 0:
                raise ConfigError(f"{k} must be non-negative")
        if self.init.kind not in ("disc_tanh", "random"):
            raise ConfigError(f"unknown init kind {self.init.kind!r}")
        if self.gamma.profile not in ("ode", "tanh"):
            raise ConfigError(f"unknown gamma profile {self.gamma.profile!r}")
        try:
            self.materials()
            self.params()
        except (ValueError, TypeError, ZeroDivisionError, KeyError) as exc:
            raise ConfigError(f"invalid material or model parameters: {exc}") from None

    def materials(self) -> MaterialConstants:
        m = self.material
        A = m.get("A")
        if A is None:
            A = -m["B"] ** 2 / (3.0 * m["C"])
        return MaterialConstants(A=float(A), B=float(m["B"]), C=float(m["C"]), L=float(m["L"]))

    def params(self) -> ModelParams:
        return ModelParams.from_physical(self.materials(), self.lam, eps_bar=self.eps_bar,
                                         v0_bar=self.v0_bar, omega_p_over_L=self.omega_p_over_L,
                                         omega_a_over_L=self.omega_a_over_L,
                                         omega_v_over_L=self.omega_v_over_L)

    def with_cell(self, lam: float, omega_a_over_L: float) -> "RunConfig":
        return replace(self, lam=lam, omega_a_over_L=omega_a_over_L)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d


def _sub(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"'{name}' must be an object")
    known = {f.name for f in fields(cls)}
    extra = set(data) - known
    if extra:
        raise ConfigError(f"unknown keys in '{name}': {sorted(extra)}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid '{name}' block: {exc}") from None


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    data = dict(data)
    top = {f.name for f in fields(RunConfig)} - {"lam"} | {"lambda"}
    extra = set(data) - top
    if extra:
        raise ConfigError(f"unknown configuration keys: {sorted(extra)}")
    kw = {}
    if "lambda" in data:
        kw["lam"] = data.pop("lambda")
    mat = dict(_MBBA)
    m = data.pop("material", None) or {}
    if set(m) - set(_MBBA):
        raise ConfigError(f"unknown keys in 'material': {sorted(set(m) - set(_MBBA))}")
    mat.update(m)
    kw["material"] = mat
    solver = data.pop("solver", None)
    if isinstance(solver, dict):
        solver = {**asdict(DEFAULT_SOLVER), **solver}
    kw["solver"] = _sub(SolverConfig, solver, "solver") if solver is not None else DEFAULT_SOLVER
    kw["init"] = _sub(InitConfig, data.pop("init", None), "init")
    kw["gamma"] = _sub(GammaConfig, data.pop("gamma", None), "gamma")
    kw["thresholds"] = _sub(Thresholds, data.pop("thresholds", None), "thresholds")
    kw.update(data)
    try:
        return RunConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> RunConfig:
    """Read a JSON configuration; a missing or malformed file raises :class:`ConfigError`."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return config_from_dict(data)
