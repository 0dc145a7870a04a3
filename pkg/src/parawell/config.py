"""JSON experiment configuration.

Schema (all keys optional unless noted)::

    {
      "name": "sweep1d",                    # experiment id written to CSVs
      "problem": "TM1D" | "TM2D",           # required
      "grid": {"nx": 99, "ny": 99, "extent_x": 6.283..., "extent_y": 6.283...,
               "epsilon": 1.0, "mu": 1.0},
      "noise": {"kind": "standard_bm" | "trace_class", "shared_w": true,
                "a": 2.0, "r": 0.5, "delta": 0.001, "n_modes": 100},
      "sigma_list": [0, 2, 8, 32],
      "lambda_list": [1],                   # lambda_1 = lambda_2 = value
      "dT": 0.015625 | [0.03125, ...],      # coarse step(s)
      "dt": 0.00390625,                     # fine step; dT/dt must be an integer
      "T_end": 1.0,                         # T_end/dT must be an integer
      "K": 12,
      "mc_samples": 64,
      "master_seed": 20240101,
      "chunk_size": 16,                     # samples per batch (fixed => replayable)
      "semigroup": {"strategy": "auto" | "dense" | "krylov", "m": 30, "tol": 1e-10},
      "orders_k": [1, 2, 3, 4, 5]           # k values reported by converge-order
    }
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError

PROBLEMS = ("TM1D", "TM2D")
TWO_PI = 2 * math.pi


def _ratio(num, den, name):
    q = num / den
    r = round(q)
    if r < 1 or not math.isclose(q, r, rel_tol=1e-9, abs_tol=1e-9):
        raise ConfigError(name, f"{num} / {den} is not a positive integer")
    return int(r)


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    name: str = "experiment"
    nx: int = 99
    ny: int = 99
    extent_x: float = TWO_PI
    extent_y: float = TWO_PI
    epsilon: float = 1.0
    mu: float = 1.0
    noise_kind: str = "standard_bm"
    shared_w: bool = True
    a: float = 2.0
    r: float = 0.5
    delta: float = 0.001
    n_modes: int = 100
    sigma_list: tuple[float, ...] = (2.0,)
    lambda_list: tuple[float, ...] = (1.0,)
    dT_list: tuple[float, ...] = (2.0**-6,)
    dt: float = 2.0**-8
    T_end: float = 1.0
    K: int = 12
    mc_samples: int = 64
    master_seed: int = 20240101
    chunk_size: int = 16
    strategy: str = "auto"
    krylov_m: int = 30
    krylov_tol: float = 1e-10
    orders_k: tuple[int, ...] = ()
    threads: int = 1
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise ConfigError("problem", f"must be one of {PROBLEMS}")
        if self.nx < 2 or (self.problem == "TM2D" and self.ny < 2):
            raise ConfigError("grid.nx", "need at least 2 interior points per direction")
        if not (self.epsilon > 0 and self.mu > 0):
            raise ConfigError("grid.epsilon", "epsilon and mu must be positive")
        if self.noise_kind not in ("standard_bm", "trace_class"):
            raise ConfigError("noise.kind", "must be 'standard_bm' or 'trace_class'")
        if not self.sigma_list or any(s < 0 for s in self.sigma_list):
            raise ConfigError("sigma_list", "need at least one sigma, all >= 0")
        if not self.lambda_list or any(v < 0 for v in self.lambda_list):
            raise ConfigError("lambda_list", "need at least one lambda, all >= 0")
        if not self.dT_list:
            raise ConfigError("dT", "need at least one coarse step")
        if not self.dt > 0:
            raise ConfigError("dt", "must be > 0")
        for dT in self.dT_list:
            if not dT > 0:
                raise ConfigError("dT", "must be > 0")
            _ratio(dT, self.dt, "dT")
            _ratio(self.T_end, dT, "T_end")
        if self.K < 0:
            raise ConfigError("K", "must be >= 0")
        if self.mc_samples < 1:
            raise ConfigError("mc_samples", "must be >= 1")
        if self.chunk_size < 1:
            raise ConfigError("chunk_size", "must be >= 1")
        if self.strategy not in ("auto", "dense", "krylov"):
            raise ConfigError("semigroup.strategy", "must be auto, dense or krylov")
        if self.threads < 1:
            raise ConfigError("threads", "must be >= 1")

    def J(self, dT: float) -> int:
        return _ratio(dT, self.dt, "dT")

    def N(self, dT: float) -> int:
        return _ratio(self.T_end, dT, "T_end")

    def override(self, **changes) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("<root>", "config must be a JSON object")
        if "problem" not in data:
            raise ConfigError("problem", "missing")
        kw = {"problem": data["problem"]}
        simple = ("name", "dt", "T_end", "K", "mc_samples", "master_seed", "chunk_size", "threads")
        for key in simple:
            if key in data:
                kw[key] = data[key]
        grid = data.get("grid", {})
        for key in ("nx", "ny", "extent_x", "extent_y", "epsilon", "mu"):
            if key in grid:
                kw[key] = grid[key]
        noise = data.get("noise", {})
        if "kind" in noise:
            kw["noise_kind"] = noise["kind"]
        for key in ("shared_w", "a", "r", "delta", "n_modes"):
            if key in noise:
                kw[key] = noise[key]
        sg = data.get("semigroup", {})
        if "strategy" in sg:
            kw["strategy"] = sg["strategy"]
        if "m" in sg:
            kw["krylov_m"] = sg["m"]
        if "tol" in sg:
            kw["krylov_tol"] = sg["tol"]
        for key in ("sigma_list", "lambda_list", "orders_k"):
            if key in data:
                if not isinstance(data[key], list):
                    raise ConfigError(key, "must be a list")
                kw[key] = tuple(data[key])
        if "dT" in data:
            dT = data["dT"]
            kw["dT_list"] = tuple(dT) if isinstance(dT, list) else (dT,)
        known = {"problem", "grid", "noise", "semigroup", "sigma_list", "lambda_list",
                 "orders_k", "dT", "experiment", "notes", "outputs", *simple}
        kw["extra"] = {k: v for k, v in data.items() if k not in known}
        try:
            return cls(**kw)
        except TypeError as exc:  # wrong value types surface here
            raise ConfigError("<root>", str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        text = Path(path).read_text()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(str(path), f"invalid JSON: {exc}") from exc
        return cls.from_dict(data)
