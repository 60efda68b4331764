"""JSON experiment configurations with every default materialized."""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field

from ..errors import ConfigError
from ..solver import EquationParams, MonitorSpec, SolverConfig
from ..spectral import SpatialGrid, SpectralField, make_field

DATA_KINDS = ("gaussian", "sech", "planewave", "random_bandlimited", "zero")


@dataclass
class ExperimentConfig:
    """Everything a run needs; ``to_dict`` is echoed into the run manifest.

    ``length_pi`` is the domain length in units of pi (``L = length_pi * pi``);
    keep it even so every integer boost is a grid frequency.
    """

    experiment_id: str = "run"
    a: float = 1.0
    b: float = 1.0
    n_points: int = 256
    length_pi: float = 64.0
    data: dict = field(default_factory=lambda: {"kind": "gaussian", "amplitude": 0.05, "width": 4.0})
    t_final: float = 1.0
    dt: float | None = None
    dealias: str = "pad"
    snapshot_every: float = 0.1
    k_list: list = field(default_factory=lambda: [1.0, 2.0])
    n_range: list = field(default_factory=lambda: [0, 0])
    sp_list: list = field(default_factory=lambda: [[0.0, 2.0], [0.0, 4.0]])
    p: float = 4.0
    operator_half_width: int | None = None
    scaling_lambda: int | None = None
    small_data_eps: float = 0.05
    seed: int = 0
    tolerance_scale: float = 1.0
    threads: int = 1

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**copy.deepcopy(d))
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        try:
            EquationParams(self.a, self.b)
            SpatialGrid(int(self.n_points), self.length)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        kind = self.data.get("kind")
        if kind not in DATA_KINDS:
            raise ConfigError(f"data.kind must be one of {DATA_KINDS}, got {kind!r}")
        if self.t_final < 0 or (self.dt is not None and self.dt <= 0):
            raise ConfigError("t_final must be >= 0 and dt > 0")
        if self.dealias not in ("pad", "two-thirds"):
            raise ConfigError("dealias must be 'pad' or 'two-thirds'")
        if self.snapshot_every <= 0:
            raise ConfigError("snapshot_every must be positive")
        if any(k <= 0 for k in self.k_list):
            raise ConfigError("k values must be positive")
        if len(self.n_range) != 2 or self.n_range[0] > self.n_range[1]:
            raise ConfigError("n_range must be [lo, hi] with lo <= hi")
        for sp in self.sp_list:
            if len(sp) != 2 or sp[0] < 0 or not 2 <= sp[1] < math.inf:
                raise ConfigError(f"invalid (s, p) pair {sp}")
        if not 2 <= self.p < math.inf:
            raise ConfigError("p must satisfy 2 <= p < inf")
        if self.scaling_lambda is not None and (int(self.scaling_lambda) != self.scaling_lambda or self.scaling_lambda < 1):
            raise ConfigError("scaling_lambda must be a positive integer")
        if self.tolerance_scale < 0:
            raise ConfigError("tolerance_scale must be non-negative")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")

    # derived objects

    @property
    def length(self) -> float:
        return self.length_pi * math.pi

    @property
    def grid(self) -> SpatialGrid:
        return SpatialGrid(int(self.n_points), self.length)

    @property
    def params(self) -> EquationParams:
        return EquationParams(self.a, self.b)

    @property
    def ns(self) -> list:
        return list(range(int(self.n_range[0]), int(self.n_range[1]) + 1))

    def steps_between_snapshots(self, dt: float) -> int:
        return max(1, int(round(self.snapshot_every / dt)))

    def initial_field(self) -> SpectralField:
        d = dict(self.data)
        kind = d.pop("kind")
        if kind == "zero":
            return SpectralField(self.grid, [0.0] * self.n_points, meta={"kind": "zero"})
        if kind == "random_bandlimited":
            d.setdefault("seed", self.seed)
            if "band" in d:
                d["band"] = tuple(d["band"])
        try:
            return make_field(kind, self.grid, **d)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"cannot build initial data: {exc}") from exc

    def solver_config(self, monitors: MonitorSpec, dt: float) -> SolverConfig:
        return SolverConfig(
            grid=self.grid,
            t_final=self.t_final,
            dt=dt,
            dealias=self.dealias,
            monitors=monitors,
            snapshot_stride=self.steps_between_snapshots(dt),
        )


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a JSON config (or start from defaults) and apply ``overrides``."""
    d = {}
    if path is not None:
        try:
            with open(path) as fh:
                d = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
    d.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return ExperimentConfig.from_dict(d)
