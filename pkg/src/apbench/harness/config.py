"""Experiment configuration (JSON) and the table of instantiated constants."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = ["ConfigError", "ExperimentConfig", "Constant", "DEFAULT_CONSTANTS", "FIXED_CONSTANTS", "COMMAND_DEFAULTS", "load_config"]

FIXTURE_KINDS = ("interval", "intervals", "fat_cantor", "pair", "bump_pair")


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps it to exit code 2."""


@dataclass(frozen=True)
class Constant:
    name: str
    symbolic: str
    value: object
    source: str  # "default" or "override"


# thresholds built into the algorithms; reported, not overridable
FIXED_CONSTANTS: dict[str, tuple[str, float | None]] = {
    "stellar_mean": ("1/100", 1 / 100),
    "stellar_chain": ("1/1000", 1 / 1000),
    "large_mean": ("1/10", 1 / 10),
    "small_mean": ("1/C^2, per sweep point", None),
    "balanced_shrink": ("0.52", 0.52),
}

# name -> (symbolic form, default value); a callable default receives the config
DEFAULT_CONSTANTS: dict[str, tuple[str, object]] = {
    "alpha": ("(2 - p)/2, any value in (0, 2 - p)", lambda cfg: (2 - cfg.p) / 2),
    "levels": ("level range k for level masses", [4, 8]),
    "hyp_m": ("m in S_m, sampled at powers of two", "pow2"),
    "lt_eps": ("epsilon", 0.1),
    "lt_Cp": ("C_p", 10.0),
    "eps_exp": ("epsilon in C^(exponent - epsilon)", 0.0),
    "sig_eps": ("epsilon", 1e-4),
    "sig_cap": ("iteration cap", 10**6),
    "sig_count": ("random quadruples", 100),
    "decay_systems": ("random T-systems", 20),
    "decay_dmax": ("|j - m| range", 6),
    "poly_count": ("random polynomials", 200),
    "tree_count": ("random trees", 50),
    "desk": ("phase constants (K_1 = kappa0 (1 + 1/delta), t_dense = c1/K^a, theta = c2/K^b)", {}),
    "bump_height": ("bump amplitude of A", 0.03),
    "bump_width": ("bump width of A", 0.05),
    "osc_amplitude": ("mean-zero oscillation of B", 0.3),
    "corrupt_tsystem": ("inject a T-system violation", False),
}


@dataclass
class ExperimentConfig:
    p: float = 1.5
    delta: float = 0.5
    C: list[float] = field(default_factory=lambda: [8.0, 16.0, 32.0])
    n: int = 2**14
    seed: int = 0
    fixture: dict = field(default_factory=lambda: {"kind": "interval", "offset": 0.0})
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if isinstance(self.C, (int, float)):
            self.C = [float(self.C)]
        self.C = [float(c) for c in self.C]
        self.validate()

    @property
    def q(self) -> float:
        return self.p / (self.p - 1)

    def validate(self):
        if not 1 < self.p < 2:
            raise ConfigError(f"p must lie in (1, 2), got {self.p}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")
        if not (isinstance(self.n, int) and self.n >= 16 and self.n & (self.n - 1) == 0):
            raise ConfigError(f"n must be a power of two >= 16, got {self.n}")
        if not self.C or any(not (c > 1 and math.isfinite(c)) for c in self.C):
            raise ConfigError(f"every C must exceed 1, got {self.C}")
        kind = self.fixture.get("kind")
        if kind not in FIXTURE_KINDS:
            raise ConfigError(f"unknown fixture kind {kind!r}; expected one of {FIXTURE_KINDS}")
        unknown = set(self.overrides) - set(DEFAULT_CONSTANTS)
        if unknown:
            raise ConfigError(f"unknown constant overrides {sorted(unknown)}")

    def constant(self, name: str) -> Constant:
        symbolic, default = DEFAULT_CONSTANTS[name]
        if name in self.overrides:
            return Constant(name, symbolic, self.overrides[name], "override")
        value = default(self) if callable(default) else default
        return Constant(name, symbolic, value, "default")

    def get(self, name: str):
        return self.constant(name).value

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {"p", "delta", "C", "n", "seed", "fixture", "overrides"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


# fixture used by a command when no config file is given
COMMAND_DEFAULTS = {
    # theta_dense = 30/K^2 sits above the bump's discrepancy, so phase 1 starts valid
    "theorem1": {"fixture": {"kind": "bump_pair"}, "C": [8.0], "overrides": {"desk": {"c2": 30.0}}},
}


def load_config(path: str | Path | None = None, seed: int | None = None,
                command: str | None = None) -> ExperimentConfig:
    if path is None:
        d = dict(COMMAND_DEFAULTS.get(command, {}))
    else:
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
    if seed is not None:
        d["seed"] = seed
    return ExperimentConfig.from_dict(d)
