"""
Experiment configuration: a frozen dataclass parsed from flat key = value text.

    # accuracy study at desk scale
    n = 200
    sweep = m_over_n
    sweep_values = 0.25, 0.5, 1, 2
    s = 10
    trials = 25
    algorithms = strmp, strmp-l1, biht
"""
import enum
import logging
from dataclasses import dataclass, fields, replace
from pathlib import Path

from obcs.errors import ConfigError

logger = logging.getLogger(__name__)

KNOWN_ALGORITHMS = ("strmp", "strmp-l1", "biht")
BENCH_KINDS = ("accuracy", "consistency", "speed")
PAPER_N = 1000


class Sweep(str, enum.Enum):
    M_OVER_N = "m_over_n"
    SPARSITY = "sparsity"


def _optional(cast):
    def parse(text):
        return None if text.strip().lower() in ("", "none", "default") else cast(text)
    return parse


def _float_list(text):
    return tuple(float(v) for v in text.split(",") if v.strip())


def _name_list(text):
    return tuple(v.strip().lower() for v in text.split(",") if v.strip())


_PARSERS = {
    "n": int,
    "sweep": lambda v: Sweep(v.strip().lower()),
    "sweep_values": _float_list,
    "s": _optional(int),
    "m": _optional(int),
    "trials": int,
    "base_seed": int,
    "algorithms": _name_list,
    "output_path": str.strip,
    "workers": int,
    "c0": float,
    "epsilon": _optional(float),
    "atoms_per_iteration": int,
    "solver_tol": _optional(float),
    "solver_max_iter": int,
    "biht_step_size": _optional(float),
    "biht_max_iter": int,
}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 200
    sweep: Sweep = Sweep.M_OVER_N
    sweep_values: tuple = (0.25, 0.5, 1.0, 2.0)
    s: int = 10
    m: int = None
    trials: int = 25
    base_seed: int = 12345
    algorithms: tuple = KNOWN_ALGORITHMS
    output_path: str = "results/accuracy.csv"
    workers: int = 1
    c0: float = 1.0
    epsilon: float = None
    atoms_per_iteration: int = 1
    solver_tol: float = None
    solver_max_iter: int = 2000
    biht_step_size: float = None
    biht_max_iter: int = 300

    def __post_init__(self):
        object.__setattr__(self, "sweep", Sweep(self.sweep))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))
        if self.n < 2:
            raise ConfigError(f"n must be >= 2, got {self.n}")
        if not self.sweep_values:
            raise ConfigError("sweep_values must not be empty")
        if any(b <= a for a, b in zip(self.sweep_values, self.sweep_values[1:])):
            raise ConfigError(f"sweep_values must be strictly increasing, got {self.sweep_values}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if not self.algorithms:
            raise ConfigError("algorithms must not be empty")
        unknown = [a for a in self.algorithms if a not in KNOWN_ALGORITHMS]
        if unknown:
            raise ConfigError(f"unknown algorithms {unknown}; choose from {list(KNOWN_ALGORITHMS)}")
        if not self.c0 > 0:
            raise ConfigError(f"c0 must be positive, got {self.c0}")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.atoms_per_iteration < 1 or self.solver_max_iter < 1 or self.biht_max_iter < 1:
            raise ConfigError("atoms_per_iteration, solver_max_iter and biht_max_iter must be >= 1")
        if self.solver_tol is not None and not self.solver_tol > 0:
            raise ConfigError(f"solver_tol must be positive, got {self.solver_tol}")
        if self.biht_step_size is not None and not self.biht_step_size > 0:
            raise ConfigError(f"biht_step_size must be positive, got {self.biht_step_size}")
        if self.sweep is Sweep.M_OVER_N and self.s is None:
            raise ConfigError("an m_over_n sweep needs a fixed s")
        if self.sweep is Sweep.SPARSITY and self.m is None:
            raise ConfigError("a sparsity sweep needs a fixed m")
        if self.sweep is Sweep.SPARSITY and not all(float(v).is_integer() for v in self.sweep_values):
            raise ConfigError(f"sparsity sweep values must be integers, got {self.sweep_values}")
        for value, m, s in self.points():
            if m < 1 or not 1 <= s <= self.n:
                raise ConfigError(f"sweep value {value} gives invalid m={m}, s={s} for n={self.n}")

    def points(self):
        """(sweep_value, m, s) for every sweep point, in order."""
        if self.sweep is Sweep.M_OVER_N:
            return [(v, int(round(v * self.n)), self.s) for v in self.sweep_values]
        return [(v, self.m, int(v)) for v in self.sweep_values]

    def with_overrides(self, **overrides):
        overrides = {k: v for k, v in overrides.items() if v is not None}
        try:
            return replace(self, **overrides)
        except TypeError as e:
            raise ConfigError(str(e))

    def paper_scale(self):
        """Restore n = 1000 and the full grids with 100 trials per point."""
        if self.sweep is Sweep.M_OVER_N:
            values = tuple(round(0.05 * i, 2) for i in range(1, 41))
            return replace(self, n=PAPER_N, sweep_values=values, trials=100)
        return replace(self, n=PAPER_N, m=PAPER_N, sweep_values=tuple(float(s) for s in range(1, 16)), trials=100)


def parse_config_text(text):
    """key = value lines to a dict of typed values; '#' starts a comment."""
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected 'key = value', got '{raw.strip()}'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in _PARSERS:
            raise ConfigError(f"line {number}: unknown key '{key}'")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as e:
            raise ConfigError(f"line {number}: invalid value for '{key}': {e}")
    return values


def load_experiment_config(path, base=None):
    """Read a config file on top of `base` (defaults when omitted)."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    values = parse_config_text(text)
    logger.info("loaded %d settings from %s", len(values), path)
    return replace(base or ExperimentConfig(), **values)


def desk_config(kind):
    """Built-in desk-scale configuration for one of the bench kinds."""
    if kind in ("accuracy", "consistency"):
        return ExperimentConfig(output_path=f"results/{kind}.csv")
    if kind == "speed":
        return ExperimentConfig(n=500, m=500, sweep=Sweep.SPARSITY, sweep_values=(2, 4, 6, 8, 10, 12, 14),
                                s=None, trials=20, output_path="results/speed.csv")
    raise ConfigError(f"unknown bench kind '{kind}'; choose from {list(BENCH_KINDS)}")


def config_to_text(cfg):
    """Inverse of parse_config_text for round-tripping configs into result metadata."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, enum.Enum):
            value = value.value
        elif isinstance(value, tuple):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{f.name} = {'none' if value is None else value}")
    return "\n".join(lines) + "\n"
