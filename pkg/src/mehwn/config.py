"""Experiment configuration: defaults, flat-file parsing, and the run manifest.

The config file format is plain ``key=value`` lines ('#' starts a comment).
Command-line flags override file values.  ``q`` may be given instead of
``g``; the link probability is then q squared.
"""

from __future__ import annotations

import dataclasses
import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .bounds import DEFAULT_KAPPA, DEFAULT_LAMBDA_L, ModelParams, SeriesControl
from .errors import ConfigError
from .geometry import Region
from .lattice import build_lattice


def default_max_slots(region: Region, r0: float, kappa: float = DEFAULT_KAPPA) -> int:
    """Ten times the expected end-to-end hop diameter, with a floor of 1000."""
    diag = math.hypot(region.width, region.height)
    return max(1000, int(math.ceil(10.0 * kappa * diag / r0)))


@dataclass(frozen=True)
class NetworkConfig:
    """All parameters of one experiment family."""

    lam: float = 1.4
    g: float = 0.25
    r0: float = 1.0
    region: Region = field(default_factory=lambda: Region(20.0, 20.0))
    max_slots: int | None = None
    n_random_pairs: int = 100
    repeats: int = 10
    seed: int = 1
    n_max: int | None = None
    tail_tol: float = 1e-9
    divergence_policy: str = "warn"
    kappa: float | None = None
    lambda_l: float = DEFAULT_LAMBDA_L
    raw_occupancy: bool = False
    kappa_on_slot: bool = False
    kappa_min_separation: float | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ConfigError(f"lambda must be finite and non-negative, got {self.lam}")
        if not (math.isfinite(self.g) and 0.0 <= self.g <= 1.0):
            raise ConfigError(f"g must be in [0, 1], got {self.g}")
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise ConfigError(f"r0 must be positive, got {self.r0}")
        if self.max_slots is not None and self.max_slots < 1:
            raise ConfigError(f"max_slots must be positive, got {self.max_slots}")
        if self.n_random_pairs < 0:
            raise ConfigError(f"pairs must be non-negative, got {self.n_random_pairs}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be positive, got {self.repeats}")
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        if self.n_max is not None and self.n_max < 2:
            raise ConfigError(f"n_max must be at least 2, got {self.n_max}")
        if self.divergence_policy not in ("error", "warn"):
            raise ConfigError(f"divergence_policy must be 'error' or 'warn', got {self.divergence_policy!r}")
        if self.kappa is not None and not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        if not (math.isfinite(self.lambda_l) and self.lambda_l > 0):
            raise ConfigError(f"lambda_l must be positive, got {self.lambda_l}")

    @property
    def q(self) -> float:
        return math.sqrt(self.g)

    @property
    def effective_kappa(self) -> float:
        return DEFAULT_KAPPA if self.kappa is None else self.kappa

    @property
    def effective_max_slots(self) -> int:
        if self.max_slots is not None:
            return self.max_slots
        return default_max_slots(self.region, self.r0, self.effective_kappa)

    @property
    def effective_kappa_min_separation(self) -> float:
        # The extreme/corner pairs already cover large separations; by
        # default random pairs are unfiltered (measured ratios barely move
        # with a separation floor).
        return 0.0 if self.kappa_min_separation is None else self.kappa_min_separation

    def series_control(self) -> SeriesControl:
        n_max = self.n_max
        if n_max is None:
            # A component in a finite region cannot have more edges than the lattice.
            n_max = build_lattice(self.region, self.r0).n_edges
        return SeriesControl(n_max=n_max, tail_tol=self.tail_tol, divergence_policy=self.divergence_policy)

    def model_params(self, lam: float | None = None) -> ModelParams:
        return ModelParams(
            lam=self.lam if lam is None else lam,
            g=self.g,
            r0=self.r0,
            lambda_l=self.lambda_l,
            kappa=self.effective_kappa,
        )

    def replace(self, **kwargs) -> "NetworkConfig":
        return dataclasses.replace(self, **kwargs)


_BOOL_KEYS = ("raw_occupancy", "kappa_on_slot")
_INT_KEYS = ("max_slots", "n_random_pairs", "repeats", "seed", "n_max")
_FLOAT_KEYS = ("lam", "g", "r0", "tail_tol", "kappa", "lambda_l", "kappa_min_separation")
_KEY_ALIASES = {
    "lambda": "lam",
    "pairs": "n_random_pairs",
}


def serialize_config(config: NetworkConfig) -> str:
    """Canonical key=value form; parse_config inverts it exactly."""
    lines = [
        f"lambda={config.lam!r}",
        f"g={config.g!r}",
        f"r0={config.r0!r}",
        f"region={config.region.width:g}x{config.region.height:g}",
        f"max_slots={'' if config.max_slots is None else config.max_slots}",
        f"pairs={config.n_random_pairs}",
        f"repeats={config.repeats}",
        f"seed={config.seed}",
        f"n_max={'' if config.n_max is None else config.n_max}",
        f"tail_tol={config.tail_tol!r}",
        f"divergence_policy={config.divergence_policy}",
        f"kappa={'' if config.kappa is None else repr(config.kappa)}",
        f"lambda_l={config.lambda_l!r}",
        f"raw_occupancy={'true' if config.raw_occupancy else 'false'}",
        f"kappa_on_slot={'true' if config.kappa_on_slot else 'false'}",
        f"kappa_min_separation={'' if config.kappa_min_separation is None else repr(config.kappa_min_separation)}",
    ]
    return "\n".join(lines) + "\n"


def parse_region(text: str) -> Region:
    parts = text.lower().split("x")
    if len(parts) != 2:
        raise ConfigError(f"region must look like WIDTHxHEIGHT, got {text!r}")
    try:
        w, h = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ConfigError(f"region must look like WIDTHxHEIGHT, got {text!r}") from exc
    return Region(w, h)


def parse_config(text: str) -> NetworkConfig:
    """Parse key=value lines into a NetworkConfig; errors carry line numbers."""
    values: dict[str, object] = {}
    q_value: float | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip().lower()
        val = val.strip()
        key = _KEY_ALIASES.get(key, key)
        try:
            if key == "q":
                if val != "":
                    q_value = float(val)
            elif key == "region":
                if val != "":
                    values["region"] = parse_region(val)
            elif key == "divergence_policy":
                if val != "":
                    values["divergence_policy"] = val
            elif key in _BOOL_KEYS:
                if val != "":
                    if val.lower() not in ("true", "false", "0", "1", "yes", "no"):
                        raise ConfigError(f"line {lineno}: field '{key}' expects a boolean, got {val!r}")
                    values[key] = val.lower() in ("true", "1", "yes")
            elif key in _INT_KEYS:
                if val != "":
                    values[key] = int(val)
            elif key in _FLOAT_KEYS:
                if val != "":
                    values[key] = float(val)
            else:
                raise ConfigError(f"line {lineno}: unknown field '{key}'")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: field '{key}' got unparseable value {val!r}") from exc
    rename = {"n_random_pairs": "n_random_pairs"}
    kwargs = {rename.get(k, k): v for k, v in values.items()}
    if q_value is not None:
        if "g" in kwargs and abs(kwargs["g"] - q_value ** 2) > 1e-12:
            raise ConfigError(f"both g={kwargs['g']} and q={q_value} given and inconsistent (g must equal q^2)")
        kwargs["g"] = q_value ** 2
    try:
        return NetworkConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> NetworkConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


@dataclass(frozen=True)
class ExperimentManifest:
    """Provenance record written next to every run's output files."""

    command: str
    config: NetworkConfig
    code_version: str
    timestamp: str
    outputs: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config": serialize_config(self.config).strip().splitlines(),
            "code_version": self.code_version,
            "timestamp": self.timestamp,
            "outputs": list(self.outputs),
        }


def write_manifest(out_dir: Path, command: str, config: NetworkConfig, outputs: list[str]) -> Path:
    manifest = ExperimentManifest(
        command=command,
        config=config,
        code_version=__version__,
        timestamp=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        outputs=tuple(outputs),
    )
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest.to_dict(), indent=2, sort_keys=True) + "\n")
    return path
