"""Run configuration: file parsing, flag overrides, and validation.

Configuration values merge in a fixed precedence order: command-line flags
beat config-file keys, which beat the built-in defaults. The background
window falls back to the calibrated preset for the configured mass ratio
when no explicit l0 bounds are given. Everything is validated before any
simulation starts so a bad run dies with a field-specific message.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import (
    PRESET_DOMAINS,
    DomainSpec,
    ModelParams,
    RampSchedule,
    training_schedules,
)
from .validation import ValidationError, check_int, check_scalar, require

_DOMAIN_KEYS = ("l0_min", "l0_int", "l0_star", "l0_max")

# Config-file key -> (RunConfig field, converter). The short names follow
# the model's symbols.
_FILE_KEYS = {
    "N": ("n_sites", lambda v, k: check_int(_number(v, k), k, minimum=2, maximum=10)),
    "V": ("volume", lambda v, k: check_scalar(_number(v, k), k, minimum=1e-9)),
    "mg": ("mass_ratio", lambda v, k: check_scalar(_number(v, k), k, minimum=0.0)),
    "lambda": ("charge_penalty", lambda v, k: check_scalar(_number(v, k), k, minimum=0.0)),
    "l0_min": ("l0_min", lambda v, k: check_scalar(_number(v, k), k)),
    "l0_int": ("l0_int", lambda v, k: check_scalar(_number(v, k), k)),
    "l0_star": ("l0_star", lambda v, k: check_scalar(_number(v, k), k)),
    "l0_max": ("l0_max", lambda v, k: check_scalar(_number(v, k), k)),
    "T": ("total_time", lambda v, k: check_scalar(_number(v, k), k, minimum=1e-9)),
    "n_steps": ("n_steps", lambda v, k: check_int(_number(v, k), k, minimum=1)),
    "n_train": ("n_train", lambda v, k: check_int(_number(v, k), k, minimum=2, maximum=11)),
    "noise_p": ("noise_p", lambda v, k: check_scalar(_number(v, k), k, minimum=0.0, maximum=1.0)),
    "seed": ("seed", lambda v, k: check_int(_number(v, k), k, minimum=0)),
}


def _number(text, key):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise ValidationError(f"not a number: {text!r}", field=key) from None
    if value == int(value):
        return int(value)
    return value


@dataclass(frozen=True)
class RunConfig:
    """Validated settings of one experiment run."""

    n_sites: int = 6
    volume: float = 30.0
    mass_ratio: float = 0.0
    charge_penalty: float = 100.0
    l0_min: float | None = None
    l0_int: float | None = None
    l0_star: float | None = None
    l0_max: float | None = None
    total_time: float = 10.0
    n_steps: int = 100
    n_train: int = 11
    n_evol_zne: int = 10
    n_realizations: int = 1
    noise_p: float = 1e-6
    seed: int = 20260817
    n_shots: int | None = None
    workers: int = 1
    out_dir: str = "out"

    def __post_init__(self):
        object.__setattr__(
            self, "n_sites", check_int(self.n_sites, "N", minimum=2, maximum=10)
        )
        object.__setattr__(self, "volume", check_scalar(self.volume, "V", minimum=1e-9))
        object.__setattr__(
            self, "mass_ratio", check_scalar(self.mass_ratio, "mg", minimum=0.0)
        )
        object.__setattr__(
            self,
            "charge_penalty",
            check_scalar(self.charge_penalty, "lambda", minimum=0.0),
        )
        object.__setattr__(
            self, "total_time", check_scalar(self.total_time, "T", minimum=1e-9)
        )
        object.__setattr__(
            self, "n_steps", check_int(self.n_steps, "n_steps", minimum=1)
        )
        object.__setattr__(
            self, "n_train", check_int(self.n_train, "n_train", minimum=2, maximum=11)
        )
        object.__setattr__(
            self,
            "n_evol_zne",
            check_int(self.n_evol_zne, "n_evol_zne", minimum=2, maximum=10),
        )
        object.__setattr__(
            self,
            "n_realizations",
            check_int(self.n_realizations, "n_realizations", minimum=1),
        )
        require(
            self.n_train >= self.n_realizations + 1,
            "need n_train >= R + 1 training ramps",
            field="n_train",
        )
        object.__setattr__(
            self,
            "noise_p",
            check_scalar(self.noise_p, "noise_p", minimum=0.0, maximum=1.0),
        )
        object.__setattr__(self, "seed", check_int(self.seed, "seed", minimum=0))
        if self.n_shots is not None:
            object.__setattr__(
                self, "n_shots", check_int(self.n_shots, "shots", minimum=1)
            )
        object.__setattr__(
            self, "workers", check_int(self.workers, "workers", minimum=1)
        )
        require(isinstance(self.out_dir, str) and self.out_dir, "empty path",
                field="out_dir")
        bounds = [getattr(self, k) for k in _DOMAIN_KEYS]
        given = [b for b in bounds if b is not None]
        if not given:
            preset = self._preset_key()
            require(
                preset is not None,
                "no calibrated window for this mass ratio; set l0_min, l0_int,"
                " l0_star, and l0_max",
                field="mg",
            )
            domain = PRESET_DOMAINS[preset]
            for k in _DOMAIN_KEYS:
                object.__setattr__(self, k, getattr(domain, k))
        else:
            require(
                len(given) == 4,
                "set all four of l0_min, l0_int, l0_star, l0_max together",
                field="l0_min",
            )
            for k in _DOMAIN_KEYS:
                object.__setattr__(self, k, check_scalar(getattr(self, k), k))
        self.domain()  # ordering check

    def _preset_key(self):
        for key in PRESET_DOMAINS:
            if self.mass_ratio == key and self.n_sites == 6:
                return key
        return None

    def params(self):
        return ModelParams(
            n_sites=self.n_sites,
            volume=self.volume,
            mass_ratio=self.mass_ratio,
            charge_penalty=self.charge_penalty,
        )

    def domain(self):
        return DomainSpec(self.l0_min, self.l0_int, self.l0_star, self.l0_max)

    def main_schedule(self):
        return RampSchedule(
            self.l0_min, self.l0_max, self.total_time, self.n_steps, "main"
        )

    def training_schedules(self):
        return training_schedules(
            self.domain(), self.total_time, self.n_steps, self.n_train
        )

    def zne_folds(self):
        return tuple(range(1, 2 * self.n_evol_zne, 2))

    @property
    def run_id(self):
        """Deterministic output-directory name; no timestamps by design."""
        tag = f"mg{self.mass_ratio:g}-N{self.n_sites}-n{self.n_steps}-seed{self.seed}"
        if self.n_shots is not None:
            tag += f"-shots{self.n_shots}"
        return tag


def parse_config_file(path):
    """Read ``key = value`` lines into a typed override dict.

    Blank lines and ``#`` comments are skipped; unknown or repeated keys are
    rejected with the offending key as the field.
    """
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config file: {exc}", field="config")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(
                f"line {lineno}: expected key = value, got {line!r}", field="config"
            )
        key, text = (part.strip() for part in line.split("=", 1))
        if key not in _FILE_KEYS:
            raise ValidationError(f"line {lineno}: unknown key", field=key)
        field, convert = _FILE_KEYS[key]
        if field in values:
            raise ValidationError(f"line {lineno}: repeated key", field=key)
        values[field] = convert(text, key)
    return values


def resolve_config(file_values=None, flag_values=None):
    """Merge defaults, file values, and flag values into a RunConfig.

    Flags win over the file, the file wins over defaults; ``None`` entries
    in flag_values mean "flag not given" and are skipped.
    """
    merged = dict(file_values or {})
    for key, value in (flag_values or {}).items():
        if value is not None:
            merged[key] = value
    try:
        return RunConfig(**merged)
    except TypeError as exc:
        raise ValidationError(str(exc), field="config") from None


def with_overrides(config, **overrides):
    """Copy of a config with some fields replaced, revalidated."""
    return replace(config, **overrides)
