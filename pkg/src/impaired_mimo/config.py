"""Experiment configuration: flat ``key: value`` YAML files with dotted keys."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from .impairments import AdcParams, Hardware, LnaParams, PhaseNoiseParams
from .waveform import SubcarrierLayout, make_layout

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "dump_config", "paper_config"]

# mean received power per antenna with unit-energy channels is U*S/N
PAPER_DELTA_FACTOR = 0.086


class ConfigError(ValueError):
    pass


# config key -> dataclass attribute
_KEYS = {
    "B": "n_antennas",
    "U": "n_users",
    "N": "n_fft",
    "S": "n_occupied",
    "L": "n_taps",
    "F_sub": "f_sub",
    "N0": "n0",
    "snr_db": "snr_db",
    "lna.alpha1": "alpha1",
    "lna.alpha2": "alpha2",
    "pn.lambda": "pn_lambda",
    "pn.beta": "pn_beta",
    "adc.q": "adc_q",
    "adc.delta_rule": "delta_rule",
    "adc.delta_value": "delta_value",
    "enable.lna": "enable_lna",
    "enable.pn": "enable_pn",
    "enable.adc": "enable_adc",
    "seed": "seed",
    "trials.channels": "n_channels",
    "trials.frames": "n_frames",
    "psd.frames": "psd_frames",
}
_ATTRS = {v: k for k, v in _KEYS.items()}
_REQUIRED = ("B", "U", "N", "S", "L", "F_sub")


@dataclass
class ExperimentConfig:
    n_antennas: int
    n_users: int
    n_fft: int
    n_occupied: int
    n_taps: int
    f_sub: float
    n0: float = 0.0
    snr_db: list = field(default_factory=list)
    alpha1: complex | None = None
    alpha2: complex | None = None
    pn_lambda: float | None = None
    pn_beta: float | None = None
    adc_q: int | None = None
    delta_rule: str = "paper"
    delta_value: float | None = None
    enable_lna: bool = False
    enable_pn: bool = False
    enable_adc: bool = False
    seed: int = 0
    n_channels: int = 20
    n_frames: int = 5
    psd_frames: int = 500

    def __post_init__(self):
        self._validate()

    @property
    def ts(self) -> float:
        return 1.0 / (self.n_fft * self.f_sub)

    @property
    def osr(self) -> float:
        return self.n_fft / self.n_occupied

    @property
    def layout(self) -> SubcarrierLayout:
        return make_layout(self.n_fft, self.n_occupied)

    def delta(self, n0: float | None = None) -> float:
        """ADC step; the ``paper`` rule scales with the expected per-antenna RMS amplitude."""
        n0 = self.n0 if n0 is None else n0
        if self.delta_rule == "paper":
            return PAPER_DELTA_FACTOR * np.sqrt(self.n_users * self.n_occupied / self.n_fft + n0)
        return float(self.delta_value)

    def hardware(self, n0: float | None = None) -> Hardware:
        lna = LnaParams(self.alpha1, self.alpha2) if self.enable_lna else None
        pn = PhaseNoiseParams(self.pn_lambda, self.pn_beta, self.ts) if self.enable_pn else None
        adc = AdcParams(self.adc_q, self.delta(n0)) if self.enable_adc else None
        return Hardware(lna, pn, adc)

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            if isinstance(v, complex):
                v = str(v) if v.imag else v.real
            out[_ATTRS[f.name]] = v
        return out

    def digest(self) -> str:
        return hashlib.sha256(dump_config(self).encode()).hexdigest()[:16]

    def _validate(self):
        for key in ("B", "U", "N", "S", "L"):
            v = getattr(self, _KEYS[key])
            if int(v) != v or v < 1:
                raise ConfigError(f"{key}: must be a positive integer, got {v!r}")
            setattr(self, _KEYS[key], int(v))
        if self.n_occupied % 2 or self.n_occupied > self.n_fft - 1:
            raise ConfigError(f"S: must be even and at most N-1, got {self.n_occupied}")
        if self.n_taps > self.n_fft:
            raise ConfigError(f"L: must not exceed N, got {self.n_taps}")
        if self.n_users > self.n_antennas:
            raise ConfigError(f"U: zero forcing needs U <= B, got U={self.n_users}")
        if self.f_sub <= 0:
            raise ConfigError(f"F_sub: must be positive, got {self.f_sub}")
        if self.n0 < 0:
            raise ConfigError(f"N0: must be nonnegative, got {self.n0}")
        self.snr_db = [float(s) for s in (self.snr_db or [])]
        if self.enable_lna:
            for key in ("lna.alpha1", "lna.alpha2"):
                v = getattr(self, _KEYS[key])
                if v is None:
                    raise ConfigError(f"{key}: required when enable.lna is true")
                try:
                    setattr(self, _KEYS[key], complex(v))
                except (TypeError, ValueError) as err:
                    raise ConfigError(f"{key}: not a number: {v!r}") from err
            if self.alpha1 == 0:
                raise ConfigError("lna.alpha1: must be nonzero")
        if self.enable_pn:
            if self.pn_lambda is None:
                raise ConfigError("pn.lambda: required when enable.pn is true")
            if self.pn_beta is None:
                raise ConfigError("pn.beta: required when enable.pn is true")
            if not 0.0 < self.pn_lambda < 1.0:
                raise ConfigError(f"pn.lambda: must lie in (0, 1), got {self.pn_lambda}")
            if self.pn_beta < 0:
                raise ConfigError(f"pn.beta: must be nonnegative, got {self.pn_beta}")
        if self.delta_rule not in ("paper", "value"):
            raise ConfigError(f"adc.delta_rule: expected 'paper' or 'value', got {self.delta_rule!r}")
        if self.enable_adc:
            if self.adc_q is None:
                raise ConfigError("adc.q: required when enable.adc is true")
            if int(self.adc_q) != self.adc_q or self.adc_q < 1:
                raise ConfigError(f"adc.q: must be a positive integer, got {self.adc_q!r}")
            self.adc_q = int(self.adc_q)
            if self.delta_rule == "value" and (self.delta_value is None or self.delta_value <= 0):
                raise ConfigError("adc.delta_value: positive value required with delta_rule 'value'")
        for key in ("trials.channels", "trials.frames", "psd.frames"):
            if getattr(self, _KEYS[key]) < 1:
                raise ConfigError(f"{key}: must be >= 1")


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of keys to values")
    unknown = sorted(set(data) - set(_KEYS))
    if unknown:
        raise ConfigError(f"unknown key: {unknown[0]}")
    missing = [k for k in _REQUIRED if k not in data]
    if missing:
        raise ConfigError(f"missing required key: {missing[0]}")
    return ExperimentConfig(**{_KEYS[k]: v for k, v in data.items()})


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ConfigError(f"cannot parse config {path}: {err}") from err
    return parse_config(data or {})


def dump_config(cfg: ExperimentConfig) -> str:
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False)


def paper_config(**overrides) -> ExperimentConfig:
    """Numerical-results defaults with every impairment enabled."""
    base = dict(
        B=32,
        U=4,
        N=1024,
        S=300,
        L=10,
        F_sub=15e3,
        N0=0.0,
        snr_db=[-10.0, -8.0, -6.0, -4.0, -2.0],
        **{
            "lna.alpha1": 1.065,
            "lna.alpha2": -0.028,
            "pn.lambda": 0.99,
            "pn.beta": 1e3,
            "adc.q": 6,
            "adc.delta_rule": "paper",
            "enable.lna": True,
            "enable.pn": True,
            "enable.adc": True,
            "seed": 0,
            "trials.channels": 20,
            "trials.frames": 5,
            "psd.frames": 500,
        },
    )
    base.update(overrides)
    return parse_config(base)
