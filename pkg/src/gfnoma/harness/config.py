"""Scenario configuration and its flat ``key = value`` file format."""

import dataclasses
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path
from typing import Optional

ACTIVITY_MODES = ("bic_music", "perfect")
CHANNEL_MODELS = ("ped_a", "tdl_c")
SWEEP_PARAMS = ("none", "snr_db", "rms_ds_ns")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    """One simulated scenario; defaults reproduce the correlated-channel setup."""

    num_ues: int = 32
    num_active: int = 8
    num_rb_freq: int = 6
    num_slots: int = 2
    L: int = 4
    L_p: int = 12
    strategy: str = "contiguous"
    masking: bool = True
    channel: str = "ped_a"
    rms_ds_ns: float = 0.0
    velocity: float = 0.0
    num_rx: int = 2
    snr_db: float = 20.0
    pathloss_spread_db: float = 5.0
    noise_var: float = 1.0
    add_noise: bool = True
    sweep_param: str = "none"
    sweep_values: tuple = field(default_factory=tuple)
    code_rate: str = "2/3"
    max_pic_iters: int = 6
    trials: int = 200
    seed: int = 0
    activity: str = "bic_music"
    perfect_csi: bool = False
    genie_power: bool = False
    ka_max: Optional[int] = None
    codebook_seed: int = 1
    mask_seed: int = 2
    codebook_iterations: int = 1000
    pilot_codebook: Optional[str] = None
    data_codebook: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "sweep_values", tuple(float(v) for v in self.sweep_values))
        self.validate()

    def validate(self):
        if self.num_active > self.num_ues or self.num_active < 0:
            raise ConfigError("need 0 <= num_active <= num_ues")
        if self.L_p > 12 * self.num_rb_freq:
            raise ConfigError("L_p cannot exceed the grid bandwidth")
        if self.strategy not in ("contiguous", "split"):
            raise ConfigError(f"strategy must be contiguous or split, got {self.strategy!r}")
        if self.channel not in CHANNEL_MODELS:
            raise ConfigError(f"channel must be one of {CHANNEL_MODELS}")
        if self.activity not in ACTIVITY_MODES:
            raise ConfigError(f"activity must be one of {ACTIVITY_MODES}")
        if self.sweep_param not in SWEEP_PARAMS:
            raise ConfigError(f"sweep_param must be one of {SWEEP_PARAMS}")
        if self.sweep_param != "none" and not self.sweep_values:
            raise ConfigError("sweep_values required when sweep_param is set")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.noise_var <= 0:
            raise ConfigError("noise_var must be positive (set add_noise = false for a noiseless run)")
        if self.rms_ds_ns < 0 or self.pathloss_spread_db < 0 or self.velocity < 0:
            raise ConfigError("rms_ds_ns, pathloss_spread_db and velocity must be nonnegative")
        if self.num_rx < 1 or self.max_pic_iters < 1 or self.workers < 1:
            raise ConfigError("num_rx, max_pic_iters and workers must be positive")
        if self.ka_max is not None and not 0 <= self.ka_max < self.L_p:
            raise ConfigError("ka_max must lie in [0, L_p)")
        if Fraction(self.code_rate) not in (Fraction(1, 2), Fraction(2, 3)):
            raise ConfigError("code_rate must be 1/2 or 2/3")

    def points(self):
        """Sweep points as ``(value, config)`` pairs."""
        if self.sweep_param == "none":
            return [(self.snr_db, self)]
        return [(v, dataclasses.replace(self, **{self.sweep_param: v, "sweep_param": "none",
                                                  "sweep_values": ()}))
                for v in self.sweep_values]

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _coerce(name: str, text: str):
    f = {f.name: f for f in fields(ScenarioConfig)}.get(name)
    if f is None:
        raise ConfigError(f"unknown config key {name!r}")
    default = ScenarioConfig.__dataclass_fields__[name].default
    text = text.strip()
    if name == "sweep_values":
        return tuple(float(v) for v in text.replace(",", " ").split())
    if name in ("ka_max",):
        return None if text.lower() in ("", "none") else int(text)
    if name in ("pilot_codebook", "data_codebook"):
        return None if text.lower() in ("", "none") else text
    if isinstance(default, bool):
        return _parse_bool(text)
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def parse_overrides(pairs) -> dict:
    """Turn ``key=value`` strings into typed config fields."""
    out = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"expected key=value, got {pair!r}")
        key, value = pair.split("=", 1)
        key = key.strip()
        out[key] = _coerce(key, value)
    return out


def load_config(path=None, **overrides) -> ScenarioConfig:
    """Defaults, then file values, then ``overrides`` (highest precedence)."""
    values = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            try:
                values[key.strip()] = _coerce(key.strip(), value)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    values.update(overrides)
    return ScenarioConfig(**values)


def dump_config(cfg: ScenarioConfig) -> str:
    lines = []
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name == "sweep_values":
            v = ", ".join(repr(x) for x in v)
        elif isinstance(v, bool):
            v = str(v).lower()
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"
