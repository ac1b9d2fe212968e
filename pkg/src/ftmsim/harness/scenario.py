"""Scenario definitions and the TOML config loader.

A config is flat TOML whose keys are the Scenario field names, plus an
optional ``preset`` naming one of the built-in setups (config1..config3)::

    name = "config2-outdoor"
    preset = "config2"
    channel = "outdoor"
    seed = 7

Devices and channels are either a preset name or a table.  A table may start
from a preset via its own ``preset`` key and override individual fields,
including a nested ``clock`` table.  ``[session]`` and ``[attacker]`` tables
map onto SessionConfig and AttackerConfig.  Omitted scalars default to a 25 s
run sampled every 380 ms with seed 0.
"""

from __future__ import annotations

import dataclasses
import math
import sys
from dataclasses import dataclass, field
from decimal import Decimal

from ..adversary import AttackerConfig
from ..errors import ParseError, ValidationError
from ..phy import ChannelModel, ClockModel, DeviceProfile
from ..protocol import MIN_DISTANCE_M, Mode, SessionConfig
from . import presets

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DEFAULT_DURATION_S = 25.0
DEFAULT_SAMPLE_INTERVAL_MS = 380.0
DEFAULT_SEED = 0


@dataclass(frozen=True)
class Scenario:
    name: str
    initiator: DeviceProfile
    responder: DeviceProfile
    channel: ChannelModel
    session: SessionConfig
    distances_m: tuple[float, ...]
    seed: int = DEFAULT_SEED
    duration_s: float = DEFAULT_DURATION_S
    sample_interval_ms: float = DEFAULT_SAMPLE_INTERVAL_MS
    attacker: AttackerConfig | None = None
    config_name: str = "custom"
    defaults_applied: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "distances_m", tuple(float(d) for d in self.distances_m))
        if not self.duration_s > 0:
            raise ValidationError(f"duration_s must be > 0, got {self.duration_s}")
        if not self.sample_interval_ms > 0:
            raise ValidationError(f"sample_interval_ms must be > 0, got {self.sample_interval_ms}")
        if not self.distances_m:
            raise ValidationError("distances_m must not be empty")
        for d in self.distances_m:
            if not (math.isfinite(d) and d >= MIN_DISTANCE_M):
                raise ValidationError(f"every distance must be >= {MIN_DISTANCE_M} m, got {d}")
        if len(set(self.distances_m)) != len(self.distances_m):
            raise ValidationError("distances_m contains duplicates")
        if not 0 <= self.seed < 2 ** 64:
            raise ValidationError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def samples_per_distance(self) -> int:
        # decimal arithmetic so 0.1 s / 20 ms style inputs don't lose a tick
        ticks = Decimal(repr(self.duration_s)) * 1000 / Decimal(repr(self.sample_interval_ms))
        return int(ticks) + 1


def preset_scenario(setup_name: str, environment: str = "indoor", **overrides) -> Scenario:
    """Scenario for one of the built-in setups in the named environment."""
    s = presets.setup(setup_name)
    kwargs = dict(
        name=f"{setup_name}-{environment}",
        initiator=presets.device(s.initiator),
        responder=presets.device(s.responder),
        channel=presets.channel(environment),
        session=SessionConfig(mode=Mode.BURST, burst_size=s.burst_size),
        distances_m=presets.ENVIRONMENT_DISTANCES[environment],
        config_name=setup_name,
    )
    kwargs.update(overrides)
    return Scenario(**kwargs)


# -- config parsing -------------------------------------------------------------

_SCENARIO_KEYS = {"name", "preset", "seed", "duration_s", "sample_interval_ms", "distances_m",
                  "initiator", "responder", "channel", "session", "attacker", "config_name"}


def _check_keys(table: dict, allowed, where: str) -> None:
    unknown = set(table) - set(allowed)
    if unknown:
        raise ValidationError(f"{where}: unknown key(s) {', '.join(sorted(unknown))}")


def _fields(cls) -> set[str]:
    return {f.name for f in dataclasses.fields(cls)}


def _build(cls, kwargs: dict, where: str):
    try:
        return cls(**kwargs)
    except ValidationError:
        raise
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _device(value, where: str) -> DeviceProfile:
    if isinstance(value, str):
        return presets.device(value)
    if not isinstance(value, dict):
        raise ValidationError(f"{where}: expected a preset name or a table")
    table = dict(value)
    base = presets.device(table.pop("preset")) if "preset" in table else None
    _check_keys(table, _fields(DeviceProfile), where)
    clock = table.pop("clock", None)
    if clock is not None:
        if not isinstance(clock, dict):
            raise ValidationError(f"{where}.clock: expected a table")
        _check_keys(clock, {"offset_ps", "drift_ppm"}, f"{where}.clock")
        start = dataclasses.asdict(base.clock) if base else {}
        start.pop("max_drift_ppm", None)
        table["clock"] = _build(ClockModel, {**start, **clock}, f"{where}.clock")
    if base is not None:
        return _replace(base, table, where)
    table.setdefault("name", where)
    return _build(DeviceProfile, table, where)


def _replace(base, changes: dict, where: str):
    try:
        return dataclasses.replace(base, **changes)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{where}: {exc}") from exc


def _channel(value) -> ChannelModel:
    if isinstance(value, str):
        return presets.channel(value)
    if not isinstance(value, dict):
        raise ValidationError("channel: expected an environment name or a table")
    table = dict(value)
    _check_keys(table, _fields(ChannelModel) | {"preset"}, "channel")
    if "preset" in table:
        return _replace(presets.channel(table.pop("preset")), table, "channel")
    return _build(ChannelModel, table, "channel")


def _session(table: dict, base: SessionConfig | None) -> SessionConfig:
    if not isinstance(table, dict):
        raise ValidationError("session: expected a table")
    table = dict(table)
    _check_keys(table, _fields(SessionConfig), "session")
    if "key" in table:
        try:
            table["key"] = bytes.fromhex(table["key"])
        except (TypeError, ValueError):
            raise ValidationError("session.key: expected 32 hex characters") from None
    if base is not None:
        return _replace(base, table, "session")
    return _build(SessionConfig, table, "session")


def load_scenario(config_text: str) -> Scenario:
    try:
        raw = tomllib.loads(config_text)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"config is not valid TOML: {exc}") from exc
    _check_keys(raw, _SCENARIO_KEYS, "scenario")

    setup = presets.setup(raw["preset"]) if "preset" in raw else None
    defaults = []

    def pick(key, fallback):
        if key in raw:
            return raw[key]
        defaults.append(key)
        return fallback

    if "channel" in raw:
        channel = _channel(raw["channel"])
    elif setup is not None:
        channel = presets.channel("indoor")
        defaults.append("channel")
    else:
        raise ValidationError("channel is required when no preset is given")

    def device_for(role):
        if role in raw:
            return _device(raw[role], role)
        if setup is None:
            raise ValidationError(f"{role} is required when no preset is given")
        return presets.device(getattr(setup, role))

    initiator, responder = device_for("initiator"), device_for("responder")

    base_session = SessionConfig(mode=Mode.BURST, burst_size=setup.burst_size) if setup else None
    if "session" in raw:
        session = _session(raw["session"], base_session)
    elif base_session is not None:
        session = base_session
    else:
        session = SessionConfig()
        defaults.append("session")

    if "distances_m" in raw:
        distances = raw["distances_m"]
        if not isinstance(distances, list):
            raise ValidationError("distances_m must be a list")
    elif channel.name in presets.ENVIRONMENT_DISTANCES:
        distances = list(presets.ENVIRONMENT_DISTANCES[channel.name])
        defaults.append("distances_m")
    else:
        raise ValidationError("distances_m is required for a custom channel")

    attacker = None
    if "attacker" in raw:
        if not isinstance(raw["attacker"], dict):
            raise ValidationError("attacker: expected a table")
        _check_keys(raw["attacker"], _fields(AttackerConfig), "attacker")
        attacker = _build(AttackerConfig, raw["attacker"], "attacker")

    config_name = raw.get("config_name", setup.name if setup else "custom")
    name = pick("name", f"{config_name}-{channel.name}")
    seed = pick("seed", DEFAULT_SEED)
    duration = pick("duration_s", DEFAULT_DURATION_S)
    interval = pick("sample_interval_ms", DEFAULT_SAMPLE_INTERVAL_MS)
    for key, value in (("seed", seed), ("duration_s", duration), ("sample_interval_ms", interval)):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{key} must be a number, got {value!r}")
    if not isinstance(seed, int):
        raise ValidationError(f"seed must be an integer, got {seed!r}")
    if not isinstance(name, str) or not name or any(c in name for c in ",/\\\n"):
        raise ValidationError(f"name must be a non-empty string without , / or newlines, got {name!r}")
    try:
        return Scenario(
            name=name, initiator=initiator, responder=responder, channel=channel,
            session=session, distances_m=tuple(distances), seed=seed,
            duration_s=float(duration), sample_interval_ms=float(interval),
            attacker=attacker, config_name=str(config_name), defaults_applied=tuple(defaults),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from exc
