"""Scenario configuration files.

The format is INI with optional leading top-level keys::

    scenario = pfaff_benchmark
    seed = 7

    [memory]
    fidelity = 0.87

    [noise.cnot]
    px = 0.018

Dotted top-level keys (``detector.efficiency = 0.9``) are accepted as a
shorthand for a key in that section. Every key is optional; absent keys take
the defaults listed in ``SCHEMA``.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

from .barrett_kok import DEFAULT_MAX_ATTEMPTS, LinkHardware
from .hardware import ClassicalChannelParams, DetectorParams, MemoryParams, QuantumChannelParams
from .kernel import seconds_to_ps
from .quantum import PauliNoise
from .teleportation import InputState, NoiseConfig

SCENARIOS = ("ideal_entanglement", "pfaff_benchmark", "fidelity_sweep")
ALIASES = {"ideal": "ideal_entanglement", "pfaff": "pfaff_benchmark", "sweep": "fidelity_sweep", "table1": "fidelity_sweep"}
PRESETS = ("ideal", "pfaff", "table1")

SEED_ENV = "QNET_SIM_SEED"
TOP = "run"


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def _prob(v: float) -> Optional[str]:
    return None if 0.0 <= v <= 1.0 else "must be in [0, 1]"


def _nonneg(v: float) -> Optional[str]:
    return None if v >= 0.0 else "must be >= 0"


def _pos(v: float) -> Optional[str]:
    return None if v > 0.0 else "must be > 0"


def _at_least_one(v: int) -> Optional[str]:
    return None if v >= 1 else "must be >= 1"


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _scenario(text: str) -> str:
    name = ALIASES.get(text.strip(), text.strip())
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {text!r} (choose from {', '.join(SCENARIOS)})")
    return name


_FLOAT: Callable[[str], Any] = float

# section -> key -> (parser, default, check)
SCHEMA: dict[str, dict[str, tuple]] = {
    TOP: {
        "scenario": (_scenario, "ideal_entanglement", None),
        "seed": (int, None, _nonneg),
        "pairs": (int, 10, _at_least_one),
        "trials": (int, 1000, _at_least_one),
    },
    "memory": {
        "frequency": (_FLOAT, 80e6, _pos),
        "coherence_time": (_FLOAT, 1.0, _pos),
        "efficiency": (_FLOAT, 1.0, _prob),
        "fidelity": (_FLOAT, 1.0, lambda v: None if 0.25 <= v <= 1.0 else "must be in [0.25, 1]"),
    },
    "detector": {
        "efficiency": (_FLOAT, 1.0, _prob),
        "dark_count_rate": (_FLOAT, 0.0, _nonneg),
        "time_resolution": (_FLOAT, 1e-9, _nonneg),
        "max_count_rate": (_FLOAT, 50e6, _nonneg),
    },
    "quantum_channel": {
        "length": (_FLOAT, 0.0, _nonneg),
        "length_b": (_FLOAT, None, _nonneg),
        "attenuation": (_FLOAT, 0.2, _nonneg),
        "propagation_speed": (_FLOAT, 2e8, _pos),
    },
    "classical_channel": {
        "length": (_FLOAT, 0.0, _nonneg),
        "propagation_speed": (_FLOAT, 2e8, _pos),
    },
    "protocol": {
        "max_attempts": (int, DEFAULT_MAX_ATTEMPTS, _at_least_one),
        "relaxation_wait": (_FLOAT, None, _nonneg),
    },
    "teleportation": {
        "alpha": (_complex, 1.0, None),
        "beta": (_complex, 0.0, None),
        "measure_receiver": (_bool, True, None),
        "resource": (str, "barrett_kok", lambda v: None if v in ("barrett_kok", "werner") else "must be barrett_kok or werner"),
    },
    "noise": {
        "measurement_flip": (_FLOAT, 0.0, _prob),
    },
    "sweep": {
        "rows": (str, "", None),
    },
}
for _point in ("cnot", "h", "correction_x", "correction_z"):
    SCHEMA[f"noise.{_point}"] = {k: (_FLOAT, 0.0, _prob) for k in ("px", "py", "pz")}


@dataclass(frozen=True)
class SweepRow:
    memory_fidelity: float
    cnot_bitflip: float
    x_bitflip: float
    reference: Optional[float] = None


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "ideal_entanglement"
    seed: int = 0
    pairs: int = 10
    trials: int = 1000
    input_state: InputState = InputState()
    hardware: LinkHardware = LinkHardware()
    noise: NoiseConfig = NoiseConfig()
    max_attempts: int = DEFAULT_MAX_ATTEMPTS
    measure_receiver: bool = True
    resource: str = "barrett_kok"
    sweep: tuple[SweepRow, ...] = ()
    values: dict = field(default_factory=dict, compare=False, repr=False)
    source: str = ""

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def preset_path(name: str) -> Path:
    name = name[:-4] if name.endswith(".cfg") else name
    if name not in PRESETS:
        raise ConfigError("config", f"no preset named {name!r}")
    return Path(str(resources.files("qnetsim") / "presets" / f"{name}.cfg"))


def _read(text: str, origin: str) -> configparser.ConfigParser:
    # top-level keys become the implicit [run] section
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(f"[{TOP}]\n" + text, source=origin)
    except configparser.Error as exc:
        raise ConfigError("file", f"cannot parse {origin}: {exc}") from exc
    return cp


def _collect(cp: configparser.ConfigParser) -> dict[str, dict[str, str]]:
    raw: dict[str, dict[str, str]] = {}
    for section in cp.sections():
        for key, value in cp.items(section):
            if section == TOP and "." in key:
                section_name, _, key = key.rpartition(".")
            else:
                section_name = section
            if section_name not in SCHEMA:
                raise ConfigError(section_name, "unknown section")
            if key not in SCHEMA[section_name]:
                name = key if section_name == TOP else f"{section_name}.{key}"
                raise ConfigError(name, "unknown key")
            raw.setdefault(section_name, {})[key] = value
    return raw


def _resolve(raw: dict[str, dict[str, str]]) -> dict[str, dict[str, Any]]:
    values: dict[str, dict[str, Any]] = {}
    for section, keys in SCHEMA.items():
        out = values.setdefault(section, {})
        for key, (parse, default, check) in keys.items():
            name = key if section == TOP else f"{section}.{key}"
            if key in raw.get(section, {}):
                text = raw[section][key]
                try:
                    value = parse(text)
                except ValueError as exc:
                    raise ConfigError(name, f"cannot parse {text!r}: {exc}") from None
                if check is not None:
                    problem = check(value)
                    if problem:
                        raise ConfigError(name, f"{value} {problem}")
            else:
                value = default
            out[key] = value
    return values


def _parse_sweep(text: str) -> tuple[SweepRow, ...]:
    rows = []
    for n, line in enumerate(text.replace(";", "\n").splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        try:
            nums = [float(x) for x in line.split(",")]
        except ValueError:
            raise ConfigError("sweep.rows", f"row {n} is not numeric: {line!r}") from None
        if len(nums) not in (3, 4):
            raise ConfigError("sweep.rows", f"row {n} needs memory_fidelity, cnot_bitflip, x_bitflip[, reference]")
        if not 0.25 <= nums[0] <= 1:
            raise ConfigError("sweep.rows", f"row {n}: memory_fidelity {nums[0]} must be in [0.25, 1]")
        for v in nums[1:3]:
            if not 0 <= v <= 1:
                raise ConfigError("sweep.rows", f"row {n}: bit-flip probability {v} must be in [0, 1]")
        rows.append(SweepRow(*nums))
    return tuple(rows)


def _build(values: dict[str, dict[str, Any]], origin: str) -> ScenarioConfig:
    qc_ = values["quantum_channel"]
    if qc_["length_b"] is not None and qc_["length_b"] != qc_["length"]:
        raise ConfigError(
            "quantum_channel.length_b",
            f"{qc_['length_b']} differs from length {qc_['length']}; both photons must reach the beamsplitter together",
        )
    mem = MemoryParams(**values["memory"])
    det = DetectorParams(**values["detector"])
    chan = QuantumChannelParams(qc_["length"], qc_["attenuation"], qc_["propagation_speed"])
    classical = ClassicalChannelParams(**values["classical_channel"])
    noise_points = {}
    for point in ("cnot", "h", "correction_x", "correction_z"):
        try:
            noise_points[point] = PauliNoise(**values[f"noise.{point}"])
        except ValueError as exc:
            raise ConfigError(f"noise.{point}", str(exc)) from None
    noise = NoiseConfig(measurement_flip=values["noise"]["measurement_flip"], **noise_points)
    wait = values["protocol"]["relaxation_wait"]
    hw = LinkHardware(
        memory_a=mem,
        memory_b=mem,
        detector=det,
        channel_a=chan,
        channel_b=chan,
        classical=classical,
        relaxation_wait=None if wait is None else seconds_to_ps(wait),
    )
    tel = values["teleportation"]
    try:
        input_state = InputState(tel["alpha"], tel["beta"])
    except ValueError as exc:
        raise ConfigError("teleportation.alpha", str(exc)) from None
    top = values[TOP]
    seed = top["seed"]
    if seed is None:
        env = os.environ.get(SEED_ENV)
        try:
            seed = int(env) if env else 0
        except ValueError:
            raise ConfigError(SEED_ENV, f"not an integer: {env!r}") from None
    return ScenarioConfig(
        scenario=top["scenario"],
        seed=seed,
        pairs=top["pairs"],
        trials=top["trials"],
        input_state=input_state,
        hardware=hw,
        noise=noise,
        max_attempts=values["protocol"]["max_attempts"],
        measure_receiver=tel["measure_receiver"],
        resource=tel["resource"],
        sweep=_parse_sweep(values["sweep"]["rows"]),
        values=values,
        source=origin,
    )


def parse_config(text: str, origin: str = "<string>") -> ScenarioConfig:
    return _build(_resolve(_collect(_read(text, origin))), origin)


def load_config(path) -> ScenarioConfig:
    """Read and validate a scenario file; a bare preset name also works."""
    p = Path(path)
    if not p.exists() and p.stem in PRESETS and p.parent == Path("."):
        p = preset_path(p.stem)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {p}: {exc}") from exc
    return parse_config(text, p.name)


def documented_keys() -> set[str]:
    """Every ``section.key`` the file format understands."""
    return {key if s == TOP else f"{s}.{key}" for s, keys in SCHEMA.items() for key in keys}
