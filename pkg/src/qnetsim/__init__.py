"""Discrete-event simulation of double-heralded entanglement and noisy teleportation."""

__version__ = "0.1.0"

from .quantum import (
    BellKind,
    Gate,
    PauliNoise,
    apply_gate,
    apply_pauli_channel,
    bell_state,
    fidelity_to_pure,
    measure_z,
    partial_trace,
    werner_from_fidelity,
)
from .kernel import Timeline, derive_rng
from .hardware import (
    ClassicalChannelParams,
    DetectorParams,
    MemoryParams,
    QuantumChannelParams,
    dark_click_probability,
    detect,
    propagation_delay,
    transmission_probability,
)
from .barrett_kok import (
    BarrettKokLink,
    BarrettKokSource,
    EntanglementRecord,
    LinkHardware,
    NotEntangled,
    classify,
    run_until_entangled,
    success_probability_oracle,
)
from .teleportation import (
    InputState,
    NoiseConfig,
    exact_teleport_channel,
    fixed_resource,
    run_trials,
    teleport_once,
)
from .config import ConfigError, ScenarioConfig, load_config, parse_config, preset_path
from .runner import RunReport, emit_report, run_scenario
