"""Named scenarios and report output."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from . import __version__
from .barrett_kok import BarrettKokLink, BarrettKokSource, EntanglementRecord, NotEntangled
from .config import ScenarioConfig
from .hardware import decay_pair
from .kernel import Timeline, derive_rng
from .quantum import BellKind, werner_from_fidelity
from .teleportation import (
    TrialAggregate,
    exact_teleport_channel,
    fixed_resource,
    joint_pauli_probabilities,
    run_trials,
)

FORMATS = ("csv", "json")


@dataclass
class Table:
    header: list[str]
    rows: list[list[Any]]


@dataclass
class RunReport:
    scenario: str
    seed: int
    records: list[EntanglementRecord] = field(default_factory=list)
    metrics: dict[str, Any] = field(default_factory=dict)
    tables: dict[str, Table] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    manifest: list[str] = field(default_factory=list)


def _config_echo(cfg: ScenarioConfig) -> dict[str, Any]:
    echo = {}
    for section, keys in cfg.values.items():
        for key, value in keys.items():
            if isinstance(value, complex):
                value = str(value)
            echo[key if section == "run" else f"{section}.{key}"] = value
    echo["seed"] = cfg.seed
    echo["trials"] = cfg.trials
    echo["pairs"] = cfg.pairs
    echo["scenario"] = cfg.scenario
    return echo


def _new_report(cfg: ScenarioConfig) -> RunReport:
    return RunReport(cfg.scenario, cfg.seed, config=_config_echo(cfg))


# -- entanglement generation ------------------------------------------------


def generate_pairs(cfg: ScenarioConfig) -> list[EntanglementRecord]:
    """Entangle ``cfg.pairs`` memory pairs concurrently on one timeline.

    Pair ``k`` links memory ``k`` with memory ``k + pairs``; each pair draws
    from its own random substream.
    """
    timeline = Timeline()
    links = []
    for k in range(cfg.pairs):
        link = BarrettKokLink(
            cfg.hardware,
            timeline,
            derive_rng(cfg.seed, "barrett_kok", "pair", k),
            memory_a=k,
            memory_b=k + cfg.pairs,
            max_attempts=cfg.max_attempts,
        )
        link.start()
        links.append(link)
    timeline.run()
    records = []
    for k, link in enumerate(links):
        if link.record is None:
            raise NotEntangled(link.attempts, link.failures, pair=k)
        records.append(link.record)
    return records


def scenario_ideal_entanglement(cfg: ScenarioConfig) -> RunReport:
    report = _new_report(cfg)
    records = generate_pairs(cfg)
    report.records = records
    report.tables["entanglement_times"] = Table(
        ["pair_index", "memory_a", "memory_b", "completion_time_ps", "attempts", "sign", "fidelity"],
        [
            [k, r.memory_a, r.memory_b, r.completion_time, r.attempts, r.sign.value, r.fidelity]
            for k, r in enumerate(records)
        ],
    )
    rounds = []
    for r in records:
        rounds.append([r.memory_a, r.round1_count, r.round2_count])
        rounds.append([r.memory_b, r.round1_count, r.round2_count])
    rounds.sort()
    report.tables["rounds"] = Table(["memory_index", "round1_count", "round2_count"], rounds)
    attempts = [r.attempts for r in records]
    report.metrics = {
        "pairs": len(records),
        "mean_attempts": float(np.mean(attempts)),
        "mean_entanglement_fidelity": float(np.mean([r.fidelity for r in records])),
        "last_completion_time_ps": max(r.completion_time for r in records),
    }
    return report


# -- teleportation ------------------------------------------------------------


class _TrackedSource:
    """Wraps a resource iterator and keeps per-record statistics."""

    def __init__(self, source: Iterator):
        self.source = source
        self.count = 0
        self.records = 0
        self.fidelity_sum = 0.0
        self.attempts_sum = 0
        self.false_heralds = 0
        self.signs = {BellKind.PSI_PLUS: 0, BellKind.PSI_MINUS: 0}

    def __iter__(self):
        return self

    def __next__(self):
        rec = next(self.source)
        self.count += 1
        if isinstance(rec, EntanglementRecord):
            self.records += 1
            self.fidelity_sum += rec.fidelity
            self.attempts_sum += rec.attempts
            self.false_heralds += not rec.genuine
            self.signs[rec.sign] = self.signs.get(rec.sign, 0) + 1
        return rec


def storage_delay(cfg: ScenarioConfig) -> int:
    """Time Bob's half waits for Alice's classical message, in ps."""
    return cfg.hardware.classical.delay


def nominal_resource(cfg: ScenarioConfig, fidelity: float | None = None) -> np.ndarray:
    """Heralded psi+ pair after storage decay, as the oracle sees it."""
    hw = cfg.hardware
    f = hw.pair_fidelity if fidelity is None else fidelity
    coherence = min(hw.memory_a.coherence_time, hw.memory_b.coherence_time)
    return decay_pair(werner_from_fidelity(f, BellKind.PSI_PLUS), storage_delay(cfg), coherence)


def resource_supply(cfg: ScenarioConfig, *keys) -> _TrackedSource:
    if cfg.resource == "werner":
        return _TrackedSource(fixed_resource(nominal_resource(cfg)))
    src = BarrettKokSource(
        cfg.hardware,
        derive_rng(cfg.seed, *keys, "barrett_kok"),
        storage_delay=storage_delay(cfg),
        max_attempts=cfg.max_attempts,
    )
    return _TrackedSource(src)


def teleport(cfg: ScenarioConfig, *keys) -> tuple[TrialAggregate, _TrackedSource]:
    supply = resource_supply(cfg, *keys)
    agg = run_trials(
        cfg.trials,
        cfg.input_state,
        supply,
        cfg.noise,
        derive_rng(cfg.seed, *keys, "trials"),
        measure_receiver=cfg.measure_receiver,
    )
    return agg, supply


def bsm_fidelity(cfg: ScenarioConfig) -> float:
    """Teleportation fidelity with an ideal pair and only Alice-side noise."""
    return exact_teleport_channel(cfg.input_state, werner_from_fidelity(1.0), cfg.noise.bsm_only())


def receiver_fidelity(cfg: ScenarioConfig) -> float:
    """Teleportation fidelity with an ideal pair and only Bob's correction noise."""
    return exact_teleport_channel(cfg.input_state, werner_from_fidelity(1.0), cfg.noise.receiver_only())


def scenario_pfaff_benchmark(cfg: ScenarioConfig) -> RunReport:
    report = _new_report(cfg)
    agg, supply = teleport(cfg, "teleport")
    oracle = exact_teleport_channel(cfg.input_state, nominal_resource(cfg), cfg.noise)
    joint = joint_pauli_probabilities(cfg.noise.cnot)
    report.metrics = {
        "entanglement_fidelity": supply.fidelity_sum / supply.records if supply.records else cfg.hardware.pair_fidelity,
        "bsm_fidelity": bsm_fidelity(cfg),
        "receiver_fidelity": receiver_fidelity(cfg),
        "teleported_fidelity": agg.mean_fidelity,
        "teleported_fidelity_std_error": agg.std_error,
        "teleported_fidelity_oracle": oracle,
        "cnot_double_bitflip_probability": float(joint[1, 1]),
        "trials": agg.n,
        "receiver_count_0": agg.count_0,
        "receiver_count_1": agg.count_1,
        "mean_attempts_per_pair": supply.attempts_sum / supply.records if supply.records else None,
        "false_heralds": supply.false_heralds,
    }
    return report


def sweep_config(cfg: ScenarioConfig, row) -> ScenarioConfig:
    """``cfg`` with one sweep row's memory fidelity and bit-flip rates applied."""
    hw = cfg.hardware
    mem = replace(hw.memory_a, fidelity=row.memory_fidelity)
    noise = replace(
        cfg.noise,
        cnot=replace(cfg.noise.cnot, px=row.cnot_bitflip),
        correction_x=replace(cfg.noise.correction_x, px=row.x_bitflip),
    )
    return cfg.replace(hardware=replace(hw, memory_a=mem, memory_b=mem), noise=noise)


def scenario_fidelity_sweep(cfg: ScenarioConfig) -> RunReport:
    if not cfg.sweep:
        raise ValueError("fidelity_sweep needs a non-empty [sweep] rows table")
    report = _new_report(cfg)
    with_reference = all(r.reference is not None for r in cfg.sweep)
    header = ["memory_fidelity", "cnot_bitflip", "x_bitflip", "monte_carlo_fidelity", "oracle_fidelity", "std_error"]
    if with_reference:
        header.append("reference_fidelity")
    rows = []
    for i, row in enumerate(cfg.sweep):
        rcfg = sweep_config(cfg, row)
        agg, _ = teleport(rcfg, "sweep", i)
        oracle = exact_teleport_channel(rcfg.input_state, nominal_resource(rcfg), rcfg.noise)
        out = [row.memory_fidelity, row.cnot_bitflip, row.x_bitflip, agg.mean_fidelity, oracle, agg.std_error]
        if with_reference:
            out.append(row.reference)
        rows.append(out)
    report.tables["fidelity_table"] = Table(header, rows)
    return report


SCENARIO_FUNCS = {
    "ideal_entanglement": scenario_ideal_entanglement,
    "pfaff_benchmark": scenario_pfaff_benchmark,
    "fidelity_sweep": scenario_fidelity_sweep,
}


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    return SCENARIO_FUNCS[cfg.scenario](cfg)


# -- output -----------------------------------------------------------------


def _num(x: Any) -> Any:
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(f"{float(x):.6g}")
    return x


def _text(x: Any) -> str:
    x = _num(x)
    if isinstance(x, float):
        return f"{x:.6g}"
    if x is None:
        return ""
    return str(x)


def _atomic_write(path: Path, data: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.header)
    for row in table.rows:
        w.writerow([_text(v) for v in row])
    return buf.getvalue()


def _json(obj: Any) -> str:
    def clean(o):
        if isinstance(o, dict):
            return {k: clean(v) for k, v in o.items()}
        if isinstance(o, (list, tuple)):
            return [clean(v) for v in o]
        return _num(o)

    return json.dumps(clean(obj), indent=2) + "\n"


def emit_report(report: RunReport, out_dir, fmt: str = "csv") -> list[str]:
    """Write the report into ``out_dir`` and return the file manifest.

    Tables go to ``<name>.csv`` (or ``<name>.json``), scalar metrics to
    ``report.json``; ``run_metadata.json`` is always written, last.
    """
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    files: dict[str, str] = {}
    for name, table in report.tables.items():
        if fmt == "csv":
            files[f"{name}.csv"] = _csv(table)
        else:
            files[f"{name}.json"] = _json([dict(zip(table.header, row)) for row in table.rows])
    if report.metrics:
        files["report.json"] = _json({"scenario": report.scenario, "seed": report.seed, "metrics": report.metrics})
    manifest = sorted(files) + ["run_metadata.json"]
    files["run_metadata.json"] = _json(
        {
            "scenario": report.scenario,
            "seed": report.seed,
            "version": __version__,
            "config": report.config,
            "manifest": manifest,
        }
    )
    for name in manifest:
        path = out / name
        try:
            _atomic_write(path, files[name])
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
    report.manifest = manifest
    return manifest
