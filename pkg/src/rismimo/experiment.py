"""Config-driven Monte Carlo sweeps: parse, run, write CSV + manifest, summarize.

Config files are YAML with the sections documented in the README (system,
geometry, links, sweep, schemes). Defaults reproduce the reference deployment:
4x4 MIMO, 5x5 RIS at quarter-wavelength spacing, Rician factors 6/4/3 dB,
path-loss exponents 2.4/2.5/3.5 with -20 dB at 1 m, 30 dBm downlink power,
-120/-110 dBm noise at BS/UE, 1000 trials.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone

import numpy as np
import yaml

from . import __version__
from .channel import ArrayGeometry, LinkStatistics, random_los_angles, sample_channels
from .errors import ConfigError
from .precoding import CapacityRecord
from .rng import SeedPath
from .schemes import SchemeSpec, TrialEnv, run_scheme
from .training import orthogonal_pilot

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "run_experiment",
    "write_results",
    "summarize",
    "CSV_HEADER",
    "SUMMARY_HEADER",
]

CSV_HEADER = ["scheme", "sweep_axis", "sweep_value", "trial", "capacity_bps_hz",
              "iterations", "converged", "q", "n", "p_d_dbm", "p_u_dbm", "seed"]
SUMMARY_HEADER = ["scheme", "sweep_axis", "sweep_value", "trials",
                  "capacity_mean_bps_hz", "capacity_se_bps_hz", "degenerate"]

SWEEP_AXES = ("q", "p_d_dbm", "p_u_dbm", "n")
_WORKERS_ENV = "RISMIMO_WORKERS"


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def db_to_linear(db: float) -> float:
    if math.isinf(db) and db > 0:
        return math.inf
    return 10.0 ** (db / 10.0)


@dataclass
class ExperimentConfig:
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    link_bs_ris: LinkStatistics = field(default_factory=lambda: LinkStatistics(
        rician_factor=db_to_linear(6.0), path_loss_exponent=2.4))
    link_ris_ue: LinkStatistics = field(default_factory=lambda: LinkStatistics(
        rician_factor=db_to_linear(4.0), path_loss_exponent=2.5))
    link_bs_ue: LinkStatistics = field(default_factory=lambda: LinkStatistics(
        rician_factor=db_to_linear(3.0), path_loss_exponent=3.5))
    schemes: list = field(default_factory=lambda: [
        SchemeSpec(kind=k) for k in ("random", "ranc", "dftc", "wdft", "ewdft")])
    sweep_axis: str = "q"
    sweep_values: list = field(default_factory=lambda: [6])
    trials: int = 1000
    master_seed: int = 1
    noiseless_training: bool = False
    perfect_csi: bool = False     # weighted design sees the true stacked channel
    n_streams: int = 4            # data streams, <= min(m_t, m_r)
    tau: int = 4                  # pilot length, >= m_r
    p_d_dbm: float = 30.0
    p_u_dbm: float = 30.0
    noise_bs_dbm: float = -120.0
    noise_ue_dbm: float = -110.0
    angle_mode: str = "geometric"
    output_path: str = "results.csv"

    def validate(self):
        if self.trials < 1:
            raise ConfigError("trials: must be >= 1")
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"sweep.axis: must be one of {SWEEP_AXES}")
        if not self.sweep_values:
            raise ConfigError("sweep.values: must be non-empty")
        if self.master_seed < 0:
            raise ConfigError("master_seed: must be nonnegative")
        if self.angle_mode not in ("geometric", "random"):
            raise ConfigError("geometry.angle_mode: must be geometric or random")
        if self.tau < self.geometry.m_r:
            raise ConfigError(f"system.tau: must be >= m_r ({self.geometry.m_r})")
        if not 1 <= self.n_streams <= min(self.geometry.m_t, self.geometry.m_r):
            raise ConfigError("system.m_s: must lie in [1, min(m_t, m_r)]")
        if not self.schemes:
            raise ConfigError("schemes: must list at least one scheme")
        if self.sweep_axis == "n":
            for v in self.sweep_values:
                if int(v) != v or int(v) < 1 or int(v) % self.geometry.n_x != 0:
                    raise ConfigError(
                        f"sweep.values: N={v} is not a positive multiple of "
                        f"n_x={self.geometry.n_x}")
        if self.sweep_axis == "q":
            for v in self.sweep_values:
                if int(v) != v or int(v) < 1:
                    raise ConfigError(f"sweep.values: Q={v} must be a positive integer")


def _require_keys(section: dict, allowed: set, path: str):
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{path}{key}: unknown key")


def _get(section: dict, key: str, default, path: str, kind=None):
    value = section.get(key, default)
    if kind is not None and value is not None and not isinstance(value, kind):
        if kind is float and isinstance(value, int):
            return float(value)
        raise ConfigError(f"{path}{key}: expected {kind.__name__}, got {value!r}")
    return value


def _parse_link(section: dict, defaults: LinkStatistics, ref_loss_db: float,
                ref_distance: float, path: str) -> LinkStatistics:
    _require_keys(section, {"rician_factor_db", "path_loss_exponent"}, path)
    f_db = _get(section, "rician_factor_db",
                10.0 * math.log10(defaults.rician_factor), path, float)
    alpha = _get(section, "path_loss_exponent", defaults.path_loss_exponent,
                 path, float)
    try:
        return LinkStatistics(rician_factor=db_to_linear(f_db),
                              path_loss_exponent=alpha,
                              reference_loss=db_to_linear(ref_loss_db),
                              reference_distance=ref_distance)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_scheme(entry: dict, index: int) -> SchemeSpec:
    path = f"schemes[{index}]."
    if not isinstance(entry, dict):
        raise ConfigError(f"schemes[{index}]: expected a mapping")
    kind = entry.get("kind")
    if kind == "ce_pbf":
        raise ConfigError(
            f"{path}kind: 'ce_pbf' is reserved; the grouping-based channel "
            "estimation + passive beamforming baseline is not implemented")
    allowed = {"kind", "q", "ordering", "tolerance", "max_iterations",
               "ref_antenna_tx", "ref_antenna_rx", "genie_precoder"}
    _require_keys(entry, allowed, path)
    try:
        return SchemeSpec(
            kind=_get(entry, "kind", None, path, str),
            q=_get(entry, "q", 6, path, int),
            ordering=_get(entry, "ordering", "sequential", path, str),
            tolerance=_get(entry, "tolerance", 1e-8, path, float),
            max_iterations=_get(entry, "max_iterations", 100, path, int),
            ref_antenna_tx=_get(entry, "ref_antenna_tx", 0, path, int),
            ref_antenna_rx=_get(entry, "ref_antenna_rx", 0, path, int),
            genie_precoder=_get(entry, "genie_precoder", False, path, bool),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a YAML experiment config, filling reference defaults."""
    raw = yaml.safe_load(text)
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a mapping")
    _require_keys(raw, {"trials", "master_seed", "noiseless_training",
                        "perfect_csi", "output_path", "sweep", "system",
                        "geometry", "links", "schemes"}, "")

    system = raw.get("system", {}) or {}
    _require_keys(system, {"m_t", "m_r", "n_x", "n_y", "m_s", "tau", "p_d_dbm",
                           "p_u_dbm", "noise_bs_dbm", "noise_ue_dbm"}, "system.")
    geo = raw.get("geometry", {}) or {}
    _require_keys(geo, {"bs_position", "ris_position", "ue_position",
                        "bs_spacing", "ue_spacing", "ris_spacing",
                        "angle_mode"}, "geometry.")
    defaults = ExperimentConfig()
    m_r = _get(system, "m_r", 4, "system.", int)
    try:
        geometry = ArrayGeometry(
            bs_position=tuple(_get(geo, "bs_position", [0.0, 0.0, 5.0], "geometry.")),
            ris_position=tuple(_get(geo, "ris_position", [0.0, 100.0, 5.0], "geometry.")),
            ue_position=tuple(_get(geo, "ue_position", [3.0, 100.0, 0.0], "geometry.")),
            bs_spacing=_get(geo, "bs_spacing", 0.5, "geometry.", float),
            ue_spacing=_get(geo, "ue_spacing", 0.5, "geometry.", float),
            ris_spacing=_get(geo, "ris_spacing", 0.25, "geometry.", float),
            n_x=_get(system, "n_x", 5, "system.", int),
            n_y=_get(system, "n_y", 5, "system.", int),
            m_t=_get(system, "m_t", 4, "system.", int),
            m_r=m_r,
        )
    except ValueError as exc:
        raise ConfigError(f"geometry: {exc}") from exc

    links = raw.get("links", {}) or {}
    _require_keys(links, {"bs_ris", "ris_ue", "bs_ue", "reference_loss_db",
                          "reference_distance_m"}, "links.")
    ref_loss_db = _get(links, "reference_loss_db", -20.0, "links.", float)
    ref_distance = _get(links, "reference_distance_m", 1.0, "links.", float)

    sweep = raw.get("sweep", {}) or {}
    _require_keys(sweep, {"axis", "values"}, "sweep.")
    sweep_values = _get(sweep, "values", defaults.sweep_values, "sweep.")
    if not isinstance(sweep_values, list):
        raise ConfigError("sweep.values: expected a list")

    schemes_raw = raw.get("schemes")
    if schemes_raw is None:
        schemes = defaults.schemes
    else:
        if not isinstance(schemes_raw, list):
            raise ConfigError("schemes: expected a list")
        schemes = [_parse_scheme(entry, i) for i, entry in enumerate(schemes_raw)]

    config = ExperimentConfig(
        geometry=geometry,
        link_bs_ris=_parse_link(links.get("bs_ris", {}) or {}, defaults.link_bs_ris,
                                ref_loss_db, ref_distance, "links.bs_ris."),
        link_ris_ue=_parse_link(links.get("ris_ue", {}) or {}, defaults.link_ris_ue,
                                ref_loss_db, ref_distance, "links.ris_ue."),
        link_bs_ue=_parse_link(links.get("bs_ue", {}) or {}, defaults.link_bs_ue,
                               ref_loss_db, ref_distance, "links.bs_ue."),
        schemes=schemes,
        sweep_axis=_get(sweep, "axis", defaults.sweep_axis, "sweep.", str),
        sweep_values=sweep_values,
        trials=_get(raw, "trials", defaults.trials, "", int),
        master_seed=_get(raw, "master_seed", defaults.master_seed, "", int),
        noiseless_training=_get(raw, "noiseless_training", False, "", bool),
        perfect_csi=_get(raw, "perfect_csi", False, "", bool),
        n_streams=_get(system, "m_s", min(geometry.m_t, geometry.m_r), "system.", int),
        tau=_get(system, "tau", m_r, "system.", int),
        p_d_dbm=_get(system, "p_d_dbm", 30.0, "system.", float),
        p_u_dbm=_get(system, "p_u_dbm", 30.0, "system.", float),
        noise_bs_dbm=_get(system, "noise_bs_dbm", -120.0, "system.", float),
        noise_ue_dbm=_get(system, "noise_ue_dbm", -110.0, "system.", float),
        angle_mode=_get(geo, "angle_mode", "geometric", "geometry.", str),
        output_path=_get(raw, "output_path", defaults.output_path, "", str),
    )
    config.validate()
    return config


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


def _apply_sweep(config: ExperimentConfig, value):
    """Specialize config pieces for one sweep point."""
    geometry = config.geometry
    p_d_dbm, p_u_dbm = config.p_d_dbm, config.p_u_dbm
    schemes = config.schemes
    if config.sweep_axis == "q":
        schemes = [replace(s, q=int(value)) if s.kind != "random" else s
                   for s in schemes]
    elif config.sweep_axis == "p_d_dbm":
        p_d_dbm = float(value)
    elif config.sweep_axis == "p_u_dbm":
        p_u_dbm = float(value)
    elif config.sweep_axis == "n":
        geometry = replace(geometry, n_y=int(value) // geometry.n_x)
    return geometry, p_d_dbm, p_u_dbm, schemes


def _substream(config: ExperimentConfig, kind: str, value, *rest) -> SeedPath:
    # Draws ignore sweep axes that cannot affect them, so trials are paired
    # across those sweep points (the n axis changes shapes and cannot be).
    # Pairing makes paired-trial comparisons and trend checks exact instead of
    # Monte Carlo noisy; determinism per (axis, value, trial) is unchanged.
    root = SeedPath(config.master_seed)
    if config.sweep_axis == "n":
        return root.child(kind, value, *rest)
    return root.child(kind, *rest)


def run_point(config: ExperimentConfig, value, trial: int) -> list[CapacityRecord]:
    """Run every scheme for one (sweep value, trial) cell."""
    geometry, p_d_dbm, p_u_dbm, schemes = _apply_sweep(config, value)
    rng = _substream(config, "channel", value, trial).generator()
    angles = random_los_angles(rng) if config.angle_mode == "random" else None
    realization = sample_channels(geometry, config.link_bs_ris,
                                  config.link_ris_ue, config.link_bs_ue,
                                  rng, angles=angles)
    env = TrialEnv(
        pilot=orthogonal_pilot(geometry.m_r, config.tau, dbm_to_watts(p_u_dbm)),
        bs_noise_power=0.0 if config.noiseless_training
        else dbm_to_watts(config.noise_bs_dbm),
        ue_noise_power=dbm_to_watts(config.noise_ue_dbm),
        p_d=dbm_to_watts(p_d_dbm),
        n_streams=config.n_streams,
        p_d_dbm=p_d_dbm, p_u_dbm=p_u_dbm,
        trial=trial, seed=config.master_seed,
        perfect_csi=config.perfect_csi,
    )
    records = []
    for index, spec in enumerate(schemes):
        tree = _substream(config, "scheme", value, trial, index)
        records.append(run_scheme(realization, spec, env, tree))
    return records


def _point_task(args):
    config, value_index, value, trial = args
    return value_index, trial, run_point(config, value, trial)


def _resolve_workers(workers: int | None) -> int:
    if workers is None:
        workers = int(os.environ.get(_WORKERS_ENV, "1"))
    return max(1, workers)


def run_experiment(config: ExperimentConfig, workers: int | None = None) -> list[dict]:
    """Execute the full sweep and return CSV-ready row dicts.

    Rows are sorted by (sweep position, trial, scheme label, scheme index), so
    the output is identical for any worker count.
    """
    tasks = [(config, vi, value, trial)
             for vi, value in enumerate(config.sweep_values)
             for trial in range(config.trials)]
    results = {}
    workers = _resolve_workers(workers)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for vi, trial, records in pool.map(_point_task, tasks, chunksize=4):
                results[(vi, trial)] = records
    else:
        for task in tasks:
            vi, trial, records = _point_task(task)
            results[(vi, trial)] = records

    rows = []
    for vi, value in enumerate(config.sweep_values):
        for trial in range(config.trials):
            records = results[(vi, trial)]
            indexed = sorted(enumerate(records), key=lambda t: (t[1].scheme, t[0]))
            for _, rec in indexed:
                rows.append({
                    "scheme": rec.scheme,
                    "sweep_axis": config.sweep_axis,
                    "sweep_value": value,
                    "trial": trial,
                    "capacity_bps_hz": rec.capacity,
                    "iterations": rec.iterations,
                    "converged": rec.converged,
                    "q": rec.q_used,
                    "n": rec.n_elements,
                    "p_d_dbm": rec.p_d_dbm,
                    "p_u_dbm": rec.p_u_dbm,
                    "seed": rec.seed,
                })
    return rows


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return str(value)


def rows_to_csv(rows: list[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_format_cell(row[col]) for col in CSV_HEADER])
    return buffer.getvalue()


def write_results(rows: list[dict], config: ExperimentConfig, output_path: str,
                  config_text: str = "") -> str:
    """Atomically write the CSV and its manifest; returns the manifest path.

    A partial file is staged at <output>.partial and renamed only on success,
    so an interrupted run leaves no half-written CSV behind.
    """
    directory = os.path.dirname(os.path.abspath(output_path))
    os.makedirs(directory, exist_ok=True)
    partial = output_path + ".partial"
    try:
        with open(partial, "w", encoding="utf-8", newline="") as handle:
            handle.write(rows_to_csv(rows))
        os.replace(partial, output_path)
    except BaseException:
        if os.path.exists(partial):
            os.remove(partial)
        raise
    manifest = {
        "tool": "rismimo",
        "tool_version": __version__,
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "master_seed": config.master_seed,
        "sweep_axis": config.sweep_axis,
        "sweep_values": config.sweep_values,
        "trials": config.trials,
        "schemes": [s.label for s in config.schemes],
        "noiseless_training": config.noiseless_training,
        "perfect_csi": config.perfect_csi,
        "n_streams": config.n_streams,
        "rows": len(rows),
        "output": os.path.basename(output_path),
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    manifest_path = output_path + ".manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, indent=2)
        handle.write("\n")
    return manifest_path


def summarize(csv_text: str) -> list[dict]:
    """Per-(scheme, sweep value) mean and standard error of capacity."""
    reader = csv.DictReader(io.StringIO(csv_text))
    needed = {"scheme", "sweep_axis", "sweep_value", "capacity_bps_hz"}
    header = set(reader.fieldnames or [])
    missing = sorted(needed - header)
    if missing:
        raise ValueError(f"input CSV is missing column(s): {', '.join(missing)}")
    groups: dict = {}
    value_order: list = []
    axis = None
    for row in reader:
        axis = row["sweep_axis"]
        key = (row["sweep_value"], row["scheme"])
        if row["sweep_value"] not in value_order:
            value_order.append(row["sweep_value"])
        groups.setdefault(key, []).append(float(row["capacity_bps_hz"]))
    out = []
    for value in value_order:
        labels = sorted({s for (v, s) in groups if v == value})
        for scheme in labels:
            samples = np.asarray(groups[(value, scheme)])
            n = len(samples)
            se = float(np.std(samples, ddof=1) / np.sqrt(n)) if n > 1 else 0.0
            out.append({
                "scheme": scheme,
                "sweep_axis": axis,
                "sweep_value": value,
                "trials": n,
                "capacity_mean_bps_hz": float(np.mean(samples)),
                "capacity_se_bps_hz": se,
                "degenerate": n < 2,
            })
    return out


def summary_to_csv(summary_rows: list[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in summary_rows:
        writer.writerow([_format_cell(row[col]) for col in SUMMARY_HEADER])
    return buffer.getvalue()
