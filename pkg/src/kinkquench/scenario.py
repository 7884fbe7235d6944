"""Scenario runner: config validation, presets, CSV and manifest output.

Configs are flat key/value documents (TOML or JSON). Frequencies enter in
kHz and times as J0 t; internally couplings are in rad/s and times in s.
Every run writes its CSVs plus a ``manifest.json`` holding the resolved
config, which re-runs to bit-identical CSVs.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import os
import platform
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import __version__
from .couplings import (
    KHZ,
    DriveParams,
    load_mode_file,
    ms_couplings,
    nearest_neighbor_scale,
    power_law_couplings,
    ring_embedding,
)
from .errors import CapabilityError, ConfigError
from .evolution import DEFAULT_TOL, Trajectory, evolve
from .hamiltonian import DENSE_MAX_L, HamiltonianSpec, exact_spectrum, exact_transition
from .noise import degraded_wall_profile, sample_shots, shot_walls, write_shots
from .observables import (
    correlation_row,
    cumulative_ladder,
    extract_gap,
    magnetizations,
    probe_sites,
    time_averaged_walls,
    wall_profile,
)
from .spin import MAX_SITES, build_product_state
from .twokink import MAX_RING_L, gap_vs_size, twokink_ladder

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULT_MAX_L = 14
OUTPUT_ROOT_ENV = "KINKQUENCH_OUTPUT_ROOT"
SCHEMA_VERSION = 1
OBSERVABLES = ("magnetization", "correlations", "walls", "wall_profile")

_number = {"type": "number"}
_site_list = {"type": "array", "items": {"type": "integer", "minimum": 1}, "uniqueItems": True}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "kinkquench scenario",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "mode": {"enum": ["quench", "gap_ladder", "twokink_scaling"]},
        "L": {"type": "integer", "minimum": 2, "maximum": MAX_RING_L},
        "J0_kHz": {"type": "number", "exclusiveMinimum": 0},
        "alpha": {"type": "number", "minimum": 0},
        "mode_file": {"type": "string"},
        "rabi_kHz": {"type": "number", "minimum": 0},
        "detuning_kHz": _number,
        "recoil_kHz": {"type": "number", "exclusiveMinimum": 0},
        "B_over_J0": {
            "oneOf": [
                {"type": "number", "minimum": 0},
                {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
            ]
        },
        "initial_axis": {"enum": ["x", "y", "z"]},
        "initial_sign": {"enum": [-1, 1]},
        "flips": _site_list,
        "t_max_J0t": {"type": "number", "minimum": 0},
        "n_times": {"type": "integer", "minimum": 1},
        "wall_window_J0t": {"type": "array", "items": _number, "minItems": 2, "maxItems": 2},
        "observables": {"type": "array", "items": {"enum": list(OBSERVABLES)}, "uniqueItems": True},
        "reference_site": {"type": "integer", "minimum": 1},
        "correlation_axis": {"enum": ["x", "y", "z"]},
        "noise_p": {"type": "number", "minimum": 0, "maximum": 0.5},
        "shots": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "max_L": {"type": "integer", "minimum": 2, "maximum": MAX_SITES},
        "domain_sizes": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "L_list": {
            "type": "array",
            "items": {"type": "integer", "minimum": 4, "maximum": MAX_RING_L},
            "minItems": 1,
        },
        "J0_band": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "exact_check_max_L": {"type": "integer", "minimum": 0, "maximum": DENSE_MAX_L},
        "workers": {"type": "integer", "minimum": 1},
    },
}

DEFAULTS: dict[str, Any] = {
    "name": "run",
    "mode": "quench",
    "J0_kHz": 0.55,
    "B_over_J0": 0.75,
    "initial_axis": "x",
    "initial_sign": -1,
    "flips": [],
    "t_max_J0t": 2.0,
    "n_times": 201,
    "wall_window_J0t": None,
    "observables": ["magnetization", "correlations", "walls"],
    "reference_site": None,
    "correlation_axis": "x",
    "noise_p": 0.0,
    "shots": 0,
    "seed": 0,
    "output_dir": None,
    "tol": DEFAULT_TOL,
    "max_L": DEFAULT_MAX_L,
    "domain_sizes": [0, 1, 2],
    "L_list": None,
    "J0_band": 0.1,
    "exact_check_max_L": 11,
    "workers": 1,
}

_MODE_DEFAULTS = {
    "gap_ladder": {"t_max_J0t": 4.0, "n_times": 401},
    "twokink_scaling": {"B_over_J0": 1.0},
}

_BASE = {"L": 11, "alpha": 1.1, "J0_kHz": 0.55}

PRESETS: dict[str, dict[str, Any]] = {
    "fig2A": {
        **_BASE, "name": "fig2A", "B_over_J0": 0.75, "initial_axis": "x", "flips": [],
        "observables": ["magnetization", "correlations", "walls"],
    },
    "fig2D": {
        **_BASE, "name": "fig2D", "B_over_J0": 0.75, "initial_axis": "x", "flips": [6, 7],
        "observables": ["magnetization", "correlations", "walls", "wall_profile"],
    },
    "fig2G": {
        **_BASE, "name": "fig2G", "B_over_J0": 0.75, "initial_axis": "z", "initial_sign": 1,
        "flips": [],
        "observables": ["magnetization", "correlations", "walls"],
    },
    "figS1-size1": {
        **_BASE, "name": "figS1-size1", "B_over_J0": 0.75, "flips": [6],
        "observables": ["wall_profile", "walls"],
    },
    "figS1-size2": {
        **_BASE, "name": "figS1-size2", "B_over_J0": 0.75, "flips": [6, 7],
        "observables": ["wall_profile", "walls"],
    },
    "figS1-size3": {
        **_BASE, "name": "figS1-size3", "B_over_J0": 0.75, "flips": [5, 6, 7],
        "observables": ["wall_profile", "walls"],
    },
    "figS1-neel": {
        **_BASE, "name": "figS1-neel", "B_over_J0": 0.75, "flips": [2, 4, 6, 8, 10],
        "observables": ["wall_profile", "walls"],
    },
    "fig3-ladder": {
        **_BASE, "name": "fig3-ladder", "mode": "gap_ladder", "B_over_J0": 0.75,
        "domain_sizes": [0, 1, 2], "t_max_J0t": 4.0, "n_times": 401,
    },
    "fig3F-scaling": {
        "name": "fig3F-scaling", "mode": "twokink_scaling", "alpha": 1.0, "J0_kHz": 0.33,
        "B_over_J0": 1.0, "L_list": list(range(11, 39)), "J0_band": 0.1,
    },
    "fig4A-sweep": {
        **_BASE, "name": "fig4A-sweep", "B_over_J0": [0.25 * n for n in range(41)],
        "t_max_J0t": 0.8, "n_times": 161, "wall_window_J0t": [0.34, 0.73], "observables": ["walls"],
    },
    "figS2": {
        **_BASE, "name": "figS2", "B_over_J0": [0.25 * n for n in range(41)],
        "t_max_J0t": 0.8, "n_times": 161, "wall_window_J0t": [0.34, 0.73], "observables": ["walls"],
        "noise_p": 0.0247,
    },
}


# ----------------------------------------------------------------------
# config handling
# ----------------------------------------------------------------------

def load_config(path: str | Path) -> dict[str, Any]:
    """Read a TOML (``.toml``) or JSON config file."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".toml":
            raw = tomllib.loads(text)
        else:
            raw = json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if "mode_file" in raw and not Path(raw["mode_file"]).is_absolute():
        raw["mode_file"] = str((path.parent / raw["mode_file"]).resolve())
    return raw


def parse_override(text: str) -> tuple[str, Any]:
    """``key=value`` with the value parsed as JSON when possible."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, value = text.split("=", 1)
    try:
        parsed = json.loads(value)
    except ValueError:
        parsed = value
    return key.strip(), parsed


def validate_config(raw: dict[str, Any]) -> dict[str, Any]:
    """Schema check plus cross-field rules; returns the config with defaults filled."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a key/value table")
    # null means "use the default", which lets a resolved config re-run
    raw = {k: v for k, v in raw.items() if v is not None}
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = ".".join(str(p) for p in err.path) or "<root>"
        raise ConfigError(f"config key {where}: {err.message}")

    mode = raw.get("mode", DEFAULTS["mode"])
    cfg = {**DEFAULTS, **_MODE_DEFAULTS.get(mode, {}), **copy.deepcopy(raw)}

    power_law = "alpha" in raw
    mode_file = "mode_file" in raw
    if power_law == mode_file:
        raise ConfigError("give exactly one coupling source: alpha (power law) or mode_file")
    drive_keys = ("rabi_kHz", "detuning_kHz", "recoil_kHz")
    if mode_file:
        missing = [k for k in drive_keys if k not in raw]
        if missing:
            raise ConfigError(f"mode_file couplings need {', '.join(missing)}")
        if "J0_kHz" in raw:
            raise ConfigError("J0_kHz applies to power-law couplings only")
    elif any(k in raw for k in drive_keys):
        raise ConfigError("drive parameters apply to mode_file couplings only")
    if mode_file:
        cfg.pop("J0_kHz")

    if mode == "twokink_scaling":
        if not power_law:
            raise ConfigError("twokink_scaling needs power-law couplings (alpha)")
        if not cfg["L_list"]:
            raise ConfigError("twokink_scaling needs L_list")
        if isinstance(cfg["B_over_J0"], list):
            raise ConfigError("twokink_scaling takes a single B_over_J0")
        return cfg

    if "L" not in raw:
        raise ConfigError(f"mode {mode} needs L")
    L = cfg["L"]
    if cfg["max_L"] > DEFAULT_MAX_L:
        warnings.warn(
            f"max_L={cfg['max_L']} allows state vectors of {16 * 2 ** cfg['max_L'] / 2**20:.0f} MiB",
            ResourceWarning,
            stacklevel=2,
        )
    if L > cfg["max_L"]:
        raise CapabilityError(
            f"L={L} exceeds the exact-dynamics limit max_L={cfg['max_L']} "
            f"(raise max_L, at most {MAX_SITES})"
        )
    for site in cfg["flips"]:
        if site > L:
            raise ConfigError(f"flip site {site} outside 1..{L}")
    if cfg["reference_site"] is None:
        cfg["reference_site"] = (L + 1) // 2
    if cfg["reference_site"] > L:
        raise ConfigError(f"reference_site {cfg['reference_site']} outside 1..{L}")
    if cfg["n_times"] > 1 and cfg["t_max_J0t"] <= 0:
        raise ConfigError("t_max_J0t must be positive when n_times > 1")
    if cfg["wall_window_J0t"] is not None:
        t1, t2 = cfg["wall_window_J0t"]
        if not 0 <= t1 < t2 <= cfg["t_max_J0t"] + 1e-12:
            raise ConfigError(f"wall_window_J0t {cfg['wall_window_J0t']} must satisfy 0 <= t1 < t2 <= t_max_J0t")

    if mode == "gap_ladder":
        if L % 2 == 0:
            raise ConfigError("gap_ladder needs odd L (centre-probe convention)")
        if isinstance(cfg["B_over_J0"], list):
            raise ConfigError("gap_ladder takes a single B_over_J0")
        if not cfg["B_over_J0"] < 1:
            raise ConfigError("gap_ladder needs the confined regime B_over_J0 < 1")
        for size in cfg["domain_sizes"]:
            probe_sites(L, size)  # raises if the domain does not fit
        if cfg["n_times"] < 8:
            raise ConfigError("gap_ladder needs at least 8 time points")
    return cfg


def preset_config(name: str, overrides: dict[str, Any] | None = None) -> dict[str, Any]:
    try:
        cfg = copy.deepcopy(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; see list-presets") from None
    cfg.update(overrides or {})
    return cfg


# ----------------------------------------------------------------------
# physical setup
# ----------------------------------------------------------------------

@dataclass
class Setup:
    J: np.ndarray  # rad/s
    J0: float  # rad/s
    source: str


def build_couplings(cfg: dict[str, Any], L: int | None = None) -> Setup:
    L = cfg["L"] if L is None else L
    if "mode_file" in cfg:
        modes = load_mode_file(cfg["mode_file"])
        if modes.L != L:
            raise ConfigError(f"mode file describes {modes.L} ions, config has L={L}")
        drive = DriveParams(cfg["rabi_kHz"] * KHZ, cfg["detuning_kHz"] * KHZ, cfg["recoil_kHz"] * KHZ)
        J = ms_couplings(modes, drive)
        J0 = nearest_neighbor_scale(J)
        if J0 <= 0:
            raise ConfigError("mode-sum couplings are not ferromagnetic (mean nearest-neighbour J <= 0)")
        return Setup(J, J0, "mode_file")
    J0 = cfg["J0_kHz"] * KHZ
    return Setup(power_law_couplings(L, J0, cfg["alpha"]), J0, "power_law")


def time_grid_J0t(cfg: dict[str, Any]) -> np.ndarray:
    if cfg["n_times"] == 1:
        return np.zeros(1)
    return np.linspace(0.0, cfg["t_max_J0t"], cfg["n_times"])


def initial_state(cfg: dict[str, Any], flips=None) -> np.ndarray:
    flips = cfg["flips"] if flips is None else flips
    return build_product_state(cfg["L"], cfg["initial_axis"], cfg["initial_sign"], flips)


# ----------------------------------------------------------------------
# output
# ----------------------------------------------------------------------

def _fmt(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    return str(value)


def write_csv(path: Path, schema: str, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# schema: kinkquench.{schema}/{SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def read_csv(path: str | Path) -> tuple[str, list[dict[str, str]]]:
    """Schema tag and rows of a CSV written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        first = fh.readline().strip()
        if not first.startswith("# schema: "):
            raise ValueError(f"{path}: missing schema line")
        return first[len("# schema: "):], list(csv.DictReader(fh))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def resolve_output_dir(cfg: dict[str, Any]) -> Path:
    root = Path(os.environ.get(OUTPUT_ROOT_ENV, "."))
    out = Path(cfg["output_dir"]) if cfg["output_dir"] else Path("results") / cfg["name"]
    return out if out.is_absolute() else root / out


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


@dataclass
class ResultBundle:
    output_dir: Path
    files: dict[str, Path]
    manifest: dict[str, Any]
    summary: dict[str, Any] = field(default_factory=dict)


def _finish(cfg, out: Path, files: dict[str, Path], summary, started, tolerances) -> ResultBundle:
    manifest = {
        "kinkquench_version": __version__,
        "schema_version": SCHEMA_VERSION,
        "config": _jsonable(cfg),
        "tolerances": tolerances,
        "summary": _jsonable(summary),
        "files": {name: {"path": p.name, "sha256": _sha256(p)} for name, p in sorted(files.items())},
        "wall_seconds": time.perf_counter() - started,
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return ResultBundle(out, files, manifest, summary)


# ----------------------------------------------------------------------
# quench runs
# ----------------------------------------------------------------------

def _saturation(L: int) -> float:
    return 0.25 * (L - 1)


def _thermal(L: int) -> float:
    return 0.5 * (L - 1)


def _sweep_point(job: tuple[int, float, dict[str, Any]]) -> tuple[float, float, float | None]:
    """Window-averaged wall number for one field value."""
    index, b, cfg = job
    setup = build_couplings(cfg)
    spec = HamiltonianSpec(setup.J, b * setup.J0, J0=setup.J0)
    J0t = time_grid_J0t(cfg)
    p, shots = cfg["noise_p"], cfg["shots"]
    observers = {"walls": lambda s: degraded_wall_profile(1.0 - 2.0 * wall_profile(s), p).sum()}
    if shots > 0:
        counter = iter(range(J0t.size))
        observers["shots"] = lambda s: shot_walls(
            sample_shots(s, "x", shots, p, cfg["seed"], worker=index * J0t.size + next(counter))
        )
    traj = evolve(spec, initial_state(cfg), J0t / setup.J0, tol=cfg["tol"], observers=observers,
                  store_states=False)
    t1, t2 = cfg["wall_window_J0t"] or (0.0, float(J0t[-1]))
    traj.times = J0t  # average in J0 t units
    if J0t.size == 1:
        return b, float(traj.records["walls"][0]), None
    if shots == 0:
        return b, time_averaged_walls(traj, t1, t2), None
    means = traj.records["shots"][:, 0]
    errs = traj.records["shots"][:, 1]
    traj.records["walls"] = means
    avg = time_averaged_walls(traj, t1, t2)
    # trapezoid weights on the grid points inside the window give the error propagation
    inside = (J0t >= t1) & (J0t <= t2)
    w = np.gradient(J0t)[inside]
    stderr = float(np.sqrt(np.sum((w * errs[inside]) ** 2)) / w.sum())
    return b, avg, stderr


def _run_sweep(cfg, out: Path, started) -> ResultBundle:
    L = cfg["L"]
    jobs = [(n, float(b), cfg) for n, b in enumerate(cfg["B_over_J0"])]
    if cfg["workers"] > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg["workers"]) as pool:
            results = list(pool.map(_sweep_point, jobs))
    else:
        results = [_sweep_point(job) for job in jobs]
    results.sort(key=lambda r: r[0])
    path = out / "walls_sweep.csv"
    write_csv(path, "walls_sweep", ["B_over_J0", "N_avg", "N_stderr", "saturation", "thermal"],
              [(b, n, se, _saturation(L), _thermal(L)) for b, n, se in results])
    best = max(results, key=lambda r: r[1])
    summary = {
        "computed_argmax_B_over_J0": best[0],
        "computed_max_N_avg": best[1],
        "argmax_note": "arg-max of the computed sweep curve, not an experimental extraction",
        "wall_window_J0t": cfg["wall_window_J0t"] or [0.0, cfg["t_max_J0t"]],
    }
    return _finish(cfg, out, {"walls_sweep": path}, summary, started, {"evolution_tol": cfg["tol"]})


def _run_quench(cfg, out: Path, started) -> ResultBundle:
    L, ref, axis = cfg["L"], cfg["reference_site"], cfg["correlation_axis"]
    setup = build_couplings(cfg)
    b = float(cfg["B_over_J0"])
    spec = HamiltonianSpec(setup.J, b * setup.J0, J0=setup.J0)
    J0t = time_grid_J0t(cfg)
    wanted = set(cfg["observables"])
    observers = {}
    if "magnetization" in wanted:
        observers["mag"] = lambda s: np.stack([magnetizations(s, a) for a in "xyz"])
    if "correlations" in wanted:
        observers["corr"] = lambda s: correlation_row(s, ref, axis)
    if "walls" in wanted or "wall_profile" in wanted or cfg["wall_window_J0t"]:
        observers["xx"] = lambda s: 1.0 - 2.0 * wall_profile(s)
    psi0 = initial_state(cfg)
    final = {}
    if cfg["shots"] > 0:
        observers["_final"] = lambda s: final.__setitem__("psi", s)
    traj = evolve(spec, psi0, J0t / setup.J0, tol=cfg["tol"], observers=observers, store_states=False)
    p = cfg["noise_p"]
    noisy = p > 0
    files: dict[str, Path] = {}
    summary: dict[str, Any] = {"substeps": traj.metadata["substeps"], "matvecs": traj.metadata["matvecs"]}

    if "magnetization" in wanted:
        mag = traj.records["mag"]
        header = ["J0t", "site", "axis", "value"] + (["value_noisy"] if noisy else [])
        rows = []
        for k, t in enumerate(J0t):
            for a_idx, a in enumerate("xyz"):
                for i in range(L):
                    v = mag[k, a_idx, i]
                    rows.append((t, i + 1, a, v) + ((v * (1 - 2 * p),) if noisy else ()))
        files["magnetization"] = out / "magnetization.csv"
        write_csv(files["magnetization"], "magnetization", header, rows)

    if "correlations" in wanted:
        corr = traj.records["corr"]
        header = ["J0t", "site", "value", "cone_distance"] + (["value_noisy"] if noisy else [])
        rows = []
        for k, t in enumerate(J0t):
            for i in range(L):
                v = corr[k, i]
                rows.append((t, i + 1, v, 4.0 * b * t) + ((v * (1 - 2 * p) ** 2,) if noisy else ()))
        files["correlations"] = out / "correlations.csv"
        write_csv(files["correlations"], "correlations", header, rows)
        summary["correlation_reference_site"] = ref

    if "xx" in traj.records:
        xx = traj.records["xx"]
        profile = (1.0 - xx) / 2.0
        noisy_profile = np.array([degraded_wall_profile(row, p) for row in xx])
        if "walls" in wanted:
            header = ["J0t", "N"] + (["N_noisy"] if noisy else []) + ["saturation", "thermal"]
            rows = [
                (t, profile[k].sum()) + ((noisy_profile[k].sum(),) if noisy else ())
                + (_saturation(L), _thermal(L))
                for k, t in enumerate(J0t)
            ]
            files["walls"] = out / "walls.csv"
            write_csv(files["walls"], "walls", header, rows)
        if "wall_profile" in wanted:
            header = ["J0t", "bond", "value"] + (["value_noisy"] if noisy else [])
            rows = [
                (t, j + 1, profile[k, j]) + ((noisy_profile[k, j],) if noisy else ())
                for k, t in enumerate(J0t)
                for j in range(L - 1)
            ]
            files["wall_profile"] = out / "wall_profile.csv"
            write_csv(files["wall_profile"], "wall_profile", header, rows)
        if cfg["wall_window_J0t"] and J0t.size > 1:
            series = noisy_profile.sum(axis=1)
            t1, t2 = cfg["wall_window_J0t"]
            summary["window_N_avg"] = time_averaged_walls(
                Trajectory(J0t, None, {"walls": series}), t1, t2
            )

    if cfg["shots"] > 0:
        bits = sample_shots(final["psi"], "x", cfg["shots"], p, cfg["seed"])
        files["shots"] = out / "shots_final.txt"
        write_shots(files["shots"], bits)
        summary["shots_final_walls"] = shot_walls(bits)

    tolerances = {"evolution_tol": cfg["tol"], "krylov_dim": traj.metadata["krylov_dim"]}
    return _finish(cfg, out, files, summary, started, tolerances)


# ----------------------------------------------------------------------
# gap ladder and two-kink scaling
# ----------------------------------------------------------------------

def _run_gap_ladder(cfg, out: Path, started) -> ResultBundle:
    L = cfg["L"]
    setup = build_couplings(cfg)
    b = float(cfg["B_over_J0"])
    spec = HamiltonianSpec(setup.J, b * setup.J0, J0=setup.J0)
    J0t = time_grid_J0t(cfg)
    exact = exact_spectrum(spec) if L <= cfg["exact_check_max_L"] else None

    gap_rows, size_gaps, exact_gaps = [], [], []
    for size in sorted(cfg["domain_sizes"]):
        flips, probes = probe_sites(L, size)
        psi0 = initial_state(cfg, flips)
        traj = evolve(spec, psi0, J0t / setup.J0, tol=cfg["tol"],
                      observers={"mz": lambda s: magnetizations(s, "z")}, store_states=False)
        traj.times = J0t
        traj.metadata["J0"] = 1.0  # times are already in J0 t
        good, ex = [], []
        for site in probes:
            try:
                est = extract_gap(traj, site, J0=1.0)
                fit = est.fit
                ok = fit.converged and not fit.degenerate
                gap_rows.append((size, site, est.gap if ok else float("nan"), fit.residual, ok,
                                 est.window[0], est.window[1], fit.message))
                if ok:
                    good.append(est.gap)
            except (ValueError, RuntimeError, IndexError) as exc:
                gap_rows.append((size, site, float("nan"), float("nan"), False, None, None, str(exc)))
            if exact is not None:
                ex.append(exact_transition(exact, psi0, site).gap / setup.J0)
        size_gaps.append(float(np.mean(good)) if good else float("nan"))
        exact_gaps.append(float(np.mean(ex)) if ex else None)

    files = {"gaps": out / "gaps.csv", "ladder": out / "ladder.csv"}
    write_csv(files["gaps"], "gaps",
              ["domain_size", "probe_site", "omega_over_J0", "residual", "converged",
               "window_start_J0t", "window_end_J0t", "message"], gap_rows)
    ladder = cumulative_ladder(size_gaps)
    exact_ladder = cumulative_ladder(exact_gaps) if exact is not None else [None] * ladder.size
    tk = twokink_ladder(ring_embedding(setup.J), b * setup.J0, L, count=ladder.size) / setup.J0
    write_csv(files["ladder"], "ladder", ["level", "E_over_J0", "exact_E_over_J0", "twokink_E_over_J0"],
              [(n, ladder[n], exact_ladder[n], tk[n] if n < tk.size else None) for n in range(ladder.size)])
    summary = {"gaps_over_J0": size_gaps, "ladder": ladder.tolist(),
               "exact_gap_definition": "dominant upward spectral line of <Z_probe(t)>"}
    return _finish(cfg, out, files, summary, started, {"evolution_tol": cfg["tol"]})


def _run_twokink_scaling(cfg, out: Path, started) -> ResultBundle:
    J0 = cfg["J0_kHz"] * KHZ
    b = float(cfg["B_over_J0"])
    band = cfg["J0_band"]
    Ls = sorted(cfg["L_list"])
    nominal = gap_vs_size(J0, cfg["alpha"], b * J0, Ls)
    low = gap_vs_size(J0 * (1 - band), cfg["alpha"], b * J0, Ls, J0_norm=J0)
    high = gap_vs_size(J0 * (1 + band), cfg["alpha"], b * J0, Ls, J0_norm=J0)
    rows = []
    for n, L in enumerate(Ls):
        ed = None
        if L <= cfg["exact_check_max_L"]:
            spec = HamiltonianSpec(power_law_couplings(L, J0, cfg["alpha"]), b * J0, J0=J0)
            psi0 = build_product_state(L, "x", -1)
            ed = exact_transition(exact_spectrum(spec), psi0, (L + 1) // 2).gap / J0
        rows.append((L, nominal[n], low[n], high[n], ed))
    path = out / "twokink_scaling.csv"
    write_csv(path, "twokink_scaling",
              ["L", "gap_nominal", f"gap_J0x{1 - band:g}", f"gap_J0x{1 + band:g}", "exact_ED"], rows)
    return _finish(cfg, out, {"twokink_scaling": path}, {}, started, {})


def run_scenario(raw: dict[str, Any]) -> ResultBundle:
    """Validate ``raw``, run it and write CSVs plus ``manifest.json``."""
    started = time.perf_counter()
    cfg = validate_config(raw)
    out = resolve_output_dir(cfg)
    out.mkdir(parents=True, exist_ok=True)
    mode = cfg["mode"]
    if mode == "twokink_scaling":
        return _run_twokink_scaling(cfg, out, started)
    if mode == "gap_ladder":
        return _run_gap_ladder(cfg, out, started)
    if isinstance(cfg["B_over_J0"], list):
        return _run_sweep(cfg, out, started)
    return _run_quench(cfg, out, started)
