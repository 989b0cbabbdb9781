"""Scenario files: YAML in, a validated :class:`Campaign` out.

A scenario has three sections. ``system`` takes any :class:`SystemConfig`
field in SI units, or a unit-tagged alias (``transmit_power_dbm``,
``eta_ttd_db``, ``t_max_ps`` ...). ``solver`` takes :class:`SolverParams`
fields. ``campaign`` names the sweep axis, its grid and the Monte Carlo
setup. A top-level ``preset`` (``paper`` or ``desk``) supplies defaults for
everything in ``system``; without it the array dimensions must be given.

Every problem found is reported with the YAML line it came from, and all
problems are collected before raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
import math
from pathlib import Path

import yaml

from .config import (PRESETS, SystemConfig, db_to_linear, dbm_to_watts)
from .solver import SolverParams
from .topology import TtdTopology

AXES = ("angle", "transmit_power", "t_max", "insertion_loss")
TOPOLOGY_SCHEMES = ("parallel", "serial_f", "serial_b", "hybrid", "hfb")
BENCHMARK_SCHEMES = ("optimal_ttd", "conventional", "full_digital")
SCHEMES = TOPOLOGY_SCHEMES + BENCHMARK_SCHEMES

DEFAULT_SCHEMES = {
    "angle": ("parallel", "serial_f", "hybrid", "optimal_ttd", "conventional"),
    "transmit_power": ("parallel", "serial_f", "hybrid", "hfb", "optimal_ttd",
                       "conventional", "full_digital"),
    "t_max": ("parallel", "serial_f", "hybrid", "hfb"),
    "insertion_loss": ("parallel", "serial_f", "hybrid", "hfb"),
}

# tagged alias -> (field, converter to SI)
SYSTEM_ALIASES = {
    "transmit_power_dbm": ("transmit_power", dbm_to_watts),
    "noise_density_dbm_hz": ("noise_density", dbm_to_watts),
    "tx_gain_db": ("tx_gain", db_to_linear),
    "rx_gain_db": ("rx_gain", db_to_linear),
    "scatter_loss_db": ("scatter_loss", db_to_linear),
    "eta_ttd_db": ("eta_ttd", db_to_linear),
    "eta_splitter_db": ("eta_splitter", db_to_linear),
    "t_max_ps": ("t_max", lambda v: v * 1e-12),
    "center_freq_ghz": ("center_freq", lambda v: v * 1e9),
    "bandwidth_ghz": ("bandwidth", lambda v: v * 1e9),
}
STRUCTURAL = ("n_antennas", "n_ttd_per_chain", "n_subcarriers", "n_rf", "n_users")
INT_FIELDS = STRUCTURAL + ("cp_length", "n_paths")

# grid key per axis: SI key plus the tagged alternative
GRID_ALIASES = {
    "angle": ("grid_deg", math.radians),
    "transmit_power": ("grid_dbm", dbm_to_watts),
    "t_max": ("grid_ps", lambda v: v * 1e-12),
    "insertion_loss": ("grid_db", db_to_linear),
}
CAMPAIGN_KEYS = {"axis", "grid", "n_realizations", "seed", "schemes", "distance",
                 "r_range", "theta_range", "theta_range_deg", "los_only", "equalized",
                 "output"} | {k for k, _ in GRID_ALIASES.values()}


@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str
    line: int | None = None

    def __str__(self):
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.path}: {self.message}"


class ScenarioError(ValueError):
    def __init__(self, diagnostics, source=None):
        self.diagnostics = list(diagnostics)
        self.source = source
        head = f"{source}: " if source else ""
        super().__init__(head + "; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class Campaign:
    """A validated sweep: what to vary, over which values, and how often."""

    axis: str
    grid: tuple                      # SI values of the swept quantity
    system: SystemConfig
    solver: SolverParams = SolverParams()
    n_realizations: int = 20
    seed: int = 0
    schemes: tuple = ()
    preset: str | None = None
    distance: float = 10.0           # angle sweep: user range in metres
    r_range: tuple = (5.0, 15.0)
    theta_range: tuple = (0.0, math.pi)
    los_only: bool = False
    equalized: tuple = (True,)
    output: str | None = None
    scenario_path: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.grid:
            raise ValueError("sweep grid is empty")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be at least 1")

    def with_(self, **changes) -> "Campaign":
        from dataclasses import replace
        return replace(self, **changes)

    def to_dict(self) -> dict:
        """Normalised SI form; :func:`parse_scenario` maps it back to an equal campaign."""
        sysd = {f.name: getattr(self.system, f.name) for f in fields(SystemConfig)
                if f.name != "speed_of_light"}
        out = {
            "system": {k: _plain(v) for k, v in sysd.items()},
            "solver": {f.name: _plain(getattr(self.solver, f.name)) for f in fields(SolverParams)},
            "campaign": {
                "axis": self.axis,
                "grid": [float(g) for g in self.grid],
                "n_realizations": self.n_realizations,
                "seed": self.seed,
                "schemes": list(self.schemes),
                "distance": float(self.distance),
                "r_range": [float(x) for x in self.r_range],
                "theta_range": [float(x) for x in self.theta_range],
                "los_only": self.los_only,
                "equalized": list(self.equalized),
            },
        }
        if self.output is not None:
            out["campaign"]["output"] = self.output
        if self.preset is not None:
            out = {"preset": self.preset, **out}
        return out

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)


def _plain(v):
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, int):
        return int(v)
    return float(v)


# ---------------------------------------------------------------------------
# line bookkeeping

def _line_map(node, prefix="", out=None) -> dict:
    """Map dotted key paths to 1-based source lines."""
    out = {} if out is None else out
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            path = f"{prefix}.{k.value}" if prefix else str(k.value)
            out[path] = k.start_mark.line + 1
            _line_map(v, path, out)
    return out


class _Checker:
    def __init__(self, lines):
        self.lines = lines
        self.diags: list[Diagnostic] = []

    def err(self, path, msg):
        line = self.lines.get(path)
        if line is None and "." in path:
            line = self.lines.get(path.rsplit(".", 1)[0])
        self.diags.append(Diagnostic(path, msg, line))

    def number(self, path, v, integer=False):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.err(path, f"expected a number, got {v!r}")
            return None
        if integer:
            if isinstance(v, float) and not v.is_integer():
                self.err(path, f"expected an integer, got {v!r}")
                return None
            return int(v)
        if not math.isfinite(v):
            self.err(path, f"must be finite, got {v!r}")
            return None
        return float(v)

    def pair(self, path, v):
        if not isinstance(v, (list, tuple)) or len(v) != 2:
            self.err(path, f"expected a [low, high] pair, got {v!r}")
            return None
        a, b = (self.number(path, x) for x in v)
        if a is None or b is None:
            return None
        if not a < b:
            self.err(path, f"low end must be below high end, got {v!r}")
            return None
        return a, b


# ---------------------------------------------------------------------------
# sections

def _system(ck: _Checker, raw, preset):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        ck.err("system", "must be a mapping")
        return None
    names = {f.name for f in fields(SystemConfig)} - {"speed_of_light"}
    n_before = len(ck.diags)
    values = {}
    for key, v in raw.items():
        path = f"system.{key}"
        if key in SYSTEM_ALIASES:
            target, conv = SYSTEM_ALIASES[key]
            if target in raw:
                ck.err(path, f"conflicts with system.{target}; give one of them")
                continue
            x = ck.number(path, v)
            if x is not None:
                values[target] = conv(x)
        elif key in names:
            if key == "antenna_spacing" and v is None:
                continue
            x = ck.number(path, v, integer=key in INT_FIELDS)
            if x is not None:
                values[key] = x
        else:
            ck.err(path, "unknown key")
            n_before += 1      # unknown keys do not block the invariant checks
    if preset is None:
        for name in STRUCTURAL:
            if name not in raw:
                ck.err(f"system.{name}", "missing (required when no preset is given)")
    if len(ck.diags) > n_before:
        return None
    base = PRESETS[preset]() if preset else SystemConfig()
    merged = base.to_dict()
    merged.update(values)
    if "center_freq" in values and "antenna_spacing" not in values:
        merged["antenna_spacing"] = None    # follow the new carrier
    probe = SystemConfig.__new__(SystemConfig)
    for k, v in merged.items():
        object.__setattr__(probe, k, v)
    if probe.antenna_spacing is None:
        object.__setattr__(probe, "antenna_spacing",
                           probe.speed_of_light / (2.0 * probe.center_freq))
    errs = probe.validate()
    for name, msg in errs:
        ck.err(f"system.{name}", msg)
    if errs:
        return None
    return SystemConfig(**merged)


def _solver(ck: _Checker, raw):
    if raw is None:
        return SolverParams()
    if not isinstance(raw, dict):
        ck.err("solver", "must be a mapping")
        return None
    kinds = {f.name: f.type for f in fields(SolverParams)}
    values = {}
    for key, v in raw.items():
        path = f"solver.{key}"
        if key not in kinds:
            ck.err(path, "unknown key")
            continue
        default = getattr(SolverParams(), key)
        if isinstance(default, bool):
            if not isinstance(v, bool):
                ck.err(path, f"expected true/false, got {v!r}")
                continue
            values[key] = v
        elif isinstance(default, str):
            values[key] = str(v)
        else:
            x = ck.number(path, v, integer=isinstance(default, int))
            if x is not None:
                values[key] = x
    try:
        return SolverParams(**values)
    except ValueError as exc:
        ck.err("solver", str(exc))
        return None


def _campaign(ck: _Checker, raw, system):
    if not isinstance(raw, dict):
        ck.err("campaign", "missing or not a mapping")
        return None
    for key in raw:
        if key not in CAMPAIGN_KEYS:
            ck.err(f"campaign.{key}", "unknown key")
    axis = raw.get("axis")
    if axis not in AXES:
        ck.err("campaign.axis", f"must be one of {', '.join(AXES)}, got {axis!r}")
        return None
    out = {"axis": axis}

    tagged, conv = GRID_ALIASES[axis]
    if "grid" in raw and tagged in raw:
        ck.err(f"campaign.{tagged}", "conflicts with campaign.grid; give one of them")
    key = tagged if tagged in raw else "grid"
    for other, _ in GRID_ALIASES.values():
        if other != tagged and other in raw:
            ck.err(f"campaign.{other}", f"does not apply to the {axis} axis (use {tagged})")
    grid = raw.get(key)
    if not isinstance(grid, list) or not grid:
        ck.err(f"campaign.{key}", "sweep grid must be a non-empty list")
    else:
        vals = [ck.number(f"campaign.{key}", g) for g in grid]
        if all(v is not None for v in vals):
            si = tuple(conv(v) if key == tagged else v for v in vals)
            _check_grid(ck, f"campaign.{key}", axis, si)
            out["grid"] = si

    if "n_realizations" in raw:
        n = ck.number("campaign.n_realizations", raw["n_realizations"], integer=True)
        if n is not None and n < 1:
            ck.err("campaign.n_realizations", "must be at least 1")
        out["n_realizations"] = n
    if "seed" in raw:
        s = ck.number("campaign.seed", raw["seed"], integer=True)
        if s is not None and s < 0:
            ck.err("campaign.seed", "must be non-negative")
        out["seed"] = s

    schemes = raw.get("schemes", list(DEFAULT_SCHEMES[axis]))
    if not isinstance(schemes, list) or not schemes:
        ck.err("campaign.schemes", "must be a non-empty list")
    else:
        for s in schemes:
            if s not in SCHEMES:
                ck.err("campaign.schemes", f"unknown scheme {s!r}")
            elif axis == "angle" and s == "hfb":
                ck.err("campaign.schemes", "hfb needs several RF chains; the angle sweep has one")
        if len(set(schemes)) != len(schemes):
            ck.err("campaign.schemes", "duplicate entries")
        out["schemes"] = tuple(schemes)
        if system is not None and axis != "angle":
            for s in schemes:
                if s in TOPOLOGY_SCHEMES:
                    try:
                        TtdTopology.parse(s).check(system.n_rf, system.n_ttd_per_chain)
                    except ValueError as exc:
                        ck.err("campaign.schemes", str(exc))

    if "distance" in raw:
        d = ck.number("campaign.distance", raw["distance"])
        if d is not None and not d > 0:
            ck.err("campaign.distance", "must be positive (metres)")
        out["distance"] = d
    if "r_range" in raw:
        p = ck.pair("campaign.r_range", raw["r_range"])
        if p is not None and p[0] <= 0:
            ck.err("campaign.r_range", "distances must be positive")
        out["r_range"] = p
    if "theta_range" in raw and "theta_range_deg" in raw:
        ck.err("campaign.theta_range_deg", "conflicts with campaign.theta_range")
    for k, scale in (("theta_range", 1.0), ("theta_range_deg", math.pi / 180.0)):
        if k in raw:
            p = ck.pair(f"campaign.{k}", raw[k])
            if p is not None:
                p = (p[0] * scale, p[1] * scale)
                if p[0] < 0 or p[1] > math.pi + 1e-12:
                    ck.err(f"campaign.{k}", "angles must lie in [0, 180] degrees")
                out["theta_range"] = p
    for k in ("los_only",):
        if k in raw:
            if not isinstance(raw[k], bool):
                ck.err(f"campaign.{k}", f"expected true/false, got {raw[k]!r}")
            out[k] = raw[k]
    if "equalized" in raw:
        e = raw["equalized"]
        e = [e] if isinstance(e, bool) else e
        if not isinstance(e, list) or not e or not all(isinstance(x, bool) for x in e):
            ck.err("campaign.equalized", "expected true/false or a list of them")
        else:
            out["equalized"] = tuple(dict.fromkeys(e))
    if "output" in raw:
        out["output"] = str(raw["output"])
    return out


def _check_grid(ck, path, axis, grid):
    for g in grid:
        if axis == "angle" and not 0.0 <= g <= math.pi + 1e-12:
            ck.err(path, f"angle {math.degrees(g):g} deg outside [0, 180]")
        elif axis == "transmit_power" and not g > 0:
            ck.err(path, f"transmit power must be positive, got {g!r} W")
        elif axis == "t_max" and not g >= 0:
            ck.err(path, f"delay range must be non-negative, got {g!r} s")
        elif axis == "insertion_loss" and not g >= 1.0 - 1e-12:
            ck.err(path, f"insertion loss must be >= 0 dB, got linear {g!r}")


# ---------------------------------------------------------------------------
# entry points

def parse_scenario(data, lines: dict | None = None, source=None) -> Campaign:
    """Validate an already-loaded mapping. Raises :class:`ScenarioError`."""
    ck = _Checker(lines or {})
    if not isinstance(data, dict):
        raise ScenarioError([Diagnostic("<root>", "scenario must be a mapping")], source)
    for key in data:
        if key not in ("preset", "system", "solver", "campaign"):
            ck.err(key, "unknown key")
    preset = data.get("preset")
    if preset is not None and preset not in PRESETS:
        ck.err("preset", f"must be one of {', '.join(PRESETS)}, got {preset!r}")
        preset = None
    system = _system(ck, data.get("system"), preset)
    solver = _solver(ck, data.get("solver"))
    camp = _campaign(ck, data.get("campaign"), system)
    if ck.diags:
        raise ScenarioError(ck.diags, source)
    return Campaign(system=system, solver=solver, preset=preset,
                    scenario_path=None if source is None else str(source), **camp)


def loads(text: str, source=None) -> Campaign:
    try:
        node = yaml.compose(text)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ScenarioError([Diagnostic("<yaml>", str(getattr(exc, "problem", exc)),
                                        mark.line + 1 if mark else None)], source) from None
    return parse_scenario(data, _line_map(node) if node is not None else {}, source)


def load(path) -> Campaign:
    path = Path(path)
    if not path.is_file():
        raise ScenarioError([Diagnostic("<file>", "scenario file not found")], path)
    return loads(path.read_text(), source=path)


def validate_scenario(path):
    """``(campaign, [])`` on success, ``(None, diagnostics)`` otherwise."""
    try:
        return load(path), []
    except ScenarioError as exc:
        return None, exc.diagnostics


def preset_campaign(axis: str, preset: str = "desk", **changes) -> Campaign:
    """Campaign for ``axis`` with the grids used by the reference figures."""
    system = PRESETS[preset]()
    grids = {
        "angle": tuple(math.radians(a) for a in range(0, 181, 5)),
        "transmit_power": tuple(dbm_to_watts(p) for p in (0, 5, 10, 15, 20, 25, 30)),
        "t_max": tuple(t * 1e-12 for t in (10, 40, 80, 200, 500, 2480)),
        "insertion_loss": tuple(db_to_linear(x) for x in (0.0, 0.3, 0.6, 0.9, 1.2)),
    }
    n_real = 1 if axis == "angle" else (100 if preset == "paper" else 20)
    if preset == "paper" and axis != "angle":
        system = system.with_(n_rf=4, n_users=4)
    kw = dict(axis=axis, grid=grids[axis], system=system, schemes=DEFAULT_SCHEMES[axis],
              preset=preset, n_realizations=n_real, los_only=axis == "angle")
    if axis == "insertion_loss":
        kw["equalized"] = (True, False)
    kw.update(changes)
    return Campaign(**kw)
