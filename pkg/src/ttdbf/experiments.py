"""Monte Carlo campaigns over one swept parameter.

Work is split into units (one realization at one or more grid points) and
handed to a process pool. Rows come back in any order and are sorted into
(grid point, realization, scheme) order before anything is written, so the
output depends only on the campaign and its seed.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
import csv
import io
import math
import os
import warnings

import numpy as np

from .channel import generate_channel, los_channel, random_channel, sample_locations
from .config import SystemConfig, UserLocation, linear_to_db, watts_to_dbm
from .evaluation import (benchmark_conventional, benchmark_full_digital, benchmark_optimal_ttd,
                         report_from_solve, single_user_beamformer, spectral_efficiency)
from .scenario import Campaign, TOPOLOGY_SCHEMES
from .single_user import (array_gain, classify_monotonicity, conventional_design, design)
from .solver import penalty_solve
from .topology import TtdTopology

ROW_FIELDS = ("axis", "value", "realization", "seed", "scheme", "topology", "theta_deg",
              "t_max_ps", "eta_db", "p_t_dbm", "K", "equalized", "rate_bps_hz",
              "min_gain_frac", "converged", "xi")
SUMMARY_FIELDS = ("axis", "value", "scheme", "topology", "equalized", "n", "mean_rate_bps_hz",
                  "se_rate_bps_hz", "n_nonconverged")
TRACE_FIELDS = ("value", "realization", "scheme", "outer", "inner", "rho", "objective", "xi",
                "rate", "factorization_error", "cond_digital")
SINGLE_USER_FIELDS = ("theta_deg", "topology", "rate_bps_hz", "min_gain_frac",
                      "J_over_Nsub_d", "region")


@dataclass
class CampaignResult:
    campaign: Campaign
    rows: list
    summary: list
    trace: list = field(default_factory=list)

    @property
    def n_nonconverged(self) -> int:
        return sum(1 for r in self.rows if not r["converged"])

    def csv_text(self) -> str:
        return _csv(self.rows, ROW_FIELDS)

    def summary_text(self) -> str:
        return _csv(self.summary, SUMMARY_FIELDS)

    def write(self, path, trace_path=None) -> list[str]:
        """Write rows to ``path`` and the summary next to it. Returns the files written."""
        root, _ = os.path.splitext(str(path))
        written = [str(path), root + ".summary.csv"]
        with open(written[0], "w", newline="") as fh:
            fh.write(self.csv_text())
        with open(written[1], "w", newline="") as fh:
            fh.write(self.summary_text())
        if trace_path is not None:
            with open(trace_path, "w", newline="") as fh:
                fh.write(_csv(self.trace, TRACE_FIELDS))
            written.append(str(trace_path))
        return written


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _csv(rows, cols) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in cols])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# one unit of work

def _system_at(c: Campaign, value) -> SystemConfig:
    cfg = c.system
    if c.axis == "angle":
        cfg = cfg.with_(n_rf=1, n_users=1)
    elif c.axis == "transmit_power":
        cfg = cfg.with_(transmit_power=value)
    elif c.axis == "t_max":
        cfg = cfg.with_(t_max=value)
    return cfg


def _base_row(c: Campaign, cfg: SystemConfig, value, r, seed, eta) -> dict:
    row = {"axis": c.axis, "value": float(value), "realization": r, "seed": seed,
           "t_max_ps": cfg.t_max * 1e12, "eta_db": linear_to_db(eta),
           "p_t_dbm": watts_to_dbm(cfg.transmit_power), "K": cfg.n_users, "theta_deg": ""}
    if c.axis == "angle":
        row["theta_deg"] = math.degrees(value)
    return row


def _finish(row, rep, scheme, equalized=True):
    row.update(scheme=scheme, topology=rep.topology, equalized=equalized,
               rate_bps_hz=rep.spectral_efficiency,
               min_gain_frac=float(rep.gain_fractions.min()),
               converged=bool(rep.converged), xi=float(rep.xi))
    return row


def _angle_unit(c: Campaign, g: int, r: int, seed: int):
    theta = c.grid[g]
    cfg = _system_at(c, theta)
    loc = UserLocation(c.distance, theta)
    if c.los_only or cfg.n_paths == 0:
        ch = los_channel([loc], cfg)
    else:
        rng = np.random.default_rng(seed)
        scat = [sample_locations(rng, cfg.n_paths, c.r_range, c.theta_range)]
        ch = generate_channel([loc], scat, cfg, rng)
    out = []
    for scheme in c.schemes:
        if scheme == "full_digital":
            rep = benchmark_full_digital(ch, cfg)
        else:
            if scheme == "optimal_ttd":
                sud = design(loc, cfg, "parallel", math.inf)
            elif scheme == "conventional":
                sud = conventional_design(loc, cfg)
            else:
                sud = design(loc, cfg, scheme)
            rep = spectral_efficiency(single_user_beamformer(sud, cfg), ch, cfg, scheme=scheme)
            if scheme in TOPOLOGY_SCHEMES:
                rep.topology = scheme
        out.append(((g, r), _finish(_base_row(c, cfg, theta, r, seed, cfg.eta), rep, scheme)))
    return out, []


def _solve(scheme, ch, cfg, params, want_trace):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        if scheme == "optimal_ttd":
            return benchmark_optimal_ttd(ch, cfg, params), None
        if scheme == "conventional":
            return benchmark_conventional(ch, cfg, params), None
        if scheme == "full_digital":
            return benchmark_full_digital(ch, cfg), None
        res = penalty_solve(ch, TtdTopology.parse(scheme), cfg, params, trace=want_trace)
        return res, res.trace


def _multi_unit(c: Campaign, grid_idx, r: int, seed: int, want_trace: bool):
    out, trace = [], []
    solved = {}
    for g in grid_idx:
        value = c.grid[g]
        cfg = _system_at(c, value)
        ch = random_channel(cfg, seed, c.r_range, c.theta_range)
        loss_axis = c.axis == "insertion_loss"
        for scheme in c.schemes:
            key = scheme if loss_axis else (scheme, g)
            if key not in solved:
                solved[key] = _solve(scheme, ch, cfg, c.solver, want_trace)
                res, tr = solved[key]
                for t in tr or ():
                    trace.append(((g, r), dict(t, value=float(value), realization=r,
                                               scheme=scheme)))
            res, _ = solved[key]
            # insertion loss only touches TTD networks; optimal TTD is parallel,
            # whose branch weights are the reference, so its rate is unchanged
            ttd = scheme in TOPOLOGY_SCHEMES or scheme == "optimal_ttd"
            eta = value if loss_axis else cfg.eta
            for eq in (c.equalized if loss_axis else (True,)):
                if scheme in TOPOLOGY_SCHEMES:
                    rep = report_from_solve(res, ch, cfg, scheme, insertion=eta, equalized=eq)
                else:
                    rep = res
                row = _base_row(c, cfg, value, r, seed, eta if ttd else 1.0)
                out.append(((g, r), _finish(row, rep, scheme, eq)))
    return out, trace


def _run_unit(args):
    c, grid_idx, r, want_trace = args
    seed = c.seed + r
    if c.axis == "angle":
        rows, trace = [], []
        for g in grid_idx:
            a, b = _angle_unit(c, g, r, seed)
            rows += a
            trace += b
        return rows, trace
    return _multi_unit(c, grid_idx, r, seed, want_trace)


def _units(c: Campaign, want_trace: bool):
    if c.axis == "insertion_loss":
        # the design ignores the loss, so one solve serves the whole grid
        return [(c, tuple(range(len(c.grid))), r, want_trace) for r in range(c.n_realizations)]
    return [(c, (g,), r, want_trace) for g in range(len(c.grid))
            for r in range(c.n_realizations)]


# ---------------------------------------------------------------------------

def summarize(rows, axis=None) -> list[dict]:
    """Mean and standard error per (grid value, scheme, topology, equalized) cell."""
    cells: dict = {}
    for row in rows:
        key = (row["value"], row["scheme"], row["topology"], row["equalized"])
        cells.setdefault(key, []).append(row)
    out = []
    for (value, scheme, topo, eq), group in cells.items():
        x = np.array([g["rate_bps_hz"] for g in group])
        se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0
        out.append({"axis": group[0]["axis"], "value": value, "scheme": scheme,
                    "topology": topo, "equalized": eq, "n": int(x.size),
                    "mean_rate_bps_hz": float(x.mean()), "se_rate_bps_hz": se,
                    "n_nonconverged": sum(1 for g in group if not g["converged"])})
    return out


def run_campaign(c: Campaign, workers: int | None = None, trace: bool = False,
                 progress=None) -> CampaignResult:
    """Run every (grid point, realization, scheme) cell of ``c``.

    ``workers`` defaults to the CPU count; 1 runs in-process. ``progress``
    is called with (done, total) after each unit.
    """
    units = _units(c, trace)
    if workers is None:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, len(units)))
    results = []
    if workers == 1:
        for i, u in enumerate(units):
            results.append(_run_unit(u))
            if progress:
                progress(i + 1, len(units))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, res in enumerate(pool.map(_run_unit, units)):
                results.append(res)
                if progress:
                    progress(i + 1, len(units))

    order = {s: i for i, s in enumerate(c.schemes)}
    keyed = [kr for rows, _ in results for kr in rows]
    keyed.sort(key=lambda kr: (kr[0], order[kr[1]["scheme"]], not kr[1]["equalized"]))
    rows = [r for _, r in keyed]
    tr = [t for _, tt in results for t in tt]
    tr.sort(key=lambda kt: (kt[0], order[kt[1]["scheme"]], kt[1]["outer"]))
    return CampaignResult(c, rows, summarize(rows), [t for _, t in tr])


# ---------------------------------------------------------------------------
# closed-form single-user table

def region_label(reg) -> str:
    label = reg.kind.value
    if reg.q_c is not None:
        label += f"(q_c={reg.q_c})"
    if math.isinf(reg.J):
        label += " [endfire limit]"
    return label


def single_user_table(cfg: SystemConfig, distance: float = 10.0, angles_deg=None,
                      topologies=("parallel", "serial_f", "serial_b", "hybrid"),
                      t_max: float | None = None, channel=None) -> list[dict]:
    """Closed-form designs on the LoS channel of a user at ``distance``.

    Adds the unbounded design (``infinite``) and the PS-only beam
    (``conventional``) for reference. Endfire angles are classified by their
    limit and labelled as such.
    """
    cfg = cfg.with_(n_rf=1, n_users=1)
    if t_max is not None:
        cfg = cfg.with_(t_max=t_max)
    angles_deg = np.arange(0, 181, 5) if angles_deg is None else angles_deg
    rows = []
    for a in angles_deg:
        loc = UserLocation.from_degrees(distance, float(a))
        if float(a) in (0.0, 180.0):
            loc = UserLocation(distance, 0.0 if float(a) == 0.0 else math.pi)
        reg = classify_monotonicity(loc, cfg, endfire="limit")
        ch = los_channel([loc], cfg)
        designs = [(t, design(loc, cfg, t)) for t in topologies]
        designs += [("infinite", design(loc, cfg, "parallel", math.inf)),
                    ("conventional", conventional_design(loc, cfg))]
        for name, sud in designs:
            rep = spectral_efficiency(single_user_beamformer(sud, cfg), ch, cfg)
            gain = array_gain(loc, sud, cfg) / cfg.n_antennas
            rows.append({"theta_deg": float(a), "topology": name,
                         "rate_bps_hz": rep.spectral_efficiency,
                         "min_gain_frac": float(gain.min()),
                         "J_over_Nsub_d": reg.j_normalized, "region": region_label(reg)})
    return rows


def single_user_csv(rows) -> str:
    return _csv(rows, SINGLE_USER_FIELDS)
