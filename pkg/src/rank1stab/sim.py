"""Deterministic fixed-step RK4 simulation of the closed loop and of the
reduced model, plus trace comparison utilities.

Traces are columnar, on a uniform time grid, and export to CSV at full
precision.  Identical inputs produce bit-identical traces; the stepping
loops live in ``rank1stab._kernels``.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from . import _kernels
from .agc import NetworkSpec, PlantState, check_feasibility
from .errors import ConfigError, EmptyOverlap, NonFiniteState
from .reduced import ReducedModel, phi_all

log = logging.getLogger("rank1stab.sim")


@dataclass(frozen=True)
class SimConfig:
    dt: float
    horizon: float
    record_stride: int = 1
    seed: int = 0

    def __post_init__(self):
        if not (self.dt > 0 and self.horizon > 0):
            raise ConfigError("dt and horizon must be positive")
        if self.dt > self.horizon:
            raise ConfigError("dt must not exceed the horizon")
        if self.record_stride < 1:
            raise ConfigError("record_stride must be >= 1")

    def validate_full(self, net: NetworkSpec) -> None:
        """Step-size sanity against the fastest plant time constant
        (turbine lags, measurement filter, swing damping M/beta)."""
        fastest = min(
            min(g.turbine_tc for a in net.areas for g in a.generators),
            net.meas_filter_tc,
            min(a.inertia_m / a.beta for a in net.areas),
        )
        if self.dt > 0.1 * fastest:
            raise ConfigError(
                f"dt={self.dt:g} too coarse: fastest plant time constant is "
                f"{fastest:g} s (need dt <= {0.1 * fastest:g})"
            )

    def validate_reduced(self, model: ReducedModel) -> None:
        if self.dt > 0.5 * model.tau_base:
            raise ConfigError(
                f"dt={self.dt:g} too coarse for reduced dynamics with "
                f"tau_base={model.tau_base:g} s"
            )

    def grid(self):
        """(n_steps, n_records): steps rounded up to a whole number of
        record strides covering the horizon."""
        n_steps = int(math.ceil(self.horizon / self.dt))
        n_steps = int(math.ceil(n_steps / self.record_stride)) * self.record_stride
        return n_steps, n_steps // self.record_stride + 1


@dataclass
class SimTrace:
    times: np.ndarray
    columns: Dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def names(self):
        return list(self.columns)

    def window(self, t0: float = -np.inf, t1: float = np.inf) -> "SimTrace":
        keep = (self.times >= t0) & (self.times <= t1)
        return SimTrace(
            self.times[keep],
            {k: v[keep] for k, v in self.columns.items()},
            dict(self.meta),
        )

    def to_csv(self, path_or_file) -> None:
        close = False
        if hasattr(path_or_file, "write"):
            f = path_or_file
        else:
            f = open(path_or_file, "w", newline="")
            close = True
        try:
            w = csv.writer(f)
            w.writerow(["t"] + list(self.columns))
            cols = list(self.columns.values())
            for i, t in enumerate(self.times):
                w.writerow([repr(float(t))] + [repr(float(c[i])) for c in cols])
        finally:
            if close:
                f.close()


def run_full(net: NetworkSpec, cfg: SimConfig,
             init: Optional[PlantState] = None) -> SimTrace:
    """Integrate the closed loop (plant + AGC) from ``init`` (default: the
    pre-disturbance equilibrium, i.e. the zero deviation state).

    Saturation is applied inside the allocation at every stage evaluation.
    Raises NonFiniteState with the offending time stamp if the state leaves
    the finite range.
    """
    cfg.validate_full(net)
    feas = check_feasibility(net)
    if not np.all(feas):
        bad = [a.name for a, ok in zip(net.areas, feas) if not ok]
        log.warning("load deviation exceeds AGC capacity in areas %s; "
                    "run proceeds saturated", bad)
    if init is None:
        init = PlantState.zeros(net)
    p = net.arrays()
    y = np.ascontiguousarray(init.pack())
    n_steps, n_rec = cfg.grid()
    log.debug("full run: %d states, %d steps of %g s, recording every %d",
              y.shape[0], n_steps, cfg.dt, cfg.record_stride)
    rec = np.empty((n_rec, y.shape[0]))
    bad_idx = _kernels.rk4_full(
        y, p["m_inv"], p["d_damp"], p["bias"], p["inv_tau"], p["load"],
        p["gen_area"], p["inv_r"], p["inv_tt"], p["alpha"], p["lo"], p["hi"],
        p["tie_a"], p["tie_b"], p["tie_k"], p["inv_ftc"],
        cfg.dt, n_steps, cfg.record_stride, rec,
    )
    if bad_idx >= 0:
        raise NonFiniteState(bad_idx * cfg.record_stride * cfg.dt)

    n, m = net.n_areas, net.n_gens
    times = cfg.dt * cfg.record_stride * np.arange(n_rec)
    f = rec[:, 0:n]
    th = rec[:, n:2 * n]
    pg = rec[:, 2 * n:2 * n + m]
    zf = rec[:, 2 * n + m:3 * n + m]
    zni = rec[:, 3 * n + m:4 * n + m]
    eta = rec[:, 4 * n + m:5 * n + m]

    ni = np.zeros_like(f)
    for a, b, t in zip(p["tie_a"], p["tie_b"], p["tie_k"]):
        flow = t * (th[:, a] - th[:, b])
        ni[:, a] += flow
        ni[:, b] -= flow
    ace = zni + p["bias"][None, :] * zf
    ustar = net.base_setpoints()
    u = np.clip(p["alpha"][None, :] * eta[:, p["gen_area"]],
                p["lo"][None, :], p["hi"][None, :]) + ustar[None, :]

    cols: Dict[str, np.ndarray] = {}
    for k, a in enumerate(net.areas):
        cols[f"f_dev:{a.name}"] = f[:, k]
    for k, a in enumerate(net.areas):
        cols[f"ni_dev:{a.name}"] = ni[:, k]
    for k, a in enumerate(net.areas):
        cols[f"meas_f_dev:{a.name}"] = zf[:, k]
    for k, a in enumerate(net.areas):
        cols[f"meas_ni_dev:{a.name}"] = zni[:, k]
    for k, a in enumerate(net.areas):
        cols[f"ace:{a.name}"] = ace[:, k]
    for k, a in enumerate(net.areas):
        cols[f"eta:{a.name}"] = eta[:, k]
    g = 0
    for a in net.areas:
        for i in range(len(a.generators)):
            cols[f"u:{a.name}.{i + 1}"] = u[:, g]
            cols[f"p:{a.name}.{i + 1}"] = pg[:, g]
            g += 1
    meta = {"mode": "full", "dt": cfg.dt, "record_stride": cfg.record_stride,
            "seed": cfg.seed}
    return SimTrace(times, cols, meta)


def run_reduced(model: ReducedModel, cfg: SimConfig,
                eta0: Optional[np.ndarray] = None,
                area_names: Optional[Sequence[str]] = None) -> SimTrace:
    """Integrate the reduced AGC dynamics in physical seconds
    (tau_k deta_k/dt = row_k of B (phi(eta) - dPL)).

    The trace records eta, phi(eta), and the implied quasi-steady ACE."""
    cfg.validate_reduced(model)
    n = model.n_areas
    eta = np.zeros(n) if eta0 is None else np.array(eta0, dtype=float)
    if eta.shape != (n,):
        raise ConfigError(f"eta0 shape {eta.shape}, expected ({n},)")
    gen_area, alphas, lo, hi = [], [], [], []
    for k, pmap in enumerate(model.phi):
        for a, l, h in zip(pmap.alphas, pmap.lo, pmap.hi):
            gen_area.append(k)
            alphas.append(a)
            lo.append(l)
            hi.append(h)
    n_steps, n_rec = cfg.grid()
    log.debug("reduced run: %d areas, %d steps of %g s", n, n_steps, cfg.dt)
    rec = np.empty((n_rec, n))
    bad_idx = _kernels.rk4_reduced(
        np.ascontiguousarray(eta), np.ascontiguousarray(model.b_matrix),
        model.tau_seconds(), model.load_dev,
        np.array(gen_area, dtype=np.int64), np.array(alphas),
        np.array(lo), np.array(hi),
        cfg.dt, n_steps, cfg.record_stride, rec,
    )
    if bad_idx >= 0:
        raise NonFiniteState(bad_idx * cfg.record_stride * cfg.dt)

    times = cfg.dt * cfg.record_stride * np.arange(n_rec)
    names = list(area_names) if area_names else [f"area{k + 1}" for k in range(n)]
    phi_t = np.array([phi_all(model, row) for row in rec])
    ace_t = -(phi_t - model.load_dev[None, :]) @ model.b_matrix.T
    cols: Dict[str, np.ndarray] = {}
    for k, name in enumerate(names):
        cols[f"eta:{name}"] = rec[:, k].copy()
    for k, name in enumerate(names):
        cols[f"phi:{name}"] = phi_t[:, k]
    for k, name in enumerate(names):
        cols[f"ace:{name}"] = ace_t[:, k]
    meta = {"mode": "reduced", "dt": cfg.dt, "record_stride": cfg.record_stride,
            "seed": cfg.seed}
    return SimTrace(times, cols, meta)


def compare_traces(a: SimTrace, b: SimTrace, columns: Sequence[str]) -> dict:
    """Per-column sup and L2 gaps over the common time window.

    Traces on different grids are resampled onto ``a``'s grid by linear
    interpolation.  Raises EmptyOverlap when the windows do not intersect.
    """
    t0 = max(a.times[0], b.times[0])
    t1 = min(a.times[-1], b.times[-1])
    if t1 < t0:
        raise EmptyOverlap(f"no common window: [{a.times[0]}, {a.times[-1]}] "
                           f"vs [{b.times[0]}, {b.times[-1]}]")
    keep = (a.times >= t0) & (a.times <= t1)
    t = a.times[keep]
    out = {}
    for name in columns:
        ya = a.columns[name][keep]
        yb = np.interp(t, b.times, b.columns[name])
        gap = np.abs(ya - yb)
        if t.shape[0] > 1:
            dt = np.diff(t)
            l2 = math.sqrt(float(np.sum(0.5 * dt * (gap[:-1] ** 2 + gap[1:] ** 2))))
        else:
            l2 = float(gap[0])
        out[name] = {"sup_gap": float(gap.max()), "l2_gap": l2}
    return out
