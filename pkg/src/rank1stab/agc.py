"""Multi-area interconnected power system with decentralized AGC.

Plant: per-area aggregate swing dynamics, first-order turbine-governor per
generator, DC-linearized tie-line flows, and first-order measurement filters.
All quantities are deviations from the scheduled operating point, in per-unit
on a common base (frequency deviations in Hz, biases/damping/droop in per
unit per Hz).  Scheduled interchange is absorbed into the angle reference, so
the zero state is the pre-disturbance schedule.

Angles are referenced to area 1 (theta_1 pinned at 0, the other angles
integrate 2*pi*(df_k - df_1)); tie flows depend only on differences, and the
grounding removes the rotational null space so the fixed-input plant has a
unique exponentially stable equilibrium.

Controller: ACE_k = (NI_k - NI*_k) + b_k (f_k - f*_k) from the filtered
measurements, integrated per area as tau_k deta_k/dt = -ACE_k and allocated
over participating generators with saturation.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import numerics
from .errors import (
    ConfigError,
    DimensionMismatch,
    NonFinite,
    Singular,
    SingularNetwork,
)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GeneratorSpec:
    """One turbine-governor unit.

    ``droop_r`` is the primary proportional gain (pu-Hz per pu-MW),
    ``limits`` bound the absolute power reference, and ``participation`` is
    this unit's share of the area AGC signal (units not in AGC keep their
    base setpoint and must have collapsed limits).
    """

    droop_r: float
    turbine_tc: float = 0.5
    base_setpoint: float = 0.0
    limits: Tuple[float, float] = (0.0, 0.0)
    participation: float = 0.0
    in_agc: bool = False

    def __post_init__(self):
        if not (self.droop_r > 0 and self.turbine_tc > 0):
            raise ConfigError("droop_r and turbine_tc must be positive")
        lo, hi = self.limits
        if not (lo <= self.base_setpoint <= hi):
            raise ConfigError(
                f"limits {self.limits} must bracket base_setpoint {self.base_setpoint}"
            )
        if self.participation < 0:
            raise ConfigError("participation must be nonnegative")
        if not self.in_agc:
            if not (lo == self.base_setpoint == hi) or self.participation != 0.0:
                raise ConfigError(
                    "units outside AGC need collapsed limits and zero participation"
                )


@dataclass(frozen=True)
class AreaSpec:
    name: str
    inertia_m: float
    load_damping: float
    generators: Tuple[GeneratorSpec, ...]
    bias_b: float
    agc_tc: float
    sched_freq: float = 60.0
    load_dev: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "generators", tuple(self.generators))
        if not self.generators:
            raise ConfigError(f"area {self.name!r} has no generators")
        if not (self.inertia_m > 0 and self.load_damping > 0):
            raise ConfigError("inertia_m and load_damping must be positive")
        if not self.bias_b > 0:
            raise ConfigError("bias_b must be positive")
        if not self.agc_tc > 0:
            raise ConfigError("agc_tc must be positive")
        parts = [g.participation for g in self.generators if g.in_agc]
        if not parts:
            raise ConfigError(f"area {self.name!r} has no AGC-participating unit")
        if abs(sum(parts) - 1.0) > 1e-9:
            raise ConfigError(
                f"area {self.name!r} participations sum to {sum(parts)}, expected 1"
            )

    @property
    def beta(self) -> float:
        """Frequency characteristic D_k + sum_i 1/R_{k,i}."""
        return self.load_damping + sum(1.0 / g.droop_r for g in self.generators)


@dataclass(frozen=True)
class TieLine:
    from_area: str
    to_area: str
    stiffness_t: float

    def __post_init__(self):
        if self.from_area == self.to_area:
            raise ConfigError("tie line endpoints must differ")
        if not self.stiffness_t > 0:
            raise ConfigError("stiffness_t must be positive")


@dataclass(frozen=True)
class NetworkSpec:
    areas: Tuple[AreaSpec, ...]
    ties: Tuple[TieLine, ...]
    sched_ni: np.ndarray
    meas_filter_tc: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "areas", tuple(self.areas))
        object.__setattr__(self, "ties", tuple(self.ties))
        sched = np.atleast_1d(np.asarray(self.sched_ni, dtype=float))
        object.__setattr__(self, "sched_ni", sched)
        if not self.areas:
            raise ConfigError("network needs at least one area")
        names = [a.name for a in self.areas]
        if len(set(names)) != len(names):
            raise ConfigError("area names must be unique")
        if sched.shape != (len(self.areas),):
            raise DimensionMismatch("sched_ni length must match area count")
        if abs(float(sched.sum())) > 1e-9:
            raise ConfigError("interchange schedule must sum to zero")
        if not self.meas_filter_tc > 0:
            raise ConfigError("meas_filter_tc must be positive")
        index = {n: i for i, n in enumerate(names)}
        seen = set()
        for t in self.ties:
            if t.from_area not in index or t.to_area not in index:
                raise ConfigError(f"tie references unknown area: {t}")
            key = frozenset((t.from_area, t.to_area))
            if key in seen:
                raise ConfigError(f"parallel tie lines must be merged: {t}")
            seen.add(key)
        if not _connected(len(self.areas), [(index[t.from_area], index[t.to_area]) for t in self.ties]):
            raise SingularNetwork("tie-line graph is disconnected")

    @property
    def n_areas(self) -> int:
        return len(self.areas)

    @property
    def n_gens(self) -> int:
        return sum(len(a.generators) for a in self.areas)

    def area_index(self, name: str) -> int:
        for i, a in enumerate(self.areas):
            if a.name == name:
                return i
        raise KeyError(name)

    @property
    def beta_k(self) -> np.ndarray:
        return np.array([a.beta for a in self.areas])

    def base_setpoints(self) -> np.ndarray:
        return np.array([g.base_setpoint for a in self.areas for g in a.generators])

    def arrays(self) -> dict:
        """Flat parameter pack shared by the plant functions and kernels.

        Generator limits come out as offsets from the base setpoint; indices
        are int64 into the flattened per-area generator order.
        """
        areas = self.areas
        gen_area, inv_r, inv_tt, alpha, lo, hi = [], [], [], [], [], []
        for k, a in enumerate(areas):
            for g in a.generators:
                gen_area.append(k)
                inv_r.append(1.0 / g.droop_r)
                inv_tt.append(1.0 / g.turbine_tc)
                alpha.append(g.participation if g.in_agc else 0.0)
                lo.append(g.limits[0] - g.base_setpoint)
                hi.append(g.limits[1] - g.base_setpoint)
        index = {a.name: i for i, a in enumerate(areas)}
        return {
            "m_inv": np.array([1.0 / a.inertia_m for a in areas]),
            "d_damp": np.array([a.load_damping for a in areas]),
            "bias": np.array([a.bias_b for a in areas]),
            "inv_tau": np.array([1.0 / a.agc_tc for a in areas]),
            "load": np.array([a.load_dev for a in areas]),
            "gen_area": np.array(gen_area, dtype=np.int64),
            "inv_r": np.array(inv_r),
            "inv_tt": np.array(inv_tt),
            "alpha": np.array(alpha),
            "lo": np.array(lo),
            "hi": np.array(hi),
            "tie_a": np.array([index[t.from_area] for t in self.ties], dtype=np.int64),
            "tie_b": np.array([index[t.to_area] for t in self.ties], dtype=np.int64),
            "tie_k": np.array([t.stiffness_t for t in self.ties]),
            "inv_ftc": 1.0 / self.meas_filter_tc,
        }

    def tie_laplacian(self) -> np.ndarray:
        lap = np.zeros((self.n_areas, self.n_areas))
        p = self.arrays()
        for a, b, t in zip(p["tie_a"], p["tie_b"], p["tie_k"]):
            lap[a, a] += t
            lap[b, b] += t
            lap[a, b] -= t
            lap[b, a] -= t
        return lap


def _connected(n, edges) -> bool:
    if n == 1:
        return True
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == n


@dataclass
class PlantState:
    """Deviation state: frequency, relative angles (area 1 grounded),
    per-generator mechanical power (relative to base setpoint), filtered
    measurements of frequency / net interchange, and the AGC integrators."""

    freq_dev: np.ndarray
    angle: np.ndarray
    gen_power: np.ndarray
    meas_f: np.ndarray
    meas_ni: np.ndarray
    eta: np.ndarray

    def __post_init__(self):
        for name in ("freq_dev", "angle", "gen_power", "meas_f", "meas_ni", "eta"):
            vec = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if not np.all(np.isfinite(vec)):
                raise NonFinite(f"{name} contains NaN/Inf")
            setattr(self, name, vec)
        if self.angle[0] != 0.0:
            raise ConfigError("angle of the grounded area must be 0")

    @classmethod
    def zeros(cls, net: NetworkSpec) -> "PlantState":
        n, m = net.n_areas, net.n_gens
        return cls(np.zeros(n), np.zeros(n), np.zeros(m), np.zeros(n), np.zeros(n), np.zeros(n))

    def pack(self) -> np.ndarray:
        return np.concatenate(
            [self.freq_dev, self.angle, self.gen_power, self.meas_f, self.meas_ni, self.eta]
        )

    @classmethod
    def unpack(cls, net: NetworkSpec, y: np.ndarray) -> "PlantState":
        n, m = net.n_areas, net.n_gens
        parts = np.split(np.asarray(y, dtype=float), [n, 2 * n, 2 * n + m, 3 * n + m, 4 * n + m])
        return cls(*parts)


def net_interchange_dev(net: NetworkSpec, angle: np.ndarray) -> np.ndarray:
    """Deviation of tie-line exports from schedule given relative angles."""
    p = net.arrays()
    ni = np.zeros(net.n_areas)
    flow = p["tie_k"] * (angle[p["tie_a"]] - angle[p["tie_b"]])
    np.add.at(ni, p["tie_a"], flow)
    np.add.at(ni, p["tie_b"], -flow)
    return ni


def plant_rhs(net: NetworkSpec, state: PlantState, u: np.ndarray) -> PlantState:
    """Open-loop plant derivative for commanded setpoints ``u`` (absolute).

    The AGC integrator is not part of the plant; the returned eta derivative
    is zero.  Swing: M_k dfk = sum_i p_ki - D_k f_k - dNI_k - dPL_k; turbine:
    T_t dp = -p + (u - u*) - f_k / R; angles integrate inter-area frequency
    differences; measurements are first-order lags.
    """
    p = net.arrays()
    n, m = net.n_areas, net.n_gens
    u = np.asarray(u, dtype=float)
    if u.shape != (m,):
        raise DimensionMismatch(f"u has shape {u.shape}, expected ({m},)")
    if not np.all(np.isfinite(u)):
        raise NonFinite("u contains NaN/Inf")
    u_off = u - net.base_setpoints()

    ni = net_interchange_dev(net, state.angle)
    sum_p = np.zeros(n)
    np.add.at(sum_p, p["gen_area"], state.gen_power)

    dfreq = p["m_inv"] * (sum_p - p["d_damp"] * state.freq_dev - ni - p["load"])
    dangle = np.zeros(n)
    dangle[1:] = TWO_PI * (state.freq_dev[1:] - state.freq_dev[0])
    dp = p["inv_tt"] * (-state.gen_power + u_off - p["inv_r"] * state.freq_dev[p["gen_area"]])
    dzf = p["inv_ftc"] * (state.freq_dev - state.meas_f)
    dzni = p["inv_ftc"] * (ni - state.meas_ni)
    return PlantState(dfreq, dangle, dp, dzf, dzni, np.zeros(n))


def ace(net: NetworkSpec, meas_f: np.ndarray, meas_ni: np.ndarray) -> np.ndarray:
    """Area control error from absolute measurements:
    ACE_k = (NI_k - NI*_k) + b_k (f_k - f*_k)."""
    meas_f = np.asarray(meas_f, dtype=float)
    meas_ni = np.asarray(meas_ni, dtype=float)
    n = net.n_areas
    if meas_f.shape != (n,) or meas_ni.shape != (n,):
        raise DimensionMismatch("measurement vectors must match area count")
    bias = np.array([a.bias_b for a in net.areas])
    sched_f = np.array([a.sched_freq for a in net.areas])
    return (meas_ni - net.sched_ni) + bias * (meas_f - sched_f)


def agc_rhs(net: NetworkSpec, eta: np.ndarray, ace_vec: np.ndarray) -> np.ndarray:
    """AGC integrators: deta_k/dt = -ACE_k / tau_k."""
    tau = np.array([a.agc_tc for a in net.areas])
    return -np.asarray(ace_vec, dtype=float) / tau


def allocate(area: AreaSpec, eta_k: float) -> np.ndarray:
    """Setpoints for one area: u_i = sat(u*_i + alpha_i eta_k) for AGC units,
    u*_i otherwise."""
    out = []
    for g in area.generators:
        if g.in_agc:
            out.append(float(np.clip(g.base_setpoint + g.participation * eta_k,
                                     g.limits[0], g.limits[1])))
        else:
            out.append(g.base_setpoint)
    return np.array(out)


def allocate_network(net: NetworkSpec, eta: np.ndarray) -> np.ndarray:
    return np.concatenate([allocate(a, eta[k]) for k, a in enumerate(net.areas)])


def check_feasibility(net: NetworkSpec) -> np.ndarray:
    """Assumption check: each area's load deviation lies strictly inside its
    AGC regulation capacity."""
    ok = []
    for a in net.areas:
        lo = sum(g.limits[0] - g.base_setpoint for g in a.generators if g.in_agc)
        hi = sum(g.limits[1] - g.base_setpoint for g in a.generators if g.in_agc)
        ok.append(bool(lo < a.load_dev < hi))
    return np.array(ok, dtype=bool)


def plant_equilibrium(net: NetworkSpec, u: Optional[np.ndarray] = None) -> PlantState:
    """Steady state of the plant for fixed setpoints (default: base).

    Solves the assembled linear system in (freq, relative angles, gen power);
    frequency comes out uniform across areas and the filtered measurements
    equal their inputs.  The AGC state is returned as zero.
    """
    p = net.arrays()
    n, m = net.n_areas, net.n_gens
    if u is None:
        u = net.base_setpoints()
    u = np.asarray(u, dtype=float)
    if u.shape != (m,):
        raise DimensionMismatch(f"u has shape {u.shape}, expected ({m},)")
    u_off = u - net.base_setpoints()

    lap = net.tie_laplacian()
    dim = 2 * n - 1 + m
    mat = np.zeros((dim, dim))
    rhs = np.zeros(dim)
    # unknown layout: f (n), theta_2..theta_n (n-1), p (m)
    for k in range(n):
        mat[k, k] = -p["d_damp"][k]
        mat[k, n:2 * n - 1] = -lap[k, 1:]
        rhs[k] = p["load"][k]
    for g in range(m):
        mat[p["gen_area"][g], 2 * n - 1 + g] = 1.0
    for k in range(1, n):
        mat[n - 1 + k, k] = 1.0
        mat[n - 1 + k, 0] = -1.0
    for g in range(m):
        row = 2 * n - 1 + g
        mat[row, row] = -1.0
        mat[row, p["gen_area"][g]] = -p["inv_r"][g]
        rhs[row] = -u_off[g]
    try:
        z = numerics.solve(mat, rhs)
    except Singular as exc:
        raise SingularNetwork("steady-state system singular (disconnected ties?)") from exc

    freq = z[:n]
    angle = np.concatenate([[0.0], z[n:2 * n - 1]])
    gen_power = z[2 * n - 1:]
    ni = net_interchange_dev(net, angle)
    return PlantState(freq, angle, gen_power, freq.copy(), ni, np.zeros(n))


def plant_matrix(net: NetworkSpec) -> np.ndarray:
    """State matrix of the linear plant for fixed setpoints, states ordered
    [f (n), theta_2.. (n-1), p (m), zf (n), zni (n)].  Used to verify that
    the plant alone is Hurwitz."""
    p = net.arrays()
    n, m = net.n_areas, net.n_gens
    lap = net.tie_laplacian()
    dim = 4 * n - 1 + m
    a = np.zeros((dim, dim))
    i_f, i_th, i_p, i_zf, i_zni = 0, n, 2 * n - 1, 2 * n - 1 + m, 3 * n - 1 + m
    for k in range(n):
        a[i_f + k, i_f + k] = -p["m_inv"][k] * p["d_damp"][k]
        a[i_f + k, i_th:i_th + n - 1] = -p["m_inv"][k] * lap[k, 1:]
    for g in range(m):
        a[i_f + p["gen_area"][g], i_p + g] = p["m_inv"][p["gen_area"][g]]
    for k in range(1, n):
        a[i_th + k - 1, i_f + k] = TWO_PI
        a[i_th + k - 1, i_f] = -TWO_PI
    for g in range(m):
        a[i_p + g, i_p + g] = -p["inv_tt"][g]
        a[i_p + g, i_f + p["gen_area"][g]] = -p["inv_tt"][g] * p["inv_r"][g]
    for k in range(n):
        a[i_zf + k, i_f + k] = p["inv_ftc"]
        a[i_zf + k, i_zf + k] = -p["inv_ftc"]
        a[i_zni + k, i_th:i_th + n - 1] = p["inv_ftc"] * lap[k, 1:]
        a[i_zni + k, i_zni + k] = -p["inv_ftc"]
    return a
