"""Slow time-scale AGC dynamics and bias-tuning analytics.

On the AGC time scale the plant sits at quasi-steady state and the
integrators obey  tau_tilde * deta/dl = B (phi(eta) - dPL)  with
B = -I + (1/beta)(beta_k - b) 1' and phi_k the saturated per-area setpoint
map.  B fits the rank-1 diagonal stability test with delta = I,
x = (beta_k - b)/beta, y = 1, and is diagonally stable for every positive
bias tuning; the resulting diagonal certificate feeds an
integral-of-nonlinearity Lyapunov function for the reduced dynamics.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from . import diagstab, numerics
from .errors import (
    DimensionMismatch,
    HypothesisViolated,
    NonUniformTau,
    Rank1StabError,
    TargetInfeasible,
)
from .agc import NetworkSpec


@dataclass(frozen=True)
class PhiMap:
    """Piecewise-linear monotone map eta_k -> total setpoint change of one
    area: sum of clip(alpha_i eta, lo_i, hi_i) over participating units
    (offsets relative to base setpoints, alpha_i > 0)."""

    alphas: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def eval(self, eta: float) -> float:
        return float(np.sum(np.clip(self.alphas * eta, self.lo, self.hi)))

    def capacity(self) -> Tuple[float, float]:
        """Open interval of reachable setpoint changes (image interior)."""
        return float(np.sum(self.lo)), float(np.sum(self.hi))

    def preimage(self) -> Tuple[float, float]:
        """Interval on which the map is strictly increasing onto capacity()."""
        return float(np.min(self.lo / self.alphas)), float(np.max(self.hi / self.alphas))

    def integral(self, eta: float) -> float:
        """Exact integral of the map from 0 to eta (piecewise quadratic)."""
        total = 0.0
        for a, lo, hi in zip(self.alphas, self.lo, self.hi):
            xlo, xhi = lo / a, hi / a
            if eta >= xhi:
                total += 0.5 * a * xhi * xhi + hi * (eta - xhi)
            elif eta >= xlo:
                total += 0.5 * a * eta * eta
            else:
                total += 0.5 * a * xlo * xlo + lo * (eta - xlo)
        return total


@dataclass(frozen=True)
class ReducedModel:
    beta_k: np.ndarray
    beta: float
    bias_b: np.ndarray
    tau_tilde: np.ndarray  # normalized so min = 1
    tau_base: float  # seconds; physical tau_k = tau_base * tau_tilde_k
    b_matrix: np.ndarray
    phi: Tuple[PhiMap, ...]
    load_dev: np.ndarray

    def __post_init__(self):
        n = self.beta_k.shape[0]
        rebuilt = -np.eye(n) + np.outer(self.beta_k - self.bias_b, np.ones(n)) / self.beta
        if np.max(np.abs(rebuilt - self.b_matrix)) > 1e-12:
            raise DimensionMismatch("b_matrix inconsistent with beta/bias fields")

    @property
    def n_areas(self) -> int:
        return self.beta_k.shape[0]

    def tau_seconds(self) -> np.ndarray:
        return self.tau_base * self.tau_tilde


def build_reduced(net: NetworkSpec) -> ReducedModel:
    """Assemble the reduced model from a network description."""
    beta_k = net.beta_k
    beta = float(beta_k.sum())
    bias = np.array([a.bias_b for a in net.areas])
    tau = np.array([a.agc_tc for a in net.areas])
    tau_base = float(tau.min())
    n = net.n_areas
    bmat = -np.eye(n) + np.outer(beta_k - bias, np.ones(n)) / beta
    phis = []
    for a in net.areas:
        gens = [g for g in a.generators if g.in_agc and g.participation > 0]
        phis.append(
            PhiMap(
                alphas=np.array([g.participation for g in gens]),
                lo=np.array([g.limits[0] - g.base_setpoint for g in gens]),
                hi=np.array([g.limits[1] - g.base_setpoint for g in gens]),
            )
        )
    return ReducedModel(
        beta_k=beta_k,
        beta=beta,
        bias_b=bias,
        tau_tilde=tau / tau_base,
        tau_base=tau_base,
        b_matrix=bmat,
        phi=tuple(phis),
        load_dev=np.array([a.load_dev for a in net.areas]),
    )


def reduced_rank1(model: ReducedModel) -> diagstab.Rank1System:
    """The reduced matrix as a rank-1 system: delta = 1, x = (beta_k - b)/beta,
    y = 1."""
    n = model.n_areas
    return diagstab.Rank1System(
        np.ones(n), (model.beta_k - model.bias_b) / model.beta, np.ones(n)
    )


def reduced_is_stable(model: ReducedModel) -> diagstab.DiagStabReport:
    """Diagonal stability of B; holds for any positive bias tuning since
    sum_k [beta_k - b_k]_+ / beta < sum_k beta_k / beta = 1."""
    return diagstab.check_rank1(reduced_rank1(model))


def reduced_certificate(model: ReducedModel) -> np.ndarray:
    """Diagonal Lyapunov weights for B.

    Uses the closed-form d_k = beta/|beta_k - b_k| when no area is tuned
    exactly at its frequency characteristic; otherwise falls back to
    d_k = beta/beta_k, verified positive definite before returning.
    """
    x = (model.beta_k - model.bias_b) / model.beta
    if np.all(x != 0.0):
        rep = diagstab.certificate(reduced_rank1(model))
        d = rep.certificate_d
    else:
        d = model.beta / model.beta_k
    db = d[:, None] * model.b_matrix
    q = -0.5 * (db + db.T)
    if numerics.sym_eig(q).values[0] <= 0:
        raise HypothesisViolated("certificate weights failed the definiteness check")
    return d


def phi_eval(model: ReducedModel, k: int, eta_k: float) -> float:
    return model.phi[k].eval(eta_k)


def phi_all(model: ReducedModel, eta: np.ndarray) -> np.ndarray:
    return np.array([p.eval(e) for p, e in zip(model.phi, eta)])


def phi_invert(model: ReducedModel, k: int, target: float) -> float:
    """Unique preimage of ``target`` under phi_k, by bisection.

    ``target`` must lie strictly inside the area's capacity interval; the
    result satisfies |phi(eta) - target| <= 1e-12 * capacity width.
    """
    p = model.phi[k]
    c_lo, c_hi = p.capacity()
    if not (c_lo < target < c_hi):
        raise TargetInfeasible(
            f"target {target:g} outside capacity ({c_lo:g}, {c_hi:g}) of area {k}"
        )
    lo, hi = p.preimage()
    tol = 1e-12 * (c_hi - c_lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = p.eval(mid)
        if abs(val - target) <= tol:
            return mid
        if val < target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, abs(lo) + abs(hi)):
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class EquilibriumResult:
    eta_bar: np.ndarray
    preimage_intervals: Tuple[Tuple[float, float], ...]


def equilibrium(model: ReducedModel) -> EquilibriumResult:
    """Unique reduced equilibrium: phi_k(eta_bar_k) = dPL_k per area."""
    eta = np.array(
        [phi_invert(model, k, float(model.load_dev[k])) for k in range(model.n_areas)]
    )
    return EquilibriumResult(
        eta_bar=eta,
        preimage_intervals=tuple(p.preimage() for p in model.phi),
    )


def reduced_rhs(model: ReducedModel, eta: np.ndarray) -> np.ndarray:
    """Normalized slow-time derivative tau_tilde^-1 B (phi(eta) - dPL);
    divide by tau_base for physical seconds."""
    w = phi_all(model, eta) - model.load_dev
    return (model.b_matrix @ w) / model.tau_tilde


def steady_state_ace(model: ReducedModel, eta: np.ndarray) -> np.ndarray:
    """Quasi-steady ACE implied by the AGC state: -B (phi(eta) - dPL)."""
    return -model.b_matrix @ (phi_all(model, eta) - model.load_dev)


def lyapunov_v(model: ReducedModel, d: np.ndarray, eta: np.ndarray) -> float:
    """Integral-of-nonlinearity Lyapunov value
    V = sum_k d_k tau_tilde_k int_{eta_bar_k}^{eta_k} (phi_k - phi_k(eta_bar_k)),
    with the integral done piecewise-exactly."""
    eta_bar = equilibrium(model).eta_bar
    total = 0.0
    for k, p in enumerate(model.phi):
        seg = p.integral(float(eta[k])) - p.integral(float(eta_bar[k]))
        seg -= p.eval(float(eta_bar[k])) * (float(eta[k]) - float(eta_bar[k]))
        total += d[k] * model.tau_tilde[k] * seg
    return float(total)


def lyapunov_decrease(model: ReducedModel, d: np.ndarray, eta: np.ndarray) -> float:
    """Time derivative of V along the reduced flow:
    (phi(eta) - phi(eta_bar))' D B (phi(eta) - dPL)."""
    eta_bar = equilibrium(model).eta_bar
    dphi = phi_all(model, eta) - phi_all(model, eta_bar)
    w = phi_all(model, eta) - model.load_dev
    return float(dphi @ (d * (model.b_matrix @ w)))


@dataclass(frozen=True)
class MarginStudy:
    kappa: float
    q_min_eig: float
    nominal_bound: float
    bound_holds: bool


def margin_study(model: ReducedModel, kappa: float) -> MarginStudy:
    """Stability-margin matrix under uniform proportional biasing b = kappa*beta_k
    with weights d_k = beta/beta_k:  Q = beta diag(1/beta_k) - (1-kappa) 11'.

    Returns the exact smallest eigenvalue next to the nominal closed-form
    bound (beta/min_k beta_k) * min(kappa, 1), which is reported for
    comparison rather than asserted: it fails for heterogeneous beta_k
    profiles (beta/max_k beta_k is the empirically consistent variant).
    """
    if not kappa > 0:
        raise HypothesisViolated("kappa must be positive")
    n = model.n_areas
    q = model.beta * np.diag(1.0 / model.beta_k) - (1.0 - kappa) * np.ones((n, n))
    lam_min = float(numerics.sym_eig(q).values[0])
    bound = model.beta / float(np.min(model.beta_k)) * min(kappa, 1.0)
    return MarginStudy(
        kappa=kappa, q_min_eig=lam_min, nominal_bound=bound,
        bound_holds=bool(lam_min >= bound - 1e-9),
    )


def _uniform_tau(model: ReducedModel) -> float:
    t = model.tau_tilde
    if np.max(t) - np.min(t) > 1e-12 * np.max(t):
        raise NonUniformTau("sensitivity study needs equal AGC time constants")
    return float(t[0])


def sensitivity(model: ReducedModel, i: int, j: int, omega: float) -> complex:
    """ACE-to-load-disturbance transfer S_ij at s = j*omega (slow time),
    ignoring saturation.

    Computed two ways, a complex resolvent solve and the closed form
    -(t's/(t's+1)) [delta_ij - (beta_i-b_i)/beta * t's/(t's + sum(b)/beta)],
    which must agree to 1e-8 relative.
    """
    tp = _uniform_tau(model)
    n = model.n_areas
    s = 1j * omega
    via_solve = (
        tp * s * numerics.complex_solve(
            tp * s * np.eye(n) - model.b_matrix, model.b_matrix[:, j].astype(complex)
        )[i]
        if omega != 0.0
        else 0.0 + 0.0j
    )
    kd = 1.0 if i == j else 0.0
    ci = (model.beta_k[i] - model.bias_b[i]) / model.beta
    qb = float(model.bias_b.sum()) / model.beta
    closed = -(tp * s / (tp * s + 1.0)) * (kd - ci * tp * s / (tp * s + qb))
    if abs(via_solve - closed) > 1e-8 * max(abs(closed), 1e-12):
        raise Rank1StabError(
            f"sensitivity cross-check failed at omega={omega:g}: "
            f"{via_solve} vs {closed}"
        )
    return complex(closed)


def hinf_ii(model: ReducedModel, i: int) -> float:
    """Peak sensitivity |1 - (beta_i - b_i)/beta| (the high-frequency value;
    see sweep_peak for the numerical supremum)."""
    _uniform_tau(model)
    return float(abs(1.0 - (model.beta_k[i] - model.bias_b[i]) / model.beta))


def sweep_peak(model: ReducedModel, i: int, points_per_decade: int = 400,
               decades: Tuple[float, float] = (-4.0, 4.0)) -> Tuple[float, float]:
    """Numerical peak of |S_ii(j omega)| over a log grid spanning
    ``decades`` around omega = 1/tau', refined by golden section.

    Returns (omega_at_peak, peak)."""
    tp = _uniform_tau(model)
    kd = 1.0
    ci = (model.beta_k[i] - model.bias_b[i]) / model.beta
    qb = float(model.bias_b.sum()) / model.beta

    def mag(w):
        s = 1j * w
        return abs(-(tp * s / (tp * s + 1.0)) * (kd - ci * tp * s / (tp * s + qb)))

    n_pts = int(points_per_decade * (decades[1] - decades[0])) + 1
    grid = np.logspace(decades[0], decades[1], n_pts) / tp
    vals = np.array([mag(w) for w in grid])
    m = int(np.argmax(vals))
    lo = grid[max(m - 1, 0)]
    hi = grid[min(m + 1, n_pts - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, dpt = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = mag(c), mag(dpt)
    for _ in range(80):
        if fc > fd:
            b, dpt, fd = dpt, c, fc
            c = b - invphi * (b - a)
            fc = mag(c)
        else:
            a, c, fc = c, dpt, fd
            dpt = a + invphi * (b - a)
            fd = mag(dpt)
    w_star = 0.5 * (a + b)
    return float(w_star), float(max(mag(w_star), vals[m]))
