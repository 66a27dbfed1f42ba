"""Shared network builders for the test suite."""

import numpy as np

from rank1stab.agc import AreaSpec, GeneratorSpec, NetworkSpec, TieLine


def make_gen(base=1.0, droop=0.1, width=0.5, part=0.5, in_agc=True, tt=0.5):
    if in_agc:
        return GeneratorSpec(droop_r=droop, turbine_tc=tt, base_setpoint=base,
                             limits=(base - width, base + width),
                             participation=part, in_agc=True)
    return GeneratorSpec(droop_r=droop, turbine_tc=tt, base_setpoint=base,
                         limits=(base, base), participation=0.0, in_agc=False)


def two_area_net(load1=0.1, load2=0.0, tau=100.0, bias=None, width=0.5,
                 tie=5.0, meas_tc=1.0):
    """Two identical areas (beta_k = 21), single tie line, step load in the
    first area.  bias defaults to the ideal tuning b = beta."""
    areas = []
    loads = (load1, load2)
    for k in range(2):
        gens = (make_gen(part=0.6, width=width), make_gen(part=0.4, width=width))
        beta = 1.0 + 1.0 / 0.1 + 1.0 / 0.1
        areas.append(AreaSpec(name=f"area{k + 1}", inertia_m=10.0,
                              load_damping=1.0, generators=gens,
                              bias_b=bias if bias is not None else beta,
                              agc_tc=tau, sched_freq=60.0, load_dev=loads[k]))
    return NetworkSpec(tuple(areas), (TieLine("area1", "area2", tie),),
                       np.zeros(2), meas_tc)


def three_area_net(loads=(0.1, 0.0, 0.0), taus=(100.0, 100.0, 100.0),
                   bias_scale=(1.0, 1.0, 1.0), sched=(0.0, 0.0, 0.0)):
    """Three heterogeneous areas on a tie triangle; bias_b = scale * beta_k."""
    droops = ((0.08, 0.12), (0.1, 0.15), (0.12, 0.2))
    inertias = (12.0, 8.0, 6.0)
    damps = (1.2, 0.9, 0.8)
    areas = []
    for k in range(3):
        gens = (make_gen(base=1.0, droop=droops[k][0], width=0.6, part=0.6),
                make_gen(base=0.9, droop=droops[k][1], width=0.4, part=0.4))
        beta = damps[k] + sum(1.0 / r for r in droops[k])
        areas.append(AreaSpec(name=f"area{k + 1}", inertia_m=inertias[k],
                              load_damping=damps[k], generators=gens,
                              bias_b=bias_scale[k] * beta, agc_tc=taus[k],
                              sched_freq=60.0, load_dev=loads[k]))
    ties = (TieLine("area1", "area2", 6.0), TieLine("area2", "area3", 4.0),
            TieLine("area1", "area3", 3.0))
    return NetworkSpec(tuple(areas), ties, np.asarray(sched, dtype=float), 1.0)


def chain_model(beta_profile, bias, taus=None, load=None):
    """Reduced model with prescribed per-area frequency characteristics.

    Single-unit areas (damping 0.5, droop tuned so beta_k matches) joined in
    a chain; beta_k must exceed 0.5."""
    from rank1stab.agc import AreaSpec, NetworkSpec, TieLine
    from rank1stab.reduced import build_reduced

    areas = []
    for k, (bk, bb) in enumerate(zip(beta_profile, bias)):
        gens = (make_gen(droop=1.0 / (bk - 0.5), part=1.0, width=2.0),)
        areas.append(AreaSpec(
            name=f"area{k + 1}", inertia_m=10.0, load_damping=0.5,
            generators=gens, bias_b=bb,
            agc_tc=100.0 if taus is None else taus[k],
            load_dev=0.0 if load is None else load[k],
        ))
    n = len(areas)
    ties = tuple(TieLine(f"area{k}", f"area{k + 1}", 5.0) for k in range(1, n))
    net = NetworkSpec(tuple(areas), ties, np.zeros(n))
    return build_reduced(net)


def random_rank1(rng, n=None, allow_zero_y=True):
    """Random rank-1 system with mixed-sign x, nonnegative y, and a condition
    value drawn roughly uniformly over [0.05, 1.95]."""
    from rank1stab.diagstab import Rank1System

    if n is None:
        n = int(rng.integers(1, 5))
    delta = 10.0 ** rng.uniform(-0.5, 0.5, n)
    x = rng.standard_normal(n)
    y = np.abs(rng.standard_normal(n))
    if allow_zero_y and rng.random() < 0.15:
        y[rng.integers(0, n)] = 0.0
    sys = Rank1System(delta, x, y)
    cv = sys.condition_value()
    if cv > 0:
        x = x * (rng.uniform(0.05, 1.95) / cv)
        sys = Rank1System(delta, x, y)
    return sys
