"""Plant model: right-hand side, equilibrium structure, ACE, allocation."""

import numpy as np
import pytest

from rank1stab import agc, numerics
from rank1stab.errors import ConfigError, DimensionMismatch, SingularNetwork

from helpers import make_gen, three_area_net, two_area_net


class TestValidation:
    def test_non_agc_unit_must_be_pinned(self):
        with pytest.raises(ConfigError):
            agc.GeneratorSpec(droop_r=0.1, base_setpoint=1.0, limits=(0.5, 1.5),
                              participation=0.0, in_agc=False)

    def test_participations_must_sum_to_one(self):
        gens = (make_gen(part=0.6), make_gen(part=0.6))
        with pytest.raises(ConfigError):
            agc.AreaSpec("a", 10.0, 1.0, gens, 21.0, 100.0)

    def test_disconnected_graph_rejected(self):
        a1 = agc.AreaSpec("a", 10.0, 1.0, (make_gen(part=1.0),), 11.0, 100.0)
        a2 = agc.AreaSpec("b", 10.0, 1.0, (make_gen(part=1.0),), 11.0, 100.0)
        with pytest.raises(SingularNetwork):
            agc.NetworkSpec((a1, a2), (), np.zeros(2))

    def test_schedule_must_balance(self):
        a1 = agc.AreaSpec("a", 10.0, 1.0, (make_gen(part=1.0),), 11.0, 100.0)
        a2 = agc.AreaSpec("b", 10.0, 1.0, (make_gen(part=1.0),), 11.0, 100.0)
        with pytest.raises(ConfigError):
            agc.NetworkSpec((a1, a2), (agc.TieLine("a", "b", 5.0),),
                            np.array([0.1, 0.0]))

    def test_beta(self):
        net = two_area_net()
        assert np.allclose(net.beta_k, [21.0, 21.0])


class TestPlantRhs:
    def test_zero_at_origin_without_disturbance(self):
        net = two_area_net(load1=0.0)
        state = agc.PlantState.zeros(net)
        deriv = agc.plant_rhs(net, state, net.base_setpoints())
        assert np.max(np.abs(deriv.pack())) == 0.0

    def test_dimension_check(self):
        net = two_area_net()
        with pytest.raises(DimensionMismatch):
            agc.plant_rhs(net, agc.PlantState.zeros(net), np.zeros(3))

    def test_derivative_matches_finite_difference_of_equilibrium_drift(self):
        # a consistency spot-check: at the computed equilibrium the rhs vanishes
        net = two_area_net()
        eq = agc.plant_equilibrium(net)
        deriv = agc.plant_rhs(net, eq, net.base_setpoints())
        assert np.max(np.abs(deriv.pack())) < 1e-12


class TestEquilibrium:
    def test_zero_case(self):
        net = two_area_net(load1=0.0)
        eq = agc.plant_equilibrium(net)
        assert np.max(np.abs(eq.pack())) < 1e-14

    def test_single_area_droop_response(self):
        area = agc.AreaSpec("only", 10.0, 1.0, (make_gen(part=1.0),), 11.0,
                            100.0, 60.0, 0.1)
        net = agc.NetworkSpec((area,), (), np.zeros(1))
        eq = agc.plant_equilibrium(net)
        assert abs(eq.freq_dev[0] + 0.1 / area.beta) < 1e-12

    def test_symmetric_two_area_interchange(self):
        eq = agc.plant_equilibrium(two_area_net(load1=0.1))
        assert abs(eq.meas_ni[0] + 0.05) < 1e-12
        assert abs(eq.meas_ni[1] - 0.05) < 1e-12

    def test_matched_setpoint_change_zeroes_deviations(self):
        # raising area setpoints by exactly the load change restores schedule
        net = three_area_net(loads=(0.08, 0.0, -0.03), sched=(0.0, 0.0, 0.0))
        u = net.base_setpoints().copy()
        g = 0
        for k, a in enumerate(net.areas):
            for gen in a.generators:
                if gen.in_agc:
                    u[g] += gen.participation * net.areas[k].load_dev
                g += 1
        eq = agc.plant_equilibrium(net, u)
        assert np.max(np.abs(eq.freq_dev)) < 1e-12
        assert np.max(np.abs(eq.meas_ni)) < 1e-12

    def test_synchronism_and_balances(self):
        rng = np.random.default_rng(3)
        net = three_area_net(loads=tuple(rng.uniform(-0.1, 0.1, 3)))
        u = net.base_setpoints() + rng.uniform(-0.05, 0.05, net.n_gens)
        eq = agc.plant_equilibrium(net, u)
        # synchronism
        assert np.ptp(eq.freq_dev) <= 1e-10
        # interchange balance
        assert abs(eq.meas_ni.sum()) <= 1e-10
        # per-area balance du_k = dNI_k + beta_k df_k + dPL_k
        du = np.zeros(3)
        off = u - net.base_setpoints()
        g = 0
        for k, a in enumerate(net.areas):
            du[k] = off[g:g + len(a.generators)].sum()
            g += len(a.generators)
        loads = np.array([a.load_dev for a in net.areas])
        resid = du - (eq.meas_ni + net.beta_k * eq.freq_dev + loads)
        assert np.max(np.abs(resid)) <= 1e-10
        # uniform frequency matches the aggregate formula
        want = (du - loads).sum() / net.beta_k.sum()
        assert abs(eq.freq_dev[0] - want) <= 1e-10

    def test_interchange_formula(self):
        # dNI_k = ((beta-beta_k)/beta)(du_k - dPL_k) - (beta_k/beta) sum_others
        rng = np.random.default_rng(5)
        net = three_area_net(loads=tuple(rng.uniform(-0.1, 0.1, 3)))
        eq = agc.plant_equilibrium(net)
        beta_k = net.beta_k
        beta = beta_k.sum()
        w = -np.array([a.load_dev for a in net.areas])  # du = 0
        want = (beta - beta_k) / beta * w - beta_k / beta * (w.sum() - w)
        assert np.max(np.abs(eq.meas_ni - want)) < 1e-10

    def test_plant_alone_is_hurwitz(self):
        for net in (two_area_net(), three_area_net()):
            ok, _ = numerics.is_hurwitz(agc.plant_matrix(net))
            assert ok


class TestAce:
    def test_zero(self):
        net = two_area_net()
        sched_f = np.array([a.sched_freq for a in net.areas])
        assert np.max(np.abs(agc.ace(net, sched_f, net.sched_ni))) == 0.0

    def test_definitional_cancellation(self):
        net = two_area_net()
        df = np.array([0.03, -0.11])
        bias = np.array([a.bias_b for a in net.areas])
        meas_f = np.array([a.sched_freq for a in net.areas]) + df
        meas_ni = net.sched_ni - bias * df
        assert np.max(np.abs(agc.ace(net, meas_f, meas_ni))) < 1e-12

    def test_ideal_bias_zeroes_remote_area(self):
        # with b = beta, an undisturbed area has zero ACE at the droop
        # equilibrium of a remote disturbance
        net = two_area_net(load1=0.1)  # bias defaults to beta
        eq = agc.plant_equilibrium(net)
        sched_f = np.array([a.sched_freq for a in net.areas])
        vals = agc.ace(net, sched_f + eq.meas_f, net.sched_ni + eq.meas_ni)
        assert abs(vals[1]) < 1e-12
        assert abs(vals[0] + 0.1) < 1e-12  # disturbed area sees -dPL

    def test_agc_rhs(self):
        net = two_area_net(tau=50.0)
        rhs = agc.agc_rhs(net, np.zeros(2), np.array([0.2, 0.0]))
        assert np.allclose(rhs, [-0.004, 0.0])
        assert np.max(np.abs(agc.agc_rhs(net, np.ones(2), np.zeros(2)))) == 0.0


class TestAllocate:
    def test_zero_signal(self):
        area = two_area_net().areas[0]
        u = agc.allocate(area, 0.0)
        assert np.allclose(u, [g.base_setpoint for g in area.generators])

    def test_saturation(self):
        area = two_area_net().areas[0]
        u = agc.allocate(area, 1e9)
        assert np.allclose(u, [g.limits[1] for g in area.generators])

    def test_linear_region_split(self):
        gens = (make_gen(part=0.7, width=5.0), make_gen(part=0.3, width=5.0))
        area = agc.AreaSpec("a", 10.0, 1.0, gens, 21.0, 100.0)
        u = agc.allocate(area, 1.0)
        off = u - np.array([g.base_setpoint for g in gens])
        assert np.allclose(off, [0.7, 0.3])

    def test_non_agc_unit_stays_at_base(self):
        gens = (make_gen(part=1.0), make_gen(base=0.7, in_agc=False))
        area = agc.AreaSpec("a", 10.0, 1.0, gens, 21.0, 100.0)
        u = agc.allocate(area, 3.0)
        assert u[1] == 0.7


class TestFeasibility:
    def test_zero_load(self):
        assert agc.check_feasibility(two_area_net(load1=0.0)).all()

    def test_strict_boundary_excluded(self):
        # AGC capacity of each area is +/-1.0 around base: exactly 1.0 fails
        net = two_area_net(load1=1.0)
        assert not agc.check_feasibility(net)[0]
        assert agc.check_feasibility(net)[1]

    def test_inside(self):
        assert agc.check_feasibility(two_area_net(load1=0.9)).all()
