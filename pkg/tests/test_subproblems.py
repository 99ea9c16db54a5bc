import numpy as np
import pytest

from uavmec import Decision, InfeasibleError, SystemConfig, total_energy
from uavmec.bcd.offload_time import cpu_time_bound, feasible_window, solve_offload_time
from uavmec.bcd.surrogates import OffloadTimeSurrogate, TaskSplitSurrogate, coefficients
from uavmec.bcd.task_split import solve_task_split
from uavmec.config import Regime, Scheme
from uavmec.energy import check_constraints
from uavmec.oracle import subproblem_oracle

CELLS = [(s, r) for s in ("noma", "fdma", "tdma") for r in ("inf", "fin")]


def energy(scheme, regime, rho, t, d, cfg, ues):
    return total_energy(scheme, regime, Decision(rho[0], rho[1], t, d), cfg, ues).total


class TestCoefficients:
    def test_values(self, cfg, ues):
        co = coefficients(Scheme.NOMA, Regime.FINITE, (0.5, 0.5), 4e-4, cfg, ues)
        load3 = ues[0].cycles ** 3
        assert co.zeta[0] == pytest.approx(cfg.kappa_U * load3 / (cfg.T_max - 4e-4) ** 2)
        assert co.xi[0] == pytest.approx(ues[0].kappa * load3 / cfg.T_max**2)
        n = cfg.B * 4e-4
        assert co.omega[0] == pytest.approx(np.log(2) * ues[0].L / (n * (1 - ues[0].eps)))
        assert co.z[0] == pytest.approx(np.log(2) * 0.5 * ues[0].L / (cfg.B * (1 - ues[0].eps)))
        assert all(v >= 0 for v in co.zeta + co.xi + co.omega + co.v + co.z + co.s)


class TestSurrogateValidity:
    def test_task_split(self, cfg, ues):
        rng = np.random.default_rng(11)
        sur = TaskSplitSurrogate(Scheme.NOMA, Regime.FINITE, 4e-4, 25.0, cfg, ues, (0.4, 0.35))
        pts = rng.uniform(0.0, 1.0, (2, 1000))
        assert np.all(sur.p_hat1_majorant(pts) >= sur.p_hat1(pts) - 1e-15)
        assert np.all(sur.mu_lower(pts) <= sur.mu(pts) + 1e-15)
        x0 = sur.rho0
        assert float(sur.p_hat1_majorant(x0)) == pytest.approx(float(sur.p_hat1(x0)), abs=1e-10)
        assert np.allclose(sur.mu_lower(x0), sur.mu(x0), atol=1e-10)
        # the surrogate objective upper-bounds the exact one where the exact one is finite
        exact = sur.value(pts, exact=True)
        approx = sur.value(pts)
        fin = np.isfinite(exact) & np.isfinite(approx)
        assert np.all(approx[fin] >= exact[fin] * (1 - 1e-12))
        assert float(sur.value(x0)) == pytest.approx(float(sur.value(x0, exact=True)), rel=1e-10)

    def test_task_split_matches_energy(self, cfg, ues):
        sur = TaskSplitSurrogate(Scheme.FDMA, Regime.FINITE, 4e-4, 30.0, cfg, ues, (0.4, 0.35))
        assert float(sur.value(sur.rho0, exact=True)) == pytest.approx(float(sur.true_energy(sur.rho0)), rel=1e-10)

    def test_offload_time(self, cfg, ues):
        rho, d, t0 = (0.4, 0.35), 25.0, 4e-4
        lo, hi = feasible_window("noma", "fin", rho, d, cfg, ues, t0)
        sur = OffloadTimeSurrogate(Scheme.NOMA, Regime.FINITE, rho, d, cfg, ues, t0, lo, hi)
        ts = np.random.default_rng(12).uniform(lo, hi, 1000)
        assert np.all(sur.p_hat1_majorant(ts) >= sur.p_hat1(ts) - 1e-15)
        assert np.all(sur.mu_lower(ts) <= sur.mu(ts) + 1e-15)
        assert float(sur.p_hat1_majorant(t0)) == pytest.approx(float(sur.p_hat1(t0)), abs=1e-10)
        assert np.allclose(sur.mu_lower(t0), sur.mu(t0), atol=1e-10)
        p = np.random.default_rng(13).uniform(0, 2 * sur.p0[0], 1000)
        assert np.all(sur.bilinear_bound(p, ts, 0) >= p * ts * (1 - 1e-12))
        assert float(sur.bilinear_bound(sur.p0[0], t0, 0)) == pytest.approx(sur.p0[0] * t0, rel=1e-12)

    def test_slack_state_ranges(self, cfg, ues):
        sur = TaskSplitSurrogate(Scheme.NOMA, Regime.FINITE, 4e-4, 25.0, cfg, ues, (0.4, 0.35))
        st = sur.slack_state(sur.rho0)
        assert all(0 < m <= 1 for m in st.mu_tilde)


class TestTaskSplit:
    def test_noma_f_matches_grid(self, cfg, ues):
        t, d = 5e-4, 25.0
        grid = subproblem_oracle("task-split", "noma", "fin", Decision(0, 0, t, d), cfg, ues, 1e-3)
        rho = solve_task_split("noma", "fin", t, d, cfg, ues, (0.5, 0.5))
        assert energy("noma", "fin", rho, t, d, cfg, ues) <= grid.value * 1.01
        # from the grid optimum the solver may only improve
        rho2 = solve_task_split("noma", "fin", t, d, cfg, ues, grid.argmin)
        assert energy("noma", "fin", rho2, t, d, cfg, ues) <= grid.value + 1e-9

    @pytest.mark.parametrize("scheme, regime", CELLS)
    def test_all_cells_match_grid(self, cfg, ues, scheme, regime):
        t, d = 4e-4, 30.0 if scheme == "noma" else 50.0
        grid = subproblem_oracle("task-split", scheme, regime, Decision(0, 0, t, d), cfg, ues, 1e-3)
        rho = solve_task_split(scheme, regime, t, d, cfg, ues, (0.5, 0.5))
        e = energy(scheme, regime, rho, t, d, cfg, ues)
        assert e <= grid.value * 1.01
        assert e >= grid.value * 0.99
        assert check_constraints(scheme, regime, Decision(*rho, t, d), cfg, ues).feasible

    def test_symmetric(self, cfg, ues):
        r1, r2 = solve_task_split("fdma", "inf", 4e-4, 50.0, cfg, ues, (0.5, 0.5))
        assert abs(r1 - r2) <= 1e-3

    def test_monotone_trace(self, cfg, ues):
        trace = []
        solve_task_split("noma", "fin", 4e-4, 25.0, cfg, ues, (0.7, 0.7), trace)
        assert len(trace) >= 2
        assert all(b <= a * (1 + 1e-12) for a, b in zip(trace, trace[1:]))

    def test_infeasible_init(self, cfg, ues):
        with pytest.raises(InfeasibleError) as exc:
            solve_task_split("fdma", "inf", 4e-4, 50.0, cfg, ues, (0.0, 0.0))
        assert exc.value.constraint.startswith("local_cpu_cap")

    def test_no_window(self, ues):
        small = tuple(u.with_(L=600) for u in ues)
        assert solve_task_split("tdma", "inf", 0.0, 50.0, SystemConfig(), small, (0.5, 0.5)) == (0.0, 0.0)


class TestOffloadTime:
    def test_tdma_matches_grid(self, cfg, ues):
        rho, d = (0.5, 0.5), 25.0
        grid = subproblem_oracle("time", "tdma", "inf", Decision(*rho, 0, d), cfg, ues, 1e-6)
        t = solve_offload_time("tdma", "inf", rho, d, cfg, ues, 5e-4)
        assert energy("tdma", "inf", rho, t, d, cfg, ues) <= grid.value * 1.01

    @pytest.mark.parametrize("scheme, regime", CELLS)
    def test_all_cells_match_grid(self, cfg, ues, scheme, regime):
        rho, d = (0.4, 0.35), 25.0
        grid = subproblem_oracle("time", scheme, regime, Decision(*rho, 0, d), cfg, ues, 1e-6)
        trace = []
        t = solve_offload_time(scheme, regime, rho, d, cfg, ues, 5e-4, trace)
        assert energy(scheme, regime, rho, t, d, cfg, ues) <= grid.value * 1.01
        assert all(b <= a * (1 + 1e-12) for a, b in zip(trace, trace[1:]))

    def test_idle_returns_zero(self, ues):
        small = tuple(u.with_(L=600) for u in ues)
        cfg = SystemConfig()
        assert solve_offload_time("fdma", "inf", (0.0, 0.0), 50.0, cfg, small, 5e-4) == 0.0
        oracle = subproblem_oracle("time", "fdma", "inf", Decision(0, 0, 0, 50.0), cfg, small, 1e-5)
        assert oracle.argmin == (0.0,)

    def test_cpu_bound(self, cfg, ues):
        tb = cpu_time_bound("fdma", (1.0, 1.0), cfg, ues)
        # f_rem,1 + f_rem,2 = 2 c L / (T - t) = f_U_max
        assert tb == pytest.approx(cfg.T_max - 2 * ues[0].cycles / cfg.f_U_max, rel=1e-9)
        tdma = cpu_time_bound("tdma", (1.0, 1.0), cfg, ues)
        # UE 1 finishes uploading after delta * t, UE 2 after t
        w1, w2 = cfg.T_max - cfg.delta * tdma, cfg.T_max - tdma
        assert ues[0].cycles / w1 + ues[1].cycles / w2 == pytest.approx(cfg.f_U_max, rel=1e-9)

    def test_infeasible_init(self, cfg, ues):
        with pytest.raises(InfeasibleError):
            solve_offload_time("fdma", "inf", (1.0, 1.0), 50.0, cfg, ues, 9e-4)
