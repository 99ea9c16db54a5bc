import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles as o
from sampling import carried_bits, random_points
from uavmec import Decision, DomainError, SystemConfig, default_ues, min_powers
from uavmec.errors import SicInfeasibleError
from uavmec.model import channel_gains
from uavmec.power import sic_margin

SCHEMES = ["noma", "fdma", "tdma"]
CELLS = [(s, r) for s in SCHEMES for r in ("inf", "fin")]


@pytest.fixture
def narrow():
    return SystemConfig(B=0.5e6)


class TestFrozen:
    def test_noma_infinite(self, narrow, ues):
        sol = min_powers("noma", "inf", Decision(0.5, 0.5, 3e-4, 25.0), narrow, ues)
        assert sol.p1 == pytest.approx(4.721e-3, rel=1e-3)
        assert sol.p2 == pytest.approx(7.671e-4, rel=1e-3)
        assert sol.sinr1 == pytest.approx(15.0)

    def test_tdma_infinite(self, narrow, ues):
        sol = min_powers("tdma", "inf", Decision(0.5, 0.5, 3e-4, 25.0), narrow, ues)
        assert sol.sinr1 == pytest.approx(255.0)
        assert sol.p1 == pytest.approx(5.016e-3, rel=1e-3)

    def test_noma_finite_branches(self, ues):
        # N = B t = 3000 with equal channels
        dec = Decision(0.5, 0.5, 5e-4, 50.0)
        cfg = SystemConfig(B=6e6)
        sol = min_powers("noma", "fin", dec, cfg, ues)
        hb = channel_gains(50.0, cfg).hbar1
        assert sol.sinr1 == pytest.approx(0.2417, abs=1e-4)
        assert sol.noma_branches.p_hat1 * hb == pytest.approx(0.3001, abs=1e-4)
        assert sol.noma_branches.p_check1 * hb == pytest.approx(0.3188, abs=1e-4)

    @pytest.mark.parametrize("scheme, regime", CELLS)
    def test_idle(self, cfg, ues, scheme, regime):
        sol = min_powers(scheme, regime, Decision(0.0, 0.0, 5e-4, 25.0), cfg, ues)
        assert sol.p1 == 0.0 and sol.p2 == 0.0

    @pytest.mark.parametrize("scheme, regime", CELLS)
    def test_against_oracle(self, cfg, ues, scheme, regime):
        dec = Decision(0.4, 0.3, 4e-4, 30.0)
        sol = min_powers(scheme, regime, dec, cfg, ues)
        p1, p2, _ = o.powers(scheme, regime, 0.4, 0.3, 4e-4, 30.0)
        assert sol.p1 == pytest.approx(p1, rel=1e-9)
        assert sol.p2 == pytest.approx(p2, rel=1e-9)


class TestErrors:
    def test_sic_infeasible_strict(self, narrow, ues):
        with pytest.raises(SicInfeasibleError) as exc:
            min_powers("noma", "fin", Decision(0.5, 0.5, 3e-4, 25.0), narrow, ues)
        assert exc.value.margin == pytest.approx(-468.39, abs=0.01)

    def test_success_only_flagged(self, narrow, ues):
        sol = min_powers("noma", "fin", Decision(0.5, 0.5, 3e-4, 25.0), narrow, ues, "success-only")
        assert sol.success_only
        assert sol.p1 == sol.noma_branches.p_hat1

    def test_noma_order(self, cfg, ues):
        with pytest.raises(DomainError):
            min_powers("noma", "inf", Decision(0.5, 0.5, 3e-4, 60.0), cfg, ues)

    def test_power_cap_not_an_error(self, ues):
        cfg = SystemConfig(B=1e5)
        sol = min_powers("fdma", "fin", Decision(1.0, 1.0, 1e-4, 50.0), cfg, ues)
        assert sol.p1 > ues[0].P_max


class TestMargin:
    @pytest.mark.parametrize("n, ref", [(150, -468.3), (3000, 0.9416)])
    def test_frozen(self, ues, n, ref):
        t = 5e-4
        cfg = SystemConfig(B=n / t)
        assert sic_margin(0.5, 0.5, t, cfg, ues) == pytest.approx(ref, abs=0.1 if n == 150 else 1e-4)

    def test_idle(self, cfg, ues):
        assert sic_margin(0.0, 0.0, 5e-4, cfg, ues) == 1.0

    def test_decreasing_on_diagonal(self, cfg, ues):
        vals = [sic_margin(r, r, 3e-4, cfg, ues) for r in np.linspace(0.05, 1, 40)]
        assert np.all(np.diff(vals) < 0)


class TestProperties:
    @pytest.mark.parametrize("scheme, regime", CELLS)
    def test_rate_round_trip(self, cfg, ues, scheme, regime):
        for dec in random_points(scheme, regime, cfg, ues, 100, seed=1):
            sol = min_powers(scheme, regime, dec, cfg, ues)
            b1, b2 = carried_bits(scheme, regime, sol, dec, cfg, ues)
            assert b1 == pytest.approx(dec.rho1 * ues[0].L, rel=1e-9)
            assert b2 == pytest.approx(dec.rho2 * ues[1].L, rel=1e-9)

    def test_failure_branch_round_trip(self, cfg, ues):
        for dec in random_points("noma", "fin", cfg, ues, 100, seed=2):
            sol = min_powers("noma", "fin", dec, cfg, ues)
            br, ch = sol.noma_branches, channel_gains(dec.d, cfg)
            x1, x2 = br.p_check1 * ch.hbar1, br.p_check2 * ch.hbar2
            # with SIC failed both UEs are decoded against each other's interference
            assert x1 / (x2 + 1) == pytest.approx(sol.sinr1, rel=1e-9)
            assert x2 / (x1 + 1) == pytest.approx(sol.sinr2, rel=1e-9)
            assert br.p_check1 > br.p_hat1 and br.p_check2 > br.p_hat2

    @given(st.floats(0.05, 1), st.floats(0.05, 1), st.floats(0.1, 0.95), st.floats(0, 50),
           st.sampled_from(CELLS))
    def test_monotone(self, r1, r2, tf, d, cell):
        cfg, ues = SystemConfig(), default_ues()
        scheme, regime = cell
        t = tf * cfg.t_cap
        base = min_powers(scheme, regime, Decision(r1, r2, t, d), cfg, ues, "success-only")
        more = min_powers(scheme, regime, Decision(min(1, r1 * 1.05), r2, t, d), cfg, ues, "success-only")
        longer = min_powers(scheme, regime, Decision(r1, r2, min(cfg.t_cap, t * 1.05), d), cfg, ues, "success-only")
        if base.success_only or more.success_only or longer.success_only:
            return
        assert more.p1 >= base.p1 * (1 - 1e-12)
        assert longer.p1 <= base.p1 * (1 + 1e-12) and longer.p2 <= base.p2 * (1 + 1e-12)

    @pytest.mark.parametrize("scheme", ["fdma", "tdma"])
    @given(rho=st.floats(0.05, 1), tf=st.floats(0.1, 0.95), d=st.floats(0, 100))
    def test_orthogonal_power_ratio(self, scheme, rho, tf, d):
        cfg, ues = SystemConfig(), default_ues()
        sol = min_powers(scheme, "fin", Decision(rho, rho, tf * cfg.t_cap, d), cfg, ues)
        ch = channel_gains(d, cfg)
        assert sol.p1 / sol.p2 == pytest.approx(ch.hbar2 / ch.hbar1, rel=1e-9)
