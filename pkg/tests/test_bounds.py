import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mehwn.bounds import (
    ModelParams,
    SeriesControl,
    build_bounds_report,
    diameter_prob_upper,
    diameter_series,
    expected_diameter_upper,
    expected_global_diameter_upper,
    expected_link_delay,
    expected_size_upper,
    gamma_lower,
    gamma_upper,
    link_delay_pmf,
    occupation_probability,
    series_divergent,
    size_prob_upper,
    size_series,
    wang_gamma_upper,
    wang_size_approx,
    _expected_diameter_upper_many,
)
from mehwn.errors import DivergentSeriesError, ParameterError

from oracles import geometric_wait_mean, longdouble_global_diameter, longdouble_size_series

# Extended-precision reference values (mpmath, 40 digits / longdouble direct sums).
SIZE_SERIES_P02_N10000 = 3.49880041986204424
SIZE_SERIES_P02_N500 = 3.47616690296468246
GLOBAL_DIAM_P02_N300 = 1.28634315876970046
GLOBAL_DIAM_P02_N2000 = 1.3032140008463640


class TestOccupationProbability:
    def test_zero_density(self):
        assert occupation_probability(ModelParams(0.0, 0.25)) == 0.0

    def test_reference_value(self):
        p = occupation_probability(ModelParams(1.4, 0.25, 1.0))
        assert p == pytest.approx(0.422922504795097, abs=1e-13)

    def test_monotone_in_density_toward_one(self):
        lams = [0.5, 1.0, 2.0, 5.0, 20.0, 50.0]
        ps = [occupation_probability(ModelParams(l, 0.25)) for l in lams]
        assert all(a < b for a, b in zip(ps, ps[1:]))
        assert all(0 <= p < 1 for p in ps)
        assert ps[-1] > 0.999999

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            ModelParams(-1.0, 0.25)
        with pytest.raises(ParameterError):
            ModelParams(1.0, 1.5)
        with pytest.raises(ParameterError):
            ModelParams(1.0, 0.25, r0=0.0)


class TestSizeProbUpper:
    def test_base_case_is_p(self):
        assert size_prob_upper(2, 0.37) == 0.37

    def test_hand_values(self):
        assert size_prob_upper(3, 0.2) == pytest.approx(0.1, abs=1e-15)
        assert size_prob_upper(4, 0.2) == pytest.approx(2 / 35, abs=1e-15)

    def test_domain(self):
        with pytest.raises(ParameterError):
            size_prob_upper(1, 0.2)
        with pytest.raises(ParameterError):
            size_prob_upper(3, 0.0)
        with pytest.raises(ParameterError):
            size_prob_upper(3, 1.0)

    @given(st.floats(0.01, 0.99), st.integers(2, 60))
    @settings(max_examples=60, deadline=None)
    def test_strictly_decreasing_and_bounded(self, p, n):
        a = size_prob_upper(n, p)
        b = size_prob_upper(n + 1, p)
        assert 0 < b < a <= p


class TestSizeSeries:
    def test_tiny_p_gives_one(self):
        assert expected_size_upper(1e-12, SeriesControl(n_max=100)) == pytest.approx(1.0, rel=1e-10)

    def test_matches_frozen_oracle(self):
        assert expected_size_upper(0.2, SeriesControl(n_max=10000)) == pytest.approx(
            SIZE_SERIES_P02_N10000, rel=1e-9
        )
        assert expected_size_upper(0.2, SeriesControl(n_max=500)) == pytest.approx(
            SIZE_SERIES_P02_N500, rel=1e-9
        )

    def test_matches_live_longdouble_oracle(self):
        for p in (0.05, 0.15, 0.3):
            mine = expected_size_upper(p, SeriesControl(n_max=700))
            ref = longdouble_size_series(p, 700)
            assert mine == pytest.approx(ref, rel=1e-9)

    def test_convergent_case_flags(self):
        sv = size_series(0.2, SeriesControl(n_max=10000))
        assert not sv.divergent and sv.converged
        # the numeric tail check needs a tolerance matched to the truncation
        assert size_series(0.2, SeriesControl(n_max=10000, tail_tol=1e-7)).tail_met

    def test_divergent_case_warn_policy(self):
        sv = size_series(0.4229, SeriesControl(n_max=840))
        assert sv.divergent and not sv.converged
        assert math.isfinite(sv.value)

    def test_divergent_case_error_policy(self):
        with pytest.raises(DivergentSeriesError):
            size_series(0.4229, SeriesControl(n_max=840, divergence_policy="error"))

    def test_divergence_threshold(self):
        assert series_divergent(1 / 3) and series_divergent(0.34)
        assert not series_divergent(0.333)


class TestDiameterProbUpper:
    def test_two_vertices(self):
        assert diameter_prob_upper(2, 1) == 0.5

    def test_max_diameter_exact_power(self):
        for n in (2, 3, 9, 33, 101):
            assert diameter_prob_upper(n, n - 1) == 0.5 ** (n - 1)

    def test_hand_value_n4_k1(self):
        assert diameter_prob_upper(4, 1) == pytest.approx(7 / 8, abs=1e-15)

    def test_domain(self):
        with pytest.raises(ParameterError):
            diameter_prob_upper(4, 0)
        with pytest.raises(ParameterError):
            diameter_prob_upper(4, 4)

    def test_large_n_finite(self):
        v = diameter_prob_upper(10000, 5000)
        assert math.isfinite(v) and v >= 0

    @given(st.integers(2, 40), st.data())
    @settings(max_examples=40, deadline=None)
    def test_nonnegative(self, n, data):
        k = data.draw(st.integers(1, n - 1))
        assert diameter_prob_upper(n, k) >= 0.0


class TestExpectedDiameterUpper:
    def test_single_vertex_zero(self):
        assert expected_diameter_upper(1) == 0.0

    def test_hand_values(self):
        assert expected_diameter_upper(2) == pytest.approx(0.5, abs=1e-15)
        assert expected_diameter_upper(3) == pytest.approx(1.25, abs=1e-15)

    def test_bounded_by_n_minus_1(self):
        for n in (2, 3, 5, 10, 40, 150):
            assert expected_diameter_upper(n) <= n - 1

    def test_batch_equals_literal(self):
        batch = _expected_diameter_upper_many(120)
        for n in (2, 3, 4, 7, 23, 64, 120):
            assert batch[n] == pytest.approx(expected_diameter_upper(n), rel=1e-11)


class TestGlobalDiameterSeries:
    def test_tiny_p_gives_zero(self):
        assert expected_global_diameter_upper(1e-14, SeriesControl(n_max=50)) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_matches_frozen_oracle(self):
        assert expected_global_diameter_upper(0.2, SeriesControl(n_max=300)) == pytest.approx(
            GLOBAL_DIAM_P02_N300, rel=1e-9
        )
        assert expected_global_diameter_upper(0.2, SeriesControl(n_max=2000)) == pytest.approx(
            GLOBAL_DIAM_P02_N2000, rel=1e-9
        )

    def test_matches_live_longdouble_oracle(self):
        mine = expected_global_diameter_upper(0.25, SeriesControl(n_max=250))
        ref = longdouble_global_diameter(0.25, 250)
        assert mine == pytest.approx(ref, rel=1e-9)

    def test_truncation_flag_above_threshold(self):
        dv = diameter_series(0.45, SeriesControl(n_max=400))
        assert dv.divergent and not dv.converged

    def test_error_policy(self):
        with pytest.raises(DivergentSeriesError):
            diameter_series(0.45, SeriesControl(n_max=400, divergence_policy="error"))


class TestGammaLower:
    def test_zero_diameter_is_inverse_range(self):
        # density 0 -> p = 0 -> every series term vanishes
        assert gamma_lower(ModelParams(0.0, 0.25, r0=2.0), SeriesControl(n_max=50)) == 0.5
        assert gamma_lower(ModelParams(0.0, 0.25, r0=1.0), SeriesControl(n_max=50)) == 1.0

    def test_composition(self):
        ctrl = SeriesControl(n_max=500)
        params = ModelParams(0.7, 0.25, 1.0)
        p = occupation_probability(params)
        ed = expected_global_diameter_upper(p, ctrl)
        assert gamma_lower(params, ctrl) == pytest.approx(1.0 / (ed + 1.0))

    def test_monotone_in_density(self):
        ctrl = SeriesControl(n_max=840)
        vals = [gamma_lower(ModelParams(l, 0.25), ctrl) for l in (1.4, 1.8, 2.2, 2.8)]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


class TestLinkDelay:
    def test_immediate_success_mass(self):
        assert link_delay_pmf(0, 0.25) == 0.25
        assert link_delay_pmf(0, 1.0) == 1.0 and link_delay_pmf(2, 1.0) == 0.0

    def test_mass_sums_to_one(self):
        total = math.fsum(link_delay_pmf(z, 0.25) for z in range(201))
        assert total >= 1 - 1e-20

    def test_degenerate_link_rejected(self):
        with pytest.raises(ParameterError):
            link_delay_pmf(0, 0.0)
        with pytest.raises(ParameterError):
            expected_link_delay(0.0)

    @pytest.mark.parametrize("g,expect", [(1.0, 0.0), (0.5, 1.0), (0.25, 3.0)])
    def test_expected_wait(self, g, expect):
        assert expected_link_delay(g) == expect

    def test_expected_wait_matches_monte_carlo(self):
        mc = geometric_wait_mean(0.25, 100_000, seed=7)
        assert abs(mc - 3.0) < 0.05


class TestGammaUpper:
    def test_default_calibration(self):
        assert gamma_upper(ModelParams(2.0, 0.25, kappa=1.7)) == pytest.approx(5.1)

    def test_always_on_links_zero(self):
        assert gamma_upper(ModelParams(2.0, 1.0)) == 0.0

    def test_below_baseline_bound(self):
        for lam in (1.5, 2.0, 2.8):
            params = ModelParams(lam, 0.25, lambda_l=1.44)
            assert gamma_upper(params) <= wang_gamma_upper(params)


class TestWangBaselines:
    def test_zero_density(self):
        assert wang_size_approx(0.0) == 0.0

    def test_reference_value(self):
        assert wang_size_approx(1.4) == pytest.approx(1.2841 * 1.4 / (2.4886 - 1.4), rel=1e-12)
        assert wang_size_approx(1.4) == pytest.approx(1.6515, abs=2e-4)

    def test_pole_rejected(self):
        with pytest.raises(ParameterError):
            wang_size_approx(2.4886)
        with pytest.raises(ParameterError):
            wang_size_approx(3.0)

    def test_gamma_coincides_at_critical_density(self):
        params = ModelParams(1.44, 0.25, lambda_l=1.44)
        assert wang_gamma_upper(params) == gamma_upper(params)

    def test_gamma_value(self):
        params = ModelParams(2.8, 0.25, lambda_l=1.44, kappa=1.7)
        assert wang_gamma_upper(params) == pytest.approx(7.1116, abs=5e-4)

    def test_gamma_increasing_in_density(self):
        vals = [wang_gamma_upper(ModelParams(l, 0.25, lambda_l=1.44)) for l in (1.5, 2.0, 2.5, 2.8)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_below_critical_rejected(self):
        with pytest.raises(ParameterError):
            wang_gamma_upper(ModelParams(1.0, 0.25, lambda_l=1.44))


class TestBoundsReport:
    def test_ordering_in_convergent_regime(self):
        params = ModelParams(1.5, 0.04, lambda_l=1.44)
        ctrl = SeriesControl(n_max=840)
        assert not series_divergent(occupation_probability(params))
        gl = gamma_lower(params, ctrl)
        gu = gamma_upper(params)
        wg = wang_gamma_upper(params)
        assert 0 <= gl <= gu <= wg

    def test_report_fields(self):
        rep = build_bounds_report(ModelParams(1.4, 0.25), SeriesControl(n_max=840))
        d = rep.to_dict()
        assert d["lambda"] == 1.4
        assert d["p"] == pytest.approx(0.4229225, abs=1e-6)
        assert d["converged_flag"] is False
        assert d["gamma_upper"] == pytest.approx(5.1)
        assert d["wang_gamma_upper"] is None  # 1.4 below the critical density
        assert len(d["p_bar"]) == 10
        assert rep.notes

    def test_report_error_policy(self):
        with pytest.raises(DivergentSeriesError):
            build_bounds_report(
                ModelParams(1.4, 0.25), SeriesControl(n_max=840, divergence_policy="error")
            )

    def test_report_convergent(self):
        rep = build_bounds_report(ModelParams(0.5, 0.25), SeriesControl(n_max=840))
        assert rep.converged
        assert rep.gamma_lower <= 1.0

    def test_pbar_column_decreasing(self):
        rep = build_bounds_report(ModelParams(1.4, 0.25), SeriesControl(n_max=840))
        pb = rep.p_bar
        assert all(a > b for a, b in zip(pb, pb[1:]))
        assert pb[0] == pytest.approx(rep.p)
