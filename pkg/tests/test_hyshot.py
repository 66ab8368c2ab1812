import math

import numpy as np
import pytest

from asuq import DataError, DegeneracyError, hyshot_space
from asuq.hyshot import (
    DLR_RATIOS,
    FlowRatios,
    ShotRecord,
    TransitionSpec,
    area_mach_ratio,
    build_inflow,
    eddy_growth_ratio,
    equivalence_ratio,
    fit_T0_H0,
    load_shots,
    mach_from_area_ratio,
    nominal_dissipation_length,
    phi_regime,
    stagnation_to_static,
    transition_range,
    turbulence_inflow,
)


class TestShotData:
    def test_bundled_table_shape(self):
        shots = load_shots()
        assert len(shots) == 13
        assert sum(s.excluded for s in shots) == 4
        assert {s.id for s in shots if s.excluded} == {804, 816, 817, 828}

    def test_fuel_off_shots_have_no_plenum_pressure(self):
        shots = {s.id: s for s in load_shots()}
        for sid in (805, 807, 808, 814):
            assert shots[sid].PH2_bar is None
        assert shots[810].PH2_bar == 5.73

    def test_missing_file_raises(self):
        with pytest.raises(DataError):
            load_shots("/nonexistent/shots.csv")

    def test_bad_row_raises(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("id,P0_bar,T0_K,H0_MJkg,PH2_bar,phi,excluded\n"
                        "805,178.05,xxx,3.25,,,0\n")
        with pytest.raises(DataError, match="row 2"):
            load_shots(path)


class TestT0H0Regression:
    def test_nine_shot_fit_reproduces_reference(self):
        intercept, slope = fit_T0_H0(load_shots())
        assert intercept == pytest.approx(508.1386, abs=1.0)
        assert slope == pytest.approx(6.8718e-4, abs=1e-6)

    def test_two_collinear_points_exact(self):
        shots = [
            ShotRecord(id=1, P0_bar=100, T0_K=1000.0, H0_MJkg=1.0),
            ShotRecord(id=2, P0_bar=100, T0_K=1500.0, H0_MJkg=2.0),
        ]
        intercept, slope = fit_T0_H0(shots)
        assert intercept == pytest.approx(500.0, abs=1e-9)
        assert slope == pytest.approx(500.0 / 1e6, rel=1e-12)

    def test_including_excluded_shots_changes_fit(self):
        shots = load_shots()
        fit9 = fit_T0_H0(shots)
        fit13 = fit_T0_H0(shots, include_excluded=True)
        assert abs(fit13[0] - fit9[0]) > 1.0

    def test_order_invariance(self):
        shots = load_shots()
        a = fit_T0_H0(shots)
        b = fit_T0_H0(list(reversed(shots)))
        assert a[0] == pytest.approx(b[0], rel=1e-12)
        assert a[1] == pytest.approx(b[1], rel=1e-12)

    def test_enthalpy_rescaling_transforms_slope_reciprocally(self):
        shots = load_shots()
        scaled = [
            ShotRecord(id=s.id, P0_bar=s.P0_bar, T0_K=s.T0_K,
                       H0_MJkg=s.H0_MJkg * 1000.0, excluded=s.excluded)
            for s in shots
        ]
        a0, b0 = fit_T0_H0(shots)
        a1, b1 = fit_T0_H0(scaled)
        assert a1 == pytest.approx(a0, rel=1e-9)
        assert b1 == pytest.approx(b0 / 1000.0, rel=1e-9)

    def test_too_few_usable_shots(self):
        shots = [ShotRecord(id=1, P0_bar=1, T0_K=2000, H0_MJkg=3.0)]
        with pytest.raises(DegeneracyError):
            fit_T0_H0(shots)


class TestStagnationToStatic:
    def test_pressure_ratio(self):
        P, _, _, _ = stagnation_to_static(17.73e6, 2735.0, 3.24e6, 0.0)
        assert P == pytest.approx(2056.68, rel=1e-12)

    def test_zero_angle_velocity_components(self):
        _, _, Ux, Uy = stagnation_to_static(17.73e6, 2735.0, 3.24e6, 0.0)
        assert Uy == 0.0
        assert Ux == pytest.approx(1.332 * math.sqrt(3.24e6), rel=1e-12)

    def test_velocity_magnitude_at_nominal_enthalpy(self):
        _, _, Ux, Uy = stagnation_to_static(17.73e6, 2735.0, 3.2415e6, 3.6)
        assert math.hypot(Ux, Uy) == pytest.approx(2398.0, abs=1.0)

    def test_positive_angle_pitches_flow_down(self):
        _, _, _, Uy = stagnation_to_static(17.73e6, 2735.0, 3.24e6, 3.6)
        assert Uy < 0

    def test_temperature_ratio(self):
        _, T, _, _ = stagnation_to_static(17.73e6, 2735.73, 3.24e6, 0.0)
        assert T == pytest.approx(0.0978 * 2735.73, rel=1e-12)

    def test_nonpositive_inputs_rejected(self):
        with pytest.raises(DataError):
            stagnation_to_static(0.0, 2735.0, 3.24e6, 0.0)


class TestTurbulenceInflow:
    def test_kinetic_energy(self):
        k, _ = turbulence_inflow(100.0, 0.1, 1.0)
        assert k == pytest.approx(150.0, rel=1e-12)

    def test_specific_dissipation(self):
        k, omega = turbulence_inflow(100.0, 0.1, 1.0)
        assert omega == pytest.approx(math.sqrt(150.0) / 0.09 ** 0.25, rel=1e-12)
        assert omega == pytest.approx(22.36, abs=0.01)

    def test_zero_intensity_is_laminar_with_warning(self):
        with pytest.warns(UserWarning, match="laminar"):
            k, omega = turbulence_inflow(100.0, 0.0, 1.0)
        assert k == 0.0 and omega == 0.0

    def test_quadratic_scaling_in_velocity_and_intensity(self):
        k0, w0 = turbulence_inflow(50.0, 0.01, 0.245)
        k_u, _ = turbulence_inflow(100.0, 0.01, 0.245)
        k_i, _ = turbulence_inflow(50.0, 0.02, 0.245)
        assert k_u == pytest.approx(4.0 * k0, rel=1e-12)
        assert k_i == pytest.approx(4.0 * k0, rel=1e-12)

    def test_omega_scales_as_sqrt_k_and_inverse_length(self):
        k0, w0 = turbulence_inflow(50.0, 0.01, 0.245)
        _, w_2L = turbulence_inflow(50.0, 0.01, 0.490)
        _, w_2U = turbulence_inflow(100.0, 0.01, 0.245)
        assert w_2L == pytest.approx(w0 / 2.0, rel=1e-12)
        assert w_2U == pytest.approx(w0 * 2.0, rel=1e-12)  # sqrt(4 k0) = 2 sqrt(k0)


class TestAreaMach:
    def test_sonic_throat(self):
        assert area_mach_ratio(1.0) == pytest.approx(1.0, abs=1e-12)

    def test_nominal_tunnel_condition(self):
        assert area_mach_ratio(7.4, 1.4) == pytest.approx(133.0, abs=1.0)

    def test_known_value_at_mach_two(self):
        # classic gas-table value for gamma = 1.4
        assert area_mach_ratio(2.0, 1.4) == pytest.approx(1.6875, abs=1e-4)

    def test_monotone_branches(self):
        sup = [area_mach_ratio(m) for m in np.linspace(1.001, 10, 40)]
        sub = [area_mach_ratio(m) for m in np.linspace(0.05, 0.999, 40)]
        assert np.all(np.diff(sup) > 0)
        assert np.all(np.diff(sub) < 0)
        for m in (0.3, 0.9, 1.2, 5.0):
            if m != 1.0:
                assert area_mach_ratio(m) > 1.0 + 1e-12

    def test_inverse_round_trip(self):
        ratio = area_mach_ratio(2.0, 1.4)
        assert mach_from_area_ratio(ratio, 1.4) == pytest.approx(2.0, abs=1e-9)

    def test_inverse_of_nominal_ratio(self):
        assert mach_from_area_ratio(area_mach_ratio(7.4)) == pytest.approx(
            7.4, abs=1e-6)

    def test_domain_checks(self):
        with pytest.raises(DataError):
            area_mach_ratio(-1.0)
        with pytest.raises(DataError):
            area_mach_ratio(2.0, gamma=1.0)
        with pytest.raises(DataError):
            mach_from_area_ratio(0.5)


class TestEddyGrowth:
    def test_cube_of_ratio_matches_density_ratio(self):
        growth = eddy_growth_ratio(DLR_RATIOS)
        density_ratio = (1.0 / DLR_RATIOS.p_ratio) * DLR_RATIOS.t_ratio
        assert growth ** 3 == pytest.approx(density_ratio, rel=1e-12)

    def test_no_expansion_means_no_growth(self):
        assert eddy_growth_ratio(FlowRatios(1.0, 1.0, 1.0)) == 1.0

    def test_nominal_length_scale_near_table_value(self):
        L = nominal_dissipation_length()
        assert abs(L - 0.245) / 0.245 < 0.03

    def test_throat_size_chain(self):
        # 610 mm test section at area ratio ~133 gives a ~53 mm throat
        throat = 0.610 / math.sqrt(area_mach_ratio(7.4))
        assert throat == pytest.approx(0.053, abs=0.001)


class TestTransition:
    def test_ramp_table_row(self):
        lo, hi = transition_range(TransitionSpec(x_t0=0.145, varphi=0.2))
        assert lo == pytest.approx(0.087, rel=1e-12)
        assert hi == pytest.approx(0.203, rel=1e-12)

    def test_cowl_table_row(self):
        lo, hi = transition_range(TransitionSpec(x_t0=0.050, varphi=0.2))
        assert lo == pytest.approx(0.030, rel=1e-12)
        assert hi == pytest.approx(0.070, rel=1e-12)

    def test_zero_perturbation_collapses(self):
        lo, hi = transition_range(TransitionSpec(x_t0=0.1, varphi=0.0))
        assert lo == hi == 0.1

    def test_midpoint_is_nominal(self):
        spec = TransitionSpec(x_t0=0.145, varphi=0.2)
        lo, hi = transition_range(spec)
        assert (lo + hi) / 2 == pytest.approx(0.145, rel=1e-14)

    def test_spec_validation(self):
        with pytest.raises(DataError):
            TransitionSpec(x_t0=-0.1)
        with pytest.raises(DataError):
            TransitionSpec(x_t0=0.1, varphi=0.5)


class TestEquivalenceRatio:
    def test_stoichiometric_by_construction(self):
        assert equivalence_ratio(1.0, 8.0) == pytest.approx(1.0, rel=1e-12)

    def test_no_fuel(self):
        assert equivalence_ratio(0.0, 5.0) == 0.0

    def test_zero_oxidizer_rejected(self):
        with pytest.raises(DataError):
            equivalence_ratio(1.0, 0.0)

    def test_regime_classification(self):
        assert phi_regime(0.30) == "as-designed"
        assert phi_regime(0.39) == "regime-boundary"
        assert phi_regime(0.45) == "regime-boundary"


class TestBuildInflow:
    @pytest.fixture
    def space(self):
        return hyshot_space()

    def test_nominal_point(self, space):
        cond = build_inflow(np.zeros(7), space)
        assert cond.P == pytest.approx(2056.68, abs=0.1)
        intercept, slope = fit_T0_H0(load_shots())
        T0_nominal = intercept + slope * 3.24155e6
        assert cond.T == pytest.approx(0.0978 * T0_nominal, rel=1e-12)
        assert cond.U_mag == pytest.approx(1.332 * math.sqrt(3.24155e6), rel=1e-9)
        assert cond.x_t_ramp == pytest.approx(0.145, rel=1e-12)
        assert cond.x_t_cowl == pytest.approx(0.050, rel=1e-12)
        assert cond.alpha_deg == pytest.approx(3.6, rel=1e-12)

    def test_angle_of_attack_extreme(self, space):
        x = np.zeros(7)
        x[2] = 1.0
        cond = build_inflow(x, space)
        assert cond.alpha_deg == pytest.approx(4.6, rel=1e-12)

    def test_turbulence_intensity_scaling(self, space):
        x = np.zeros(7)
        nominal = build_inflow(x, space)
        x[3] = -1.0
        low = build_inflow(x, space)
        assert low.k / nominal.k == pytest.approx((0.001 / 0.01) ** 2, rel=1e-9)

    def test_wrong_space_names_rejected(self):
        from asuq import unit_space

        with pytest.raises(DataError, match="schema|names"):
            build_inflow(np.zeros(7), unit_space(7))

    def test_params_object_keys(self, space):
        cond = build_inflow(np.zeros(7), space)
        assert set(cond.to_params()) == {
            "P_Pa", "T_K", "Ux_ms", "Uy_ms", "k_m2s2", "omega_1s",
            "xt_ramp_m", "xt_cowl_m",
        }
        assert all(isinstance(v, float) for v in cond.to_params().values())
