import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.constants import c as C0

import oracles
from conftest import random_passive_loads, random_scene
from risopt.dipoles import PortNetwork, SceneConfig, build_scene_matrix, zero_los
from risopt.errors import DomainError, SingularNetworkError
from risopt.evaluation import (
    LoadSet,
    angle_sweep,
    compute_brcs,
    compute_pte,
    plate_brcs,
    sensitivity_sweep,
    solve_loaded_network,
    tolerance_monte_carlo,
    write_montecarlo_csv,
    write_sensitivity_csv,
    write_sweep_csv,
)
from risopt.varactor import SMV2201_040LF

F0 = 3.55e9


def toy_network(n_elements=2, seed=5):
    rng = np.random.default_rng(seed)
    scene = random_scene(rng, n_elements, n_elements)
    return scene, zero_los(build_scene_matrix(scene))


class TestSolveLoadedNetwork:
    def test_disconnected_receiver_current_is_zero(self):
        scene = SceneConfig(rows=0, cols=0)
        net = zero_los(build_scene_matrix(scene))
        loads = LoadSet(np.empty(0))
        i = solve_loaded_network(net, loads)
        assert i[1] == 0

    def test_transfer_reciprocity(self):
        scene, net = toy_network(4, seed=11)
        rng = np.random.default_rng(3)
        loads = LoadSet(random_passive_loads(rng, 4))
        zl = np.diag(loads.termination_diagonal())
        a = net.z + zl
        i_fwd = np.linalg.solve(a, np.eye(net.n_ports)[:, 0])
        i_rev = np.linalg.solve(a, np.eye(net.n_ports)[:, 1])
        assert i_fwd[1] == pytest.approx(i_rev[0], rel=1e-10)

    def test_planted_two_port_current_division(self):
        # hand-solved 2x2 system: i = (Z + diag(zs, zr))^-1 [v, 0]
        z = np.array([[40 + 5j, 3 - 2j], [3 - 2j, 55 - 7j]])
        net = PortNetwork(z=z)
        loads = LoadSet(np.empty(0), source_impedance=50 + 0j, receiver_impedance=75 + 0j)
        vs = 2.0
        i = solve_loaded_network(net, loads, source_voltage=vs)
        a11, a12, a22 = 90 + 5j, 3 - 2j, 130 - 7j
        det = a11 * a22 - a12 * a12
        assert i[0] == pytest.approx(vs * a22 / det, rel=1e-12)
        assert i[1] == pytest.approx(-vs * a12 / det, rel=1e-12)

    def test_residual_enforced(self):
        scene, net = toy_network(2, seed=2)
        loads = LoadSet(np.array([5 + 10j, 5 - 40j]))
        i = solve_loaded_network(net, loads)
        zl = np.diag(loads.termination_diagonal())
        rhs = np.zeros(net.n_ports, dtype=complex)
        rhs[0] = 1.0
        assert np.linalg.norm((net.z + zl) @ i - rhs) <= 1e-10

    def test_singular_network_raises(self):
        z = np.array([[1.0 + 0j, 1.0], [1.0, 1.0]])
        net = PortNetwork(z=z)
        loads = LoadSet(np.empty(0), source_impedance=0j, receiver_impedance=0j)
        with pytest.raises(SingularNetworkError):
            solve_loaded_network(net, loads)

    def test_load_count_mismatch(self):
        scene, net = toy_network(2)
        with pytest.raises(DomainError):
            solve_loaded_network(net, LoadSet(np.array([1 + 1j])))


class TestComputePte:
    def test_disconnected_scene_zero(self):
        scene = SceneConfig(rows=0, cols=0)
        net = zero_los(build_scene_matrix(scene))
        loads = LoadSet(np.empty(0))
        i = solve_loaded_network(net, loads)
        assert compute_pte(i, net, loads) == 0.0

    def test_passive_loads_bounded(self):
        rng = np.random.default_rng(77)
        scene, net = toy_network(4, seed=8)
        for _ in range(50):
            loads = LoadSet(random_passive_loads(rng, 4))
            i = solve_loaded_network(net, loads)
            pte = compute_pte(i, net, loads)
            assert 0.0 <= pte <= 1.0


class TestComputeBrcs:
    def test_zero_pte(self, default_scene):
        assert compute_brcs(0.0, default_scene) == 0.0

    def test_unit_identity(self, default_scene):
        lam = default_scene.wavelength
        pte = (
            default_scene.tx_gain
            * default_scene.rx_gain
            * lam**2
            / ((4 * math.pi) ** 3 * default_scene.tx_distance**2 * default_scene.rx_distance**2)
        )
        assert compute_brcs(pte, default_scene) == pytest.approx(1.0, rel=1e-12)

    def test_far_field_distance_invariance(self, default_result):
        # re-solve the same loaded surface at 2 m and 4 m; sigma should hold
        loads = default_result.load_set
        sigmas = []
        for d in (2.0, 4.0):
            scene = replace(default_result.scene, tx_distance=d, rx_distance=d)
            net = zero_los(build_scene_matrix(scene))
            i = solve_loaded_network(net, loads)
            pte = compute_pte(i, net, loads)
            sigmas.append(compute_brcs(pte, scene))
        drift_db = abs(10 * math.log10(sigmas[1] / sigmas[0]))
        assert drift_db < 0.5


class TestPlateBrcs:
    A, B = 0.308, 0.096

    def test_broadside_value(self):
        sigma = plate_brcs(self.A, self.B, 0.0, 0.0, F0)
        assert sigma == pytest.approx(1.54, abs=0.01)
        assert 10 * math.log10(sigma) == pytest.approx(1.88, abs=0.01)

    def test_specular_peak_closed_form(self):
        for beta in (-10.0, -30.0):
            sigma = plate_brcs(self.A, self.B, -beta, beta, F0)
            lam = C0 / F0
            expected = 4 * math.pi * (self.A * self.B * math.cos(math.radians(beta)) / lam) ** 2
            assert sigma == pytest.approx(expected, rel=1e-9)

    def test_nulls_at_integer_grating_argument(self):
        lam = C0 / F0
        # pick n where a*(sin a + sin b)/lam = 2 exactly, beta = 0
        sin_alpha = 2 * lam / self.A
        alpha = math.degrees(math.asin(sin_alpha))
        assert plate_brcs(self.A, self.B, alpha, 0.0, F0) == pytest.approx(0.0, abs=1e-12)

    def test_matches_aperture_integration_oracle(self):
        for beta in (0.0, -10.0, -30.0):
            for alpha in np.arange(-60, 61, 7.5):
                sigma = plate_brcs(self.A, self.B, float(alpha), beta, F0)
                ref = oracles.plate_brcs_aperture_integral(
                    self.A, self.B, float(alpha), beta, F0
                )
                assert sigma == pytest.approx(ref, rel=0.01, abs=1e-9)


class TestAngleSweep:
    def test_single_angle(self, default_scene, default_result):
        sweep = angle_sweep(default_scene, default_result.load_set, -10.0, [45.0])
        assert sweep.alpha_deg.shape == (1,)
        assert sweep.brcs_m2[0] > 0

    def test_rows_and_plate_column(self, default_scene, default_result):
        alphas = np.arange(0, 46, 1.0)
        sweep = angle_sweep(
            default_scene, default_result.load_set, -10.0, alphas, with_plate=True
        )
        assert sweep.alpha_deg.size == 46
        assert sweep.plate_brcs_db is not None
        assert np.all(np.isfinite(sweep.plate_brcs_db[1:]))

    def test_optimized_loads_help_at_design_angle(self, default_scene, default_result):
        # the 45-degree-optimized loads beat both uniform endpoint loadings there
        design = angle_sweep(default_scene, default_result.load_set, -10.0, [45.0])
        x_lo, x_hi = SMV2201_040LF.reactance_range(F0)
        for x in (x_lo, x_hi):
            uniform = LoadSet(
                np.full(14, complex(SMV2201_040LF.series_resistance, x)),
                default_scene.source_impedance,
                default_scene.receiver_impedance,
            )
            other = angle_sweep(default_scene, uniform, -10.0, [45.0])
            assert design.brcs_db[0] > other.brcs_db[0]

    def test_excess_over_plate_appears_away_from_specular(
        self, default_scene, default_result
    ):
        # the loaded surface beats the same-size plate at the far design angle
        # but not at the plate's own specular peak
        sweep = angle_sweep(
            default_scene, default_result.load_set, -10.0, [10.0, 45.0], with_plate=True
        )
        excess_specular = sweep.brcs_db[0] - sweep.plate_brcs_db[0]
        excess_design = sweep.brcs_db[1] - sweep.plate_brcs_db[1]
        assert excess_specular < 0
        assert excess_design > 0
        assert excess_design - excess_specular > 3.0


class TestSensitivitySweep:
    def test_single_point_matches_direct_evaluation(self, default_scene, default_result):
        loads = default_result.load_set
        cap = default_result.capacitances[2]
        rows = sensitivity_sweep(default_scene, loads, 3, [cap])
        net = zero_los(build_scene_matrix(default_scene))
        i = solve_loaded_network(net, loads)
        pte = compute_pte(i, net, loads)
        expected_db = 10 * math.log10(compute_brcs(pte, default_scene))
        assert rows.shape == (1, 2)
        assert rows[0, 1] == pytest.approx(expected_db, abs=1e-9)

    def test_index_validation(self, default_scene, default_result):
        with pytest.raises(DomainError):
            sensitivity_sweep(default_scene, default_result.load_set, 0, [1e-12])
        with pytest.raises(DomainError):
            sensitivity_sweep(default_scene, default_result.load_set, 15, [1e-12])

    def test_unclipped_instance_locally_optimal(self):
        # with no clipping anywhere, every element's curve peaks at its optimum
        from risopt.pipeline import optimize_scene

        rng = np.random.default_rng(404)
        for _ in range(10):
            scene = random_scene(rng, 2, 3)
            result = optimize_scene(scene)
            if result.n_clipped == 0 and result.solution.tightness_ratio < 1e-8:
                break
        else:
            pytest.skip("no unclipped instance found in the family")
        model = result.model
        grid = np.linspace(model.c_min, model.c_max, 100)
        step = grid[1] - grid[0]
        for element in range(1, scene.n_elements + 1):
            cap = result.capacitances[element - 1]
            rows = sensitivity_sweep(scene, result.load_set, element, grid)
            at_opt = np.interp(cap, rows[:, 0], rows[:, 1])
            near = np.abs(rows[:, 0] - cap) <= step
            assert rows[near, 1].max() <= at_opt + 0.01


class TestClippedLoadMonotonicity:
    def test_clipping_never_improves_pte(self, default_scene, default_result):
        # the default design point has out-of-range optima planted by physics
        assert default_result.n_clipped > 0
        net = zero_los(build_scene_matrix(default_scene))
        ideal = LoadSet(
            SMV2201_040LF.series_resistance + 1j * default_result.solution.reactances,
            default_scene.source_impedance,
            default_scene.receiver_impedance,
        )
        i = solve_loaded_network(net, ideal)
        pte_ideal = compute_pte(i, net, ideal)
        i = solve_loaded_network(net, default_result.load_set)
        pte_clipped = compute_pte(i, net, default_result.load_set)
        assert pte_clipped <= pte_ideal + 1e-15

    def test_planted_out_of_range_instances(self):
        from risopt.pipeline import optimize_scene

        rng = np.random.default_rng(606)
        seen = 0
        for _ in range(6):
            scene = random_scene(rng, 2, 4)
            result = optimize_scene(scene)
            if result.n_clipped == 0:
                continue
            seen += 1
            net = zero_los(build_scene_matrix(scene))
            ideal = LoadSet(
                SMV2201_040LF.series_resistance + 1j * result.solution.reactances,
                scene.source_impedance,
                scene.receiver_impedance,
            )
            i = solve_loaded_network(net, ideal)
            pte_ideal = compute_pte(i, net, ideal)
            i = solve_loaded_network(net, result.load_set)
            pte_clipped = compute_pte(i, net, result.load_set)
            assert pte_clipped <= pte_ideal + 1e-15
        assert seen > 0


class TestPipelineConsistency:
    def test_nlos_evaluation_ignores_los_entries(self, default_scene, default_result):
        # evaluating with the NLOS assumption gives the same answer whether or
        # not the input matrix still carries its direct-path entries
        live = build_scene_matrix(default_scene)
        cut = zero_los(live)
        loads = default_result.load_set
        i_cut = solve_loaded_network(cut, loads)
        i_manual = solve_loaded_network(zero_los(live), loads)
        np.testing.assert_array_equal(i_cut, i_manual)


class TestToleranceMonteCarlo:
    def test_deterministic_for_seed(self, default_scene, default_result):
        a = tolerance_monte_carlo(default_scene, default_result.load_set, 20, seed=42)
        b = tolerance_monte_carlo(default_scene, default_result.load_set, 20, seed=42)
        assert np.array_equal(a.brcs_db, b.brcs_db)

    def test_zero_tolerance_model_collapses(
        self, default_scene, default_result, monkeypatch
    ):
        import risopt.varactor

        monkeypatch.setattr(
            risopt.varactor, "tolerance_fraction", lambda model, c: 0.0
        )
        result = tolerance_monte_carlo(default_scene, default_result.load_set, 8, seed=1)
        assert np.unique(result.brcs_db).size == 1

    def test_spread_magnitude_regression(self, default_scene, default_result):
        result = tolerance_monte_carlo(default_scene, default_result.load_set, 200, seed=7)
        width = result.p95 - result.p5
        assert 0.05 < width < 6.0

    def test_trials_validated(self, default_scene, default_result):
        with pytest.raises(DomainError):
            tolerance_monte_carlo(default_scene, default_result.load_set, 0, seed=1)


class TestCsvWriters:
    def test_sweep_csv(self, tmp_path, default_scene, default_result):
        sweep = angle_sweep(
            default_scene, default_result.load_set, -10.0, [0.0, 45.0], with_plate=True
        )
        path = tmp_path / "sweep.csv"
        write_sweep_csv(sweep, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "alpha_deg,beta_deg,pte,brcs_m2,brcs_db,plate_brcs_db"
        assert len(lines) == 3

    def test_sensitivity_csv(self, tmp_path, default_scene, default_result):
        rows = sensitivity_sweep(
            default_scene, default_result.load_set, 1, [0.5e-12, 1.0e-12]
        )
        path = tmp_path / "sens.csv"
        write_sensitivity_csv(rows, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "capacitance_pf,brcs_db"
        assert float(lines[1].split(",")[0]) == pytest.approx(0.5)

    def test_montecarlo_csv(self, tmp_path, default_scene, default_result):
        mc = tolerance_monte_carlo(default_scene, default_result.load_set, 5, seed=3)
        path = tmp_path / "mc.csv"
        write_montecarlo_csv(mc, path)
        lines = path.read_text().splitlines()
        assert lines[0] == "trial,brcs_db"
        assert len(lines) == 6
