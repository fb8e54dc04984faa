"""Phase configurations, SNR evaluation, quantization, grouping, beams."""

import dataclasses
import math

import numpy as np
import pytest

from rislink import (
    CascadedChannel,
    PhaseConfig,
    Placement,
    beam_pattern,
    build_planar_ris,
    cascaded_channel,
    config_mirror_mimicking,
    config_optimal,
    evaluate,
    group_config,
    group_index_map,
    hpbw,
    noise_power,
    quantize_config,
    to_db,
)

TWO_PI = 2.0 * math.pi


def random_channel(rng, n, scale=1e-9):
    g = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * scale
    return CascadedChannel(
        coefficients=g, d1_m=np.full(n, 300.0), d2_m=np.full(n, 10.0)
    )


class TestPhaseConfig:
    def test_phase_range_enforced(self):
        with pytest.raises(ValueError):
            PhaseConfig(phases_rad=np.array([0.0, TWO_PI]))
        with pytest.raises(ValueError):
            PhaseConfig(phases_rad=np.array([-0.1]))

    def test_field_validation(self):
        with pytest.raises(ValueError):
            PhaseConfig(phases_rad=np.array([0.0]), quantization_bits=0)
        with pytest.raises(ValueError):
            PhaseConfig(phases_rad=np.array([0.0]), group_rows=-1)


class TestConfigOptimal:
    def test_single_element_alignment(self, budget):
        ch = CascadedChannel(
            coefficients=np.array([1e-9 * np.exp(1j * 2.1)]),
            d1_m=np.array([300.0]),
            d2_m=np.array([10.0]),
        )
        cfg = config_optimal(ch)
        aligned = ch.coefficients[0] * np.exp(1j * cfg.phases_rad[0])
        assert aligned.real == pytest.approx(1e-9, rel=1e-12)
        assert abs(aligned.imag) < 1e-24

    def test_real_positive_channel_needs_no_shift(self):
        ch = CascadedChannel(
            coefficients=np.array([1e-9, 2e-9, 3e-9], dtype=complex),
            d1_m=np.full(3, 300.0),
            d2_m=np.full(3, 10.0),
        )
        np.testing.assert_array_equal(config_optimal(ch).phases_rad, 0.0)

    def test_beats_random_search(self, budget):
        rng = np.random.default_rng(42)
        ch = random_channel(rng, 16)
        best = evaluate(ch, config_optimal(ch), budget).snr_linear
        draws = rng.uniform(0.0, TWO_PI, size=(10_000, 16))
        sums = np.abs(np.exp(1j * draws) @ ch.coefficients)
        sigma2 = noise_power(budget)
        assert best >= np.max(budget.tx_power_w * sums**2 / sigma2)

    def test_phases_in_range(self):
        rng = np.random.default_rng(3)
        cfg = config_optimal(random_channel(rng, 64))
        assert np.all(cfg.phases_rad >= 0.0)
        assert np.all(cfg.phases_rad < TWO_PI)


class TestEvaluate:
    def test_reference_snr(self, boresight, budget, carrier):
        # 2 m x 2 m at (300 m, 10 m): far-field closed form N^2 |g|^2 P / sigma^2
        arr = build_planar_ris(boresight, carrier, 2.0, 2.0, 0.2)
        ch = cascaded_channel(arr, boresight, budget, carrier)
        metrics = evaluate(ch, config_optimal(ch), budget)
        amp = math.sqrt(0.1) * 4e-4 / (4.0 * math.pi * 300.0 * 10.0)
        closed_form = 10.0 * (1e4 * amp) ** 2 / noise_power(budget)
        assert to_db(metrics.snr_linear) == pytest.approx(to_db(closed_form), abs=0.15)
        assert to_db(metrics.snr_linear) == pytest.approx(41.5, abs=0.2)
        assert metrics.se_bits_per_hz == pytest.approx(
            math.log2(1.0 + metrics.snr_linear), rel=1e-12
        )

    def test_matches_direct_sum(self, boresight, budget, carrier):
        arr = build_planar_ris(boresight, carrier, 0.3, 0.3, 0.2)
        ch = cascaded_channel(arr, boresight, budget, carrier)
        rng = np.random.default_rng(11)
        phases = rng.uniform(0.0, TWO_PI, arr.num_elements)
        metrics = evaluate(ch, PhaseConfig(phases_rad=phases), budget)
        direct = (
            budget.tx_power_w
            * np.abs(np.sum(ch.coefficients * np.exp(1j * phases))) ** 2
            / noise_power(budget)
        )
        assert metrics.snr_linear == pytest.approx(direct, rel=1e-12)

    def test_empty_channel(self, budget):
        ch = CascadedChannel(
            coefficients=np.array([], dtype=complex),
            d1_m=np.array([]),
            d2_m=np.array([]),
        )
        metrics = evaluate(ch, PhaseConfig(phases_rad=np.array([])), budget)
        assert metrics.snr_linear == 0.0
        assert metrics.se_bits_per_hz == 0.0
        assert metrics.end_to_end_gain_db == -math.inf

    def test_zero_phases_never_beat_optimal(self, budget):
        rng = np.random.default_rng(5)
        ch = random_channel(rng, 32)
        zero = evaluate(ch, PhaseConfig(phases_rad=np.zeros(32)), budget)
        best = evaluate(ch, config_optimal(ch), budget)
        assert zero.snr_linear <= best.snr_linear

    def test_length_mismatch(self, budget):
        rng = np.random.default_rng(5)
        ch = random_channel(rng, 8)
        with pytest.raises(ValueError):
            evaluate(ch, PhaseConfig(phases_rad=np.zeros(9)), budget)

    def test_global_phase_invariance(self, budget):
        rng = np.random.default_rng(17)
        ch = random_channel(rng, 48)
        base = rng.uniform(0.0, TWO_PI, 48)
        ref = evaluate(ch, PhaseConfig(phases_rad=base), budget).snr_linear
        for shift in (0.3, 1.7, 5.9):
            shifted = np.mod(base + shift, TWO_PI)
            snr = evaluate(ch, PhaseConfig(phases_rad=shifted), budget).snr_linear
            assert abs(snr - ref) / ref < 1e-12

    def test_monotone_in_elements(self, budget):
        rng = np.random.default_rng(23)
        ch = random_channel(rng, 16)
        extended = CascadedChannel(
            coefficients=np.append(ch.coefficients, 1e-10 * np.exp(1j * 0.4)),
            d1_m=np.append(ch.d1_m, 300.0),
            d2_m=np.append(ch.d2_m, 10.0),
        )
        small = evaluate(ch, config_optimal(ch), budget).snr_linear
        grown = evaluate(extended, config_optimal(extended), budget).snr_linear
        assert grown > small

    def test_far_field_square_law(self, boresight, budget, carrier):
        # doubling the element count quadruples SNR; quadrupling gives 16x
        def snr(side_x, side_y):
            arr = build_planar_ris(boresight, carrier, side_x, side_y, 0.2)
            ch = cascaded_channel(arr, boresight, budget, carrier)
            return evaluate(ch, config_optimal(ch), budget).snr_linear

        s1 = snr(0.24, 0.24)
        s2 = snr(0.24, 0.48)
        s4 = snr(0.48, 0.48)
        assert 3.9 < s2 / s1 < 4.1
        assert 15.2 < s4 / s1 < 16.8


class TestMirrorMimicking:
    def test_specular_geometry_is_uniform(self, carrier):
        # equal angles about the normal: tangential gradient components cancel
        p = Placement(
            tx_position=[150.0, 0.0, 259.8076211353316],
            rx_position=[-5.0, 0.0, 8.660254037844386],
            surface_center=[0.0, 0.0, 0.0],
            surface_normal=[0.0, 0.0, 1.0],
            surface_x_axis=[1.0, 0.0, 0.0],
        )
        arr = build_planar_ris(p, carrier, 0.5, 0.5, 0.2)
        cfg = config_mirror_mimicking(arr, p, carrier)
        spread = np.unwrap(np.sort(cfg.phases_rad))
        assert np.max(cfg.phases_rad) - np.min(cfg.phases_rad) < 1e-9 or np.ptp(
            np.mod(cfg.phases_rad - cfg.phases_rad[0] + math.pi, TWO_PI)
        ) < 1e-9

    def test_matches_linear_gradient_formula(self, budget, carrier):
        p = Placement(
            tx_position=[40.0, -25.0, 90.0],
            rx_position=[-2.0, 1.5, 7.0],
            surface_center=[0.0, 0.0, 0.0],
            surface_normal=[0.0, 0.0, 1.0],
            surface_x_axis=[1.0, 0.0, 0.0],
        )
        arr = build_planar_ris(p, carrier, 0.3, 0.3, 0.2)
        cfg = config_mirror_mimicking(arr, p, carrier)
        u_i = np.asarray(p.tx_position) / np.linalg.norm(p.tx_position)
        u_r = np.asarray(p.rx_position) / np.linalg.norm(p.rx_position)
        k = TWO_PI / carrier.wavelength_m
        expected = np.mod(-k * arr.element_centers @ (u_i + u_r), TWO_PI)
        mismatch = np.mod(cfg.phases_rad - expected + math.pi, TWO_PI) - math.pi
        assert np.max(np.abs(mismatch)) < 1e-9

    def test_far_field_limit_matches_optimal(self, budget, carrier):
        # both terminals at >= 1e4 surface diagonals: gradient == conjugate focus
        p = Placement(
            tx_position=[2000.0, 0.0, 3000.0],
            rx_position=[-800.0, 500.0, 2500.0],
            surface_center=[0.0, 0.0, 0.0],
            surface_normal=[0.0, 0.0, 1.0],
            surface_x_axis=[1.0, 0.0, 0.0],
        )
        arr = build_planar_ris(p, carrier, 0.2, 0.2, 0.2)
        ch = cascaded_channel(arr, p, budget, carrier)
        best = evaluate(ch, config_optimal(ch), budget).snr_linear
        mimic = evaluate(ch, config_mirror_mimicking(arr, p, carrier), budget).snr_linear
        assert 10.0 * math.log10(best / mimic) < 0.5

    def test_near_field_mismatch(self, budget, carrier):
        p = Placement(
            tx_position=[0.0, 0.0, 300.0],
            rx_position=[0.0, 0.0, 2.0],
            surface_center=[0.0, 0.0, 0.0],
            surface_normal=[0.0, 0.0, 1.0],
            surface_x_axis=[1.0, 0.0, 0.0],
        )
        arr = build_planar_ris(p, carrier, 2.0, 2.0, 0.2)
        ch = cascaded_channel(arr, p, budget, carrier)
        best = evaluate(ch, config_optimal(ch), budget).snr_linear
        mimic = evaluate(ch, config_mirror_mimicking(arr, p, carrier), budget).snr_linear
        assert 10.0 * math.log10(best / mimic) > 3.0


class TestQuantizeConfig:
    def test_on_grid_phases_unchanged(self):
        cfg = PhaseConfig(phases_rad=np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi]))
        np.testing.assert_array_equal(quantize_config(cfg, 2).phases_rad, cfg.phases_rad)

    def test_one_bit_boresight_loss_within_classical_bound(
        self, boresight, budget, carrier
    ):
        for side in (1.0, 2.0):
            arr = build_planar_ris(boresight, carrier, side, side, 0.2)
            ch = cascaded_channel(arr, boresight, budget, carrier)
            opt = config_optimal(ch)
            best = evaluate(ch, opt, budget).snr_linear
            coarse = evaluate(ch, quantize_config(opt, 1), budget).snr_linear
            assert 10.0 * math.log10(best / coarse) <= 3.92

    def test_one_bit_mean_loss_near_classical_value(self, budget):
        rng = np.random.default_rng(7)
        losses = []
        for _ in range(300):
            ch = random_channel(rng, 256)
            opt = config_optimal(ch)
            best = evaluate(ch, opt, budget).snr_linear
            coarse = evaluate(ch, quantize_config(opt, 1), budget).snr_linear
            losses.append(10.0 * math.log10(best / coarse))
        assert 3.6 < np.mean(losses) < 4.2

    def test_many_bits_recover_continuous(self, budget):
        rng = np.random.default_rng(9)
        ch = random_channel(rng, 128)
        opt = config_optimal(ch)
        best = evaluate(ch, opt, budget).snr_linear
        fine = evaluate(ch, quantize_config(opt, 20), budget).snr_linear
        assert abs(10.0 * math.log10(best / fine)) < 1e-6

    def test_tie_rounds_down(self):
        # pi/4 sits exactly between levels 0 and pi/2 for two bits
        cfg = PhaseConfig(phases_rad=np.array([0.25 * math.pi, 0.75 * math.pi]))
        snapped = quantize_config(cfg, 2)
        np.testing.assert_allclose(snapped.phases_rad, [0.0, 0.5 * math.pi], atol=1e-15)

    def test_levels_and_metadata(self):
        rng = np.random.default_rng(2)
        cfg = PhaseConfig(phases_rad=rng.uniform(0.0, TWO_PI, 100), group_rows=2, group_cols=5)
        snapped = quantize_config(cfg, 3)
        step = TWO_PI / 8
        np.testing.assert_allclose(
            np.mod(snapped.phases_rad / step, 1.0), 0.0, atol=1e-12
        )
        assert snapped.quantization_bits == 3
        assert snapped.group_rows == 2
        assert snapped.group_cols == 5


class TestGrouping:
    def test_group_index_layout(self, boresight, carrier):
        arr = build_planar_ris(boresight, carrier, 0.08, 0.08, 0.2)  # 4x4 grid
        idx = group_index_map(arr, 2, 2)
        expected = np.array(
            [0, 0, 1, 1, 0, 0, 1, 1, 2, 2, 3, 3, 2, 2, 3, 3]
        )
        np.testing.assert_array_equal(idx, expected)

    def test_non_divisible_dims_rejected(self, boresight, carrier):
        arr = build_planar_ris(boresight, carrier, 0.1, 0.1, 0.2)  # 5x5 grid
        with pytest.raises(ValueError):
            group_index_map(arr, 2, 1)

    def test_degenerate_grouping_equals_optimal(self, boresight, budget, carrier):
        arr = build_planar_ris(boresight, carrier, 0.1, 0.1, 0.2)
        ch = cascaded_channel(arr, boresight, budget, carrier)
        grouped = group_config(ch, arr, 1, 1)
        np.testing.assert_array_equal(grouped.phases_rad, config_optimal(ch).phases_rad)

    def test_whole_array_group_single_phase(self, boresight, budget, carrier):
        arr = build_planar_ris(boresight, carrier, 0.1, 0.1, 0.2)
        ch = cascaded_channel(arr, boresight, budget, carrier)
        cfg = group_config(ch, arr, arr.elements_per_col, arr.elements_per_row)
        assert np.unique(cfg.phases_rad).size == 1
        snr = evaluate(ch, cfg, budget).snr_linear
        expected = (
            budget.tx_power_w
            * np.abs(np.sum(ch.coefficients)) ** 2
            / noise_power(budget)
        )
        assert snr == pytest.approx(expected, rel=1e-12)

    def test_grouping_ordering_on_large_surface(self, budget, carrier):
        # near-field so per-element phases genuinely vary inside groups
        p = Placement(
            tx_position=[0.0, 0.0, 300.0],
            rx_position=[0.0, 0.0, 10.0],
            surface_center=[0.0, 0.0, 0.0],
            surface_normal=[0.0, 0.0, 1.0],
            surface_x_axis=[1.0, 0.0, 0.0],
        )
        arr = build_planar_ris(p, carrier, 2.0, 2.0, 0.2)  # 100x100
        ch = cascaded_channel(arr, p, budget, carrier)
        best = evaluate(ch, config_optimal(ch), budget).snr_linear
        paired = evaluate(ch, group_config(ch, arr, 2, 2), budget).snr_linear
        single = evaluate(
            ch, group_config(ch, arr, arr.elements_per_col, arr.elements_per_row), budget
        ).snr_linear
        assert single < paired < best

    def test_phases_constant_within_groups(self, boresight, budget, carrier):
        arr = build_planar_ris(boresight, carrier, 0.16, 0.16, 0.2)  # 8x8
        ch = cascaded_channel(arr, boresight, budget, carrier)
        cfg = group_config(ch, arr, 4, 2)
        idx = group_index_map(arr, 4, 2)
        for g in np.unique(idx):
            phases = cfg.phases_rad[idx == g]
            np.testing.assert_allclose(phases, phases[0], atol=1e-15)
        assert cfg.group_rows == 4
        assert cfg.group_cols == 2


class TestBeamPattern:
    def test_uniform_boresight_peaks_at_normal(self, boresight, carrier):
        arr = build_planar_ris(boresight, carrier, 1.0, 1.0, 0.2)
        az = np.linspace(-60.0, 60.0, 241)
        pattern = beam_pattern(
            arr,
            PhaseConfig(phases_rad=np.zeros(arr.num_elements)),
            boresight.surface_normal,
            az,
            carrier,
        )
        assert pattern.max() == pytest.approx(1.0)
        assert az[np.argmax(pattern)] == pytest.approx(0.0, abs=1e-9)

    def test_ten_wavelength_aperture_beamwidth(self, boresight, carrier):
        arr = build_planar_ris(boresight, carrier, 1.0, 1.0, 0.2)
        az = np.linspace(-20.0, 20.0, 2001)
        pattern = beam_pattern(
            arr,
            PhaseConfig(phases_rad=np.zeros(arr.num_elements)),
            boresight.surface_normal,
            az,
            carrier,
        )
        width = hpbw(pattern, az)
        assert 4.5 <= width <= 6.5
        # uniform-aperture theory: 0.886 lambda / L radians
        assert width == pytest.approx(math.degrees(0.886 / 10.0), rel=0.01)

    def test_doubling_aperture_halves_beamwidth(self, boresight, carrier):
        az = np.linspace(-15.0, 15.0, 3001)
        widths = {}
        for wavelengths in (10, 20):
            side = wavelengths * carrier.wavelength_m
            arr = build_planar_ris(boresight, carrier, side, side, 0.2)
            pattern = beam_pattern(
                arr,
                PhaseConfig(phases_rad=np.zeros(arr.num_elements)),
                boresight.surface_normal,
                az,
                carrier,
            )
            widths[wavelengths] = hpbw(pattern, az)
        assert widths[10] / widths[20] == pytest.approx(2.0, rel=0.05)

    def test_observation_angles_must_stay_in_front(self, boresight, carrier):
        arr = build_planar_ris(boresight, carrier, 0.5, 0.5, 0.2)
        cfg = PhaseConfig(phases_rad=np.zeros(arr.num_elements))
        with pytest.raises(ValueError):
            beam_pattern(arr, cfg, boresight.surface_normal, np.array([95.0]), carrier)


class TestHpbw:
    def test_synthetic_cosine_squared(self):
        theta0 = 4.0  # half-power half-width in degrees
        angles = np.linspace(-30.0, 30.0, 1201)
        pattern = np.cos(np.clip(angles * math.pi / (4.0 * theta0), -1.5, 1.5)) ** 2
        step = angles[1] - angles[0]
        assert hpbw(pattern, angles) == pytest.approx(2.0 * theta0, abs=step)

    def test_missing_crossing_raises(self):
        angles = np.linspace(-1.0, 1.0, 51)
        flat = np.ones_like(angles)
        flat[25] = 1.0000001
        with pytest.raises(ValueError):
            hpbw(flat, angles)

    def test_edge_peak_raises(self):
        angles = np.linspace(0.0, 10.0, 101)
        pattern = np.exp(-angles / 2.0)
        with pytest.raises(ValueError):
            hpbw(pattern, angles)
