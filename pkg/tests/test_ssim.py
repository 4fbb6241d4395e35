import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ssimmark import (DEFAULT_CONSTANTS, ImagePlane, MEASURE_MODES,
                      NON_OVERLAPPED_4, SsimConstants, dct2, gaussian_window,
                      global_ssim, measure_all_modes, mode_from_label,
                      overlapped_square, perturbation_constant,
                      ssim_cross_matrix, ssim_dct, ssim_pair_shift,
                      ssim_spatial, window_positions)
from ssimmark.metric import _sliding_sums, validate_coeff_pair
from oracles import (perturbed_block_ssim, sliding_window_sums_naive,
                     ssim_reference)


def test_constants_scaling():
    c = SsimConstants()
    assert c.c1 == pytest.approx(2.55 ** 2)
    assert c.c2 == pytest.approx(7.65 ** 2)
    assert c.c1_dct(4) == pytest.approx(16 * c.c1)
    assert c.c2_dct(4) == pytest.approx(15 * c.c2)
    with pytest.raises(ValueError):
        SsimConstants(k1=0.0)
    with pytest.raises(ValueError):
        SsimConstants(dynamic_range=-1.0)


def test_ssim_spatial_identical_is_exactly_one(rng):
    x = rng.uniform(0, 255, size=(4, 4))
    assert ssim_spatial(x, x) == 1.0


def test_ssim_spatial_matches_reference(rng):
    for _ in range(50):
        x = rng.uniform(0, 255, size=(4, 4))
        y = rng.uniform(0, 255, size=(4, 4))
        assert ssim_spatial(x, y) == pytest.approx(ssim_reference(x, y),
                                                   abs=1e-12)


def test_ssim_spatial_weighted_matches_reference(rng):
    w = gaussian_window(5, 1.5)
    x = rng.uniform(0, 255, size=(5, 5))
    y = x + rng.normal(0, 12, size=(5, 5))
    assert ssim_spatial(x, y, weights=w) == pytest.approx(
        ssim_reference(x, y, weights=w), abs=1e-12)


def test_ssim_spatial_symmetry_and_bound(rng):
    for _ in range(20):
        x = rng.uniform(0, 255, size=(4, 4))
        y = rng.uniform(0, 255, size=(4, 4))
        v = ssim_spatial(x, y)
        assert v == pytest.approx(ssim_spatial(y, x), abs=1e-12)
        assert v <= 1.0


def test_ssim_spatial_input_validation(rng):
    x = rng.uniform(0, 255, size=(4, 4))
    with pytest.raises(ValueError):
        ssim_spatial(x, x[:3, :3])
    with pytest.raises(ValueError):
        ssim_spatial(x[0], x[0])
    with pytest.raises(ValueError):
        ssim_spatial(x, x, weights=np.full((4, 4), 0.1))
    with pytest.raises(ValueError):
        ssim_spatial(x, x, weights=-np.full((4, 4), 1 / 16))


def test_ssim_dct_equals_spatial(rng):
    for _ in range(200):
        x = rng.uniform(0, 255, size=(4, 4))
        y = rng.uniform(0, 255, size=(4, 4))
        assert ssim_dct(dct2(x), dct2(y)) == pytest.approx(
            ssim_spatial(x, y), abs=1e-11)


def test_ssim_dct_equals_spatial_8x8(rng):
    x = rng.uniform(0, 255, size=(8, 8))
    y = rng.uniform(0, 255, size=(8, 8))
    assert ssim_dct(dct2(x), dct2(y)) == pytest.approx(ssim_spatial(x, y),
                                                       abs=1e-11)


def test_gaussian_window_properties():
    w = gaussian_window()
    assert w.shape == (11, 11)
    assert w.sum() == pytest.approx(1.0)
    assert np.all(w > 0)
    np.testing.assert_allclose(w, w.T)
    np.testing.assert_allclose(w, w[::-1, ::-1])
    assert w[5, 5] == w.max()
    # ratio of adjacent center weights follows the bell curve
    assert w[5, 6] / w[5, 5] == pytest.approx(np.exp(-1.0 / (2 * 1.5 ** 2)))


def test_validate_coeff_pair():
    assert validate_coeff_pair(((0, 1), (1, 0))) == ((0, 1), (1, 0))
    with pytest.raises(ValueError):
        validate_coeff_pair(((0, 0), (1, 0)))
    with pytest.raises(ValueError):
        validate_coeff_pair(((0, 1), (0, 1)))
    with pytest.raises(ValueError):
        validate_coeff_pair(((0, 1), (4, 0)))
    with pytest.raises(ValueError):
        validate_coeff_pair("nonsense")


def test_perturbation_constant_from_first_principles(rng):
    coeffs = dct2(rng.uniform(0, 255, size=(4, 4)))
    ac_energy = (coeffs ** 2).sum() - coeffs[0, 0] ** 2
    expected = 2.0 * ac_energy + DEFAULT_CONSTANTS.c2_dct(4)
    assert perturbation_constant(coeffs) == pytest.approx(expected)
    assert perturbation_constant(np.zeros((4, 4))) > 0.0


def test_ssim_pair_shift_matches_truth(rng):
    pair = ((0, 1), (1, 0))
    for _ in range(25):
        coeffs = dct2(rng.uniform(0, 255, size=(4, 4)))
        eps = rng.uniform(-80, 80)
        sigma = rng.uniform(-80, 80)
        closed = ssim_pair_shift(coeffs, eps, sigma, pair)
        shifted = coeffs.copy()
        shifted[pair[0]] += eps
        shifted[pair[1]] += sigma
        assert closed == pytest.approx(ssim_dct(coeffs, shifted), abs=1e-12)
        assert closed == pytest.approx(
            perturbed_block_ssim(coeffs, eps, sigma, pair), abs=1e-9)


def test_sliding_sums_matches_naive(rng):
    arr = rng.normal(size=(13, 9))
    for n in (2, 4, 8):
        np.testing.assert_allclose(_sliding_sums(arr, n),
                                   sliding_window_sums_naive(arr, n),
                                   atol=1e-9)


def test_window_positions_counts_are_closed_form():
    h, w = 24, 32
    positions, n = window_positions(MEASURE_MODES["non"], h, w)
    assert n == 4 and len(positions) == (h // 4) * (w // 4)
    positions, n = window_positions(MEASURE_MODES["over4"], h, w)
    assert n == 4 and len(positions) == (h - 3) * (w - 3)
    positions, n = window_positions(MEASURE_MODES["gauss"], h, w)
    assert n == 11 and len(positions) == h * w
    assert positions[0] == (-5, -5)
    positions, n = window_positions(MEASURE_MODES["semi"], h, w)
    assert n == 8 and len(positions) == (h // 4 - 1) * (w // 4 - 1)
    assert positions[0] == (0, 0) and positions[-1] == (h - 8, w - 8)


def test_window_positions_errors():
    with pytest.raises(ValueError):
        window_positions(MEASURE_MODES["non"], 10, 12)
    with pytest.raises(ValueError):
        window_positions(overlapped_square(16), 8, 8)
    with pytest.raises(ValueError):
        window_positions(MEASURE_MODES["semi"], 4, 4)
    with pytest.raises(ValueError):
        window_positions(MEASURE_MODES["gauss"], 0, 4)


def test_mode_labels_round_trip():
    for label in ("non", "over4", "over8", "gauss", "semi"):
        assert mode_from_label(label).label == label
    with pytest.raises(ValueError):
        mode_from_label("diagonal")
    with pytest.raises(ValueError):
        mode_from_label("overX")
    with pytest.raises(ValueError):
        overlapped_square(3)


def test_global_ssim_identical_planes_are_exactly_one(random_plane):
    for mode in MEASURE_MODES.values():
        report = global_ssim(random_plane, random_plane, mode)
        assert report.mean_ssim == 1.0
        assert all(v == 1.0 for (_, v) in report.local_indices)


def test_global_ssim_local_values_and_mean(rng, random_plane):
    noisy = ImagePlane(random_plane.samples
                       + rng.normal(0, 6, size=(24, 24)))
    for label, mode in MEASURE_MODES.items():
        report = global_ssim(random_plane, noisy, mode)
        positions, _ = window_positions(mode, 24, 24)
        assert [p for (p, _) in report.local_indices] == positions
        values = [v for (_, v) in report.local_indices]
        assert report.mean_ssim == pytest.approx(np.mean(values))
        assert report.mean_ssim < 1.0


def test_global_ssim_windows_match_direct_block_evaluation(rng, random_plane):
    noisy = ImagePlane(random_plane.samples + rng.normal(0, 6, size=(24, 24)))
    x, y = random_plane.samples, noisy.samples
    report = global_ssim(random_plane, noisy, MEASURE_MODES["over4"])
    for (top, left), value in report.local_indices[:40]:
        direct = ssim_spatial(x[top:top + 4, left:left + 4],
                              y[top:top + 4, left:left + 4])
        assert value == pytest.approx(direct, abs=1e-9)
    report = global_ssim(random_plane, noisy, MEASURE_MODES["gauss"])
    w = gaussian_window()
    for (top, left), value in report.local_indices[:5]:
        xs = np.zeros((11, 11))
        ys = np.zeros((11, 11))
        r0, r1 = max(top, 0), min(top + 11, 24)
        c0, c1 = max(left, 0), min(left + 11, 24)
        xs[r0 - top:r1 - top, c0 - left:c1 - left] = x[r0:r1, c0:c1]
        ys[r0 - top:r1 - top, c0 - left:c1 - left] = y[r0:r1, c0:c1]
        assert value == pytest.approx(ssim_spatial(xs, ys, weights=w),
                                      abs=1e-9)


def test_global_ssim_shape_mismatch(random_plane):
    with pytest.raises(ValueError):
        global_ssim(random_plane, ImagePlane(np.zeros((12, 12))))


def test_measure_all_modes_and_cross_matrix(rng, random_plane):
    noisy = ImagePlane(random_plane.samples + rng.normal(0, 3, size=(24, 24)))
    means = measure_all_modes(random_plane, noisy)
    assert set(means) == {"non", "over4", "gauss", "semi"}
    matrix = ssim_cross_matrix(random_plane, {"a": noisy, "b": random_plane})
    assert matrix["b"]["gauss"] == 1.0
    assert matrix["a"]["non"] == pytest.approx(means["non"])


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 10 ** 6))
def test_ssim_dct_equals_spatial_property(seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(0, 255, size=(4, 4))
    y = np.clip(x + rng.normal(0, rng.uniform(0.1, 60), size=(4, 4)),
                0, 255)
    assert abs(ssim_dct(dct2(x), dct2(y)) - ssim_spatial(x, y)) < 1e-10
