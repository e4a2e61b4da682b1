import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from vilenkin.cyclic import (
    Arc,
    KernelSpec,
    a2_constant_brute,
    a2_constant_zp,
    annulus,
    arc_projector,
    arcs_from_intervals,
    band_indices,
    check_lacunary,
    cot_partial_sum,
    cot_partial_sum_direct,
    dist_p,
    expsum_bound_check,
    expsum_window,
    expsum_worst,
    geometric_sum_moduli,
    hilbert_cot,
    hilbert_decay_ratio,
    kernel_matrix,
    kernel_operator_norm,
    lacunary_intervals,
    kernel_decay_check,
    kernel_decay_worst,
    poisson_kernel,
    poisson_l2_exact,
    poisson_l2_quadrature,
    poisson_series,
    power_weight,
    psi_r,
    psi_table,
    weighted_lp_experiment,
    weighted_lp_worst,
)
from vilenkin.intervals import build_phi
from vilenkin.operators import SmoothMultiplierSpec, character, r_modulate, smooth_multiplier_tilde
from vilenkin.radix import RadixSequence

from conftest import random_complex


class TestDistance:
    def test_examples(self):
        assert dist_p(0, 3, 5) == 2
        assert dist_p(1, 4, 6) == 3
        assert dist_p(7, 7, 9) == 0

    @given(st.integers(2, 60), st.integers(-200, 200), st.integers(-200, 200))
    def test_metric(self, p, a, b):
        assert dist_p(a, b, p) == dist_p(b, a, p) <= p // 2
        assert dist_p(a + p, b, p) == dist_p(a, b, p)

    def test_annulus(self):
        np.testing.assert_array_equal(annulus(0, 1, 1, 12), [4, 5, 9, 10])
        with pytest.raises(ValueError):
            annulus(3, 3, 0, 12)


class TestCotangent:
    def test_examples(self):
        assert cot_partial_sum(4, 1, 1) == pytest.approx(-1j, abs=1e-14)
        assert cot_partial_sum(4, 1, 2) == pytest.approx(-1, abs=1e-14)
        assert cot_partial_sum(7, 0, 3) == pytest.approx(0, abs=1e-14)

    @settings(max_examples=100)
    @given(st.integers(2, 50), st.data())
    def test_closed_form(self, p, data):
        alpha = data.draw(st.integers(0, p - 1))
        t = data.draw(st.integers(-3 * p, 3 * p).filter(lambda t: t % p))
        assert abs(cot_partial_sum(p, alpha, t) - cot_partial_sum_direct(p, alpha, t)) <= 1e-10

    def test_pole_rejected(self):
        with pytest.raises(ValueError):
            cot_partial_sum(6, 2, 12)

    def test_hilbert_cot_and_decay(self, rng):
        p = 64
        masses = random_complex(rng, 5)
        masses -= masses.mean()
        positions = np.arange(10, 15)
        direct = sum(m / math.tan(math.pi * (40 - j) / p) for m, j in zip(masses, positions))
        assert hilbert_cot(masses, positions, 40, p) == pytest.approx(direct)
        assert hilbert_decay_ratio(masses, 10, 40, p) < 1
        with pytest.raises(ValueError):
            hilbert_cot(masses, positions, 12, p)


class TestPsi:
    @pytest.mark.parametrize("r, p", [(0, 7), (2, 32), (3, 50)])
    def test_table_matches_direct_sum(self, r, p):
        np.testing.assert_allclose(psi_table(r, p), psi_r(np.arange(p), r, p), atol=1e-10)

    def test_periodic_and_peak(self):
        for r in range(4):
            p = 64
            t = np.arange(-p, p)
            np.testing.assert_allclose(psi_r(t + p, r, p), psi_r(t, r, p), atol=1e-9)
            assert psi_r(0, r, p).real >= 2 ** (r + 2) + 1 - 1e-12


class TestKernel:
    def test_matches_modulated_smooth_multiplier(self, rng):
        R = RadixSequence((3, 16, 2))
        coarse = random_complex(rng, R.m[2])
        f = character(48, R) * np.repeat(coarse, R.atom_size(2))
        spec = SmoothMultiplierSpec(1, 48, 1, 3)
        out = r_modulate(smooth_multiplier_tilde(f, spec, R), spec, R)
        K = kernel_matrix(KernelSpec(16, 1, 3))
        expected = np.repeat((coarse.reshape(R.m[1], 16) @ K.T).ravel(), R.atom_size(2))
        np.testing.assert_allclose(out, expected, atol=1e-12)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            KernelSpec(16, 5, 1)
        with pytest.raises(ValueError):
            KernelSpec(16, 1, 8)
        assert KernelSpec(16, 1, 4).band == "low"
        assert KernelSpec(16, 1, 5).band == "high"

    def test_operator_norm_bounded(self):
        assert kernel_operator_norm(KernelSpec(256, 3, 5)) <= 1 + 1e-9


class TestKernelDecay:
    def test_worst_bounds_random(self, rng):
        p = 256
        specs = [KernelSpec(p, 2, 3), KernelSpec(p, 3, 1), KernelSpec(p, 4, 2)]
        worst = kernel_decay_worst(10, 14, 2, specs)
        for _ in range(20):
            lam = dict(enumerate(random_complex(rng, 3)))
            lhs, unit = kernel_decay_check(10, 14, 2, lam, dict(enumerate(specs)))
            assert lhs <= worst * unit * (1 + 1e-9)

    def test_zero_coefficients(self):
        with pytest.raises(ValueError):
            kernel_decay_check(0, 1, 0, {0: 0}, {0: KernelSpec(16, 0, 1)})

    def test_mixed_moduli(self):
        with pytest.raises(ValueError):
            kernel_decay_worst(0, 1, 0, [KernelSpec(16, 0, 1), KernelSpec(32, 0, 1)])


class TestExponentialSums:
    def test_bands(self):
        np.testing.assert_array_equal(band_indices(32, 2, "low"), [1, 2, 3, 4])
        np.testing.assert_array_equal(band_indices(32, 2, "high"), [5, 6, 7])
        with pytest.raises(ValueError):
            band_indices(32, 2, "mid")

    @pytest.mark.parametrize("p, r", [(50, 2), (128, 3), (333, 4)])
    def test_single_coefficient(self, p, r):
        lhs, scale = expsum_bound_check(p, r, 5, 5 + expsum_window(p, r) - 1, {3: 2 - 1j})
        assert lhs == pytest.approx((p // 2**r) * 5)
        assert scale == pytest.approx(p / 2 ** (1 + r) * 5)

    def test_window_length_checked(self):
        with pytest.raises(ValueError):
            expsum_bound_check(50, 2, 0, 3, {1: 1})

    def test_worst_and_moduli(self, rng):
        p, r = 1024, 3
        js = band_indices(p, r, "low")[::5]
        worst = expsum_worst(p, r, 17, js)
        lam = dict(zip(js.tolist(), random_complex(rng, len(js))))
        lhs, scale = expsum_bound_check(p, r, 17, 17 + expsum_window(p, r) - 1, lam)
        assert lhs / scale <= worst * (1 + 1e-9) <= 16
        assert geometric_sum_moduli(p, r, 17, js).max() <= 1


class TestArcs:
    def test_projector_parseval(self, rng):
        p = 30
        h = random_complex(rng, p)
        parts = [Arc(0, 7), Arc(7, 20), Arc(27, 3)]
        pieces = [arc_projector(h, a) for a in parts]
        np.testing.assert_allclose(sum(pieces), h, atol=1e-13)
        np.testing.assert_allclose(sum(np.sum(np.abs(x) ** 2) for x in pieces), np.sum(np.abs(h) ** 2))

    def test_wrapping_arc(self):
        np.testing.assert_array_equal(Arc(8, 4).indices(10), [8, 9, 0, 1])
        with pytest.raises(ValueError):
            Arc(0, 11).indices(10)

    @pytest.mark.parametrize("p", [5, 12, 31])
    def test_a2_prefix_sums(self, p, rng):
        v = np.exp(rng.standard_normal(p))
        assert a2_constant_zp(v) == pytest.approx(a2_constant_brute(v), rel=1e-12)
        assert a2_constant_zp(np.ones(p)) == pytest.approx(1.0)

    def test_a2_rejects_zero(self):
        with pytest.raises(ValueError):
            a2_constant_zp([1.0, 0.0])

    def test_power_weight(self):
        np.testing.assert_allclose(power_weight(6, 1.0), [1, 2, 3, 4, 3, 2])


class TestLacunary:
    def test_dyadic_family(self):
        ivs = lacunary_intervals(2.0, 0.1)
        assert ivs[:2] == [(0.5, 1.0), (0.25, 0.5)]
        check_lacunary(ivs)
        with pytest.raises(ValueError):
            lacunary_intervals(1.0)

    def test_rejects_slow_growth(self):
        with pytest.raises(ValueError):
            check_lacunary([(0.5, 0.9), (0.3, 0.5)], 2.0)
        with pytest.raises(ValueError):
            check_lacunary([(0.4, 0.9), (0.3, 0.5)])

    def test_arcs(self):
        arcs = arcs_from_intervals(16, [(0.5, 1.0), (0.25, 0.5), (0.01, 0.02)])
        assert arcs == [Arc(8, 8), Arc(4, 4)]


class TestWeightedLacunary:
    @pytest.mark.parametrize("p", [16, 64, 200])
    def test_unweighted_bessel(self, p, rng):
        h = random_complex(rng, p)
        _, _, ratio = weighted_lp_experiment(p, 2.0, np.ones(p), h)
        assert ratio <= 1 + 1e-12
        assert weighted_lp_worst(p, 2.0, np.ones(p)) <= 1 + 1e-9

    def test_worst_dominates_random(self, rng):
        p = 64
        v = np.roll(power_weight(p, 0.6), 5)
        worst = weighted_lp_worst(p, 2.0, v)
        for _ in range(10):
            assert weighted_lp_experiment(p, 2.0, v, random_complex(rng, p))[2] <= worst * (1 + 1e-9)
        assert worst / a2_constant_zp(v) ** 2 <= 32

    def test_shape_check(self):
        with pytest.raises(ValueError):
            weighted_lp_experiment(8, 2.0, np.ones(7), np.ones(8))


class TestPoisson:
    def test_closed_form_matches_series(self):
        theta = np.linspace(0, 1, 17)
        np.testing.assert_allclose(poisson_kernel(theta, 0.5), poisson_series(theta, 0.5), rtol=1e-12)

    @pytest.mark.parametrize("delta", [0.05, 0.1, 0.5, 1, 3])
    def test_l2_identity(self, delta):
        exact = poisson_l2_exact(delta)
        assert abs(poisson_l2_quadrature(delta) - exact) <= 1e-8 * exact
        adaptive, _ = integrate.quad(lambda t: poisson_kernel(t, delta) ** 2, 0, 1, limit=400, epsabs=0,
                                     epsrel=1e-11)
        assert adaptive == pytest.approx(exact, rel=1e-9)

    def test_large_delta_tends_to_one(self):
        theta = np.linspace(0, 1, 1001)
        np.testing.assert_allclose(poisson_kernel(theta, 40.0), 1.0, atol=1e-15)

    def test_positive(self):
        assert poisson_kernel(np.linspace(0, 1, 100_001), 0.05).min() > 0

    def test_delta_positive(self):
        with pytest.raises(ValueError):
            poisson_kernel(0.0, 0.0)

    def test_wide_collar_symbol(self):
        wide = build_phi(collar=1.0)
        assert psi_table(2, 64, wide)[0].real > psi_table(2, 64)[0].real
