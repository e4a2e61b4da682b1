import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vilenkin.intervals import decompose
from vilenkin.operators import (
    FrequencySet,
    PlanEntry,
    SmoothMultiplierSpec,
    character,
    delta,
    delta_kl,
    expectation,
    family_masks,
    g_forward,
    g_star,
    inner,
    lp_norm,
    partial_sum_ratio,
    plan_from_intervals,
    plan_from_json,
    plan_to_json,
    pointwise_l2,
    project,
    q_block,
    r_modulate,
    smooth_multiplier,
    smooth_multiplier_tilde,
    smooth_symbol,
    square_components,
    square_function,
)
from vilenkin.radix import RadixSequence
from vilenkin.transform import forward_fast, vilenkin_char

from conftest import random_complex


class TestFrequencySet:
    def test_from_indices_merges_runs(self):
        A = FrequencySet.from_indices([5, 1, 2, 3, 7, 6])
        assert A.to_list() == [[1, 4], [5, 8]]
        assert len(A) == 6 and 4 not in A and 7 in A

    def test_overlap_rejected(self):
        with pytest.raises(ValueError):
            FrequencySet([(0, 4), (3, 5)])
        with pytest.raises(ValueError):
            family_masks([(0, 4), (2, 6)], 8)

    def test_mask_bounds(self):
        with pytest.raises(ValueError):
            FrequencySet([(2, 9)]).mask(8)


class TestProjection:
    def test_identity_and_zero(self, rng):
        R = (3, 4)
        f = random_complex(rng, 12)
        np.testing.assert_allclose(project(f, [(0, 12)], R), f, atol=1e-13)
        np.testing.assert_allclose(project(f, [], R), 0, atol=1e-15)

    def test_picks_one_character(self):
        R = (2, 3, 2)
        x = np.arange(12)
        w3, w5 = vilenkin_char(3, x, R), vilenkin_char(5, x, R)
        np.testing.assert_allclose(project(w3 + w5, FrequencySet.singleton(5), R), w5, atol=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(st.sets(st.integers(0, 23)), st.sets(st.integers(0, 23)), st.integers(0, 2**32 - 1))
    def test_composition_is_intersection(self, a, b, seed):
        R = (2, 3, 4)
        f = random_complex(np.random.default_rng(seed), 24)
        A, B = FrequencySet.from_indices(a), FrequencySet.from_indices(b)
        AB = FrequencySet.from_indices(a & b)
        np.testing.assert_allclose(project(project(f, B, R), A, R), project(f, AB, R), atol=1e-12)
        assert lp_norm(project(f, A, R), 2) <= lp_norm(f, 2) + 1e-12


class TestExpectation:
    @pytest.mark.parametrize("p", [(2, 3, 2), (4, 4, 4), (2,) * 6, (3, 7, 3)])
    def test_average_equals_projector_on_basis(self, p):
        R = RadixSequence(p)
        basis = np.eye(R.M)
        for k in range(R.levels + 1):
            np.testing.assert_allclose(expectation(basis, k, R, "average"),
                                       expectation(basis, k, R, "projector"), atol=1e-12)

    def test_characters(self):
        R = RadixSequence((3, 2, 2))
        x = np.arange(R.M)
        for n in range(R.M):
            w = vilenkin_char(n, x, R)
            expected = w if n < R.m[1] else 0 * w
            np.testing.assert_allclose(expectation(w, 1, R), expected, atol=1e-14)

    def test_level_range(self):
        with pytest.raises(IndexError):
            expectation(np.ones(4), 3, (2, 2))


class TestDelta:
    def test_blocks_sum_to_delta(self, rng):
        R = RadixSequence((3, 5, 2))
        f = random_complex(rng, R.M)
        for k in range(R.levels):
            total = sum(delta_kl(f, k, l, R) for l in range(1, R.p[k]))
            np.testing.assert_allclose(total, delta(f, k, R), atol=1e-12)

    def test_constant_has_no_differences(self):
        R = (2, 3)
        for k in range(2):
            np.testing.assert_allclose(delta(np.full(6, 2.5), k, R), 0, atol=1e-14)

    def test_index_zero_and_wrap(self, rng):
        R = (4, 3)
        f = random_complex(rng, 12)
        np.testing.assert_allclose(delta_kl(f, 1, 0, R), expectation(f, 1, R), atol=1e-13)
        np.testing.assert_allclose(delta_kl(f, 1, 5, R), delta_kl(f, 1, 2, R), atol=1e-13)

    def test_support_stays_in_atom(self, rng):
        R = RadixSequence((3, 2, 4))
        for k in range(R.levels):
            size = R.atom_size(k)
            for atom in range(R.m[k]):
                f = np.zeros(R.M, complex)
                f[atom * size:(atom + 1) * size] = random_complex(rng, size)
                outside = np.ones(R.M, bool)
                outside[atom * size:(atom + 1) * size] = False
                for j in range(1, R.p[k]):
                    np.testing.assert_allclose(delta_kl(f, k, j, R)[outside], 0, atol=1e-13)


class TestQBlock:
    def test_full_block_is_delta(self, rng):
        R = (3, 4, 2)
        f = random_complex(rng, 24)
        for j, p in enumerate(R):
            np.testing.assert_allclose(q_block(f, j, p - 1, R), delta(f, j, R), atol=1e-12)

    def test_low_spectrum_killed(self, rng):
        R = RadixSequence((3, 4, 2))
        spec = np.zeros(R.M, complex)
        spec[:R.m[1]] = random_complex(rng, R.m[1])
        from vilenkin.transform import inverse_fast
        h = inverse_fast(spec, R)
        np.testing.assert_allclose(q_block(h, 1, 2, R), 0, atol=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 59), st.integers(1, 60), st.integers(0, 2**32 - 1))
    def test_modulation_identity(self, a, b, seed):
        R = RadixSequence((3, 5, 4))
        if not a < b:
            a, b = min(a, b - 1), max(a + 1, b)
        f = random_complex(np.random.default_rng(seed), R.M)
        pieces = decompose(a, b, R)
        if b == R.M:
            assert not pieces.J
            return
        wb = character(b, R)
        for pc in pieces.J:
            beta = (b // R.m[pc.level]) % R.p[pc.level]
            lhs = project(f, pc.interval, R)
            rhs = wb * q_block(np.conj(wb) * f, pc.level, beta, R)
            np.testing.assert_allclose(lhs, rhs, atol=1e-12)

    def test_beta_range(self):
        with pytest.raises(ValueError):
            q_block(np.ones(6), 0, 2, (2, 3))


class TestGOperator:
    def test_adjointness(self, rng):
        R = RadixSequence((3, 4, 2, 3))
        plan = plan_from_intervals([(1, 17), (20, 41), (50, 71)], R)
        f = random_complex(rng, R.M)
        h = random_complex(rng, len(plan), R.M)
        np.testing.assert_allclose(inner(g_forward(f, plan, R), h), inner(f, g_star(h, plan, R)), atol=1e-12)

    def test_single_row_single_level(self, rng):
        R = RadixSequence((3, 4, 2))
        b = 2 * R.m[1]
        plan = [PlanEntry(b, (1,))]
        h = random_complex(rng, 1, R.M)
        expected = character(b, R) * q_block(h[0], 1, 2, R)
        np.testing.assert_allclose(g_star(h, plan, R), expected, atol=1e-13)

    def test_contraction_for_disjoint_pieces(self, rng):
        R = RadixSequence((2, 3, 2, 2))
        plan = plan_from_intervals([(0, 5), (5, 11), (13, 23)], R)
        for _ in range(10):
            h = random_complex(rng, len(plan), R.M)
            assert lp_norm(g_star(h, plan, R), 2) <= lp_norm(pointwise_l2(h), 2) + 1e-12

    def test_plan_validation_and_json(self):
        R = (2, 3, 2)
        with pytest.raises(ValueError):
            g_star(np.zeros((1, 12)), [PlanEntry(4, (0,))], R)
        plan = plan_from_intervals([(1, 7), (7, 11)], R)
        assert plan_from_json(plan_to_json(plan)) == plan

    def test_shape_check(self):
        with pytest.raises(ValueError):
            g_star(np.zeros((2, 12)), [PlanEntry(7, (2,))], (2, 3, 2))


class TestSquareFunction:
    def test_single_covering_set(self, rng):
        R = (5, 3)
        f = random_complex(rng, 15)
        np.testing.assert_allclose(square_function(f, [(0, 15)], R), np.abs(f), atol=1e-13)

    def test_p2_equality(self, rng):
        R = (2, 3, 5)
        family = [(0, 4), (4, 11), (11, 30)]
        f = random_complex(rng, 30)
        np.testing.assert_allclose(lp_norm(square_function(f, family, R), 2), lp_norm(f, 2), rtol=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.integers(0, 36), min_size=2, max_size=8, unique=True), st.integers(0, 2**32 - 1))
    def test_bessel(self, cuts, seed):
        cuts = sorted(cuts)
        family = [(a, b) for a, b in zip(cuts[::2], cuts[1::2])]
        f = random_complex(np.random.default_rng(seed), 36)
        assert lp_norm(square_function(f, family, (6, 6)), 2) <= lp_norm(f, 2) * (1 + 1e-12)

    def test_components_shape(self, rng):
        comps = square_components(random_complex(rng, 5, 12), [(0, 3), (3, 12)], (2, 3, 2))
        assert comps.shape == (5, 2, 12)


class TestSmoothMultiplier:
    R = RadixSequence((3, 16, 2))

    def test_plateau(self, rng):
        spec = SmoothMultiplierSpec(t=1, kappa=48, r=1, n_ref=3)
        sym = smooth_symbol(spec, self.R)
        n = np.arange(self.R.M)
        digit = (n // 3) % 16
        plateau = (n // 48 == 1) & (np.abs(digit / 2 - 3) <= 2)
        np.testing.assert_array_equal(sym[plateau], 1)
        f = random_complex(rng, self.R.M)
        I = FrequencySet.from_indices(n[plateau])
        np.testing.assert_allclose(project(smooth_multiplier(f, spec, self.R), I, self.R), project(f, I, self.R),
                                   atol=1e-12)

    def test_other_tail_vanishes(self, rng):
        spec = SmoothMultiplierSpec(t=1, kappa=48, r=1, n_ref=3)
        f = project(random_complex(rng, self.R.M), [(0, 48)], self.R)
        np.testing.assert_allclose(smooth_multiplier(f, spec, self.R), 0, atol=1e-13)

    def test_modulus_matches_demodulated(self, rng):
        spec = SmoothMultiplierSpec(t=1, kappa=48, r=1, n_ref=4)
        f = random_complex(rng, self.R.M)
        np.testing.assert_allclose(np.abs(smooth_multiplier(f, spec, self.R)),
                                   np.abs(smooth_multiplier_tilde(f, spec, self.R)), atol=1e-12)

    def test_invalid_specs(self):
        with pytest.raises(ValueError):
            SmoothMultiplierSpec(t=1, kappa=5, r=0, n_ref=1).validate(self.R)
        with pytest.raises(ValueError):
            SmoothMultiplierSpec(t=3, kappa=0, r=0, n_ref=1).validate(self.R)
        with pytest.raises(ValueError):
            SmoothMultiplierSpec(t=0, kappa=0, r=-1, n_ref=1).validate(self.R)


class TestRModulate:
    R = RadixSequence((2, 9, 3))

    def test_unimodular(self, rng):
        g = random_complex(rng, self.R.M)
        out = r_modulate(g, SmoothMultiplierSpec(1, 0, 2, 5), self.R)
        np.testing.assert_allclose(np.abs(out), np.abs(g), rtol=1e-15)

    def test_zero_reference_is_identity(self, rng):
        g = random_complex(rng, self.R.M)
        np.testing.assert_array_equal(r_modulate(g, SmoothMultiplierSpec(1, 0, 2, 0), self.R), g)

    def test_opposite_references_cancel(self, rng):
        g = random_complex(rng, self.R.M)
        once = r_modulate(g, SmoothMultiplierSpec(1, 0, 1, 4), self.R)
        np.testing.assert_allclose(r_modulate(once, SmoothMultiplierSpec(1, 0, 1, -4), self.R), g, atol=1e-14)


class TestVectorPartialSums:
    def test_ratio_within_budget(self, rng):
        R = (3, 4, 2, 2)
        worst = 0.0
        for _ in range(20):
            fs = random_complex(rng, 5, 48)
            cutoffs = rng.integers(0, 48, 5)
            for p in (1.5, 2, 4):
                worst = max(worst, partial_sum_ratio(fs, cutoffs, p, R))
        assert worst <= 10
        assert partial_sum_ratio(fs, [47] * 5, 3, R) == pytest.approx(1.0)
