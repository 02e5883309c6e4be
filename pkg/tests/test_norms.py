import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paraproduct_kit import (CoeffField, Exponents, GridFunction,
                             Weight, bmo_alpha_norm, carleson_norm,
                             grand_maximal_function, grand_maximal_norm,
                             lipschitz_norm, lipschitz_plus_norm, lp_norm,
                             sequence_hardy_norm, square_function, synthesize)
from paraproduct_kit.errors import RangeParameterError
from paraproduct_kit.norms import norm_report
from paraproduct_kit.randfields import (FieldSpec, Lcg64, lipschitz_sample,
                                        random_field)


class TestLpNorm:
    def test_indicator_l1(self):
        f = GridFunction((0.0,), 8, np.ones(256))
        assert lp_norm(f, 1.0) == pytest.approx(1.0, abs=1e-14)

    def test_weighted_closed_form(self):
        # indicator against the critical weight: int_0^1 (1+x)^-0.05 dx
        p = 0.95
        K = 12
        f = GridFunction((0.0,), K, np.ones(2 ** K))
        w = Weight(1, p)
        expected = ((2.0 ** p - 1.0) / p) ** (1.0 / p)
        got = lp_norm(f, p, w)
        assert got == pytest.approx(expected, abs=2e-4)
        assert 0.0 < got < 1.0

    @given(st.floats(-8.0, 8.0))
    @settings(max_examples=25, deadline=None)
    def test_homogeneity(self, c):
        f = GridFunction((0.0,), 5, np.sin(np.arange(32.0)))
        assert lp_norm(c * f, 0.7) == pytest.approx(
            abs(c) * lp_norm(f, 0.7), rel=1e-12, abs=1e-12)

    def test_nonpositive_p_rejected(self):
        f = GridFunction((0.0,), 2, np.ones(4))
        with pytest.raises(RangeParameterError):
            lp_norm(f, 0.0)


class TestSequenceNorm:
    def test_single_entry_closed_form(self):
        for j, k, p in [(0, 0, 0.95), (2, 3, 0.8), (4, -5, 0.6)]:
            c = CoeffField(1, j, j + 1, {(j, (k,), (1,)): 1.0}, {})
            expected = (2.0 ** -j) ** (1.0 / p - 0.5)
            assert sequence_hardy_norm(c, p) == pytest.approx(
                expected, rel=1e-10)

    def test_two_disjoint_entries_closed_form(self):
        a, b, p = 0.7, -1.2, 0.9
        j = 2
        c = CoeffField(1, j, j + 1, {(j, (0,), (1,)): a,
                                     (j, (3,), (1,)): b}, {})
        vol = 2.0 ** -j
        expected = ((abs(a) ** p + abs(b) ** p)
                    * vol ** (1.0 - p / 2.0)) ** (1.0 / p)
        assert sequence_hardy_norm(c, p) == pytest.approx(expected,
                                                          rel=1e-10)

    def test_against_brute_force(self):
        spec = FieldSpec(n=1, j_min=0, j_max=3, entries=25, box=((0.0, 2.0),))
        c = random_field(5, spec)
        p = 0.75
        sq = square_function(c, K=5)
        xs = sq.axis_coords(0)
        brute = np.zeros(xs.size)
        for (j, k, _lam), v in c.wavelet.items():
            lo = k[0] * 2.0 ** -j
            hi = (k[0] + 1) * 2.0 ** -j
            inside = (xs >= lo - 1e-12) & (xs < hi - 1e-12)
            brute[inside] += v * v * 2.0 ** j
        brute = np.sqrt(brute)
        assert np.max(np.abs(brute - sq.values)) < 1e-10
        norm_direct = float(np.sum(brute ** 0.75) * sq.h) ** (1 / 0.75)
        assert sequence_hardy_norm(c, p) == pytest.approx(norm_direct,
                                                          rel=1e-12)

    def test_weighted_single_entry_closed_form(self):
        # indicator-type entry on [2, 3): the weighted norm integrates the
        # critical weight over that cell
        p = 0.95
        s = 0.8
        c = CoeffField(1, 0, 1, {(0, (2,), (1,)): s}, {})
        w = Weight(1, p)
        gamma = w.gamma
        integral = ((4.0 ** (1 - gamma) - 3.0 ** (1 - gamma))
                    / (1 - gamma))
        expected = s * integral ** (1.0 / p)
        got = sequence_hardy_norm(c, p, weight=w, K=10)
        assert got == pytest.approx(expected, rel=1e-3)

    def test_p_homogeneous_degree_one(self):
        spec = FieldSpec(n=1, j_min=0, j_max=3, entries=15, box=((0.0, 2.0),))
        c = random_field(9, spec)
        assert sequence_hardy_norm(c.scaled(3.0), 0.8) == pytest.approx(
            3.0 * sequence_hardy_norm(c, 0.8), rel=1e-12)

    def test_empty_is_zero(self):
        c = CoeffField(1, 0, 2, {}, {}, box=((0.0, 1.0),))
        assert sequence_hardy_norm(c, 0.9) == 0.0


class TestCarleson:
    def test_single_entry(self):
        s, j, alpha = -0.8, 3, 0.4
        c = CoeffField(1, j, j + 1, {(j, (5,), (1,)): s}, {})
        vol = 2.0 ** -j
        expected = abs(s) * vol ** (-(alpha + 0.5))
        assert carleson_norm(c, alpha) == pytest.approx(expected, rel=1e-12)

    def test_two_siblings_brute_force(self):
        alpha = 0.3
        s = 0.9
        c = CoeffField(1, 2, 3, {(2, (2,), (1,)): s, (2, (3,), (1,)): s}, {})
        # brute force over the two candidate suprema: the entry cubes and
        # every ancestor containing both
        vol_child = 0.25
        child = (s * s / vol_child ** (2 * alpha + 1)) ** 0.5
        best = child
        total = 2 * s * s
        j = 1
        while j >= -4:
            vol = 2.0 ** -j
            best = max(best, (total / vol ** (2 * alpha + 1)) ** 0.5)
            j -= 1
        assert carleson_norm(c, alpha) == pytest.approx(best, rel=1e-12)

    def test_zero_field(self):
        assert carleson_norm(CoeffField(1, 0, 2, {}, {}), 0.5) == 0.0

    def test_entries_straddling_the_origin(self):
        # cubes left and right of 0 live in disjoint dyadic trees; the
        # aggregation must terminate and the sup here sits at an entry cube
        c = CoeffField(1, 2, 3, {(2, (-1,), (1,)): 0.5,
                                 (2, (0,), (1,)): 0.5,
                                 (2, (-3,), (1,)): 0.2}, {})
        val = carleson_norm(c, 0.3)
        vol = 0.25
        assert val == pytest.approx(0.5 * vol ** (-(0.3 + 0.5)), rel=1e-12)

    def test_db_analyzed_field_terminates(self, db2):
        from paraproduct_kit import analyze

        g = lipschitz_sample(Lcg64(2), (0.0, 2.0), 8, 0.4)
        cg = analyze(g, db2, 0, 5)  # spills to negative corner indices
        assert any(key[1][0] < 0 for key in cg.wavelet)
        val = carleson_norm(cg, 0.4)
        assert np.isfinite(val) and val > 0.0

    def test_negative_alpha_rejected(self):
        c = CoeffField(1, 0, 1, {(0, (0,), (1,)): 1.0}, {})
        with pytest.raises(RangeParameterError):
            carleson_norm(c, -0.1)

    def test_alpha_zero_is_bmo_style(self):
        spec = FieldSpec(n=1, j_min=0, j_max=4, entries=30, box=((0.0, 2.0),))
        c = random_field(13, spec)
        val = carleson_norm(c, 0.0)
        # alpha = 0: the aggregation weight is 1/|I|, so any single entry
        # gives a lower bound |s| / |I|^{1/2}
        low = max(abs(v) * 2.0 ** (key[0] / 2.0)
                  for key, v in c.wavelet.items())
        assert val >= low - 1e-12


class TestLipschitz:
    def test_linear_slope_one(self):
        K = 8
        x = np.arange(2 ** K) / 2.0 ** K
        f = GridFunction((0.0,), K, x)
        assert lipschitz_norm(f, 1.0) == pytest.approx(1.0, rel=1e-12)

    def test_constant(self):
        f = GridFunction((0.0,), 5, np.full(32, -2.5))
        assert lipschitz_norm(f, 0.5) == 0.0
        assert lipschitz_norm(f, 0.5, homogeneous=False) == 2.5

    def test_cusp_power(self):
        K, alpha = 10, 0.6
        x = np.arange(2 ** K) / 2.0 ** K
        f = GridFunction((0.0,), K, np.abs(x - 0.5) ** alpha)
        assert lipschitz_norm(f, alpha) == pytest.approx(1.0, rel=0.05)

    def test_2d_linear(self):
        K = 5
        x = np.arange(2 ** K) / 2.0 ** K
        f = GridFunction((0.0, 0.0), K, np.add.outer(x, 0.0 * x))
        assert lipschitz_norm(f, 1.0) == pytest.approx(1.0, rel=1e-10)

    def test_2d_matches_brute_force_on_small_grid(self):
        rng = np.random.default_rng(8)
        K = 3
        vals = rng.normal(size=(8, 8))
        f = GridFunction((0.0, 0.0), K, vals)
        alpha = 0.7
        # exhaustive scan over all pairs (half-diameter restriction applies)
        h = f.h
        best = 0.0
        pts = [(i, j) for i in range(8) for j in range(8)]
        for a in range(len(pts)):
            for b in range(a + 1, len(pts)):
                d0 = pts[b][0] - pts[a][0]
                d1 = pts[b][1] - pts[a][1]
                if abs(d0) > 4 or abs(d1) > 4:
                    continue
                dist = np.hypot(d0 * h, d1 * h)
                diff = abs(vals[pts[a]] - vals[pts[b]])
                best = max(best, diff / dist ** alpha)
        got = lipschitz_norm(f, alpha, near_cells=8)
        assert got == pytest.approx(best, rel=1e-12)

    def test_plus_norm_anchors_constants(self):
        f = GridFunction((0.0,), 5, np.full(32, 3.0))
        assert lipschitz_plus_norm(f, 0.5) == 3.0

    def test_alpha_range(self):
        f = GridFunction((0.0,), 4, np.ones(16))
        with pytest.raises(RangeParameterError):
            lipschitz_norm(f, 1.5)


class TestBmoAlpha:
    def test_constant_is_zero(self):
        f = GridFunction((0.0,), 6, np.full(64, 4.0))
        assert bmo_alpha_norm(f, 0.5) == 0.0

    def test_linear_quarter(self):
        # slope-1 data: every dyadic interval of length L gives
        # L^{-2} * integral |x - mid| = 1/4 at alpha = 1, q = 1
        K = 10
        x = (np.arange(2 ** K) + 0.5) / 2.0 ** K
        f = GridFunction((0.0,), K, x)
        assert bmo_alpha_norm(f, 1.0, q=1.0) == pytest.approx(0.25, rel=1e-3)

    def test_linear_quadratic_mean(self):
        # q = 2, slope-1 data: the per-cube value is (side / 12)**(1/2),
        # so the sup sits at the full box
        K = 10
        x = (np.arange(2 ** K) + 0.5) / 2.0 ** K
        f = GridFunction((0.0,), K, x)
        assert bmo_alpha_norm(f, 1.0, q=2.0) == pytest.approx(
            (1.0 / 12.0) ** 0.5, rel=1e-3)

    def test_equivalence_with_hoelder_family(self):
        alpha = 1.0 / 0.95 - 1.0
        ratios = []
        for seed in range(12):
            g = lipschitz_sample(Lcg64(seed), (0.0, 2.0), 9, alpha)
            lips = lipschitz_norm(g, alpha)
            if lips > 0:
                ratios.append(bmo_alpha_norm(g, alpha, q=1.0) / lips)
        assert max(ratios) / min(ratios) < 10.0

    def test_q_validation(self):
        f = GridFunction((0.0,), 4, np.ones(16))
        with pytest.raises(RangeParameterError):
            bmo_alpha_norm(f, 0.5, q=0.5)


class TestWeight:
    def test_range(self):
        w = Weight(1, 0.95)
        xs = np.linspace(-30, 30, 101)
        vals = w(xs)
        assert np.all(vals > 0.0) and np.all(vals <= 1.0)
        assert w(np.array([0.0]))[0] == 1.0

    def test_gamma_variant_smaller(self):
        p = 0.9
        w = Weight(1, p)
        wg = Weight(1, p, gamma=1.0)  # gamma > n(1-p) = 0.1
        xs = np.linspace(0.5, 20, 50)
        assert np.all(wg(xs) < w(xs))

    def test_2d_evaluation(self):
        w = Weight(2, 0.8)
        f = GridFunction((0.0, 0.0), 3, np.ones((8, 8)))
        vals = w.on_grid(f)
        assert vals.shape == (8, 8)
        assert vals[0, 0] == 1.0


class TestExponents:
    def test_alpha_relation(self):
        e = Exponents(0.95, 1)
        assert e.alpha == pytest.approx(1.0 / 0.95 - 1.0)
        assert 0.0 < e.alpha < 1.0
        assert e.moment_order == 0

    def test_out_of_range(self):
        with pytest.raises(RangeParameterError):
            Exponents(0.4, 1)
        with pytest.raises(RangeParameterError):
            Exponents(1.0, 1)


class TestGrandMaximal:
    def test_zero_field(self):
        f = GridFunction((-2.0,), 6, np.zeros(4 * 64))
        assert grand_maximal_norm(f, 1.0) == 0.0

    def test_monotone_in_dictionary(self, haar):
        spec = FieldSpec(n=1, j_min=0, j_max=3, entries=20, box=((0.0, 2.0),))
        c = random_field(3, spec)
        f = synthesize(c, haar, 6, lo=(-4.0,), shape=(10 * 64,))
        small = grand_maximal_norm(f, 1.0, dictionary_size=4)
        big = grand_maximal_norm(f, 1.0, dictionary_size=12)
        assert big >= small - 1e-15

    def test_coefficient_input(self, haar):
        spec = FieldSpec(n=1, j_min=0, j_max=3, entries=10, box=((0.0, 2.0),))
        c = random_field(4, spec)
        val = grand_maximal_norm(c, 1.0, system=haar,
                                 frame=((-2.0,), (6 * 8,)), K=3)
        assert val > 0.0
        from paraproduct_kit.errors import GeometryError

        with pytest.raises(GeometryError):
            grand_maximal_norm(c, 1.0)

    def test_atom_far_field_decay(self, haar):
        # indicator-type atom: the maximal estimate decays at least like
        # (1 + |x|)^-(n+1) in the far field
        c = CoeffField(1, 0, 1, {(0, (0,), (1,)): 1.0}, {})
        f = synthesize(c, haar, 5, lo=(-16.0,), shape=(48 * 32,))
        star = grand_maximal_function(f, dictionary_size=8)
        xs = star.axis_coords(0)
        sel = (xs > 2.0) & (xs < 14.0)
        vals = star.values[sel]
        assert np.all(vals > 0.0)
        slope = np.polyfit(np.log1p(xs[sel]), np.log(vals), 1)[0]
        assert slope <= -(1 + 1) + 0.3

    def test_weighted_bounded_by_unweighted_via_hoelder(self, haar):
        # discrete Hoelder constant on the experiment box dominates the
        # ratio of the weighted-p estimate to the plain integral estimate
        p = 0.95
        w = Weight(1, p)
        spec = FieldSpec(n=1, j_min=0, j_max=3, entries=25, box=((0.0, 2.0),))
        frame_lo, frame_shape = (-8.0,), (18 * 64,)
        grid = GridFunction(frame_lo, 6, np.zeros(frame_shape))
        wc = (float(np.sum(w.on_grid(grid) ** (1.0 / (1.0 - p)))
                    * grid.h)) ** ((1.0 - p) / p)
        for seed in range(5):
            c = random_field(seed, spec)
            f = synthesize(c, haar, 6, lo=frame_lo, shape=frame_shape)
            star = grand_maximal_function(f)
            h1 = lp_norm(star, 1.0)
            hpw = lp_norm(star, p, w)
            assert hpw <= wc * h1 * (1 + 1e-12)


def test_norm_report_shape():
    rep = norm_report("sequence", 1.25, {"p": 0.9}, {"rel": 1e-10})
    import json

    data = json.loads(rep)
    assert data["norm"] == "sequence"
    assert data["value"] == 1.25
    assert data["params"]["p"] == 0.9
