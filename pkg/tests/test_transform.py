import numpy as np
import pytest

from paraproduct_kit import (CoeffField, DyadicCube, GridFunction,
                             TensorIndex, analyze, project_scales,
                             scaling_sample, synthesize, tensor_sample)
from paraproduct_kit.errors import (GeometryError, PrecisionError,
                                    RangeParameterError)
from paraproduct_kit.randfields import FieldSpec, random_field


def random_coeffs(seed, n=1, j_min=0, j_max=4, entries=60, box_len=2.0):
    spec = FieldSpec(n=n, j_min=j_min, j_max=j_max, entries=entries,
                     box=((0.0, box_len),) * n, scaling_entries=3)
    return random_field(seed, spec)


class TestSingleFunctions:
    @pytest.mark.parametrize("fixture", ["haar", "db2"])
    def test_single_wavelet_round_trip(self, fixture, request):
        system = request.getfixturevalue(fixture)
        idx = TensorIndex(DyadicCube(2, (3,)), (1,))
        g = tensor_sample(system, idx, 8)
        assert g.l2_norm() == pytest.approx(1.0, abs=1e-10)
        c = analyze(g, system, 0, 8)
        assert c.wavelet[(2, (3,), (1,))] == pytest.approx(1.0, abs=1e-10)
        others = [abs(v) for key, v in c.wavelet.items()
                  if key != (2, (3,), (1,))]
        assert max(others, default=0.0) < 1e-10
        assert max((abs(v) for v in c.scaling.values()), default=0.0) < 1e-10

    def test_haar_2d_normalization(self, haar):
        # scale-1 tensor generator on the unit square: values +-2, L2 norm 1
        idx = TensorIndex(DyadicCube(1, (0, 0)), (1, 0))
        g = tensor_sample(haar, idx, 4)
        assert g.l2_norm() == pytest.approx(1.0, abs=1e-12)
        assert np.max(np.abs(g.values)) == pytest.approx(2.0, abs=1e-12)
        # vanishes outside the quarter square [0, 1/2)^2
        big = g.embed((0.0, 0.0), (16, 16))
        sub = big.restrict((0.5, 0.0), (1.0, 0.5))
        assert np.max(np.abs(sub.values)) == 0.0
        inner = big.restrict((0.0, 0.0), (0.5, 0.5))
        assert np.min(np.abs(inner.values)) == pytest.approx(2.0, abs=1e-12)

    def test_scaling_sample_unit_integral(self, db3):
        g = scaling_sample(db3, DyadicCube(1, (0,)), 9)
        # integral of the scaling function at scale j is 2**(-jn/2)
        assert g.quadrature() == pytest.approx(2.0 ** -0.5, abs=1e-9)

    def test_scaling_sample_analyzes_to_single_entry(self, db2):
        g = scaling_sample(db2, DyadicCube(1, (2,)), 8)
        c = analyze(g, db2, 1, 5)
        assert c.scaling[(2,)] == pytest.approx(1.0, abs=1e-10)
        assert max((abs(v) for k, v in c.scaling.items() if k != (2,)),
                   default=0.0) < 1e-10
        assert max((abs(v) for v in c.wavelet.values()), default=0.0) < 1e-10

    def test_support_inside_dilated_cube(self, db2):
        cube = DyadicCube(2, (3,))
        g = tensor_sample(db2, TensorIndex(cube, (1,)), 10)
        nz = np.nonzero(np.abs(g.values) > 1e-12)[0]
        x0 = g.lo[0] + nz.min() * g.h
        x1 = g.lo[0] + (nz.max() + 1) * g.h
        lo, hi = cube.dilated_bounds(db2.support_radius)
        assert x0 >= lo[0] - g.h and x1 <= hi[0] + g.h

    def test_too_coarse_rejected(self, haar):
        with pytest.raises(PrecisionError):
            tensor_sample(haar, TensorIndex(DyadicCube(3, (0,)), (1,)), 3)


class TestRoundTrips:
    @pytest.mark.parametrize("fixture,tol", [("haar", 1e-12), ("db2", 1e-8),
                                             ("db4", 1e-8)])
    def test_coefficient_round_trip(self, fixture, tol, request):
        system = request.getfixturevalue(fixture)
        for seed in range(5):
            c = random_coeffs(seed)
            f = synthesize(c, system, 9)
            back = analyze(f, system, c.j_min, c.j_max)
            err = max(abs(back.wavelet.get(k, 0.0) - v)
                      for k, v in c.wavelet.items())
            err_s = max(abs(back.scaling.get(k, 0.0) - v)
                        for k, v in c.scaling.items())
            assert max(err, err_s) < tol

    @pytest.mark.parametrize("fixture,tol", [("haar", 1e-12), ("db2", 1e-8)])
    def test_parseval(self, fixture, tol, request):
        system = request.getfixturevalue(fixture)
        for seed in range(5):
            c = random_coeffs(seed + 100, n=1)
            f = synthesize(c, system, 9)
            grid_energy = float(np.sum(f.values ** 2) * f.h)
            rel = abs(grid_energy - c.l2_norm() ** 2) / c.l2_norm() ** 2
            assert rel < tol

    def test_parseval_2d(self, db2):
        c = random_coeffs(7, n=2, entries=40)
        f = synthesize(c, db2, 7)
        grid_energy = float(np.sum(f.values ** 2) * f.h ** 2)
        assert grid_energy == pytest.approx(c.l2_norm() ** 2, rel=1e-10)

    def test_band_limited_grid_round_trip(self, db2):
        c = random_coeffs(11)
        f = synthesize(c, db2, 8)
        back = synthesize(analyze(f, db2, c.j_min, c.j_max), db2, 8,
                          lo=f.lo, shape=f.shape)
        assert np.max(np.abs(back.values - f.values)) < 1e-10

    def test_empty_field_synthesizes_zero(self, haar):
        c = CoeffField(1, 0, 2, {}, {}, box=((0.0, 1.0),))
        f = synthesize(c, haar, 5)
        assert f.shape == (32,)
        assert np.all(f.values == 0.0)

    def test_empty_field_without_box_rejected(self, haar):
        with pytest.raises(GeometryError):
            synthesize(CoeffField(1, 0, 2, {}, {}), haar, 5)

    def test_jmax_above_grid_rejected(self, haar):
        f = GridFunction((0.0,), 3, np.ones(8))
        with pytest.raises(GeometryError):
            analyze(f, haar, 0, 4)

    def test_synthesis_below_finest_scale_rejected(self, haar):
        c = random_coeffs(23, j_max=4)
        with pytest.raises(PrecisionError):
            synthesize(c, haar, 3)

    def test_nested_range_consistency(self, db2):
        c = random_coeffs(13)
        f = synthesize(c, db2, 9)
        wide = analyze(f, db2, 0, 4)
        narrow = analyze(f, db2, 1, 4)
        for key, v in narrow.wavelet.items():
            assert wide.wavelet.get(key, 0.0) == pytest.approx(v, abs=1e-11)


class TestProjections:
    def test_detail_of_own_scale_is_identity(self, haar):
        c = CoeffField(1, 0, 3, {(1, (0,), (1,)): 2.0}, {})
        q = project_scales(c, haar, 1, "detail")
        assert q.wavelet == {(1, (0,), (1,)): 2.0}

    def test_smooth_of_wavelet_at_own_scale_is_zero(self, db2):
        c = CoeffField(1, 1, 3, {(1, (0,), (1,)): 2.0}, {})
        p = project_scales(c, db2, 1, "smooth")
        assert not p.scaling and not p.wavelet

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_telescoping(self, db2, j):
        c = random_coeffs(17, j_min=0, j_max=4)
        lo, shape = (-3.0,), (2 ** 8 * 8,)
        pj1 = synthesize(project_scales(c, db2, j + 1, "smooth"), db2, 8,
                         lo=lo, shape=shape)
        pj = synthesize(project_scales(c, db2, j, "smooth"), db2, 8,
                        lo=lo, shape=shape)
        qj = synthesize(project_scales(c, db2, j, "detail"), db2, 8,
                        lo=lo, shape=shape)
        assert np.max(np.abs(pj1.values - pj.values - qj.values)) < 1e-10

    def test_scale_out_of_range(self, haar):
        c = random_coeffs(19)
        with pytest.raises(RangeParameterError):
            project_scales(c, haar, 9, "detail")
        with pytest.raises(RangeParameterError):
            project_scales(c, haar, -1, "smooth")
