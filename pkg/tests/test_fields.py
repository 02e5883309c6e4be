import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paraproduct_kit import CoeffField, DyadicCube, GridFunction, TensorIndex
from paraproduct_kit.errors import GeometryError


class TestDyadicCube:
    def test_geometry(self):
        cube = DyadicCube(2, (3, -1))
        assert cube.side == 0.25
        assert cube.volume == 0.0625
        assert np.array_equal(cube.corner, [0.75, -0.25])
        assert np.array_equal(cube.center, [0.875, -0.125])

    def test_parent(self):
        assert DyadicCube(3, (5,)).parent() == DyadicCube(2, (2,))
        assert DyadicCube(3, (-5,)).parent() == DyadicCube(2, (-3,))

    def test_contains(self):
        big = DyadicCube(1, (0,))
        assert big.contains(DyadicCube(3, (3,)))
        assert not big.contains(DyadicCube(3, (4,)))
        assert not DyadicCube(3, (3,)).contains(big)

    def test_dilated_bounds(self):
        lo, hi = DyadicCube(0, (0,)).dilated_bounds(3.0)
        assert lo[0] == -1.0 and hi[0] == 2.0

    @given(st.integers(-8, 8), st.integers(-100, 100))
    def test_parent_contains_child(self, j, k):
        cube = DyadicCube(j, (k,))
        assert cube.parent().contains(cube)


class TestTensorIndex:
    def test_valid(self):
        idx = TensorIndex(DyadicCube(0, (0, 0)), (1, 0))
        assert idx.lam == (1, 0)

    def test_all_zero_rejected(self):
        with pytest.raises(GeometryError):
            TensorIndex(DyadicCube(0, (0, 0)), (0, 0))

    def test_length_mismatch_rejected(self):
        with pytest.raises(GeometryError):
            TensorIndex(DyadicCube(0, (0,)), (1, 0))


class TestGridFunction:
    def test_layout(self):
        f = GridFunction((0.0, -1.0), 3, np.zeros((8, 16)))
        assert f.h == 0.125
        assert f.hi == (1.0, 1.0)
        assert f.start_index() == (0, -8)

    def test_non_dyadic_corner_rejected(self):
        with pytest.raises(GeometryError):
            GridFunction((0.3,), 2, np.zeros(4))

    def test_quadrature(self):
        f = GridFunction((0.0,), 2, np.ones(4))
        assert f.quadrature() == 1.0

    def test_restrict_and_embed(self):
        f = GridFunction((0.0,), 2, np.arange(8.0))
        r = f.restrict((0.5,), (1.5,))
        assert np.array_equal(r.values, [2.0, 3.0, 4.0, 5.0])
        e = r.embed((0.0,), (12,))
        assert e.values[2] == 2.0 and e.values[0] == 0.0 and e.values[6] == 0.0

    def test_restrict_out_of_range(self):
        f = GridFunction((0.0,), 2, np.arange(8.0))
        with pytest.raises(GeometryError):
            f.restrict((0.0,), (3.0,))

    def test_algebra_requires_same_layout(self):
        f = GridFunction((0.0,), 2, np.ones(4))
        g = GridFunction((0.25,), 2, np.ones(4))
        with pytest.raises(GeometryError):
            f + g

    def test_product_and_scale(self):
        f = GridFunction((0.0,), 1, np.array([1.0, 2.0]))
        g = GridFunction((0.0,), 1, np.array([3.0, 4.0]))
        assert np.array_equal((f * g).values, [3.0, 8.0])
        assert np.array_equal((2.0 * f).values, [2.0, 4.0])

    def test_csv_round_trip(self, tmp_path):
        f = GridFunction((0.0, 0.5), 2, np.arange(8.0).reshape(2, 4))
        path = tmp_path / "grid.csv"
        f.save_csv(path)
        g = GridFunction.load_csv(path)
        assert g.K == f.K and g.lo == f.lo
        assert np.array_equal(g.values, f.values)

    def test_npz_round_trip(self, tmp_path):
        f = GridFunction((0.0,), 3, np.linspace(0, 1, 8))
        path = tmp_path / "grid.npz"
        f.save_npz(path)
        g = GridFunction.load_npz(path)
        assert g.K == f.K and np.array_equal(g.values, f.values)


class TestCoeffField:
    def _sample(self):
        wav = {(0, (0,), (1,)): 1.5, (1, (1,), (1,)): -0.5}
        sca = {(0,): 2.0}
        return CoeffField(1, 0, 3, wav, sca, box=((0.0, 2.0),))

    def test_by_scale(self):
        c = self._sample()
        assert set(c.by_scale()) == {0, 1}
        assert c.by_scale()[0] == {((0,), (1,)): 1.5}

    def test_l2(self):
        c = self._sample()
        assert c.l2_norm() == pytest.approx(np.sqrt(1.5 ** 2 + 0.25 + 4.0))

    def test_scaled_plus(self):
        c = self._sample()
        s = c.scaled(2.0).plus(c.scaled(-2.0))
        assert all(v == 0.0 for v in s.wavelet.values())

    def test_restrict_scales(self):
        c = self._sample()
        r = c.restrict_scales(1, 3)
        assert not r.scaling
        assert set(r.wavelet) == {(1, (1,), (1,))}

    def test_scale_out_of_range_rejected(self):
        with pytest.raises(GeometryError):
            CoeffField(1, 0, 2, {(5, (0,), (1,)): 1.0}, {})

    def test_jsonl_round_trip(self, tmp_path):
        c = self._sample()
        path = tmp_path / "field.jsonl"
        c.save_jsonl(path)
        d = CoeffField.load_jsonl(path)
        assert d.wavelet == c.wavelet
        assert d.scaling == c.scaling
        assert d.box == c.box
        assert (d.n, d.j_min, d.j_max) == (c.n, c.j_min, c.j_max)

    def test_jsonl_format_fields(self, tmp_path):
        import json

        c = self._sample()
        path = tmp_path / "field.jsonl"
        c.save_jsonl(path)
        lines = [json.loads(line) for line in path.read_text().splitlines()]
        assert "meta" in lines[0]
        scaling_rows = [r for r in lines[1:] if r["lambda"] == "scaling"]
        wavelet_rows = [r for r in lines[1:] if r["lambda"] != "scaling"]
        assert {tuple(r["k"]) for r in scaling_rows} == {(0,)}
        assert all(set(r) == {"j", "k", "lambda", "value"}
                   for r in lines[1:])
        assert all(isinstance(r["lambda"], list) for r in wavelet_rows)
