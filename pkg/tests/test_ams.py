import numpy as np
import pytest

from ctrlalloc import DimensionError, EffectiveBounds, contains, moment_set
from ctrlalloc.ams import write_csv
from conftest import GHGV2_B, GHGV2_NU

BOX = EffectiveBounds(np.zeros(4), np.full(4, 20.0))


def test_vertex_images_match_enumeration_oracle(frozen):
    ms = moment_set(GHGV2_B, BOX)
    assert ms.vertices.shape == (16, 3)
    np.testing.assert_allclose(ms.lower, frozen["ghgv2_ams"]["lower"])
    np.testing.assert_allclose(ms.upper, frozen["ghgv2_ams"]["upper"])
    assert ms.upper[1] == pytest.approx(5068.0)


def test_toy_set_is_interval(frozen):
    ms = moment_set([[0.5, -0.5]], EffectiveBounds(np.zeros(2), np.full(2, 1.5)), hull=False)
    assert [ms.lower[0], ms.upper[0]] == frozen["toy_ams"]
    with pytest.raises(DimensionError):
        moment_set([[0.5, -0.5]], EffectiveBounds(np.zeros(2), np.full(2, 1.5)))


def test_zero_width_box_is_a_point():
    lo = np.array([1.0, 2.0, 3.0, 4.0])
    ms = moment_set(GHGV2_B, EffectiveBounds(lo, lo))
    np.testing.assert_allclose(ms.vertices, np.tile(GHGV2_B @ lo, (16, 1)))
    assert len(ms.hull_facets) == 0


def test_hull_is_convex_and_outward():
    ms = moment_set(GHGV2_B, BOX)
    V = ms.vertices
    scale = np.abs(V).max()
    centre = V.mean(axis=0)
    for tri in ms.hull_facets:
        a, b, c = V[tri]
        n = np.cross(b - a, c - a)
        n /= np.linalg.norm(n)
        assert np.all((V - a) @ n <= 1e-9 * scale)
        assert (centre - a) @ n < 0


def test_membership_examples():
    assert contains(GHGV2_B, BOX, GHGV2_NU)
    assert not contains(GHGV2_B, BOX, 1.01 * (GHGV2_B @ [20, 20, 0, 0]))
    assert contains(GHGV2_B, BOX, GHGV2_B @ np.full(4, 10.0))
    with pytest.raises(ValueError):
        contains(GHGV2_B, BOX, GHGV2_NU, tol=0.0)


def test_membership_of_random_images_and_symmetry():
    rng = np.random.default_rng(2)
    for u in rng.uniform(0, 20, size=(2000, 4)):
        assert contains(GHGV2_B, BOX, GHGV2_B @ u)
    sym = EffectiveBounds(np.full(4, -5.0), np.full(4, 5.0))
    for nu in rng.normal(scale=1500, size=(300, 3)):
        assert contains(GHGV2_B, sym, nu) == contains(GHGV2_B, sym, -nu)


def test_csv_export(tmp_path):
    v, f = write_csv(moment_set(GHGV2_B, BOX), tmp_path)
    assert len(v.read_text().splitlines()) == 17
    assert f.read_text().splitlines()[0] == "facet,v1,v2,v3"
