import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annulus_hardy.boundary import (
    INNER,
    OUTER,
    BoundaryArc,
    BoundaryGrid,
    arc_weights,
    hardy_sobolev_norm,
    l1_norm_on_arc,
    log_l1_norm_on_arc,
    sup_norm_boundary,
)
from annulus_hardy.errors import ArcTooSmallError, PreconditionError
from annulus_hardy.laurent import LaurentFunction


class TestArc:
    def test_parse_full(self):
        arc = BoundaryArc.parse("inner")
        assert arc.circle == INNER and arc.is_full and arc.lam == 1.0

    def test_parse_partial(self):
        arc = BoundaryArc.parse("outer:0.5:1.0")
        assert arc.theta_start == 0.5 and arc.lam == pytest.approx(1 / (2 * math.pi))

    @pytest.mark.parametrize("text", ["middle", "outer:1", "outer:0:-1", "outer:0:7"])
    def test_parse_rejects(self, text):
        with pytest.raises(PreconditionError):
            BoundaryArc.parse(text)

    def test_str_round_trip(self):
        arc = BoundaryArc(OUTER, 0.25, 2.0)
        assert BoundaryArc.parse(str(arc)) == arc


class TestGrid:
    @pytest.mark.parametrize("M", [4, 12, 100])
    def test_power_of_two(self, M):
        with pytest.raises(PreconditionError):
            BoundaryGrid(M, np.zeros(M))

    def test_needs_a_circle(self):
        with pytest.raises(PreconditionError):
            BoundaryGrid(8)

    def test_rejects_nan(self):
        v = np.ones(8)
        v[3] = np.nan
        with pytest.raises(PreconditionError):
            BoundaryGrid(8, v)

    def test_csv_round_trip(self, rng):
        g = BoundaryGrid(16, rng.normal(size=16) + 1j * rng.normal(size=16), rng.normal(size=16))
        back = BoundaryGrid.from_csv(g.to_csv())
        np.testing.assert_array_equal(back.inner_values, g.inner_values)
        np.testing.assert_array_equal(back.outer_values, g.outer_values)

    def test_missing_circle(self):
        with pytest.raises(PreconditionError):
            BoundaryGrid(8, None, np.ones(8)).values(INNER)


class TestWeights:
    @settings(max_examples=100, deadline=None)
    @given(start=st.floats(-10, 10), length=st.floats(0.05, 2 * math.pi))
    def test_weights_sum_to_length(self, start, length):
        w = arc_weights(256, BoundaryArc(OUTER, start, length))
        assert w.min() >= 0
        assert w.sum() == pytest.approx(length, rel=1e-12)

    def test_full_circle_is_trapezoid(self):
        np.testing.assert_allclose(arc_weights(64, BoundaryArc.full()), 2 * math.pi / 64)

    def test_partial_arc_integrates_cosine(self):
        # exact for linear interpolant; the cosine integral converges at O(h^2)
        arc = BoundaryArc(OUTER, 0.3, 1.7)
        M = 4096
        w = arc_weights(M, arc)
        th = 2 * math.pi * np.arange(M) / M
        exact = math.sin(2.0) - math.sin(0.3)
        assert np.dot(w, np.cos(th)) == pytest.approx(exact, abs=1e-5)


class TestNorms:
    def test_l1_constant(self):
        g = BoundaryGrid(64, None, np.full(64, -3.0))
        assert l1_norm_on_arc(g, BoundaryArc(OUTER, 1.0, 2.0)) == pytest.approx(3.0, rel=1e-14)

    def test_log_l1_matches_and_survives_tiny_values(self):
        v = 1e-300 * (2 + np.cos(2 * math.pi * np.arange(64) / 64))
        g = BoundaryGrid(64, None, v)
        arc = BoundaryArc.full()
        assert log_l1_norm_on_arc(g, arc) == pytest.approx(math.log(2e-300), rel=1e-12)
        assert log_l1_norm_on_arc(g.map(lambda x: 0 * x), arc) == -math.inf

    def test_arc_too_small(self):
        g = BoundaryGrid(64, None, np.ones(64))
        with pytest.raises(ArcTooSmallError):
            l1_norm_on_arc(g, BoundaryArc(OUTER, 0.01, 0.15))

    def test_sup_over_both_circles(self):
        f = LaurentFunction.monomial(0.5, -1)
        assert sup_norm_boundary(f.trace(64)) == pytest.approx(2.0)

    def test_hardy_sobolev_norm_of_z(self):
        f = LaurentFunction.monomial(0.5, 1)
        assert hardy_sobolev_norm(f, 0) == pytest.approx(1.5)
        assert hardy_sobolev_norm(f, 1) == pytest.approx(2.0)
        assert hardy_sobolev_norm(f, 2) == pytest.approx(2.0)

    def test_certified_sup_is_upper(self, rng):
        from annulus_hardy.laurent import random_laurent
        f = random_laurent(rng, 0.5, 6)
        assert hardy_sobolev_norm(f, 1, 64, certified=True) >= hardy_sobolev_norm(f, 1, 8192)
