import math

import numpy as np
import pytest

from segcoreset import (
    CenterSet,
    CoresetParams,
    LipSpec,
    SamplingStallError,
    Segment,
    ball_body,
    box_body,
    coreset_cost,
    coreset_of_convex,
    coreset_of_segments,
    ellipsoid_body,
    gen_synthetic,
    polytope_body,
    sample_body,
    set_loss,
)
from segcoreset.pipeline import ConvexBody


class TestSegmentPipeline:
    def test_grid_divisor_formula(self):
        L = [Segment.from_endpoints([0.0, 0.0], [1.0, 0.0])]
        params = CoresetParams(k=2, epsilon=0.2, delta=0.1)
        rep = coreset_of_segments(L, params, LipSpec.identity(), seed=0)
        assert rep.eps_prime == math.ceil(8 * 2 * 40**2 / 0.2)
        assert rep.eps_prime == 128000

    def test_degenerate_segment(self):
        L = [Segment(u=np.zeros(2), v=np.zeros(2))]
        params = CoresetParams(
            k=1, epsilon=0.1, delta=0.1, vc_dim_dstar=10, sample_factor=0.01
        )
        rep = coreset_of_segments(L, params, LipSpec.identity(), seed=0)
        assert np.allclose(rep.coreset.points, 0.0)
        q = CenterSet([[3.0, 4.0]])
        cost = coreset_cost(rep.coreset, q, LipSpec.identity())
        assert cost == pytest.approx(5.0 * rep.coreset.total_weight)

    def test_final_size_never_exceeds_intermediate(self):
        L = gen_synthetic(10, 2, 1)
        params = CoresetParams(
            k=2, epsilon=0.25, delta=0.1, vc_dim_dstar=10, sample_factor=0.02
        )
        rep = coreset_of_segments(L, params, LipSpec.identity(), seed=3)
        assert rep.final_size <= rep.intermediate_size
        assert rep.final_size == len(rep.coreset)

    def test_cost_guarantee_over_seeds(self):
        # 20 random planar segments, random queries: the coreset cost stays
        # within a 1 +- eps factor of the true loss for most seeds
        rng = np.random.default_rng(0)
        L = gen_synthetic(20, 2, 5)
        params = CoresetParams(
            k=2, epsilon=0.25, delta=0.1, vc_dim_dstar=10, sample_factor=0.05
        )
        lip = LipSpec.identity()
        queries = [
            CenterSet(rng.uniform(-1, 1, (2, 2)), rng.uniform(0.5, 2, 2))
            for _ in range(20)
        ]
        exact = [set_loss(q, lip, L) for q in queries]
        good = 0
        for seed in range(20):
            rep = coreset_of_segments(L, params, lip, seed=seed)
            ok = all(
                abs(coreset_cost(rep.coreset, q, lip) - e) <= params.epsilon * e
                for q, e in zip(queries, exact)
            )
            good += ok
        assert good >= 18

    def test_deterministic(self):
        L = gen_synthetic(5, 2, 2)
        params = CoresetParams(
            k=2, epsilon=0.25, delta=0.1, vc_dim_dstar=10, sample_factor=0.02
        )
        a = coreset_of_segments(L, params, LipSpec.identity(), seed=9)
        b = coreset_of_segments(L, params, LipSpec.identity(), seed=9)
        assert np.array_equal(a.coreset.points, b.coreset.points)
        assert np.array_equal(a.coreset.weights, b.coreset.weights)


class TestBodies:
    def test_box_membership(self):
        body = box_body([0.0, 0.0], [1.0, 2.0])
        assert body.membership(np.array([[0.5, 1.5]]))[0]
        assert not body.membership(np.array([[1.5, 0.0]]))[0]
        assert body.bbox_volume == pytest.approx(8.0)

    def test_ball_membership(self):
        body = ball_body([1.0, 1.0], 2.0)
        assert body.membership(np.array([[2.0, 1.0]]))[0]
        assert not body.membership(np.array([[4.0, 1.0]]))[0]

    def test_ellipsoid_membership(self):
        body = ellipsoid_body([0.0, 0.0], [2.0, 1.0])
        assert body.membership(np.array([[1.9, 0.0]]))[0]
        assert not body.membership(np.array([[0.0, 1.1]]))[0]

    def test_polytope_membership(self):
        tri = polytope_body([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        assert tri.membership(np.array([[0.2, 0.2]]))[0]
        assert not tri.membership(np.array([[0.8, 0.8]]))[0]

    def test_rotated_box(self):
        c, s = np.cos(np.pi / 4), np.sin(np.pi / 4)
        R = np.array([[c, -s], [s, c]])
        body = box_body([0.0, 0.0], [1.0, 1.0], axes=R)
        # the rotated box contains (1.2, 0) but not the corner direction extreme
        assert body.membership(np.array([[1.2, 0.0]]))[0]
        assert not body.membership(np.array([[1.2, 1.2]]))[0]


class TestSampling:
    def test_box_acceptance_is_total(self):
        body = box_body([0.5, 0.5], [0.5, 0.5])
        pts, proposals = sample_body(body, 5000, seed=0)
        assert pts.shape == (5000, 2)
        assert proposals == 5000  # membership always true: every proposal lands

    def test_samples_are_members(self):
        body = ellipsoid_body([0.0, 0.0, 0.0], [1.0, 2.0, 0.5])
        pts, _ = sample_body(body, 2000, seed=1)
        assert np.all(body.membership(pts))

    def test_disk_volume_estimate(self):
        body = ball_body([0.0, 0.0], 1.0)
        pts, proposals = sample_body(body, 50_000, seed=2)
        est = body.bbox_volume * 50_000 / proposals
        assert est == pytest.approx(np.pi, rel=0.02)

    def test_stall_detection(self):
        bad = ConvexBody(
            membership=lambda p: np.zeros(np.atleast_2d(p).shape[0], dtype=bool),
            center=np.zeros(2),
            axes=np.eye(2),
            half_extents=np.ones(2),
        )
        with pytest.raises(SamplingStallError):
            sample_body(bad, 1, seed=0)


class TestConvexPipeline:
    def params(self, eps=0.2):
        return CoresetParams(
            k=1, epsilon=eps, delta=0.1, vc_dim_dstar=10, sample_factor=0.05
        )

    def test_disk_first_moment(self):
        # integral of ||p|| over the unit disk is 2*pi/3
        body = ball_body([0.0, 0.0], 1.0)
        rep = coreset_of_convex(
            [body], self.params(), LipSpec.identity(), seed=0, samples_per_body=200_000
        )
        q = CenterSet([[0.0, 0.0]])
        cost = coreset_cost(rep.coreset, q, LipSpec.identity())
        assert cost == pytest.approx(2 * np.pi / 3, rel=0.05)

    def test_two_disk_center_recovery(self):
        from segcoreset import kmeanspp_seed, lloyd, WeightedPointSet

        bodies = [ball_body([-5.0, 0.0], 1.0), ball_body([5.0, 0.0], 1.0)]
        params = CoresetParams(
            k=2, epsilon=0.25, delta=0.1, vc_dim_dstar=10, sample_factor=0.05
        )
        rep = coreset_of_convex(
            bodies, params, LipSpec.power(2), seed=1, samples_per_body=50_000
        )
        P = rep.coreset
        init = kmeanspp_seed(P, 2, 3)
        res = lloyd(P, init)
        got = sorted(res.centers.centers.tolist())
        assert np.allclose(got[0], [-5.0, 0.0], atol=0.15)
        assert np.allclose(got[1], [5.0, 0.0], atol=0.15)

    def test_acceptance_rates_reported(self):
        body = ball_body([0.0, 0.0], 1.0)
        rep = coreset_of_convex(
            [body], self.params(), LipSpec.identity(), seed=2, samples_per_body=10_000
        )
        assert rep.acceptance_rates is not None
        assert rep.acceptance_rates[0] == pytest.approx(np.pi / 4, rel=0.05)

    def test_dimension_one_rejected(self):
        body = box_body([0.0], [1.0])
        with pytest.raises(Exception):
            coreset_of_convex([body], self.params(), LipSpec.identity(), seed=0,
                              samples_per_body=100)

    def test_deterministic(self):
        body = ball_body([0.0, 0.0], 1.0)
        a = coreset_of_convex([body], self.params(), LipSpec.identity(), seed=5,
                              samples_per_body=20_000)
        b = coreset_of_convex([body], self.params(), LipSpec.identity(), seed=5,
                              samples_per_body=20_000)
        assert np.array_equal(a.coreset.points, b.coreset.points)
        assert np.array_equal(a.coreset.weights, b.coreset.weights)
