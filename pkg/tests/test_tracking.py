import numpy as np
import pytest

from segcoreset import (
    MotionVectorRecord,
    featurize,
    run_tracker,
    track_window,
)


def make_stream(rng, frames, per_frame, motion=(5.0, 0.0), coherent=0.7, dims=(1280, 720)):
    recs = []
    for f in range(frames):
        for _ in range(per_frame):
            x = rng.uniform(100, dims[0] - 100)
            y = rng.uniform(100, dims[1] - 100)
            if rng.random() < coherent:
                dx, dy = motion
            else:
                ang = rng.uniform(0, 2 * np.pi)
                mag = rng.uniform(1, 10)
                dx, dy = mag * np.cos(ang), mag * np.sin(ang)
            recs.append(MotionVectorRecord(f, x, y, x + dx, y + dy))
    return recs


class TestFeaturize:
    def test_vertical_direction(self):
        mv = MotionVectorRecord(0, 10.0, 10.0, 10.0, 11.0)  # dir (0,1)
        s = featurize(mv, (720, 1280))
        # angle to (0,1) is 0, to (1,0) is 90; scale = 1280/180
        assert np.allclose(s.u[2:], [0.0, 90.0 * 1280 / 180])
        assert np.allclose(s.u[2:], [0.0, 640.0])
        # features constant along the segment
        assert np.allclose(s.v[2:], 0.0)

    def test_horizontal_direction(self):
        mv = MotionVectorRecord(0, 10.0, 10.0, 11.0, 10.0)  # dir (1,0)
        s = featurize(mv, (720, 1280))
        scale = 1280 / 180
        assert np.allclose(s.u[2:], [90.0 * scale, 0.0])

    def test_zero_direction_convention(self):
        mv = MotionVectorRecord(0, 10.0, 10.0, 10.0, 10.0)
        s = featurize(mv, (720, 1280))
        assert np.allclose(s.u[2:], [0.0, 0.0])

    def test_endpoints_carry_positions(self):
        mv = MotionVectorRecord(0, 1.0, 2.0, 4.0, 6.0)
        s = featurize(mv, (100, 100))
        assert np.allclose(s.u[:2], [1.0, 2.0])
        assert np.allclose(s.endpoints[1][:2], [4.0, 6.0])

    def test_angles_bounded(self):
        rng = np.random.default_rng(0)
        scale = 1280 / 180
        for _ in range(100):
            x, y = rng.uniform(0, 500, 2)
            dx, dy = rng.uniform(-10, 10, 2)
            s = featurize(MotionVectorRecord(0, x, y, x + dx, y + dy), (720, 1280))
            assert 0.0 <= s.u[2] <= 180.0 * scale
            assert 0.0 <= s.u[3] <= 180.0 * scale


class TestTrackWindow:
    def test_pure_translation_recovered_exactly(self):
        rng = np.random.default_rng(1)
        vecs = [
            MotionVectorRecord(0, x, y, x + 5.0, y)
            for x, y in rng.uniform(100, 500, (500, 2))
        ]
        start, end, sizes = track_window(vecs, 2, (1280, 720), seed=0)
        assert np.allclose(end - start, [5.0, 0.0])

    def test_majority_translation_with_noise(self):
        rng = np.random.default_rng(2)
        recs = make_stream(rng, 1, 500)
        start, end, _ = track_window(recs, 2, (1280, 720), seed=3)
        assert np.allclose(end - start, [5.0, 0.0], atol=0.5)

    def test_subsample_cap(self):
        rng = np.random.default_rng(3)
        recs = make_stream(rng, 1, 2000)
        _, _, sizes = track_window(recs, 2, (1280, 720), seed=0)
        assert sizes.sum() == 1000

    def test_requires_k_at_least_two(self):
        recs = make_stream(np.random.default_rng(4), 1, 10)
        with pytest.raises(Exception):
            track_window(recs, 1, (1280, 720), seed=0)

    def test_deterministic(self):
        recs = make_stream(np.random.default_rng(5), 1, 300)
        a = track_window(recs, 2, (1280, 720), seed=9)
        b = track_window(recs, 2, (1280, 720), seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


class TestRunTracker:
    def test_constant_motion_track(self):
        rng = np.random.default_rng(6)
        recs = make_stream(rng, 40, 50, coherent=1.0)
        state = run_tracker(recs, 2, (1280, 720), seed=0)
        assert len(state.track) == 4
        for e in state.track:
            disp = e.mean_end - e.mean_start
            assert np.allclose(disp, [5.0, 0.0], atol=1e-9)

    def test_empty_window_holds_previous_value(self):
        rng = np.random.default_rng(7)
        recs = make_stream(rng, 10, 20, coherent=1.0)
        # a gap: nothing in frames 10..19, then more data at frames 20..29
        late = make_stream(rng, 10, 20, coherent=1.0)
        late = [
            MotionVectorRecord(r.frame + 20, r.x1, r.y1, r.x2, r.y2) for r in late
        ]
        state = run_tracker(recs + late, 2, (1280, 720), seed=0)
        assert len(state.track) == 3
        gap = state.track[1]
        assert np.array_equal(gap.mean_start, state.track[0].mean_start)
        assert gap.largest_cluster_size == 0

    def test_unsorted_frames_rejected(self):
        recs = [
            MotionVectorRecord(5, 0.0, 0.0, 1.0, 1.0),
            MotionVectorRecord(1, 0.0, 0.0, 1.0, 1.0),
        ]
        with pytest.raises(Exception):
            run_tracker(recs, 2, (1280, 720), seed=0)

    def test_deterministic_trace(self):
        rng = np.random.default_rng(8)
        recs = make_stream(rng, 30, 40)
        a = run_tracker(recs, 2, (1280, 720), seed=4)
        b = run_tracker(recs, 2, (1280, 720), seed=4)
        for ea, eb in zip(a.track, b.track):
            assert np.array_equal(ea.mean_start, eb.mean_start)
            assert np.array_equal(ea.mean_end, eb.mean_end)

    def test_throughput_counters(self):
        rng = np.random.default_rng(9)
        recs = make_stream(rng, 20, 100)
        state = run_tracker(recs, 2, (1280, 720), seed=0)
        assert state.vectors_processed == 2000
        assert state.vectors_per_second > 0
