import numpy as np
import pytest

from vtsr.core import Frame, FlowField, pixel_grid
from vtsr.errors import ConfigError, DimensionMismatchError
from vtsr.warp import (WarpConfig, backward_warp, blend_weights, overlay_baseline, reverse_flow, splat,
                       synthesize)


def brute_force_splat(vectors, width, height):
    """Splat bilineal píxel a píxel, sin extensión del flujo fuera del frame."""
    acc = np.zeros((height, width, 2))
    weight = np.zeros((height, width))
    for y in range(vectors.shape[0]):
        for x in range(vectors.shape[1]):
            u, v = vectors[y, x]
            tx, ty = x + u, y + v
            x0, y0 = int(np.floor(tx)), int(np.floor(ty))
            fx, fy = tx - x0, ty - y0
            for px, py, w in [(x0, y0, (1 - fx) * (1 - fy)), (x0 + 1, y0, fx * (1 - fy)),
                              (x0, y0 + 1, (1 - fx) * fy), (x0 + 1, y0 + 1, fx * fy)]:
                if w > 0 and 0 <= px < width and 0 <= py < height:
                    acc[py, px] -= w * vectors[y, x]
                    weight[py, px] += w
    return acc, weight


class TestReverseFlow:
    @pytest.mark.parametrize('dx, dy', [(2.5, -1.5), (3.0, 0.0), (-0.25, 0.75)])
    def test_constant_flow_is_negated(self, dx, dy):
        reversed_flow = reverse_flow(FlowField.constant(16, 12, dx, dy))
        assert reversed_flow.valid_mask.all()
        assert np.allclose(reversed_flow.vectors, [-dx, -dy], atol=1e-6)

    def test_constant_flow_gaussian_kernel(self):
        cfg = WarpConfig(splat_kernel='gaussian', sigma=0.8)
        reversed_flow = reverse_flow(FlowField.constant(16, 12, 1.3, -0.6), cfg)
        assert reversed_flow.valid_mask.all()
        assert np.allclose(reversed_flow.vectors, [-1.3, 0.6], atol=1e-9)

    def test_zero_flow(self):
        reversed_flow = reverse_flow(FlowField.zeros(9, 7))
        assert reversed_flow.valid_mask.all()
        assert not np.any(reversed_flow.vectors)

    @pytest.mark.parametrize('hole_fill', ['outside-in-average', 'nearest-valid'])
    def test_converging_flow_leaves_holes(self, hole_fill):
        xs, ys = pixel_grid(9, 9)
        flow = FlowField(np.stack([4.0 - xs, 4.0 - ys], axis=-1))
        reversed_flow = reverse_flow(flow, WarpConfig(hole_fill=hole_fill))
        assert reversed_flow.valid_mask.sum() == 1
        assert reversed_flow.valid_mask[4, 4]
        assert np.all(np.isfinite(reversed_flow.vectors))

    def test_matches_brute_force_inside_frame(self, rng):
        vectors = rng.uniform(-0.4, 0.4, (10, 12, 2))
        acc, weight = splat(vectors, 12, 10, WarpConfig())
        expected_acc, expected_weight = brute_force_splat(vectors, 12, 10)
        assert np.allclose(acc, expected_acc, atol=1e-12)
        assert np.allclose(weight, expected_weight, atol=1e-12)

    def test_outside_in_fill_averages_known_ring(self):
        from vtsr.warp import fill_outside_in
        vectors = np.zeros((3, 3, 2))
        vectors[..., 0] = np.arange(9.0).reshape(3, 3)
        valid = np.ones((3, 3), dtype=bool)
        valid[1, 1] = False
        filled = fill_outside_in(vectors, valid)
        assert filled[1, 1, 0] == pytest.approx(np.mean([0, 1, 2, 3, 5, 6, 7, 8]))


class TestBackwardWarp:
    def test_zero_flow_is_identity(self, random_frame):
        frame = random_frame(13, 9)
        assert np.array_equal(backward_warp(frame, FlowField.zeros(13, 9)).data, frame.data)

    def test_integer_shift(self, random_frame):
        frame = random_frame(10, 6)
        out = backward_warp(frame, FlowField.constant(10, 6, 1.0, 0.0)).data
        assert np.array_equal(out[:, :-1], frame.data[:, 1:])
        assert np.array_equal(out[:, -1], frame.data[:, -1])

    def test_half_pixel_on_ramp(self):
        width = 16
        ramp = Frame(np.tile(np.arange(width) / width, (5, 1)))
        out = backward_warp(ramp, FlowField.constant(width, 5, 0.5, 0.0)).data[..., 0]
        expected = (np.arange(width - 1) + 0.5) / width
        assert np.allclose(out[:, :-1], expected, atol=1e-12)

    def test_size_mismatch(self, random_frame):
        with pytest.raises(DimensionMismatchError):
            backward_warp(random_frame(8, 8), FlowField.zeros(8, 7))


class TestSynthesize:
    @pytest.mark.parametrize('t', [0.0, 0.3, 1.0])
    def test_equal_inputs(self, random_frame, t):
        frame = random_frame()
        assert np.array_equal(synthesize(frame, frame, t=t).data, frame.data)

    def test_time_zero_returns_first(self, random_frame):
        first, second = random_frame(), random_frame()
        assert np.array_equal(synthesize(first, second, t=0.0).data, first.data)

    def test_weight_formula(self):
        black = Frame(np.zeros((4, 4, 3)))
        white = Frame(np.ones((4, 4, 3)))
        assert np.allclose(synthesize(black, white, t=0.75).data, 0.75)

    def test_hole_mask_scaled_prefers_visible_side(self):
        black = Frame(np.zeros((2, 2)))
        white = Frame(np.ones((2, 2)))
        holes0 = np.array([[True, False], [False, False]])
        out = synthesize(black, white, holes0, None, 0.5, WarpConfig(occlusion_weighting='hole-mask-scaled')).data
        assert out[0, 0, 0] == 1.0
        assert out[1, 1, 0] == 0.5

    def test_both_weights_zero_gives_even_blend(self):
        holes = np.ones((2, 2), dtype=bool)
        beta = blend_weights(holes, holes, 0.5, WarpConfig(occlusion_weighting='hole-mask-scaled'), (2, 2))
        assert np.all(beta == 0.5)

    @pytest.mark.parametrize('weighting', ['time-linear', 'hole-mask-scaled'])
    def test_swapping_sides_and_time_is_symmetric(self, random_frame, rng, weighting):
        first, second = random_frame(16, 12), random_frame(16, 12)
        holes0 = rng.uniform(size=(12, 16)) < 0.2
        holes1 = rng.uniform(size=(12, 16)) < 0.2
        cfg = WarpConfig(occlusion_weighting=weighting)
        for t in (0.0, 0.25, 0.6, 1.0):
            forward = synthesize(first, second, holes0, holes1, t, cfg)
            swapped = synthesize(second, first, holes1, holes0, 1.0 - t, cfg)
            assert np.allclose(forward.data, swapped.data, rtol=0.0, atol=1e-12)

    def test_hole_mask_shape_checked(self, random_frame):
        frame = random_frame(4, 4)
        with pytest.raises(DimensionMismatchError):
            synthesize(frame, frame, np.zeros((3, 3), dtype=bool))


class TestOverlay:
    def test_same_frame(self, random_frame):
        frame = random_frame()
        assert np.array_equal(overlay_baseline(frame, frame).data, frame.data)

    def test_black_and_white(self):
        out = overlay_baseline(Frame(np.zeros((3, 3, 3))), Frame(np.ones((3, 3, 3))))
        assert np.all(out.data == 0.5)


@pytest.mark.parametrize('kwargs', [{'hole_fill': 'zeros'}, {'splat_kernel': 'box'},
                                    {'splat_kernel': 'gaussian', 'sigma': 0.0},
                                    {'occlusion_weighting': 'none'}])
def test_invalid_warp_config(kwargs):
    with pytest.raises(ConfigError):
        WarpConfig(**kwargs)
