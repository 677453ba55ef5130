import numpy as np
import pytest

from vtsr.core import Frame
from vtsr.errors import ConfigError
from vtsr.fusion import AgreementMask, ConstantMask, fuse, make_mask_provider, render_fused, run_two_scale
from vtsr.pipeline import PipelineConfig, SequenceWindow, render_window

from conftest import noise_scene


class TestFuse:
    def test_full_scale_only(self, random_frame):
        full, low_up = random_frame(), random_frame()
        assert np.array_equal(fuse(full, low_up, ConstantMask(1.0)).data, full.data)

    def test_low_scale_only(self, random_frame):
        full, low_up = random_frame(), random_frame()
        assert np.array_equal(fuse(full, low_up, ConstantMask(0.0)).data, low_up.data)

    def test_even_blend(self):
        out = fuse(Frame(np.zeros((3, 3, 3))), Frame(np.ones((3, 3, 3))), ConstantMask(0.5))
        assert np.all(out.data == 0.5)

    def test_agreement_mask_range(self, random_frame):
        full, low_up = random_frame(), random_frame()
        mask = AgreementMask(10.0).mask(full, low_up)
        assert np.all((mask > 0) & (mask <= 1))
        assert np.all(AgreementMask().mask(full, full) == 1.0)

    def test_agreement_on_equal_inputs_is_exact(self, random_frame):
        frame = random_frame()
        assert np.array_equal(fuse(frame, frame, AgreementMask()).data, frame.data)

    @pytest.mark.parametrize('kind, c, lam', [('constant', 1.5, 10.0), ('agreement', 1.0, 0.0), ('learned', 1.0, 1.0)])
    def test_invalid_providers(self, kind, c, lam):
        with pytest.raises(ConfigError):
            make_mask_provider(kind, c, lam)


class TestTwoScale:
    def test_static_constant_scene(self):
        frame = Frame(np.full((24, 24, 3), 0.6))
        window = SequenceWindow(frame, frame, frame, frame)
        full, low_up = run_two_scale(window, 0.5)
        assert np.array_equal(full.data, frame.data)
        assert np.array_equal(low_up.data, frame.data)

    def test_full_mask_matches_single_scale(self):
        _, sequence = noise_scene(width=48, height=48, v0=(2.0, 0.0))
        window, flows = sequence.window(1), sequence.window_flows(1)
        fused = render_fused(window, 0.5, PipelineConfig(), ConstantMask(1.0), flows).frame
        single = render_window(window, 0.5, PipelineConfig(), flows).frame
        assert np.array_equal(fused.data, single.data)

    def test_low_scale_is_upsampled_to_native(self):
        _, sequence = noise_scene(width=48, height=40, v0=(2.0, 0.0))
        full, low_up = run_two_scale(sequence.window(1), 0.25, flows=sequence.window_flows(1))
        assert low_up.size == full.size == (48, 40)

    def test_describe(self):
        assert ConstantMask(0.3).describe() == {'kind': 'constant', 'c': 0.3}
        assert AgreementMask(4.0).describe() == {'kind': 'agreement', 'lambda': 4.0}
