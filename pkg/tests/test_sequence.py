import json

import numpy as np
import pytest

from vtsr.core import Frame, load_frame, save_frame
from vtsr.errors import ConfigError, LayoutError, PipelineError
from vtsr.fusion import AgreementMask
from vtsr.sequence import (DatasetLayout, FlowFileSource, RunConfig, benchmark, build_run_config,
                           interpolate_directory, interpolate_sequence, list_frames, run_config_from_dict,
                           subsample)
from vtsr.synthbench import SyntheticSceneSpec, emit_dataset

SMALL_BLOB = SyntheticSceneSpec(width=32, height=32, sigma=4.0, v0=(1.0, 0.0), frame_count=3)


@pytest.fixture
def dataset(tmp_path):
    """Dos secuencias sintéticas a 4× la tasa de entrada, con sus flujos verdaderos."""
    for seq in ('000', '001'):
        emit_dataset(SMALL_BLOB, tmp_path / 'data', seq, stride=4, flow_dir=tmp_path / 'flows')
    return tmp_path


def files_config(root, task='x4', run='run'):
    return RunConfig(task=task, flow_source='files', flow_dir=root / 'flows', output_dir=root / run)


class TestSubsample:
    def test_stride_four(self):
        inputs, targets = subsample(range(9), 4)
        assert inputs == [0, 4, 8]
        first = [(target.item, target.t) for target in targets if target.interval == 0]
        assert first == [(1, 0.25), (2, 0.5), (3, 0.75)]

    def test_stride_two(self):
        inputs, targets = subsample(range(5), 2)
        assert inputs == [0, 2, 4]
        assert [(target.item, target.t) for target in targets] == [(1, 0.5), (3, 0.5)]

    def test_too_few_frames(self):
        with pytest.raises(ValueError):
            subsample([0, 1], 4)

    def test_unsupported_stride(self):
        with pytest.raises(ValueError):
            subsample(range(9), 3)


class TestInterpolateSequence:
    def test_static_sequence(self, random_frame):
        frame = random_frame(32, 32)
        outputs = interpolate_sequence([frame, frame, frame], RunConfig(task='x4'))
        assert len(outputs) == 6
        for produced in outputs:
            assert np.array_equal(produced.frame.data, frame.data)

    def test_frame_counts_per_task(self, random_frame):
        frames = [random_frame(16, 16)] * 4
        overlay = {'method': 'overlay'}
        assert len(interpolate_sequence(frames, run_config_from_dict(overlay, {'task': 'x2'}))) == 3
        assert len(interpolate_sequence(frames, run_config_from_dict(overlay, {'task': 'x4'}))) == 9

    def test_failure_names_sequence_and_interval(self, tmp_path, random_frame):
        frames = [random_frame(16, 16)] * 3
        source = FlowFileSource(tmp_path, 'seq9', [0, 4, 8])
        with pytest.raises(PipelineError, match="seq9.*0→1"):
            interpolate_sequence(frames, RunConfig(), source, name='seq9')

    def test_fusion_enabled(self):
        frame = Frame(np.full((32, 32, 3), 0.4))
        cfg = run_config_from_dict({'fusion': {'enabled': True, 'mask': 'agreement', 'lambda': 5.0}})
        assert cfg.fusion and cfg.mask == AgreementMask(5.0)
        outputs = interpolate_sequence([frame, frame], cfg)
        assert all(np.array_equal(p.frame.data, frame.data) for p in outputs)


class TestBenchmark:
    def test_report_counts_and_alignment(self, dataset):
        report = benchmark(DatasetLayout(dataset / 'data', 4), files_config(dataset))
        assert len(report.per_frame) == 2 * 2 * 3
        assert report.per_frame['frame'].tolist()[:3] == ['00000001', '00000002', '00000003']
        assert report.mean_psnr > 30.0
        saved = json.loads((dataset / 'run' / 'reports' / 'benchmark_x4_quadratic.json').read_text(encoding='utf-8'))
        assert saved['report']['frames'] == 12
        assert (dataset / 'run' / '001' / '00000007.png').exists()

    def test_x2_has_a_third_of_x4(self, dataset):
        layout = DatasetLayout(dataset / 'data', 4)
        x4 = benchmark(layout, files_config(dataset, 'x4', 'run4'))
        x2 = benchmark(layout, files_config(dataset, 'x2', 'run2'))
        assert len(x4.per_frame) == 3 * len(x2.per_frame)
        assert x2.per_frame['frame'].tolist()[:2] == ['00000002', '00000006']

    def test_runs_are_byte_identical(self, dataset):
        layout = DatasetLayout(dataset / 'data', 4)
        benchmark(layout, files_config(dataset, run='a'))
        benchmark(layout, files_config(dataset, run='b'))
        for path in sorted((dataset / 'a' / '000').iterdir()):
            assert path.read_bytes() == (dataset / 'b' / '000' / path.name).read_bytes()

    def test_estimated_flows_with_edges(self, dataset):
        cfg = run_config_from_dict({}, {'output_dir': str(dataset / 'est'), 'emit_edges': True, 'threads': 2})
        report = benchmark(DatasetLayout(dataset / 'data', 4), cfg)
        assert len(report.per_frame) == 12
        assert (dataset / 'est' / 'edges' / '000' / '00000001.png').exists()

    def test_estimated_flows_identical_across_thread_counts(self, dataset):
        layout = DatasetLayout(dataset / 'data', 4)
        runs = {}
        for run, threads in (('t1', 1), ('t2a', 2), ('t2b', 2)):
            cfg = run_config_from_dict({}, {'output_dir': str(dataset / run), 'threads': threads})
            runs[run] = benchmark(layout, cfg)
        for seq in ('000', '001'):
            for path in sorted((dataset / 't1' / seq).iterdir()):
                assert path.read_bytes() == (dataset / 't2a' / seq / path.name).read_bytes()
                assert path.read_bytes() == (dataset / 't2b' / seq / path.name).read_bytes()
        assert runs['t2a'].per_frame['psnr_db'].tolist() == runs['t1'].per_frame['psnr_db'].tolist()

    def test_missing_ground_truth_is_reported(self, dataset):
        (dataset / 'data' / '000' / '00000002.png').unlink()
        report = benchmark(DatasetLayout(dataset / 'data', 4), files_config(dataset))
        assert report.missing == ['000/00000002']

    def test_missing_input_names_path(self, dataset):
        (dataset / 'data' / '001' / '00000004.png').unlink()
        with pytest.raises(LayoutError, match='00000004.png'):
            benchmark(DatasetLayout(dataset / 'data', 4), files_config(dataset))

    def test_empty_root(self, tmp_path):
        (tmp_path / 'vacio').mkdir()
        with pytest.raises(LayoutError):
            benchmark(DatasetLayout(tmp_path / 'vacio'), RunConfig())


class TestDirectories:
    def test_non_numeric_frame_name(self, tmp_path):
        save_frame(Frame(np.zeros((4, 4))), tmp_path / '00000000.png')
        save_frame(Frame(np.zeros((4, 4))), tmp_path / 'portada.png')
        with pytest.raises(LayoutError, match='portada.png'):
            list_frames(tmp_path)

    def test_interpolate_directory_numbering(self, tmp_path):
        frame = Frame(np.full((16, 16, 3), 0.25))
        for number in (0, 4, 8):
            save_frame(frame, tmp_path / 'in' / f"{number:08d}.png")
        written = interpolate_directory(tmp_path / 'in', tmp_path / 'out', RunConfig(task='x4'))
        assert [p.name for p in written] == [f"{n:08d}.png" for n in (1, 2, 3, 5, 6, 7)]
        assert np.array_equal(load_frame(written[0]).data, load_frame(tmp_path / 'in' / '00000000.png').data)

    def test_gap_not_divisible(self, tmp_path):
        frame = Frame(np.zeros((8, 8)))
        for number in (0, 3):
            save_frame(frame, tmp_path / f"{number:08d}.png")
        with pytest.raises(LayoutError):
            interpolate_directory(tmp_path, tmp_path / 'out', RunConfig(task='x2'))


class TestConfiguration:
    def test_toml_file_with_overrides(self, tmp_path):
        path = tmp_path / 'run.toml'
        path.write_text(
            'task = "x2"\nmethod = "linear"\n\n[flow]\nwindow_radius = 3\n\n[warp]\nhole_fill = "nearest-valid"\n',
            encoding='utf-8')
        cfg = build_run_config(path, {'flow.pyramid_levels': 2, 'metrics.crop': None})
        assert cfg.task == 'x2'
        assert cfg.pipeline.method == 'linear'
        assert cfg.pipeline.flow.window_radius == 3
        assert cfg.pipeline.flow.pyramid_levels == 2
        assert cfg.pipeline.warp.hole_fill == 'nearest-valid'
        assert cfg.metrics.crop == 0

    def test_unknown_keys(self):
        with pytest.raises(ConfigError):
            run_config_from_dict({'tarea': 'x4'})
        with pytest.raises(ConfigError):
            run_config_from_dict({'flow': {'levels': 3}})

    def test_flow_files_require_directory(self, tmp_path):
        with pytest.raises(ConfigError):
            RunConfig(flow_source='files')
        with pytest.raises(ConfigError):
            RunConfig(flow_source='files', flow_dir=tmp_path / 'no-existe')

    def test_invalid_values_surface_as_config_errors(self):
        with pytest.raises(ConfigError):
            run_config_from_dict({'task': 'x3'})
        with pytest.raises(ConfigError):
            run_config_from_dict({'rectifier': {'omega': -1.0}})

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError):
            build_run_config(tmp_path / 'nada.toml')

    def test_describe_is_serializable(self):
        json.dumps(RunConfig().describe())

    def test_layout_stride(self, tmp_path):
        with pytest.raises(ConfigError):
            DatasetLayout(tmp_path, 3)
