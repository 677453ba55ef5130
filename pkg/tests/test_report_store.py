import numpy as np

from vtsr.core import Frame
from vtsr.metrics import FrameResult, build_report
from vtsr.report_store import load_report, report_filename, save_report


def small_report():
    frame = Frame(np.full((12, 12, 3), 0.5))
    noisy = Frame(np.full((12, 12, 3), 0.6))
    results = [FrameResult('000', '00000001', frame, frame, 0.2), FrameResult('000', '00000002', noisy, frame, 0.4)]
    return build_report(results, 'x4')


def test_filename_from_task_and_method(tmp_path):
    path = report_filename('x2', 'linear', 'csv', str(tmp_path / 'reports'))
    assert path.endswith('reports/benchmark_x2_linear.csv')
    assert (tmp_path / 'reports').is_dir()


def test_save_and_load(tmp_path):
    report = small_report()
    json_path, csv_path = save_report(report, tmp_path / 'r' / 'rep.json', tmp_path / 'r' / 'rep.csv',
                                      config={'task': 'x4'}, extra={'dataset': 'demo'})
    data = load_report(json_path)
    assert data['task'] == 'x4'
    assert data['dataset'] == 'demo'
    assert data['config'] == {'task': 'x4'}
    assert data['report']['frames'] == 2
    assert data['report']['runtime_per_frame'] == report.runtime_per_frame
    assert csv_path.read_text(encoding='utf-8').startswith('sequence,frame,psnr_db,ssim')


def test_missing_report(tmp_path):
    assert load_report(tmp_path / 'nada.json') is None


def test_corrupt_report(tmp_path):
    path = tmp_path / 'roto.json'
    path.write_text('{', encoding='utf-8')
    assert load_report(path) is None
