import numpy as np

from analysis.visualizacion_benchmark import crear_visualizaciones, flow_to_rgb, guardar_flujo_png
from vtsr.core import FlowField, Frame, load_frame
from vtsr.metrics import FrameResult, build_report
from vtsr.report_store import save_report


def test_zero_flow_is_white():
    assert np.allclose(flow_to_rgb(FlowField.zeros(4, 3)), 1.0)


def test_rightward_flow_is_red():
    rgb = flow_to_rgb(FlowField.constant(2, 2, 1.0, 0.0), max_magnitude=1.0)
    assert np.allclose(rgb, [1.0, 0.0, 0.0])


def test_flow_png(tmp_path):
    path = guardar_flujo_png(FlowField.constant(5, 4, 0.0, 2.0), tmp_path / 'flujo.png')
    assert load_frame(path).size == (5, 4)


def test_report_figures(tmp_path):
    truth = Frame(np.full((12, 12, 3), 0.5))
    results = [FrameResult(seq, f"{n:08d}", Frame(np.full((12, 12, 3), 0.5 + 0.01 * n)), truth)
               for seq in ('000', '001') for n in (1, 2, 3)]
    json_path, _ = save_report(build_report(results, 'x4'), tmp_path / 'rep.json', tmp_path / 'rep.csv')
    archivos = crear_visualizaciones(json_path, str(tmp_path / 'figs'))
    assert len(archivos) == 2
    for archivo in archivos:
        assert (tmp_path / 'figs').joinpath(archivo.split('/')[-1]).exists()
