# vtsr/pipeline.py
"""
Interpolación de un intervalo (I0, I1) con sus vecinos I-1 e I2.

Flujo → modelo de movimiento → flujo intermedio → inversión → warping →
mezcla. El lado de I1 usa el mismo modelo centrado en I1 con el tiempo
invertido: sus vecinos -1, +1, +2 son I2, I0, I-1 y se evalúa en 1 − t.
"""
import logging
from dataclasses import dataclass, field, fields

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import Frame, as_time_fraction, downsample2, edge_map, require_same_size
from .errors import ConfigError
from .flow import FlowEstimatorConfig, estimate_flow
from .qmotion import RectifierConfig, fit_motion, linear_motion, predict_flow, scale_flow_linear
from .warp import WarpConfig, backward_warp, overlay_baseline, reverse_flow, synthesize

logger = logging.getLogger(__name__)

METHODS = ('quadratic', 'linear', 'overlay')

# nombre del flujo → (índice origen, índice destino) relativos a I0
FLOW_OFFSETS = {
    'f0_m1': (0, -1),
    'f0_1': (0, 1),
    'f0_2': (0, 2),
    'f1_2': (1, 2),
    'f1_0': (1, 0),
    'f1_m1': (1, -1),
}


@dataclass(frozen=True)
class PipelineConfig:
    method: str = 'quadratic'
    flow: FlowEstimatorConfig = field(default_factory=FlowEstimatorConfig)
    rectify: bool = True
    rectifier: RectifierConfig = field(default_factory=RectifierConfig)
    warp: WarpConfig = field(default_factory=WarpConfig)
    post_smooth_sigma: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"Método desconocido: '{self.method}' (opciones: {', '.join(METHODS)})")
        if not self.post_smooth_sigma >= 0:
            raise ConfigError(f"post_smooth_sigma debe ser ≥ 0, recibido {self.post_smooth_sigma}")


@dataclass(frozen=True)
class SequenceWindow:
    """Cuatro frames consecutivos; prev y next faltan en los bordes de la secuencia."""
    prev: Frame
    frame0: Frame
    frame1: Frame
    next: Frame

    def __post_init__(self):
        require_same_size(self.prev, self.frame0, self.frame1, self.next, what='frames de la ventana')

    def frame_at(self, offset):
        return {-1: self.prev, 0: self.frame0, 1: self.frame1, 2: self.next}[offset]

    def downsampled(self):
        return SequenceWindow(*(None if f is None else downsample2(f)
                                for f in (self.prev, self.frame0, self.frame1, self.next)))


@dataclass(frozen=True)
class WindowFlows:
    f0_m1: object = None
    f0_1: object = None
    f0_2: object = None
    f1_2: object = None
    f1_0: object = None
    f1_m1: object = None

    def downsampled(self):
        return WindowFlows(**{f.name: None if getattr(self, f.name) is None else downsample2(getattr(self, f.name))
                              for f in fields(self)})


@dataclass(frozen=True)
class InterpolationResult:
    frame: Frame
    holes0: np.ndarray = None
    holes1: np.ndarray = None
    edges: Frame = None


def required_flows(has_prev, has_next, cfg):
    """Nombres de los flujos que necesita el método para una ventana."""
    if cfg.method == 'overlay':
        return []
    names = ['f0_1', 'f1_0']
    # En los bordes de la secuencia ambos lados usan el modelo lineal
    if cfg.method == 'quadratic' and has_prev and has_next:
        names += ['f0_m1', 'f1_2']
        if cfg.rectify:
            names += ['f0_2', 'f1_m1']
    return names


def estimate_window_flows(window, cfg, flow_provider=None):
    """Calcula (o pide a flow_provider) los flujos que la configuración necesita.

    flow_provider(src_offset, dst_offset) → FlowField permite cachear o leer
    flujos precalculados; por defecto se estiman con estimate_flow.
    """
    names = required_flows(window.prev is not None, window.next is not None, cfg)
    values = {}
    for name in names:
        src, dst = FLOW_OFFSETS[name]
        if flow_provider is not None:
            values[name] = flow_provider(src, dst)
        else:
            values[name] = estimate_flow(window.frame_at(src), window.frame_at(dst), cfg.flow)
    return WindowFlows(**values)


def window_motions(flows, cfg):
    """Modelos de movimiento centrados en I0 y en I1.

    En una ventana de borde (falta f0_m1 o f1_2) los dos lados usan el
    modelo lineal.
    """
    if flows.f0_m1 is None or flows.f1_2 is None:
        return linear_motion(flows.f0_1), linear_motion(flows.f1_0)
    rectifier = cfg.rectifier if cfg.rectify else None
    m0 = fit_motion(flows.f0_m1, flows.f0_1, flows.f0_2, rectifier)
    m1 = fit_motion(flows.f1_2, flows.f1_0, flows.f1_m1, rectifier)
    return m0, m1


def intermediate_flows(flows, t, cfg):
    """(f(0→t), f(1→t)) según el método configurado."""
    if cfg.method == 'linear':
        return scale_flow_linear(flows.f0_1, flows.f1_0, t)
    m0, m1 = window_motions(flows, cfg)
    return predict_flow(m0, t), predict_flow(m1, 1.0 - t)


def _smooth(frame, sigma):
    return Frame(gaussian_filter(frame.data, sigma=(sigma, sigma, 0), mode='nearest'))


def render_window(window, t, cfg=None, flows=None, with_edges=False, flow_provider=None):
    """Interpola el frame en t ∈ [0,1] entre frame0 y frame1."""
    cfg = cfg or PipelineConfig()
    t = as_time_fraction(t)

    if cfg.method == 'overlay':
        edges = None
        if with_edges:
            edges = overlay_baseline(edge_map(window.frame0), edge_map(window.frame1))
        return InterpolationResult(overlay_baseline(window.frame0, window.frame1), edges=edges)

    if flows is None:
        flows = estimate_window_flows(window, cfg, flow_provider)

    f0_t, f1_t = intermediate_flows(flows, t, cfg)
    back0 = reverse_flow(f0_t, cfg.warp)
    back1 = reverse_flow(f1_t, cfg.warp)
    holes0 = ~back0.valid_mask
    holes1 = ~back1.valid_mask

    warped0 = backward_warp(window.frame0, back0)
    warped1 = backward_warp(window.frame1, back1)
    frame = synthesize(warped0, warped1, holes0, holes1, t, cfg.warp)
    if cfg.post_smooth_sigma > 0:
        frame = _smooth(frame, cfg.post_smooth_sigma)

    edges = None
    if with_edges:
        edges = synthesize(backward_warp(edge_map(window.frame0), back0),
                           backward_warp(edge_map(window.frame1), back1),
                           holes0, holes1, t, cfg.warp)
    return InterpolationResult(frame, holes0, holes1, edges)
