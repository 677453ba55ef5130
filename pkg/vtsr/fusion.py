# vtsr/fusion.py
"""
Fusión de dos escalas: M·Q(I) + (1 − M)·Up(Q(Down(I))).

Q es el pipeline completo de pipeline.render_window; M lo da un proveedor
analítico (constante o por acuerdo entre escalas).
"""
import logging
from dataclasses import dataclass

import numpy as np

from .base_mask import BaseMaskProvider
from .core import Frame, require_same_size, upsample2
from .errors import ConfigError
from .pipeline import InterpolationResult, PipelineConfig, estimate_window_flows, render_window

logger = logging.getLogger(__name__)

MASK_KINDS = ('constant', 'agreement')


@dataclass(frozen=True)
class ConstantMask(BaseMaskProvider):
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.c <= 1.0:
            raise ConfigError(f"La máscara constante debe estar en [0,1], recibido {self.c}")

    def mask(self, full, low_up):
        return np.full((full.height, full.width), float(self.c))

    def describe(self):
        return {'kind': 'constant', 'c': self.c}


@dataclass(frozen=True)
class AgreementMask(BaseMaskProvider):
    """M = 1/(1 + λ·|full − low_up|), promediado sobre canales. Vale 1 donde coinciden."""
    lam: float = 10.0

    def __post_init__(self):
        if not self.lam > 0:
            raise ConfigError(f"lambda debe ser > 0, recibido {self.lam}")

    def mask(self, full, low_up):
        diff = np.abs(full.data - low_up.data)
        return np.mean(1.0 / (1.0 + self.lam * diff), axis=2)

    def describe(self):
        return {'kind': 'agreement', 'lambda': self.lam}


def make_mask_provider(kind='constant', c=1.0, lam=10.0):
    if kind == 'constant':
        return ConstantMask(c)
    if kind == 'agreement':
        return AgreementMask(lam)
    raise ConfigError(f"Proveedor de máscara desconocido: '{kind}' (opciones: {', '.join(MASK_KINDS)})")


def fuse(full, low_up, provider=None):
    """Combinación convexa por píxel de las dos escalas."""
    provider = provider or ConstantMask()
    require_same_size(full, low_up, what='frames')
    m = provider.mask(full, low_up)[..., np.newaxis]
    a, b = full.data, low_up.data
    blended = m * a + (1.0 - m) * b
    # Donde ambas escalas coinciden el resultado es exactamente ese valor
    return Frame(np.where(a == b, a, blended))


def _low_path(window, t, cfg, flows):
    low_flows = None if flows is None else flows.downsampled()
    low = render_window(window.downsampled(), t, cfg, low_flows).frame
    return upsample2(low, window.frame0.width, window.frame0.height)


def run_two_scale(window, t, cfg=None, flows=None, flow_provider=None):
    """(Q(I), Up(Q(Down(I)))) para el instante t.

    Los flujos se obtienen una sola vez a resolución completa y se reducen
    para la escala baja.
    """
    cfg = cfg or PipelineConfig()
    if cfg.method != 'overlay' and flows is None:
        flows = estimate_window_flows(window, cfg, flow_provider)
    full = render_window(window, t, cfg, flows).frame
    return full, _low_path(window, t, cfg, flows)


def render_fused(window, t, cfg=None, provider=None, flows=None, with_edges=False, flow_provider=None):
    """Igual que pipeline.render_window pero con la salida fusionada de dos escalas.

    Los bordes de diagnóstico se toman de la escala completa.
    """
    cfg = cfg or PipelineConfig()
    if cfg.method != 'overlay' and flows is None:
        flows = estimate_window_flows(window, cfg, flow_provider)
    result = render_window(window, t, cfg, flows, with_edges=with_edges)
    low_up = _low_path(window, t, cfg, flows)
    provider = provider or ConstantMask()
    fused = fuse(result.frame, low_up, provider)
    logger.debug(f"Fusión t={t:.4f} con {provider.describe()}")
    return InterpolationResult(fused, result.holes0, result.holes1, result.edges)
