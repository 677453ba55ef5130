# vtsr/warp.py
"""
Inversión de flujo por splatting, warping hacia atrás, mezcla con
oclusiones y el baseline de superposición.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import convolve, distance_transform_edt

from .core import Frame, FlowField, as_time_fraction, pixel_grid, require_same_size, sample_bilinear
from .errors import ConfigError, DimensionMismatchError

logger = logging.getLogger(__name__)

HOLE_FILLS = ('outside-in-average', 'nearest-valid')
SPLAT_KERNELS = ('bilinear', 'gaussian')
OCCLUSION_WEIGHTINGS = ('time-linear', 'hole-mask-scaled')

NEIGHBOURS_8 = np.array([[1.0, 1.0, 1.0],
                         [1.0, 0.0, 1.0],
                         [1.0, 1.0, 1.0]])


@dataclass(frozen=True)
class WarpConfig:
    hole_fill: str = 'outside-in-average'
    splat_kernel: str = 'bilinear'
    sigma: float = 1.0
    occlusion_weighting: str = 'time-linear'

    def __post_init__(self):
        if self.hole_fill not in HOLE_FILLS:
            raise ConfigError(f"hole_fill desconocido: '{self.hole_fill}'")
        if self.splat_kernel not in SPLAT_KERNELS:
            raise ConfigError(f"splat_kernel desconocido: '{self.splat_kernel}'")
        if self.splat_kernel == 'gaussian' and not self.sigma > 0:
            raise ConfigError(f"sigma debe ser > 0 con kernel gaussiano, recibido {self.sigma}")
        if self.occlusion_weighting not in OCCLUSION_WEIGHTINGS:
            raise ConfigError(f"occlusion_weighting desconocido: '{self.occlusion_weighting}'")


# ==================== Splatting ====================

def _bilinear_taps(tx, ty):
    x0 = np.floor(tx)
    y0 = np.floor(ty)
    fx = tx - x0
    fy = ty - y0
    yield x0, y0, (1.0 - fx) * (1.0 - fy)
    yield x0 + 1, y0, fx * (1.0 - fy)
    yield x0, y0 + 1, (1.0 - fx) * fy
    yield x0 + 1, y0 + 1, fx * fy


def _gaussian_taps(tx, ty, sigma):
    radius = int(math.ceil(3.0 * sigma))
    cx = np.rint(tx)
    cy = np.rint(ty)
    for oy in range(-radius, radius + 1):
        for ox in range(-radius, radius + 1):
            x = cx + ox
            y = cy + oy
            yield x, y, np.exp(-((x - tx) ** 2 + (y - ty) ** 2) / (2.0 * sigma * sigma))


def splat(vectors, width, height, cfg):
    """Acumula −f(p) en p + f(p). Devuelve (suma ponderada H×W×2, peso H×W).

    vectors puede ser más grande que la grilla destino (flujo extendido); su
    origen se asume desplazado por el margen implícito en el tamaño.
    """
    src_h, src_w = vectors.shape[:2]
    margin_x = (src_w - width) // 2
    margin_y = (src_h - height) // 2
    xs, ys = pixel_grid(src_w, src_h)
    tx = (xs - margin_x + vectors[..., 0]).ravel()
    ty = (ys - margin_y + vectors[..., 1]).ravel()
    u = -vectors[..., 0].ravel()
    v = -vectors[..., 1].ravel()

    n = width * height
    weight = np.zeros(n)
    acc_u = np.zeros(n)
    acc_v = np.zeros(n)

    if cfg.splat_kernel == 'gaussian':
        taps = _gaussian_taps(tx, ty, cfg.sigma)
    else:
        taps = _bilinear_taps(tx, ty)

    for x, y, w in taps:
        keep = (w > 0) & (x >= 0) & (x < width) & (y >= 0) & (y < height)
        idx = (y[keep] * width + x[keep]).astype(np.intp)
        wk = w[keep]
        weight += np.bincount(idx, weights=wk, minlength=n)
        acc_u += np.bincount(idx, weights=wk * u[keep], minlength=n)
        acc_v += np.bincount(idx, weights=wk * v[keep], minlength=n)

    acc = np.stack([acc_u, acc_v], axis=-1).reshape(height, width, 2)
    return acc, weight.reshape(height, width)


# ==================== Relleno de huecos ====================

def fill_outside_in(vectors, valid):
    """Rellena huecos desde el borde hacia adentro con el promedio de los 8 vecinos válidos."""
    vectors = vectors.copy()
    known = valid.copy()
    while not known.all():
        counts = convolve(known.astype(np.float64), NEIGHBOURS_8, mode='constant', cval=0.0)
        ring = ~known & (counts > 0)
        if not ring.any():
            break
        for c in range(2):
            sums = convolve(np.where(known, vectors[..., c], 0.0), NEIGHBOURS_8, mode='constant', cval=0.0)
            vectors[..., c] = np.where(ring, sums / np.maximum(counts, 1.0), vectors[..., c])
        known |= ring
    return vectors


def fill_nearest_valid(vectors, valid):
    """Copia a cada hueco el vector del píxel válido más cercano (distancia euclídea)."""
    iy, ix = distance_transform_edt(~valid, return_distances=False, return_indices=True)
    return vectors[iy, ix]


def reverse_flow(f_src_to_t, cfg=None):
    """Convierte f(src→t) en f(t→src) por splatting ponderado y relleno de huecos.

    El flujo fuente se extrapola linealmente fuera del frame (reflexión impar)
    antes del splatting: un flujo constante no deja huecos en los márgenes y un
    flujo afín conserva su forma. valid_mask del resultado marca los píxeles
    que recibieron peso antes de rellenar.
    """
    cfg = cfg or WarpConfig()
    h, w = f_src_to_t.height, f_src_to_t.width
    vectors = f_src_to_t.vectors
    reach = float(np.max(np.abs(vectors))) if vectors.size else 0.0
    margin = min(int(math.ceil(reach)) + 1, max(h, w))
    extended = np.pad(vectors, ((margin, margin), (margin, margin), (0, 0)), mode='reflect', reflect_type='odd')

    acc, weight = splat(extended, w, h, cfg)
    valid = weight > 0
    reversed_vectors = np.zeros((h, w, 2))
    np.divide(acc, weight[..., np.newaxis], out=reversed_vectors, where=valid[..., np.newaxis])

    if valid.all():
        return FlowField(reversed_vectors, valid)
    if not valid.any():
        logger.warning("Inversión de flujo sin ningún píxel válido; se devuelve flujo nulo")
        return FlowField(np.zeros((h, w, 2)), valid)

    logger.debug(f"Inversión de flujo: {np.count_nonzero(~valid)} huecos ({cfg.hole_fill})")
    if cfg.hole_fill == 'nearest-valid':
        filled = fill_nearest_valid(reversed_vectors, valid)
    else:
        filled = fill_outside_in(reversed_vectors, valid)
    return FlowField(filled, valid)


# ==================== Warping y mezcla ====================

def backward_warp(frame, f_t_to_src):
    """output(p) = muestra bilineal de frame en p + f(p), con clamp de bordes."""
    require_same_size(frame, f_t_to_src)
    xs, ys = pixel_grid(frame.width, frame.height)
    vectors = f_t_to_src.vectors
    return Frame(sample_bilinear(frame.data, xs + vectors[..., 0], ys + vectors[..., 1]))


def blend_weights(holes0, holes1, t, cfg, shape):
    """Fracción β del segundo frame por píxel: w1 / (w0 + w1), 0.5 donde ambos pesos son 0."""
    m0 = np.ones(shape)
    m1 = np.ones(shape)
    if cfg.occlusion_weighting == 'hole-mask-scaled':
        if holes0 is not None:
            m0 = np.where(holes0, 0.0, 1.0)
        if holes1 is not None:
            m1 = np.where(holes1, 0.0, 1.0)
    w0 = (1.0 - t) * m0
    w1 = t * m1
    total = w0 + w1
    beta = np.full(shape, 0.5)
    np.divide(w1, total, out=beta, where=total > 0)
    return beta


def synthesize(warped0, warped1, holes0=None, holes1=None, t=0.5, cfg=None):
    """Î_t = (w0·warped0 + w1·warped1)/(w0 + w1), con w0 = (1−t)·m0 y w1 = t·m1."""
    cfg = cfg or WarpConfig()
    t = as_time_fraction(t)
    require_same_size(warped0, warped1, what='frames')
    shape = (warped0.height, warped0.width)
    for holes in (holes0, holes1):
        if holes is not None and np.shape(holes) != shape:
            raise DimensionMismatchError(f"Máscara de huecos {np.shape(holes)} no coincide con {shape}")

    beta = blend_weights(holes0, holes1, t, cfg, shape)[..., np.newaxis]
    a, b = warped0.data, warped1.data
    return Frame(a + beta * (b - a))


def overlay_baseline(frame0, frame1):
    """Promedio (I0 + I1)/2, el mismo para cualquier t."""
    require_same_size(frame0, frame1, what='frames')
    return Frame(0.5 * (frame0.data + frame1.data))
