# vtsr/flow.py
"""
Estimación clásica de flujo óptico (Lucas-Kanade denso piramidal) y
lectura/escritura de archivos .flo (convención Middlebury).
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import gaussian_filter, uniform_filter

from .core import FlowField, image_gradients, pixel_grid, require_same_size, resample_bilinear, sample_bilinear
from .errors import ConfigError, DimensionMismatchError, FormatError

logger = logging.getLogger(__name__)

FLO_MAGIC = 202021.25
MIN_PYRAMID_SIZE = 8
DET_EPSILON = 1e-18


@dataclass(frozen=True)
class FlowEstimatorConfig:
    pyramid_levels: int = 4
    iterations_per_level: int = 3
    window_radius: int = 7
    regularization: float = 1e-4

    def __post_init__(self):
        if self.pyramid_levels < 1:
            raise ConfigError(f"pyramid_levels debe ser ≥ 1, recibido {self.pyramid_levels}")
        if self.iterations_per_level < 1:
            raise ConfigError(f"iterations_per_level debe ser ≥ 1, recibido {self.iterations_per_level}")
        if self.window_radius < 1:
            raise ConfigError(f"window_radius debe ser ≥ 1, recibido {self.window_radius}")
        if not self.regularization >= 0:
            raise ConfigError(f"regularization debe ser ≥ 0, recibido {self.regularization}")


def _to_gray(frame):
    return frame.data.mean(axis=2)


def build_pyramid(image, levels):
    """Pirámide gaussiana, de fina a gruesa. Se detiene antes de bajar de 8 px."""
    pyramid = [image]
    while len(pyramid) < levels:
        coarser = gaussian_filter(pyramid[-1], sigma=1.0, mode='nearest')[::2, ::2]
        if min(coarser.shape) < MIN_PYRAMID_SIZE:
            break
        pyramid.append(coarser)
    return pyramid


def _refine(src, dst, flow, cfg):
    """Iteraciones de Gauss-Newton por ventanas sobre un nivel de la pirámide.

    Cada iteración linealiza dst alrededor de p + f(p) y resuelve el flujo
    completo de la ventana, no un incremento. Los gradientes son el promedio
    de los de src en p y los de dst en p + f(p); las muestras que caen fuera
    del frame pesan cero. La regularización tira hacia la estimación actual.
    """
    h, w = src.shape
    xs, ys = pixel_grid(w, h)
    size = 2 * cfg.window_radius + 1
    lam = cfg.regularization
    src_gx, src_gy = image_gradients(src)
    dst_stack = np.stack([dst, *image_gradients(dst)], axis=-1)

    for _ in range(cfg.iterations_per_level):
        sx = xs + flow[..., 0]
        sy = ys + flow[..., 1]
        inside = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
        warped, dst_gx, dst_gy = np.moveaxis(sample_bilinear(dst_stack, sx, sy), -1, 0)
        ix = np.where(inside, 0.5 * (src_gx + dst_gx), 0.0)
        iy = np.where(inside, 0.5 * (src_gy + dst_gy), 0.0)
        # ∇·f_nuevo ≈ ∇·f + (src − dst(p + f))
        target = ix * flow[..., 0] + iy * flow[..., 1] + (src - warped)

        sxx = uniform_filter(ix * ix, size=size, mode='nearest') + lam
        sxy = uniform_filter(ix * iy, size=size, mode='nearest')
        syy = uniform_filter(iy * iy, size=size, mode='nearest') + lam
        bx = uniform_filter(ix * target, size=size, mode='nearest') + lam * flow[..., 0]
        by = uniform_filter(iy * target, size=size, mode='nearest') + lam * flow[..., 1]

        det = sxx * syy - sxy * sxy
        solvable = det > DET_EPSILON
        safe_det = np.where(solvable, det, 1.0)
        u = np.where(solvable, (syy * bx - sxy * by) / safe_det, flow[..., 0])
        v = np.where(solvable, (sxx * by - sxy * bx) / safe_det, flow[..., 1])
        flow = np.stack([u, v], axis=-1)
    return flow


def estimate_flow(src, dst, cfg=None):
    """Flujo denso f tal que dst(p + f(p)) ≈ src(p).

    Pirámide gaussiana; en cada nivel, refinamiento iterativo por mínimos
    cuadrados en ventanas (2r+1)², inicializado con el flujo del nivel más
    grueso escalado. Determinista.
    """
    cfg = cfg or FlowEstimatorConfig()
    require_same_size(src, dst, what='frames')
    if src.channels != dst.channels:
        raise DimensionMismatchError(
            f"Los frames tienen distinta cantidad de canales: {src.channels} vs {dst.channels}")

    src_pyr = build_pyramid(_to_gray(src), cfg.pyramid_levels)
    dst_pyr = build_pyramid(_to_gray(dst), cfg.pyramid_levels)

    flow = np.zeros(src_pyr[-1].shape + (2,))
    for level in range(len(src_pyr) - 1, -1, -1):
        h, w = src_pyr[level].shape
        if flow.shape[:2] != (h, w):
            prev_h, prev_w = flow.shape[:2]
            flow = resample_bilinear(flow, w, h)
            flow[..., 0] *= w / prev_w
            flow[..., 1] *= h / prev_h
        flow = _refine(src_pyr[level], dst_pyr[level], flow, cfg)

    logger.debug(f"Flujo estimado {src.width}×{src.height}, {len(src_pyr)} niveles, "
                 f"|f| medio {np.hypot(flow[..., 0], flow[..., 1]).mean():.3f}")
    return FlowField(flow)


# ==================== Archivos .flo ====================

def write_flow(field, path):
    """Escribe un .flo: magic float32, ancho y alto int32, (u, v) float32 por píxel."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = np.array([FLO_MAGIC], dtype='<f4').tobytes() + np.array([field.width, field.height], dtype='<i4').tobytes()
    payload = np.ascontiguousarray(field.vectors, dtype='<f4').tobytes()
    path.write_bytes(header + payload)


def read_flow(path):
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No existe el archivo de flujo: {path}")
    raw = path.read_bytes()
    if len(raw) < 12:
        raise FormatError(f"{path}: archivo .flo truncado ({len(raw)} bytes)")

    magic = np.frombuffer(raw, dtype='<f4', count=1)[0]
    if magic != np.float32(FLO_MAGIC):
        raise FormatError(f"{path}: magic inválido {magic} (se esperaba {FLO_MAGIC})")

    width, height = (int(v) for v in np.frombuffer(raw, dtype='<i4', count=2, offset=4))
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: dimensiones no positivas {width}×{height}")

    expected = 12 + 8 * width * height
    if len(raw) != expected:
        raise FormatError(f"{path}: se esperaban {expected} bytes para {width}×{height}, hay {len(raw)}")

    vectors = np.frombuffer(raw, dtype='<f4', offset=12).reshape(height, width, 2)
    return FlowField(vectors.astype(np.float64))
