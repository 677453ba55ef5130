# vtsr/core.py
"""
Tipos de valor (Frame, FlowField), I/O de PNG, remuestreo y gradientes.

Todas las intensidades viven en [0,1] como float64; solo se cuantiza al
guardar. La política de borde es siempre clamp (replicar el borde).
"""
import logging
from dataclasses import dataclass
from functools import singledispatch
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DimensionMismatchError, FormatError

logger = logging.getLogger(__name__)

SUPPORTED_MODES = {'L': 1, 'RGB': 3}


def _readonly(array):
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Frame:
    """Raster H×W×C (C = 1 o 3) de intensidades lineales."""
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, np.newaxis]
        if data.ndim != 3 or data.shape[2] not in (1, 3):
            raise ValueError(f"Frame debe ser H×W×1 o H×W×3, recibido {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError(f"Frame vacío: {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Frame con valores no finitos")
        object.__setattr__(self, 'data', _readonly(data))

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]

    @property
    def channels(self):
        return self.data.shape[2]

    @property
    def size(self):
        return self.width, self.height


@dataclass(frozen=True, eq=False)
class FlowField:
    """Campo H×W de desplazamientos (dx, dy) en píxeles.

    valid_mask es False donde la inversión de flujo dejó un hueco (antes de
    rellenarlo). Por defecto todo es válido.
    """
    vectors: np.ndarray
    valid_mask: np.ndarray = None

    def __post_init__(self):
        vectors = np.array(self.vectors, dtype=np.float64)
        if vectors.ndim != 3 or vectors.shape[2] != 2:
            raise ValueError(f"FlowField debe ser H×W×2, recibido {vectors.shape}")
        if vectors.shape[0] < 1 or vectors.shape[1] < 1:
            raise ValueError(f"FlowField vacío: {vectors.shape}")
        if not np.all(np.isfinite(vectors)):
            raise ValueError("FlowField con componentes no finitas")
        if self.valid_mask is None:
            mask = np.ones(vectors.shape[:2], dtype=bool)
        else:
            mask = np.array(self.valid_mask, dtype=bool)
            if mask.shape != vectors.shape[:2]:
                raise DimensionMismatchError(
                    f"valid_mask {mask.shape} no coincide con el campo {vectors.shape[:2]}")
        object.__setattr__(self, 'vectors', _readonly(vectors))
        object.__setattr__(self, 'valid_mask', _readonly(mask))

    @classmethod
    def zeros(cls, width, height):
        return cls(np.zeros((height, width, 2)))

    @classmethod
    def constant(cls, width, height, dx, dy):
        vectors = np.empty((height, width, 2))
        vectors[..., 0] = dx
        vectors[..., 1] = dy
        return cls(vectors)

    @property
    def height(self):
        return self.vectors.shape[0]

    @property
    def width(self):
        return self.vectors.shape[1]

    @property
    def size(self):
        return self.width, self.height

    def scaled(self, factor):
        return FlowField(self.vectors * factor, self.valid_mask)


def as_time_fraction(t):
    """Valida una fracción temporal t ∈ [0,1] y la devuelve como float."""
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"Fracción temporal fuera de [0,1]: {t}")
    return t


def require_same_size(*items, what='campos'):
    """Lanza DimensionMismatchError si los frames/campos no comparten W×H."""
    sizes = {item.size for item in items if item is not None}
    if len(sizes) > 1:
        raise DimensionMismatchError(f"Los {what} no comparten dimensiones: {sorted(sizes)}")


# ==================== I/O ====================

def load_frame(path):
    """Carga un PNG de 8 bits (gris o RGB) como Frame con intensidades v/255."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No existe el frame: {path}")
    try:
        with Image.open(path) as img:
            if img.format != 'PNG':
                raise FormatError(f"{path}: se esperaba PNG, es {img.format}")
            if img.mode not in SUPPORTED_MODES:
                raise FormatError(
                    f"{path}: modo '{img.mode}' no soportado (solo PNG de 8 bits gris o RGB)")
            array = np.asarray(img, dtype=np.float64)
    except UnidentifiedImageError as e:
        raise FormatError(f"{path}: no es una imagen legible") from e
    return Frame(array / 255.0)


def quantize(frame):
    """round(clamp(v,0,1)·255) con empates lejos de cero, como uint8."""
    return np.floor(np.clip(frame.data, 0.0, 1.0) * 255.0 + 0.5).astype(np.uint8)


def save_frame(frame, path):
    """Guarda el Frame como PNG de 8 bits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = quantize(frame)
    if frame.channels == 1:
        pixels = pixels[:, :, 0]
    Image.fromarray(pixels).save(path, format='PNG')


# ==================== Gradientes ====================

def _axis_gradient(array, axis):
    # Diferencias centrales en el interior, hacia adelante/atrás en los bordes
    if array.shape[axis] < 2:
        return np.zeros_like(array)
    return np.gradient(array, axis=axis)


def image_gradients(array):
    """Devuelve (gx, gy) de un arreglo H×W[×C]."""
    return _axis_gradient(array, 1), _axis_gradient(array, 0)


def edge_map(frame):
    """Magnitud del gradiente por canal, mismas dimensiones que la entrada."""
    gx, gy = image_gradients(frame.data)
    return Frame(np.hypot(gx, gy))


# ==================== Remuestreo ====================

def sample_bilinear(array, x, y):
    """Muestreo bilineal de array (H×W×C) en las posiciones (x, y), con clamp de bordes.

    Se interpola como a + f·(b − a): con f = 0 devuelve el píxel exacto y sobre
    regiones constantes devuelve la constante sin error de redondeo.
    """
    h, w = array.shape[:2]
    x = np.clip(x, 0.0, w - 1)
    y = np.clip(y, 0.0, h - 1)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[..., np.newaxis]
    fy = (y - y0)[..., np.newaxis]
    top = array[y0, x0] + fx * (array[y0, x1] - array[y0, x0])
    bottom = array[y1, x0] + fx * (array[y1, x1] - array[y1, x0])
    return top + fy * (bottom - top)


def pixel_grid(width, height):
    """Coordenadas (xs, ys) de los centros de píxel."""
    ys, xs = np.mgrid[0:height, 0:width]
    return xs.astype(np.float64), ys.astype(np.float64)


def block_average(array):
    """Promedio de bloques 2×2; fila/columna impar final replicada."""
    h, w = array.shape[:2]
    padding = ((0, h % 2), (0, w % 2)) + ((0, 0),) * (array.ndim - 2)
    padded = np.pad(array, padding, mode='edge')
    # Suma por pares: exacta sobre constantes
    return ((padded[0::2, 0::2] + padded[1::2, 0::2])
            + (padded[0::2, 1::2] + padded[1::2, 1::2])) * 0.25


def resample_bilinear(array, target_w, target_h):
    """Remuestrea array H×W×C a target_h×target_w alineando centros de píxel."""
    if target_w < 1 or target_h < 1:
        raise ValueError(f"Dimensiones destino inválidas: {target_w}×{target_h}")
    h, w = array.shape[:2]
    xs = (np.arange(target_w) + 0.5) * (w / target_w) - 0.5
    ys = (np.arange(target_h) + 0.5) * (h / target_h) - 0.5
    grid_y, grid_x = np.meshgrid(ys, xs, indexing='ij')
    return sample_bilinear(array, grid_x, grid_y)


@singledispatch
def downsample2(item):
    """Reduce a la mitad (promedio 2×2). Acepta Frame o FlowField."""
    raise TypeError(f"downsample2 no soporta {type(item).__name__}")


@downsample2.register
def _(frame: Frame):
    if frame.width < 2 or frame.height < 2:
        raise ValueError(f"downsample2 requiere al menos 2×2, recibido {frame.width}×{frame.height}")
    return Frame(block_average(frame.data))


@downsample2.register
def _(flow: FlowField):
    if flow.width < 2 or flow.height < 2:
        raise ValueError(f"downsample2 requiere al menos 2×2, recibido {flow.width}×{flow.height}")
    # Los vectores son desplazamientos en píxeles: se escalan con la grilla
    vectors = block_average(flow.vectors) * 0.5
    valid = block_average(flow.valid_mask.astype(np.float64)) == 1.0
    return FlowField(vectors, valid)


@singledispatch
def upsample2(item, target_w, target_h):
    """Remuestreo bilineal a (target_w, target_h). Acepta Frame o FlowField."""
    raise TypeError(f"upsample2 no soporta {type(item).__name__}")


@upsample2.register
def _(frame: Frame, target_w, target_h):
    return Frame(resample_bilinear(frame.data, target_w, target_h))


@upsample2.register
def _(flow: FlowField, target_w, target_h):
    vectors = resample_bilinear(flow.vectors, target_w, target_h)
    vectors[..., 0] *= target_w / flow.width
    vectors[..., 1] *= target_h / flow.height
    mask = resample_bilinear(flow.valid_mask[..., np.newaxis].astype(np.float64), target_w, target_h)
    return FlowField(vectors, mask[..., 0] == 1.0)
