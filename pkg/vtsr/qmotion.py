# vtsr/qmotion.py
"""
Modelo de movimiento cuadrático por píxel: x(t) = x0 + v0·t + ½·a·t².

Con los flujos desde I0 hacia I-1, I1 e I2 el modelo da:
    f(0→-1) = -v0 + ½a
    f(0→1)  =  v0 + ½a
    f(0→2)  = 2v0 + 2a
El ajuste de dos flujos es exacto; el de tres se resuelve por mínimos
cuadrados y se mezcla con el primero según la consistencia de aceleraciones.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .core import FlowField, as_time_fraction, require_same_size
from .errors import ConfigError, DimensionMismatchError

logger = logging.getLogger(__name__)

# Filas: f(0→-1), f(0→1), f(0→2); columnas: v0, a
LSE_MATRIX = np.array([[-1.0, 0.5],
                       [1.0, 0.5],
                       [2.0, 2.0]])

# (AᵀA)⁻¹Aᵀ con AᵀA = [[6, 4], [4, 4.5]], det 11
LSE_NUMERATOR = np.array([[-6.5, 2.5, 1.0],
                          [7.0, -1.0, 4.0]])
LSE_DENOMINATOR = 11.0
LSE_PSEUDO_INVERSE = LSE_NUMERATOR / LSE_DENOMINATOR

CONSISTENCY_RULES = ('pairwise-dot-positive', 'always')
RECTIFIER_SCOPES = ('pixel', 'frame')


@dataclass(frozen=True, eq=False)
class MotionField:
    """Velocidad inicial v0 (px/frame) y aceleración a (px/frame²) por píxel."""
    v0: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        v0 = np.array(self.v0, dtype=np.float64)
        a = np.array(self.a, dtype=np.float64)
        if v0.shape != a.shape or v0.ndim != 3 or v0.shape[2] != 2:
            raise DimensionMismatchError(f"v0 {v0.shape} y a {a.shape} deben ser H×W×2 iguales")
        if not (np.all(np.isfinite(v0)) and np.all(np.isfinite(a))):
            raise ValueError("MotionField con componentes no finitas")
        v0.flags.writeable = False
        a.flags.writeable = False
        object.__setattr__(self, 'v0', v0)
        object.__setattr__(self, 'a', a)

    @property
    def width(self):
        return self.v0.shape[1]

    @property
    def height(self):
        return self.v0.shape[0]

    @property
    def size(self):
        return self.width, self.height


@dataclass(frozen=True)
class RectifierConfig:
    omega: float = 5.0
    gamma: float = 1.0
    consistency: str = 'pairwise-dot-positive'
    scope: str = 'pixel'

    def __post_init__(self):
        if not self.omega > 0:
            raise ConfigError(f"omega debe ser > 0, recibido {self.omega}")
        if not self.gamma >= 0:
            raise ConfigError(f"gamma debe ser ≥ 0, recibido {self.gamma}")
        if self.consistency not in CONSISTENCY_RULES:
            raise ConfigError(f"Regla de consistencia desconocida: '{self.consistency}'")
        if self.scope not in RECTIFIER_SCOPES:
            raise ConfigError(f"Alcance de rectificación desconocido: '{self.scope}'")


def fit_two_frame(f_0_to_m1, f_0_to_1):
    """Predicción original: solución única de las dos primeras filas del modelo."""
    require_same_size(f_0_to_m1, f_0_to_1)
    fm1, f1 = f_0_to_m1.vectors, f_0_to_1.vectors
    return MotionField(v0=(f1 - fm1) * 0.5, a=f1 + fm1)


def fit_lse(f_0_to_m1, f_0_to_1, f_0_to_2):
    """Ajuste por mínimos cuadrados de (v0, a) con los tres flujos."""
    require_same_size(f_0_to_m1, f_0_to_1, f_0_to_2)
    b = np.stack([f_0_to_m1.vectors, f_0_to_1.vectors, f_0_to_2.vectors])
    solution = np.tensordot(LSE_NUMERATOR, b, axes=1) / LSE_DENOMINATOR
    return MotionField(v0=solution[0], a=solution[1])


def lse_residual(motion, f_0_to_m1, f_0_to_1, f_0_to_2):
    """Norma por píxel de A·x − b (0 bajo movimiento cuadrático exacto)."""
    require_same_size(motion, f_0_to_m1, f_0_to_1, f_0_to_2)
    b = np.stack([f_0_to_m1.vectors, f_0_to_1.vectors, f_0_to_2.vectors])
    x = np.stack([motion.v0, motion.a])
    r = np.tensordot(LSE_MATRIX, x, axes=1) - b
    return np.sqrt(np.sum(r * r, axis=(0, 3)))


def accelerations(f_0_to_m1, f_0_to_1, f_0_to_2):
    """Las tres estimaciones de aceleración; coinciden bajo movimiento exacto."""
    require_same_size(f_0_to_m1, f_0_to_1, f_0_to_2)
    fm1, f1, f2 = f_0_to_m1.vectors, f_0_to_1.vectors, f_0_to_2.vectors
    a1 = fm1 + f1
    a2 = (2.0 * fm1 + f2) / 3.0
    a3 = f2 - 2.0 * f1
    return FlowField(a1), FlowField(a2), FlowField(a3)


def alpha_weight(z, cfg=None):
    """α(z) = ½(1 − tanh(ω(z − γ))), evaluada como expit(−2ω(z − γ)).

    Acepta escalares o arreglos; z debe ser ≥ 0.
    """
    cfg = cfg or RectifierConfig()
    z_arr = np.asarray(z, dtype=np.float64)
    if np.any(z_arr < 0):
        raise ValueError("alpha_weight requiere z ≥ 0")
    alpha = expit(-2.0 * cfg.omega * (z_arr - cfg.gamma))
    return float(alpha) if alpha.ndim == 0 else alpha


def _pair_consistent(x, y):
    dot = np.sum(x * y, axis=-1)
    zero = ~np.any(x, axis=-1) | ~np.any(y, axis=-1)
    return (dot > 0) | zero


def orientation_consistent(a1, a2, a3, rule='pairwise-dot-positive'):
    """Máscara (o escalar) donde las tres aceleraciones apuntan en la misma dirección."""
    if rule == 'always':
        return np.ones(a1.shape[:-1], dtype=bool)
    return _pair_consistent(a1, a2) & _pair_consistent(a1, a3) & _pair_consistent(a2, a3)


def rectify(ori, lse, a1, a2, a3, cfg=None):
    """Mezcla α·lse + (1−α)·ori donde las aceleraciones son consistentes; ori en el resto."""
    cfg = cfg or RectifierConfig()
    require_same_size(ori, lse, a1, a2, a3)
    acc1, acc2, acc3 = a1.vectors, a2.vectors, a3.vectors

    if cfg.scope == 'frame':
        # Un único α para todo el frame a partir de las aceleraciones medias
        acc1, acc2, acc3 = (acc.mean(axis=(0, 1)) for acc in (acc1, acc2, acc3))

    consistent = orientation_consistent(acc1, acc2, acc3, cfg.consistency)
    z = np.sqrt(np.sum((acc1 - acc2) ** 2, axis=-1))
    alpha = np.asarray(alpha_weight(z, cfg))[..., np.newaxis]

    mask = np.asarray(consistent)[..., np.newaxis]
    v0 = np.where(mask, alpha * lse.v0 + (1.0 - alpha) * ori.v0, ori.v0)
    a = np.where(mask, alpha * lse.a + (1.0 - alpha) * ori.a, ori.a)

    if cfg.scope == 'pixel':
        logger.debug(f"Rectificación: {np.mean(consistent):.1%} de píxeles consistentes")
    return MotionField(v0=v0, a=a)


def linear_motion(f_0_to_1):
    """Modelo de dos frames con a = 0 (velocidad constante)."""
    return MotionField(v0=f_0_to_1.vectors, a=np.zeros_like(f_0_to_1.vectors))


def fit_motion(f_0_to_m1, f_0_to_1, f_0_to_2=None, rectifier=None):
    """Elige el modelo según los vecinos disponibles.

    Sin I-1 se usa el modelo lineal. Sin I2, o sin rectificador, la predicción
    original de dos flujos. Con todo, la predicción rectificada.
    """
    if f_0_to_m1 is None:
        return linear_motion(f_0_to_1)
    ori = fit_two_frame(f_0_to_m1, f_0_to_1)
    if rectifier is None or f_0_to_2 is None:
        return ori
    lse = fit_lse(f_0_to_m1, f_0_to_1, f_0_to_2)
    a1, a2, a3 = accelerations(f_0_to_m1, f_0_to_1, f_0_to_2)
    return rectify(ori, lse, a1, a2, a3, rectifier)


def predict_flow(motion, t):
    """f(0→t) = v0·t + ½·a·t²."""
    t = as_time_fraction(t)
    return FlowField(motion.v0 * t + 0.5 * motion.a * (t * t))


def scale_flow_linear(fwd, bwd, n):
    """Escalado lineal de un par de flujos: (n·fwd, (1−n)·bwd)."""
    n = as_time_fraction(n)
    require_same_size(fwd, bwd)
    return fwd.scaled(n), bwd.scaled(1.0 - n)
