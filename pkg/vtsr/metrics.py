# vtsr/metrics.py
"""
PSNR, SSIM y reporte de benchmark (por frame, por secuencia y global).
"""
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from skimage.metrics import structural_similarity

from .core import Frame, require_same_size
from .errors import ConfigError

logger = logging.getLogger(__name__)

PSNR_CAP = 99.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])
COLOR_MODES = ('rgb', 'luma')

# Tarea → stride de entrada respecto de la verdad
TASK_STRIDES = {'x2': 2, 'x4': 4}
TASKS = tuple(TASK_STRIDES) + ('synthetic',)

CSV_COLUMNS = ['sequence', 'frame', 'psnr_db', 'ssim']


@dataclass(frozen=True)
class MetricConfig:
    color: str = 'rgb'
    crop: int = 0

    def __post_init__(self):
        if self.color not in COLOR_MODES:
            raise ConfigError(f"Modo de color desconocido: '{self.color}'")
        if self.crop < 0:
            raise ConfigError(f"crop debe ser ≥ 0, recibido {self.crop}")


def prepare(frame, cfg):
    """Aplica recorte de borde y conversión a luma según la configuración."""
    data = frame.data
    if cfg.crop:
        c = cfg.crop
        if data.shape[0] <= 2 * c or data.shape[1] <= 2 * c:
            raise ValueError(f"crop {c} deja vacío un frame de {frame.width}×{frame.height}")
        data = data[c:-c, c:-c]
    if cfg.color == 'luma' and data.shape[2] == 3:
        data = np.tensordot(data, LUMA_WEIGHTS, axes=([2], [0]))[..., np.newaxis]
    return Frame(data)


def psnr(out, gt, cfg=None):
    """10·log10(1/MSE) en escala [0,1]; 99 dB si los frames son idénticos."""
    require_same_size(out, gt, what='frames')
    if cfg is not None:
        out, gt = prepare(out, cfg), prepare(gt, cfg)
    mse = float(np.mean((out.data - gt.data) ** 2))
    if mse == 0.0:
        return PSNR_CAP
    return min(max(10.0 * math.log10(1.0 / mse), 0.0), PSNR_CAP)


def ssim(out, gt, cfg=None):
    """SSIM medio con ventana gaussiana 11×11 (σ = 1.5), solo región válida, promediado por canal."""
    require_same_size(out, gt, what='frames')
    if cfg is not None:
        out, gt = prepare(out, cfg), prepare(gt, cfg)
    if out.width < SSIM_WINDOW or out.height < SSIM_WINDOW:
        raise ValueError(f"SSIM requiere frames de al menos {SSIM_WINDOW}×{SSIM_WINDOW}, "
                         f"recibido {out.width}×{out.height}")
    return float(structural_similarity(
        out.data, gt.data,
        data_range=1.0,
        channel_axis=2,
        gaussian_weights=True,
        sigma=SSIM_SIGMA,
        use_sample_covariance=False,
        K1=SSIM_K1,
        K2=SSIM_K2,
    ))


@dataclass
class FrameResult:
    """Un frame interpolado con su verdad (None si falta) y su tiempo de cómputo."""
    sequence: str
    frame: str
    output: Frame
    ground_truth: Frame = None
    seconds: float = 0.0
    lpips: float = None
    t: float = None


@dataclass
class MetricReport:
    task: str
    per_frame: pd.DataFrame
    runtime_per_frame: float
    missing: list = field(default_factory=list)
    method: str = 'quadratic'

    @property
    def per_sequence(self):
        grouped = self.per_frame.groupby('sequence', sort=True)
        table = pd.DataFrame({
            'frames': grouped['psnr_db'].count(),
            'psnr_mean': grouped['psnr_db'].mean(),
            'psnr_std': grouped['psnr_db'].std(ddof=0),
            'ssim_mean': grouped['ssim'].mean(),
            'ssim_std': grouped['ssim'].std(ddof=0),
        })
        return table

    @property
    def mean_psnr(self):
        return float(self.per_frame['psnr_db'].mean())

    @property
    def mean_ssim(self):
        return float(self.per_frame['ssim'].mean())

    @property
    def warning_count(self):
        return len(self.missing)

    def mean_psnr_at(self, column, value):
        """PSNR medio de los frames cuyo column == value (p. ej. 't' == 0.25)."""
        rows = self.per_frame[self.per_frame[column] == value]
        return float(rows['psnr_db'].mean())

    def csv_frame(self):
        columns = list(CSV_COLUMNS)
        if 'lpips' in self.per_frame and self.per_frame['lpips'].notna().any():
            columns.append('lpips')
        return self.per_frame[columns]

    def to_csv(self, path):
        self.csv_frame().to_csv(path, index=False, float_format='%.6f')

    def to_dict(self):
        per_sequence = {
            str(seq): {k: (int(v) if k == 'frames' else float(v)) for k, v in row.items()}
            for seq, row in self.per_sequence.iterrows()
        }
        return {
            'task': self.task,
            'method': self.method,
            'frames': int(len(self.per_frame)),
            'mean_psnr_db': self.mean_psnr,
            'mean_ssim': self.mean_ssim,
            'runtime_per_frame': self.runtime_per_frame,
            'per_sequence': per_sequence,
            'per_frame': self.csv_frame().to_dict(orient='records'),
            'missing_ground_truth': list(self.missing),
            'warning_count': self.warning_count,
        }


def build_report(results, task, method='quadratic', metric_cfg=None):
    """Puntúa cada resultado contra su verdad y agrega.

    Los resultados sin verdad se listan en missing y se excluyen del promedio.
    """
    if task not in TASKS:
        raise ConfigError(f"Tarea desconocida: '{task}' (opciones: {', '.join(TASKS)})")
    results = list(results)
    if not results:
        raise ValueError("No hay resultados para construir el reporte")

    metric_cfg = metric_cfg or MetricConfig()
    rows = []
    missing = []
    for result in results:
        if result.ground_truth is None:
            missing.append(f"{result.sequence}/{result.frame}")
            continue
        row = {
            'sequence': str(result.sequence),
            'frame': str(result.frame),
            'psnr_db': psnr(result.output, result.ground_truth, metric_cfg),
            'ssim': ssim(result.output, result.ground_truth, metric_cfg),
            'lpips': result.lpips,
            'seconds': result.seconds,
            't': result.t,
        }
        rows.append(row)

    if missing:
        logger.warning(f"{len(missing)} frames sin verdad de referencia, excluidos del reporte")
    if not rows:
        raise ValueError("Ningún resultado tiene verdad de referencia")

    per_frame = pd.DataFrame(rows).sort_values(['sequence', 'frame'], kind='stable').reset_index(drop=True)
    runtime = float(np.mean([r.seconds for r in results]))
    return MetricReport(task=task, per_frame=per_frame, runtime_per_frame=runtime,
                        missing=missing, method=method)
