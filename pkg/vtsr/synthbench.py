# vtsr/synthbench.py
"""
Secuencias sintéticas con movimiento conocido analíticamente.

El patrón se traslada según d(t) = v0·t + ½·a·t² y cada frame (o instante
intermedio) se renderiza desde su forma cerrada, nunca warpeando otro frame,
de modo que la verdad no arrastra error de interpolación.
"""
import json
import logging
import math
import time
import tomllib
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .core import Frame, FlowField, pixel_grid, save_frame
from .errors import SyntheticSpecError
from .flow import write_flow
from .fusion import render_fused
from .metrics import FrameResult, MetricConfig, build_report
from .pipeline import FLOW_OFFSETS, PipelineConfig, SequenceWindow, WindowFlows, render_window

logger = logging.getLogger(__name__)

PATTERNS = ('gaussian-blob', 'band-limited-noise', 'ramp')
NOISE_COMPONENTS = 48
NOISE_MARGIN = 8
CHANNEL_GAINS = (1.0, 0.85, 0.7)
TRAJECTORY_SAMPLES = 64


@dataclass(frozen=True)
class SyntheticSceneSpec:
    width: int = 256
    height: int = 256
    pattern: str = 'gaussian-blob'
    sigma: float = 8.0
    amplitude: float = 0.8
    seed: int = 0
    cutoff: float = 0.08
    v0: tuple = (0.0, 0.0)
    a: tuple = (0.0, 0.0)
    frame_count: int = 4
    background: float = 0.1
    channels: int = 3
    origin: tuple = None

    def __post_init__(self):
        object.__setattr__(self, 'v0', tuple(float(c) for c in self.v0))
        object.__setattr__(self, 'a', tuple(float(c) for c in self.a))
        if self.origin is not None:
            object.__setattr__(self, 'origin', tuple(float(c) for c in self.origin))
        if len(self.v0) != 2 or len(self.a) != 2:
            raise SyntheticSpecError("v0 y a deben ser vectores de 2 componentes")
        if self.pattern not in PATTERNS:
            raise SyntheticSpecError(f"Patrón desconocido: '{self.pattern}' (opciones: {', '.join(PATTERNS)})")
        if self.width < 1 or self.height < 1:
            raise SyntheticSpecError(f"Dimensiones inválidas: {self.width}×{self.height}")
        if self.frame_count < 2:
            raise SyntheticSpecError(f"frame_count debe ser ≥ 2, recibido {self.frame_count}")
        if not self.sigma > 0:
            raise SyntheticSpecError(f"sigma debe ser > 0, recibido {self.sigma}")
        if not 0 < self.cutoff <= 0.5:
            raise SyntheticSpecError(f"cutoff debe estar en (0, 0.5] ciclos/px, recibido {self.cutoff}")
        if self.channels not in (1, 3):
            raise SyntheticSpecError(f"channels debe ser 1 o 3, recibido {self.channels}")

    def displacement(self, t):
        """d(t) = v0·t + ½·a·t², en píxeles."""
        return np.array([self.v0[i] * t + 0.5 * self.a[i] * t * t for i in range(2)])


def trajectory_extent(spec):
    """(mínimo, máximo) por eje del desplazamiento sobre t ∈ [0, N−1]."""
    ts = np.linspace(0.0, spec.frame_count - 1, TRAJECTORY_SAMPLES * (spec.frame_count - 1) + 1)
    extra = [-spec.v0[i] / spec.a[i] for i in range(2) if spec.a[i] != 0]
    ts = np.concatenate([ts, [t for t in extra if 0 <= t <= spec.frame_count - 1]])
    path = np.array([spec.displacement(t) for t in ts])
    return path.min(axis=0), path.max(axis=0)


def resolve_origin(spec):
    """Centro del blob en t = 0; por defecto centra la trayectoria en la imagen."""
    if spec.origin is not None:
        return np.array(spec.origin)
    low, high = trajectory_extent(spec)
    center = np.array([(spec.width - 1) / 2.0, (spec.height - 1) / 2.0])
    return center - 0.5 * (low + high)


def check_margins(spec):
    low, high = trajectory_extent(spec)
    if spec.pattern == 'gaussian-blob':
        origin = resolve_origin(spec)
        margin = 2.0 * spec.sigma
        start = origin + low
        end = origin + high
        limits = np.array([spec.width - 1, spec.height - 1])
        if np.any(start < margin) or np.any(end > limits - margin):
            raise SyntheticSpecError(
                f"La trayectoria del blob sale del margen de {margin:g} px "
                f"(centro entre {start.round(2).tolist()} y {end.round(2).tolist()})")
    else:
        span = high - low
        limits = np.array([spec.width, spec.height]) - 2 * NOISE_MARGIN
        if np.any(span > limits):
            raise SyntheticSpecError(
                f"El desplazamiento total {span.round(2).tolist()} excede la imagen menos {NOISE_MARGIN} px por lado")


def _noise_components(spec):
    rng = np.random.default_rng(spec.seed)
    radius = spec.cutoff * np.sqrt(rng.uniform(0.0, 1.0, NOISE_COMPONENTS))
    angle = rng.uniform(0.0, 2.0 * np.pi, NOISE_COMPONENTS)
    phase = rng.uniform(0.0, 2.0 * np.pi, NOISE_COMPONENTS)
    return radius * np.cos(angle), radius * np.sin(angle), phase


def render(spec, t, components=None):
    """Renderiza el patrón desplazado d(t) muestreando la forma continua en los centros de píxel."""
    xs, ys = pixel_grid(spec.width, spec.height)
    dx, dy = spec.displacement(t)

    if spec.pattern == 'gaussian-blob':
        cx, cy = resolve_origin(spec) + np.array([dx, dy])
        r2 = (xs - cx) ** 2 + (ys - cy) ** 2
        base = spec.amplitude * np.exp(-r2 / (2.0 * spec.sigma ** 2))
    elif spec.pattern == 'band-limited-noise':
        kx, ky, phase = components if components is not None else _noise_components(spec)
        s = np.zeros_like(xs)
        for i in range(NOISE_COMPONENTS):
            s += np.cos(2.0 * np.pi * (kx[i] * (xs - dx) + ky[i] * (ys - dy)) + phase[i])
        base = spec.amplitude * (0.5 + 0.5 * np.tanh(s / math.sqrt(NOISE_COMPONENTS / 2.0) / 2.0))
    else:
        base = spec.amplitude * np.clip((xs - dx) / spec.width, 0.0, 1.0)

    gains = CHANNEL_GAINS if spec.channels == 3 else CHANNEL_GAINS[:1]
    return Frame(np.stack([spec.background + g * base for g in gains], axis=-1))


class SyntheticSequence:
    """Frames de una escena sintética con flujos e intermedios exactos."""

    def __init__(self, spec):
        check_margins(spec)
        self.spec = spec
        self._components = _noise_components(spec) if spec.pattern == 'band-limited-noise' else None
        self.frames = [self.render(k) for k in range(spec.frame_count)]

    def render(self, t):
        return render(self.spec, t, self._components)

    def true_flow(self, src_t, dst_t):
        """Flujo constante f(src→dst) = d(dst) − d(src)."""
        dx, dy = self.spec.displacement(dst_t) - self.spec.displacement(src_t)
        return FlowField.constant(self.spec.width, self.spec.height, dx, dy)

    @property
    def true_flows(self):
        """f(0→k) para k ∈ {−1, 1, 2}."""
        return {k: self.true_flow(0, k) for k in (-1, 1, 2)}

    def true_intermediate(self, t):
        return self.render(t)

    def window(self, i):
        frames = self.frames
        return SequenceWindow(
            frames[i - 1] if i >= 1 else None,
            frames[i],
            frames[i + 1],
            frames[i + 2] if i + 2 < len(frames) else None,
        )

    def window_flows(self, i):
        """Flujos verdaderos de la ventana i (solo los que tienen ambos extremos)."""
        n = len(self.frames)
        values = {}
        for name, (src, dst) in FLOW_OFFSETS.items():
            if 0 <= i + src < n and 0 <= i + dst < n:
                values[name] = self.true_flow(i + src, i + dst)
        return WindowFlows(**values)


def generate(spec):
    return SyntheticSequence(spec)


def evaluate_pipeline(spec, cfg=None, flow_source='true', times=(0.25, 0.5, 0.75),
                      metric_cfg=None, interior_only=False, provider=None, name='synthetic'):
    """Corre el pipeline sobre la escena y puntúa contra los intermedios exactos.

    flow_source 'true' inyecta los flujos analíticos (aísla el error del modelo
    de movimiento); 'estimated' estima los flujos. interior_only descarta los
    intervalos sin ambos vecinos. provider activa la fusión de dos escalas.
    """
    if flow_source not in ('true', 'estimated'):
        raise SyntheticSpecError(f"flow_source desconocido: '{flow_source}'")
    cfg = cfg or PipelineConfig()
    metric_cfg = metric_cfg or MetricConfig(crop=8)
    sequence = generate(spec)
    last = spec.frame_count - 1

    results = []
    for i in range(last):
        if interior_only and (i == 0 or i + 1 == last):
            continue
        window = sequence.window(i)
        flows = sequence.window_flows(i) if flow_source == 'true' else None
        for t in times:
            start = time.perf_counter()
            if provider is not None:
                frame = render_fused(window, t, cfg, provider, flows).frame
            else:
                frame = render_window(window, t, cfg, flows).frame
            seconds = time.perf_counter() - start
            results.append(FrameResult(name, f"{i:04d}+{t:.4f}", frame,
                                       sequence.true_intermediate(i + t), seconds, t=t))

    if not results:
        raise SyntheticSpecError("La escena no tiene intervalos evaluables")
    report = build_report(results, 'synthetic', cfg.method, metric_cfg)
    logger.info(f"Escena {spec.pattern} ({cfg.method}, flujos {flow_source}): "
                f"PSNR medio {report.mean_psnr:.2f} dB")
    return report


def emit_dataset(spec, root, sequence_id, stride=4, flow_dir=None):
    """Escribe la secuencia en el layout de dataset: root/<seq>/<8 dígitos>.png.

    Se escriben los frames a resolución temporal completa (t = k/stride); las
    entradas son los múltiplos de stride. Con flow_dir se guardan además los
    flujos verdaderos entre entradas a distancia 1 y 2.
    """
    sequence = generate(spec)
    seq_dir = Path(root) / str(sequence_id)
    total = (spec.frame_count - 1) * stride
    for k in range(total + 1):
        frame = sequence.frames[k // stride] if k % stride == 0 else sequence.render(k / stride)
        save_frame(frame, seq_dir / f"{k:08d}.png")

    if flow_dir is not None:
        flow_seq_dir = Path(flow_dir) / str(sequence_id)
        for i in range(spec.frame_count):
            for j in (i - 2, i - 1, i + 1, i + 2):
                if 0 <= j < spec.frame_count:
                    write_flow(sequence.true_flow(i, j), flow_seq_dir / f"{i * stride:08d}_{j * stride:08d}.flo")

    logger.info(f"Secuencia sintética '{sequence_id}' emitida en {seq_dir} ({total + 1} frames)")
    return seq_dir


def load_scene_spec(path):
    """Lee una SyntheticSceneSpec de un documento TOML o JSON (tabla [scene] opcional)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"No existe la especificación de escena: {path}")
    if path.suffix.lower() == '.toml':
        with open(path, 'rb') as f:
            data = tomllib.load(f)
    else:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    data = data.get('scene', data)

    known = {f.name for f in fields(SyntheticSceneSpec)}
    unknown = set(data) - known
    if unknown:
        raise SyntheticSpecError(f"{path}: claves desconocidas {sorted(unknown)}")
    return SyntheticSceneSpec(**data)
