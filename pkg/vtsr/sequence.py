# vtsr/sequence.py
"""
Orquestación a nivel de secuencia: layout del dataset, configuración de
corrida, submuestreo x2/x4, interpolación de secuencias completas y
benchmark con reporte.
"""
import json
import logging
import re
import time
import tomllib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from tqdm import tqdm

from config import OUTPUT_DIR, THREADS
from .base_mask import BaseMaskProvider
from .core import load_frame, save_frame
from .errors import ConfigError, LayoutError, PipelineError
from .flow import FlowEstimatorConfig, estimate_flow, read_flow
from .fusion import ConstantMask, make_mask_provider, render_fused
from .metrics import TASK_STRIDES, FrameResult, MetricConfig, build_report
from .pipeline import PipelineConfig, SequenceWindow, estimate_window_flows, render_window
from .qmotion import RectifierConfig
from .report_store import report_filename, save_report
from .warp import WarpConfig

logger = logging.getLogger(__name__)

FLOW_SOURCES = ('estimate', 'files')
FRAME_NAME = re.compile(r'^(\d+)\.png$', re.IGNORECASE)


def frame_name(number):
    return f"{number:08d}.png"


def flow_name(src_number, dst_number):
    return f"{src_number:08d}_{dst_number:08d}.flo"


def list_frames(directory):
    """Frames numerados de un directorio como lista ordenada de (número, ruta)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise LayoutError(f"No existe el directorio de frames: {directory}")
    frames = []
    for path in directory.iterdir():
        if path.suffix.lower() != '.png':
            continue
        match = FRAME_NAME.match(path.name)
        if not match:
            raise LayoutError(f"Nombre de frame no numérico: {path}")
        frames.append((int(match.group(1)), path))
    frames.sort()
    if len(frames) < 2:
        raise LayoutError(f"Se necesitan al menos 2 frames en {directory}, hay {len(frames)}")
    return frames


@dataclass(frozen=True)
class DatasetLayout:
    """root/<secuencia>/<8 dígitos>.png a la tasa de la verdad.

    frame_rate_stride es la distancia entre entradas medida en frames de la
    verdad (4 para 15 → 60 fps, 2 para 15 → 30 fps).
    """
    root: Path
    frame_rate_stride: int = 4

    def __post_init__(self):
        object.__setattr__(self, 'root', Path(self.root))
        if self.frame_rate_stride not in (2, 4):
            raise ConfigError(f"frame_rate_stride debe ser 2 o 4, recibido {self.frame_rate_stride}")

    def sequences(self):
        if not self.root.is_dir():
            raise LayoutError(f"No existe la raíz del dataset: {self.root}")
        names = sorted(p.name for p in self.root.iterdir() if p.is_dir())
        if not names:
            raise LayoutError(f"La raíz del dataset no contiene secuencias: {self.root}")
        return names

    def frame_paths(self, sequence):
        return dict(list_frames(self.root / sequence))


@dataclass(frozen=True)
class RunConfig:
    task: str = 'x4'
    flow_source: str = 'estimate'
    flow_dir: Path = None
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    fusion: bool = False
    mask: BaseMaskProvider = field(default_factory=ConstantMask)
    metrics: MetricConfig = field(default_factory=MetricConfig)
    output_dir: Path = Path(OUTPUT_DIR)
    report_csv: Path = None
    report_json: Path = None
    emit_edges: bool = False
    threads: int = THREADS

    def __post_init__(self):
        if self.task not in TASK_STRIDES:
            raise ConfigError(f"Tarea desconocida: '{self.task}' (opciones: {', '.join(TASK_STRIDES)})")
        if self.flow_source not in FLOW_SOURCES:
            raise ConfigError(f"flow_source desconocido: '{self.flow_source}'")
        if self.flow_source == 'files':
            if self.flow_dir is None:
                raise ConfigError("flow_source 'files' requiere flow_dir")
            if not Path(self.flow_dir).is_dir():
                raise ConfigError(f"No existe el directorio de flujos: {self.flow_dir}")
        if self.threads < 1:
            raise ConfigError(f"threads debe ser ≥ 1, recibido {self.threads}")

    @property
    def stride(self):
        return TASK_STRIDES[self.task]

    def describe(self):
        """Vista serializable para la metadata del reporte."""
        return {
            'task': self.task,
            'flow_source': self.flow_source,
            'flow_dir': None if self.flow_dir is None else str(self.flow_dir),
            'pipeline': asdict(self.pipeline),
            'fusion': self.fusion,
            'mask': self.mask.describe(),
            'metrics': asdict(self.metrics),
            'emit_edges': self.emit_edges,
        }


# ==================== Carga de configuración ====================

TOP_LEVEL_KEYS = {'task', 'flow_source', 'flow_dir', 'method', 'rectify', 'post_smooth_sigma',
                  'output_dir', 'report_csv', 'report_json', 'emit_edges', 'threads'}
SECTIONS = {
    'flow': FlowEstimatorConfig,
    'rectifier': RectifierConfig,
    'warp': WarpConfig,
    'metrics': MetricConfig,
}
FUSION_KEYS = {'enabled', 'mask', 'c', 'lambda'}


def _section(data, name, allowed):
    values = data.get(name, {})
    if not isinstance(values, dict):
        raise ConfigError(f"La sección [{name}] debe ser una tabla")
    unknown = set(values) - allowed
    if unknown:
        raise ConfigError(f"Claves desconocidas en [{name}]: {sorted(unknown)}")
    return values


def run_config_from_dict(data, overrides=None):
    """Construye RunConfig desde un dict con secciones [flow] [rectifier] [warp] [fusion] [metrics].

    overrides usa claves planas ('task') o con punto ('flow.window_radius');
    los valores None se ignoran.
    """
    data = {k: (dict(v) if isinstance(v, dict) else v) for k, v in (data or {}).items()}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if '.' in key:
            section, name = key.split('.', 1)
            data.setdefault(section, {})[name] = value
        else:
            data[key] = value

    unknown = set(data) - TOP_LEVEL_KEYS - set(SECTIONS) - {'fusion'}
    if unknown:
        raise ConfigError(f"Claves de configuración desconocidas: {sorted(unknown)}")

    stages = {}
    for name, cls in SECTIONS.items():
        values = _section(data, name, {f.name for f in fields(cls)})
        try:
            stages[name] = cls(**values)
        except TypeError as e:
            raise ConfigError(f"[{name}]: {e}") from e

    fusion = _section(data, 'fusion', FUSION_KEYS)
    mask = make_mask_provider(fusion.get('mask', 'constant'), fusion.get('c', 1.0), fusion.get('lambda', 10.0))

    pipeline = PipelineConfig(
        method=data.get('method', 'quadratic'),
        flow=stages['flow'],
        rectify=bool(data.get('rectify', True)),
        rectifier=stages['rectifier'],
        warp=stages['warp'],
        post_smooth_sigma=float(data.get('post_smooth_sigma', 0.0)),
    )

    def optional_path(key):
        return None if data.get(key) is None else Path(data[key])

    return RunConfig(
        task=data.get('task', 'x4'),
        flow_source=data.get('flow_source', 'estimate'),
        flow_dir=optional_path('flow_dir'),
        pipeline=pipeline,
        fusion=bool(fusion.get('enabled', False)),
        mask=mask,
        metrics=stages['metrics'],
        output_dir=Path(data.get('output_dir', OUTPUT_DIR)),
        report_csv=optional_path('report_csv'),
        report_json=optional_path('report_json'),
        emit_edges=bool(data.get('emit_edges', False)),
        threads=int(data.get('threads', THREADS)),
    )


def load_config_file(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"No existe el archivo de configuración: {path}")
    try:
        if path.suffix.lower() == '.toml':
            with open(path, 'rb') as f:
                return tomllib.load(f)
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"{path}: {e}") from e


def build_run_config(config_path=None, overrides=None):
    data = load_config_file(config_path) if config_path else {}
    return run_config_from_dict(data, overrides)


# ==================== Submuestreo ====================

@dataclass(frozen=True)
class TargetFrame:
    item: object
    interval: int
    t: float
    index: int


def subsample(frames, stride):
    """Separa entradas (cada stride-ésimo elemento) de objetivos (los omitidos, con su t)."""
    if stride not in (2, 4):
        raise ValueError(f"stride debe ser 2 o 4, recibido {stride}")
    frames = list(frames)
    if len(frames) < stride + 1:
        raise ValueError(f"Se necesitan al menos {stride + 1} frames para stride {stride}, hay {len(frames)}")

    inputs = frames[::stride]
    targets = []
    for interval in range(len(inputs) - 1):
        for k in range(1, stride):
            index = interval * stride + k
            targets.append(TargetFrame(frames[index], interval, k / stride, index))
    return inputs, targets


# ==================== Fuentes de flujo ====================

class FlowCache:
    """Estima cada par (origen, destino) de la secuencia una sola vez."""

    def __init__(self, frames, cfg):
        self.frames = frames
        self.cfg = cfg
        self._flows = {}

    def __call__(self, src, dst):
        key = (src, dst)
        if key not in self._flows:
            self._flows[key] = estimate_flow(self.frames[src], self.frames[dst], self.cfg)
        return self._flows[key]


class FlowFileSource:
    """Lee flujos precalculados <flow_dir>/<secuencia>/<origen>_<destino>.flo."""

    def __init__(self, flow_dir, sequence, numbers):
        self.directory = Path(flow_dir) / str(sequence)
        self.numbers = list(numbers)

    def __call__(self, src, dst):
        path = self.directory / flow_name(self.numbers[src], self.numbers[dst])
        if not path.exists():
            raise LayoutError(f"Falta el archivo de flujo: {path}")
        return read_flow(path)


# ==================== Interpolación de secuencias ====================

@dataclass
class InterpolatedFrame:
    interval: int
    t: float
    frame: object
    seconds: float
    edges: object = None


def interpolate_sequence(inputs, cfg=None, flow_source=None, name='sequence', progress=False):
    """Interpola todos los instantes objetivo de cada intervalo de la secuencia.

    flow_source(src, dst) con índices absolutos de inputs; por defecto se
    estiman (con caché). El tiempo por frame es el del intervalo completo,
    flujos incluidos, dividido por sus frames; no incluye E/S.
    """
    cfg = cfg or RunConfig()
    inputs = list(inputs)
    if len(inputs) < 2:
        raise LayoutError(f"Secuencia '{name}': se necesitan al menos 2 frames de entrada")
    flow_source = flow_source or FlowCache(inputs, cfg.pipeline.flow)
    times = [k / cfg.stride for k in range(1, cfg.stride)]
    outputs = []

    for i in tqdm(range(len(inputs) - 1), desc=f"Secuencia {name}", disable=not progress, leave=False):
        try:
            window = SequenceWindow(
                inputs[i - 1] if i >= 1 else None,
                inputs[i],
                inputs[i + 1],
                inputs[i + 2] if i + 2 < len(inputs) else None,
            )
            start = time.perf_counter()
            flows = None
            if cfg.pipeline.method != 'overlay':
                flows = estimate_window_flows(window, cfg.pipeline, lambda src, dst: flow_source(i + src, i + dst))
            rendered = []
            for t in times:
                if cfg.fusion:
                    result = render_fused(window, t, cfg.pipeline, cfg.mask, flows, with_edges=cfg.emit_edges)
                else:
                    result = render_window(window, t, cfg.pipeline, flows, with_edges=cfg.emit_edges)
                rendered.append((t, result))
            seconds = (time.perf_counter() - start) / len(times)
        except Exception as e:
            raise PipelineError(f"Secuencia '{name}', intervalo {i}→{i + 1}: {e}") from e

        for t, result in rendered:
            outputs.append(InterpolatedFrame(i, t, result.frame, seconds, result.edges))
    return outputs


def _timeline(layout, sequence, cfg):
    """Slots (número, ruta o None) a la tasa de la verdad requerida por la tarea."""
    if layout.frame_rate_stride % cfg.stride:
        raise ConfigError(f"La tarea {cfg.task} no es compatible con frame_rate_stride {layout.frame_rate_stride}")
    paths = layout.frame_paths(sequence)
    first, last = min(paths), max(paths)
    slots = [(n, paths.get(n)) for n in range(first, last + 1)]
    return slots[::layout.frame_rate_stride // cfg.stride]


def _benchmark_sequence(layout, sequence, cfg):
    slots = _timeline(layout, sequence, cfg)
    try:
        input_slots, targets = subsample(slots, cfg.stride)
    except ValueError as e:
        raise LayoutError(f"{layout.root / sequence}: {e}") from e

    for number, path in input_slots:
        if path is None:
            raise LayoutError(f"Falta el frame de entrada: {layout.root / sequence / frame_name(number)}")
    inputs = [load_frame(path) for _, path in input_slots]
    numbers = [number for number, _ in input_slots]

    source = None
    if cfg.flow_source == 'files':
        source = FlowFileSource(cfg.flow_dir, sequence, numbers)
    outputs = interpolate_sequence(inputs, cfg, source, name=sequence)

    out_dir = Path(cfg.output_dir) / sequence
    results = []
    for target, produced in zip(targets, outputs):
        number, gt_path = target.item
        save_frame(produced.frame, out_dir / frame_name(number))
        if produced.edges is not None:
            save_frame(produced.edges, Path(cfg.output_dir) / 'edges' / sequence / frame_name(number))
        gt = load_frame(gt_path) if gt_path is not None else None
        results.append(FrameResult(sequence, f"{number:08d}", produced.frame, gt, produced.seconds, t=target.t))
    return results


def benchmark(layout, cfg=None):
    """Corre todas las secuencias, guarda los frames y el reporte CSV/JSON."""
    cfg = cfg or RunConfig()
    sequences = layout.sequences()
    logger.info(f"Benchmark {cfg.task} ({cfg.pipeline.method}) sobre {len(sequences)} secuencias, {cfg.threads} hilos")

    with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
        per_sequence = list(tqdm(executor.map(lambda seq: _benchmark_sequence(layout, seq, cfg), sequences),
                                 total=len(sequences), desc=f"Benchmark {cfg.task}"))

    results = [r for seq_results in per_sequence for r in seq_results]
    report = build_report(results, cfg.task, cfg.pipeline.method, cfg.metrics)

    reports_dir = str(Path(cfg.output_dir) / 'reports')
    json_path = cfg.report_json or report_filename(cfg.task, cfg.pipeline.method, 'json', reports_dir)
    csv_path = cfg.report_csv or report_filename(cfg.task, cfg.pipeline.method, 'csv', reports_dir)
    save_report(report, json_path, csv_path, config=cfg.describe(),
                extra={'dataset': str(layout.root), 'sequences': sequences})
    return report


def interpolate_directory(input_dir, output_dir, cfg=None):
    """Interpola un directorio de frames numerados; las salidas siguen la numeración n + k·gap/stride."""
    cfg = cfg or RunConfig()
    frames = list_frames(input_dir)
    numbers = [n for n, _ in frames]
    for a, b in zip(numbers, numbers[1:]):
        if (b - a) % cfg.stride:
            raise LayoutError(f"{input_dir}: el salto {a}→{b} no es divisible por {cfg.stride}")

    inputs = [load_frame(path) for _, path in frames]
    source = None
    if cfg.flow_source == 'files':
        source = FlowFileSource(cfg.flow_dir, Path(input_dir).name, numbers)
    outputs = interpolate_sequence(inputs, cfg, source, name=Path(input_dir).name, progress=True)

    written = []
    output_dir = Path(output_dir)
    for produced in outputs:
        a, b = numbers[produced.interval], numbers[produced.interval + 1]
        number = a + round(produced.t * (b - a))
        path = output_dir / frame_name(number)
        save_frame(produced.frame, path)
        if produced.edges is not None:
            save_frame(produced.edges, output_dir / 'edges' / frame_name(number))
        written.append(path)
    return written
