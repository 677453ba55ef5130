#!/usr/bin/env python3
# -*- coding: utf-8 -*-

import argparse
import logging
import sys

from config import LOG_LEVEL, REPORTS_DIR
from vtsr.core import load_frame
from vtsr.errors import VtsrError
from vtsr.flow import FlowEstimatorConfig, estimate_flow, read_flow, write_flow
from vtsr.sequence import DatasetLayout, build_run_config, interpolate_directory
from vtsr.sequence import benchmark as run_benchmark
from vtsr.synthbench import emit_dataset, evaluate_pipeline, load_scene_spec


# ==================== Flags de configuración ====================

def add_run_flags(parser):
    """Flags que reflejan RunConfig; los no indicados conservan el valor del archivo o el default."""
    parser.add_argument('--config', help='archivo TOML/JSON con la configuración de corrida')
    parser.add_argument('--task', choices=['x2', 'x4'])
    parser.add_argument('--method', choices=['quadratic', 'linear', 'overlay'])
    parser.add_argument('--flow-source', choices=['estimate', 'files'])
    parser.add_argument('--flow-dir')
    parser.add_argument('--output-dir')
    parser.add_argument('--report-csv')
    parser.add_argument('--report-json')
    parser.add_argument('--threads', type=int)

    flow = parser.add_argument_group('flujo óptico')
    flow.add_argument('--pyramid-levels', type=int)
    flow.add_argument('--iterations', type=int)
    flow.add_argument('--window-radius', type=int)
    flow.add_argument('--regularization', type=float)

    motion = parser.add_argument_group('modelo cuadrático')
    motion.add_argument('--no-rectify', action='store_true', help='usa la predicción original de dos flujos')
    motion.add_argument('--omega', type=float)
    motion.add_argument('--gamma', type=float)
    motion.add_argument('--consistency', choices=['pairwise-dot-positive', 'always'])
    motion.add_argument('--rectify-scope', choices=['pixel', 'frame'])

    warp = parser.add_argument_group('warping')
    warp.add_argument('--hole-fill', choices=['outside-in-average', 'nearest-valid'])
    warp.add_argument('--splat-kernel', choices=['bilinear', 'gaussian'])
    warp.add_argument('--splat-sigma', type=float)
    warp.add_argument('--occlusion-weighting', choices=['time-linear', 'hole-mask-scaled'])
    warp.add_argument('--post-smooth', type=float, help='sigma del suavizado final (0 = desactivado)')

    fusion = parser.add_argument_group('fusión multiescala')
    fusion.add_argument('--fusion', action='store_true')
    fusion.add_argument('--mask', choices=['constant', 'agreement'])
    fusion.add_argument('--mask-c', type=float)
    fusion.add_argument('--mask-lambda', type=float)

    metrics = parser.add_argument_group('métricas')
    metrics.add_argument('--metric-color', choices=['rgb', 'luma'])
    metrics.add_argument('--metric-crop', type=int)
    parser.add_argument('--emit-edges', action='store_true', help='guarda mapas de bordes warpeados en edges/')


def run_overrides(args):
    return {
        'task': args.task,
        'method': args.method,
        'flow_source': args.flow_source,
        'flow_dir': args.flow_dir,
        'output_dir': args.output_dir,
        'report_csv': args.report_csv,
        'report_json': args.report_json,
        'threads': args.threads,
        'flow.pyramid_levels': args.pyramid_levels,
        'flow.iterations_per_level': args.iterations,
        'flow.window_radius': args.window_radius,
        'flow.regularization': args.regularization,
        'rectify': False if args.no_rectify else None,
        'rectifier.omega': args.omega,
        'rectifier.gamma': args.gamma,
        'rectifier.consistency': args.consistency,
        'rectifier.scope': args.rectify_scope,
        'warp.hole_fill': args.hole_fill,
        'warp.splat_kernel': args.splat_kernel,
        'warp.sigma': args.splat_sigma,
        'warp.occlusion_weighting': args.occlusion_weighting,
        'post_smooth_sigma': args.post_smooth,
        'fusion.enabled': True if args.fusion else None,
        'fusion.mask': args.mask,
        'fusion.c': args.mask_c,
        'fusion.lambda': args.mask_lambda,
        'metrics.color': args.metric_color,
        'metrics.crop': args.metric_crop,
        'emit_edges': True if args.emit_edges else None,
    }


def flow_config(args):
    values = {
        'pyramid_levels': args.pyramid_levels,
        'iterations_per_level': args.iterations,
        'window_radius': args.window_radius,
        'regularization': args.regularization,
    }
    return FlowEstimatorConfig(**{k: v for k, v in values.items() if v is not None})


def print_report(report):
    print(f"\n📊 Reporte {report.task} ({report.method})")
    print(f"   Frames evaluados: {len(report.per_frame)}")
    print(f"   PSNR medio: {report.mean_psnr:.3f} dB")
    print(f"   SSIM medio: {report.mean_ssim:.4f}")
    print(f"   Tiempo por frame: {report.runtime_per_frame:.3f} s")
    if report.warning_count:
        print(f"⚠️  {report.warning_count} frames sin verdad de referencia (excluidos)")


# ==================== Comandos ====================

def cmd_interpolate(args):
    cfg = build_run_config(args.config, run_overrides(args))
    print(f"🎞️  Interpolando {args.input_dir} ({cfg.task}, {cfg.pipeline.method})...")
    written = interpolate_directory(args.input_dir, args.output_dir, cfg)
    print(f"\n✅ {len(written)} frames interpolados en '{args.output_dir}'")


def cmd_benchmark(args):
    cfg = build_run_config(args.config, run_overrides(args))
    layout = DatasetLayout(args.dataset, args.frame_rate_stride)
    report = run_benchmark(layout, cfg)
    print_report(report)


def cmd_synth(args):
    spec = load_scene_spec(args.spec)
    seq_dir = emit_dataset(spec, args.output_root, args.sequence_id, args.stride, args.flow_dir)
    print(f"✅ Secuencia sintética escrita en '{seq_dir}'")
    if args.flow_dir:
        print(f"💾 Flujos verdaderos en '{args.flow_dir}'")
    if args.evaluate:
        cfg = build_run_config(args.config, run_overrides(args))
        report = evaluate_pipeline(spec, cfg.pipeline, flow_source=args.evaluate)
        print_report(report)


def cmd_flow_estimate(args):
    field = estimate_flow(load_frame(args.src), load_frame(args.dst), flow_config(args))
    write_flow(field, args.output)
    print(f"💾 Flujo guardado: {args.output}")


def cmd_flow_convert(args):
    from analysis.visualizacion_benchmark import guardar_flujo_png
    field = read_flow(args.input)
    guardar_flujo_png(field, args.output, args.max_magnitude)
    print(f"✅ Flujo convertido a imagen: {args.output}")


def cmd_visualizar(args):
    from analysis.visualizacion_benchmark import crear_visualizaciones
    crear_visualizaciones(args.report)


def help():
    print(f"""
Comandos disponibles:

  INTERPOLACIÓN:
  python main.py interpolate <entrada> <salida> [flags]   → interpola un directorio de frames numerados
  python main.py benchmark <dataset> [flags]              → corre el benchmark x2/x4 y guarda el reporte

  ESCENAS SINTÉTICAS:
  python main.py synth <escena.toml> <raíz> [--flow-dir DIR] [--evaluate true|estimated]

  FLUJO ÓPTICO:
  python main.py flow estimate <src.png> <dst.png> <salida.flo>
  python main.py flow convert <entrada.flo> <salida.png>

  REPORTES:
  python main.py visualizar <reporte.json>                → mapas de calor y gráficos del reporte
                                                            (reportes por defecto en {REPORTS_DIR})

  Usa 'python main.py <comando> --help' para ver todos los flags.
""")


def build_parser():
    parser = argparse.ArgumentParser(prog='main.py', add_help=True,
                                     description='Interpolación temporal de video con movimiento cuadrático')
    sub = parser.add_subparsers(dest='command')

    p = sub.add_parser('interpolate', help='interpola un directorio de frames')
    p.add_argument('input_dir')
    p.add_argument('output_dir')
    add_run_flags(p)
    p.set_defaults(func=cmd_interpolate)

    p = sub.add_parser('benchmark', help='benchmark sobre un dataset con verdad de referencia')
    p.add_argument('dataset')
    p.add_argument('--frame-rate-stride', type=int, default=4, choices=[2, 4])
    add_run_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser('synth', help='emite una secuencia sintética en el layout del dataset')
    p.add_argument('spec')
    p.add_argument('output_root')
    p.add_argument('--sequence-id', default='000')
    p.add_argument('--stride', type=int, default=4, choices=[2, 4])
    p.add_argument('--evaluate', choices=['true', 'estimated'], help='además evalúa el pipeline sobre la escena')
    add_run_flags(p)
    p.set_defaults(func=cmd_synth)

    p_flow = sub.add_parser('flow', help='estimación y conversión de flujo óptico')
    flow_sub = p_flow.add_subparsers(dest='flow_command')
    p = flow_sub.add_parser('estimate')
    p.add_argument('src')
    p.add_argument('dst')
    p.add_argument('output')
    p.add_argument('--pyramid-levels', type=int)
    p.add_argument('--iterations', type=int)
    p.add_argument('--window-radius', type=int)
    p.add_argument('--regularization', type=float)
    p.set_defaults(func=cmd_flow_estimate)
    p = flow_sub.add_parser('convert')
    p.add_argument('input')
    p.add_argument('output')
    p.add_argument('--max-magnitude', type=float)
    p.set_defaults(func=cmd_flow_convert)

    p = sub.add_parser('visualizar', help='genera gráficos de un reporte JSON')
    p.add_argument('report')
    p.set_defaults(func=cmd_visualizar)
    return parser


def main(argv=None):
    logging.basicConfig(level=LOG_LEVEL, format='%(asctime)s - %(levelname)s - %(message)s')
    argv = sys.argv[1:] if argv is None else argv

    if not argv or argv[0].lower() in ["help", "-h", "--help"]:
        help()
        return 0

    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, 'func'):
        print(f"❌ Error: Especifica un subcomando para '{args.command}'")
        print("\nUsa 'python main.py help' para ver todos los comandos")
        return 1

    try:
        args.func(args)
    except (VtsrError, FileNotFoundError) as e:
        print(f"❌ Error: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
