# analysis/visualizacion_benchmark.py
import matplotlib.pyplot as plt
import seaborn as sns
import pandas as pd
import numpy as np
from matplotlib.colors import hsv_to_rgb
from datetime import datetime
import os
import sys

# Add parent directory to path to import config
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
from config import VISUALIZACIONES_DIR
from vtsr.core import Frame, save_frame
from vtsr.report_store import load_report

OUTPUT_DIR = VISUALIZACIONES_DIR


def cargar_reporte(json_path):
    """Carga el reporte JSON y devuelve (metadata, DataFrame por frame)."""
    data = load_report(json_path)
    if data is None:
        raise FileNotFoundError(f"No se pudo leer el reporte: {json_path}")
    per_frame = pd.DataFrame(data['report']['per_frame'])
    return data, per_frame


def crear_mapa_calor_psnr(per_frame, titulo=''):
    """Mapa de calor de PSNR: una fila por secuencia, una columna por frame interpolado."""
    tabla = per_frame.copy()
    # Posición del frame dentro de su secuencia, para alinear columnas entre secuencias
    tabla['posicion'] = tabla.groupby('sequence').cumcount()
    matriz = tabla.pivot(index='sequence', columns='posicion', values='psnr_db')

    plt.figure(figsize=(14, max(3, 0.5 * len(matriz) + 2)))
    sns.heatmap(
        matriz,
        annot=False,
        cmap='YlOrRd_r',
        cbar_kws={'label': 'PSNR (dB)'},
        linewidths=0.5,
        linecolor='gray'
    )

    plt.title(f'Mapa de Calor - PSNR por frame\n{titulo}', fontsize=16, fontweight='bold', pad=20)
    plt.xlabel('Frame interpolado', fontsize=12, fontweight='bold')
    plt.ylabel('Secuencia', fontsize=12, fontweight='bold')
    plt.tight_layout()

    return plt.gcf()


def crear_grafico_secuencias(per_frame, titulo=''):
    """Gráfico de barras con PSNR medio por secuencia y su desvío estándar."""
    resumen = per_frame.groupby('sequence')['psnr_db'].agg(['mean', 'std']).fillna(0.0)

    plt.figure(figsize=(14, 6))
    colors = sns.color_palette("Blues_d", len(resumen))
    bars = plt.bar(resumen.index.astype(str), resumen['mean'], yerr=resumen['std'],
                   color=colors, edgecolor='black', linewidth=0.5, capsize=4)

    # Añadir valores en las barras
    for bar in bars:
        height = bar.get_height()
        plt.text(
            bar.get_x() + bar.get_width()/2.,
            height,
            f'{height:.2f}',
            ha='center',
            va='bottom',
            fontsize=10,
            fontweight='bold'
        )

    plt.title(f'PSNR medio por secuencia\n{titulo}', fontsize=16, fontweight='bold', pad=20)
    plt.xlabel('Secuencia', fontsize=12, fontweight='bold')
    plt.ylabel('PSNR (dB)', fontsize=12, fontweight='bold')
    plt.grid(axis='y', alpha=0.3, linestyle='--')
    plt.tight_layout()

    return plt.gcf()


def flow_to_rgb(flow, max_magnitude=None):
    """Codificación de color de un flujo: tono = dirección, saturación = magnitud normalizada."""
    u = flow.vectors[..., 0]
    v = flow.vectors[..., 1]
    magnitude = np.hypot(u, v)
    if max_magnitude is None:
        max_magnitude = float(magnitude.max())
    hue = (np.arctan2(-v, -u) / np.pi + 1.0) / 2.0
    saturation = np.clip(magnitude / max_magnitude, 0.0, 1.0) if max_magnitude > 0 else np.zeros_like(magnitude)
    hsv = np.stack([hue, saturation, np.ones_like(magnitude)], axis=-1)
    return hsv_to_rgb(hsv)


def guardar_flujo_png(flow, path, max_magnitude=None):
    """Guarda la codificación de color del flujo como PNG de 8 bits."""
    save_frame(Frame(flow_to_rgb(flow, max_magnitude)), path)
    return path


def crear_visualizaciones(json_path, output_dir=OUTPUT_DIR):
    """Crea todas las visualizaciones del reporte y las guarda."""
    print("📊 Generando visualizaciones del benchmark...\n")

    # Crear directorio de salida
    os.makedirs(output_dir, exist_ok=True)

    data, per_frame = cargar_reporte(json_path)
    titulo = f"Tarea {data['task']} - método {data['method']}"
    print(f"Frames evaluados: {len(per_frame)}")
    print(f"Secuencias: {per_frame['sequence'].nunique()}\n")

    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    prefijo = f"{output_dir}/benchmark_{data['task']}_{data['method']}"
    archivos = []

    fig_calor = crear_mapa_calor_psnr(per_frame, titulo)
    filename_calor = f"{prefijo}_mapa_calor_{timestamp}.png"
    fig_calor.savefig(filename_calor, dpi=300, bbox_inches='tight')
    print(f"  ✅ {filename_calor}")
    plt.close(fig_calor)
    archivos.append(filename_calor)

    fig_barras = crear_grafico_secuencias(per_frame, titulo)
    filename_barras = f"{prefijo}_secuencias_{timestamp}.png"
    fig_barras.savefig(filename_barras, dpi=300, bbox_inches='tight')
    print(f"  ✅ {filename_barras}")
    plt.close(fig_barras)
    archivos.append(filename_barras)

    print(f"\n🎉 Visualizaciones guardadas en '{output_dir}/'")
    print(f"   Total: {len(archivos)} imágenes generadas")
    return archivos
