# vtsr/report_store.py
import json
import os
from datetime import datetime

from config import REPORTS_DIR


def report_filename(task, method, ext='json', reports_dir=REPORTS_DIR):
    """Genera el nombre del archivo de reporte a partir de la tarea y el método."""
    os.makedirs(reports_dir, exist_ok=True)
    return f"{reports_dir}/benchmark_{task}_{method}.{ext}"


def save_report(report, json_path=None, csv_path=None, config=None, extra=None):
    """Guarda el reporte como JSON (con metadata) y como CSV por frame."""
    json_path = json_path or report_filename(report.task, report.method, 'json')
    csv_path = csv_path or report_filename(report.task, report.method, 'csv')

    for path in (json_path, csv_path):
        parent = os.path.dirname(str(path))
        if parent:
            os.makedirs(parent, exist_ok=True)

    # Agregar metadata
    report_data = {
        'generated_at': datetime.now().isoformat(),
        'task': report.task,
        'method': report.method,
        'config': config or {},
        'report': report.to_dict(),
    }
    if extra:
        report_data.update(extra)

    with open(json_path, 'w', encoding='utf-8') as f:
        json.dump(report_data, f, indent=2, ensure_ascii=False)
    report.to_csv(csv_path)

    print(f"💾 Reporte guardado: {os.path.basename(str(json_path))}, {os.path.basename(str(csv_path))}")
    return json_path, csv_path


def load_report(json_path):
    """Carga un reporte JSON guardado con save_report; None si no existe o está corrupto."""
    if not os.path.exists(json_path):
        return None

    try:
        with open(json_path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        print(f"⚠️  Error al leer reporte: {e}")
        return None
