# config.py - Configuración centralizada de rutas y entorno para el proyecto VTSR
import os
from dotenv import load_dotenv

# Variables de entorno (.env opcional)
load_dotenv()

# Rutas de directorios
PERSISTENT_DIR = 'persistent'
DATA_DIR = 'persistent/data'
OUTPUT_DIR = os.getenv('VTSR_OUTPUT_DIR', 'persistent/output')
REPORTS_DIR = f'{OUTPUT_DIR}/reports'
VISUALIZACIONES_DIR = f'{OUTPUT_DIR}/visualizaciones'
FLOWS_DIR = f'{DATA_DIR}/flows'

# Paralelismo por secuencia; los resultados no dependen de este valor
THREADS = max(1, int(os.getenv('VTSR_THREADS', '1')))

LOG_LEVEL = os.getenv('VTSR_LOG_LEVEL', 'INFO').upper()
