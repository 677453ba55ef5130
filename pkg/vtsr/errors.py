# vtsr/errors.py


class VtsrError(Exception):
    """Error base del motor de interpolación."""


class ConfigError(VtsrError, ValueError):
    """Configuración inválida o combinación de opciones inconsistente."""


class FormatError(VtsrError, ValueError):
    """Archivo con formato no soportado (PNG o .flo)."""


class DimensionMismatchError(VtsrError, ValueError):
    """Los campos o frames no comparten dimensiones."""


class LayoutError(VtsrError):
    """Estructura de dataset mal formada."""


class SyntheticSpecError(VtsrError, ValueError):
    """Especificación de escena sintética inválida."""


class PipelineError(VtsrError):
    """Fallo al interpolar un intervalo; el mensaje nombra secuencia e intervalo."""
