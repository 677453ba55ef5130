# vtsr/base_mask.py
from abc import ABC, abstractmethod


class BaseMaskProvider(ABC):
    """Interfaz general para cualquier proveedor de máscara de fusión multiescala."""

    @abstractmethod
    def mask(self, full, low_up):
        """Devuelve M (H×W, valores en [0,1]) a partir de las dos interpolaciones."""
        pass

    @abstractmethod
    def describe(self):
        """Devuelve un dict serializable con el tipo y los parámetros del proveedor."""
        pass
