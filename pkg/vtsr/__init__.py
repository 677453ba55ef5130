"""Interpolación temporal de video con modelo de movimiento cuadrático."""
