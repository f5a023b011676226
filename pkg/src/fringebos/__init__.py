"""fringebos: carrier-fringe demodulation toolkit for background-oriented
schlieren flow visualization."""

from .raster import ComplexField, RealField, export_png, read_raster, write_raster

__all__ = ["RealField", "ComplexField", "read_raster", "write_raster", "export_png"]

__version__ = "0.1.0"
