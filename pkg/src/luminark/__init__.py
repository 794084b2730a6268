# Luminark: certified patch-luminance image watermarking
__version__ = "0.1.0"

__all__ = ["__version__"]
