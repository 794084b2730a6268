from .metrics import balanced_accuracy, l2_to_nearest, psnr, wilson_interval

__all__ = ["balanced_accuracy", "l2_to_nearest", "psnr", "wilson_interval"]
