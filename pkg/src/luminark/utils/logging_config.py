"""Logging for the ``luminark`` command group.

Records go to stderr; stdout carries only results and JSON diagnostics.
"""

import logging
import sys

LOGGER_NAME = "luminark"
CLI_FORMAT = "%(levelname)s: %(message)s"


def setup_cli_logging(verbose: bool = False, quiet: bool = False) -> logging.Logger:
    """Attach one stderr handler to the ``luminark`` logger.

    ``verbose`` enables per-step and per-trial DEBUG records; ``quiet`` keeps
    WARNING and above. Repeated calls replace the handler rather than stacking.
    """
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    else:
        level = logging.INFO

    logger = logging.getLogger(LOGGER_NAME)
    logger.setLevel(level)
    for handler in [h for h in logger.handlers if getattr(h, "_luminark_cli", False)]:
        logger.removeHandler(handler)

    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(CLI_FORMAT))
    handler._luminark_cli = True  # type: ignore[attr-defined]
    logger.addHandler(handler)
    return logger
