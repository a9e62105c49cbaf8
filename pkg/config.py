"""
Run configuration, logging setup and JSON config loading.
"""

import json
import logging
import os
import sys
from dataclasses import dataclass, asdict, replace
from typing import Any, Dict, Optional

from errors import ParameterError

LOGGER_NAME = "swallowtail"
LOG_FORMAT = "%(asctime)s | %(levelname)s | %(message)s"


# =========================
# Configuration
# =========================
@dataclass(frozen=True)
class Config:
    # Zero tests on coefficients, traces and closed-form cross-checks
    zero_tol: float = 1e-10
    # Tracelessness of a shifted matrix
    trace_tol: float = 1e-12
    # Root clustering radius (times max(1, max|lambda|))
    cluster_radius: float = 1e-6
    # Pivot threshold for rank decisions (times ||E||)
    rank_tol: float = 1e-8
    # Matching (c, E) in classify
    mismatch_tol: float = 1e-8
    # |Im lambda| below real_tol * scale counts as a real root
    real_tol: float = 1e-8
    # Surface points must satisfy |D| <= mesh_tol * scale^6
    mesh_tol: float = 1e-8
    # Bisection stop in the scanned coordinate
    bisection_tol: float = 1e-10

    # Iteration bounds
    newton_polish_steps: int = 5
    qr_max_sweeps: int = 200
    newton_max_iter: int = 100
    singular_det_tol: float = 1e-10

    # Braiding
    braid_max_halvings: int = 12
    gap_floor: float = 1e-7
    closure_tol: float = 1e-6
    ambiguity_tol: float = 1e-9

    # Multiplies every tolerance above (CLI --tol-scale)
    tol_scale: float = 1.0

    # Runtime
    threads: int = 1
    log_level: str = "INFO"
    log_file: Optional[str] = None

    def scaled(self, name: str) -> float:
        """Tolerance field `name` multiplied by tol_scale."""
        return float(getattr(self, name)) * self.tol_scale

    def with_overrides(self, **overrides: Any) -> "Config":
        known = {k: v for k, v in overrides.items() if v is not None and hasattr(self, k)}
        return replace(self, **known)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


DEFAULT_CONFIG = Config()


def resolve(cfg: Optional[Config]) -> Config:
    return DEFAULT_CONFIG if cfg is None else cfg


# =========================
# Logging
# =========================
def setup_logger(cfg: Optional[Config] = None) -> logging.Logger:
    """Configure the package logger once: console handler plus optional log file."""
    cfg = resolve(cfg)
    logger = logging.getLogger(LOGGER_NAME)
    level = getattr(logging, str(cfg.log_level).upper(), logging.INFO)
    logger.setLevel(level)
    logger.propagate = False

    consoles = [h for h in logger.handlers
                if isinstance(h, logging.StreamHandler) and not isinstance(h, logging.FileHandler)]
    if consoles:
        # stderr may have been swapped since the first call
        for h in consoles:
            h.stream = sys.stderr
    else:
        ch = logging.StreamHandler(sys.stderr)
        ch.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(ch)

    if cfg.log_file:
        for h in list(logger.handlers):
            if isinstance(h, logging.FileHandler):
                logger.removeHandler(h)
                try:
                    h.close()
                except Exception:
                    pass
        folder = os.path.dirname(cfg.log_file)
        if folder:
            os.makedirs(folder, exist_ok=True)
        fh = logging.FileHandler(cfg.log_file, encoding="utf-8")
        fh.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(fh)
        logger.debug(f"Log file handler attached: {cfg.log_file}")

    for h in logger.handlers:
        h.setLevel(level)
    return logger


def get_logger(module: str) -> logging.Logger:
    return logging.getLogger(f"{LOGGER_NAME}.{module}")


# =========================
# JSON files
# =========================
def load_json_file(path: str) -> Dict[str, Any]:
    if not os.path.exists(path):
        raise ParameterError(f"Config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ParameterError(f"Invalid JSON in {path}: {e}") from e
    if not isinstance(data, dict):
        raise ParameterError(f"Config file {path} must hold a JSON object")
    return data
