import os
from fractions import Fraction
from pathlib import Path


def _env_bool(key: str, default: bool) -> bool:
    value = os.getenv(key)
    if value is None:
        return default
    return value.strip().lower() in {"1", "true", "t", "yes", "y", "on"}


def _env_fraction(key: str, default: str) -> Fraction:
    raw = os.getenv(key, default).strip()
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        return Fraction(default)


def _default_cache_path() -> str:
    return str(Path(__file__).resolve().with_name(".gzfactor_cache.jsonl"))


class Config:
    # Logging
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")

    # Result cache (JSON lines, one record per pair and mode)
    GZ_CACHE: str = os.getenv("GZ_CACHE") or _default_cache_path()
    GZ_CACHE_ENABLED: bool = _env_bool("GZ_CACHE_ENABLED", True)

    # Analytic oracle precision schedule
    GZ_PRECISION_BITS: int = int(os.getenv("GZ_PRECISION_BITS", "128"))
    GZ_PRECISION_STEP: int = int(os.getenv("GZ_PRECISION_STEP", "64"))
    GZ_ROUNDING_GAP: Fraction = _env_fraction("GZ_ROUNDING_GAP", "1/4")
    ORACLE_MAX_DOUBLINGS: int = int(os.getenv("GZ_ORACLE_MAX_DOUBLINGS", "8"))

    # Scans
    GZ_JOBS: int = int(os.getenv("GZ_JOBS", "1"))

    # Quaternion searches
    LAMBDA_BOX_CAP: int = int(os.getenv("GZ_LAMBDA_BOX_CAP", "256"))
    CHOOSE_Q_BOUND: int = int(os.getenv("GZ_CHOOSE_Q_BOUND", "1000000"))
    ENUM_SOLUTION_CAP: int = int(os.getenv("GZ_ENUM_SOLUTION_CAP", "65536"))

config = Config()
