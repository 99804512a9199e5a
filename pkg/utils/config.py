import os
import logging
from typing import Callable, TypeVar

import psutil

# -------------------------------------------------
# Helpers
# -------------------------------------------------

T = TypeVar("T")

logging.basicConfig(
    level=os.environ.get("IRSA_LOG_LEVEL", "INFO").strip().upper() or "INFO",
    format='%(asctime)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)


def optional_env(name: str, default: T, cast: Callable[[str], T]) -> T:
    """
    Fetch an optional environment variable, falling back to `default`.

    A value that is present but cannot be parsed fails fast.
    """
    raw = os.environ.get(name)
    if raw is None or not raw.strip() or raw.strip().lower() == "none":
        return default

    try:
        return cast(raw.strip())
    except (TypeError, ValueError) as e:
        raise RuntimeError(
            f"Environment variable '{name}' has an invalid value: {raw!r}"
        ) from e


def default_threads(cap: int = 8) -> int:
    """
    Physical core count, capped. Falls back to 1 when psutil cannot tell.
    """
    cores = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    return max(1, min(cores, cap))

