"""Backend selection for the numeric kernels.

``HOLDER_AVG_BACKEND`` picks the implementation: ``numba`` (default when
numba imports cleanly) or ``numpy``. ``HOLDER_AVG_THREADS`` caps the worker
count used for Monte-Carlo trials.
"""
import logging
import os

log = logging.getLogger(__name__)

_VALID = ("numba", "numpy")


def _numba_available():
    try:
        import numba  # noqa: F401
    except Exception:  # pragma: no cover - depends on the environment
        return False
    return True


def requested_backend():
    name = os.environ.get("HOLDER_AVG_BACKEND", "").strip().lower()
    if not name:
        return "numba" if _numba_available() else "numpy"
    if name not in _VALID:
        raise ValueError(f"HOLDER_AVG_BACKEND must be one of {_VALID}, got {name!r}")
    if name == "numba" and not _numba_available():
        log.warning("numba requested but not importable; falling back to numpy")
        return "numpy"
    return name


def max_workers():
    raw = os.environ.get("HOLDER_AVG_THREADS", "")
    if raw.strip():
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"HOLDER_AVG_THREADS must be an integer, got {raw!r}")
        return max(1, value)
    return max(1, os.cpu_count() or 1)
