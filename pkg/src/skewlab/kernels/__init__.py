"""Hot loops behind a switchable backend.

``SKEWLAB_BACKEND=numpy`` (or a failed numba import) selects the vectorized
numpy fallback; otherwise the numba kernels are used. ``use_backend`` switches
at runtime, which the tests and the benchmark rely on.

Base coordinates are carried as residues ``k`` modulo the safe prime
``LATTICE_MODULUS`` and read as ``k / LATTICE_MODULUS``. Multiplication by l
is then exact, so a simulated orbit of T is a true rational orbit whose
period is at least (LATTICE_MODULUS - 1) / 2, instead of the binary-expansion
collapse to 0 that floating point doubling suffers after ~53 steps.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _numpy

# 2q + 1 with q prime; < 2**57 so that (l + 1) * P < 2**63 for l <= 62
LATTICE_MODULUS = 144115188075851879
MAX_LATTICE_DEGREE = 62

try:
    from . import _numba
except ImportError:  # pragma: no cover
    _numba = None

_BACKENDS = {"numpy": _numpy}
if _numba is not None:
    _BACKENDS["numba"] = _numba

_current = os.environ.get("SKEWLAB_BACKEND", "numba").strip().lower()
if _current not in _BACKENDS:
    _current = "numpy"


def backend_name() -> str:
    return _current


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def use_backend(name: str) -> str:
    """Select the kernel backend; returns the previous name."""
    global _current
    name = name.lower()
    if name not in _BACKENDS:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}")
    prev, _current = _current, name
    return prev


def get():
    return _BACKENDS[_current]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("SKEWLAB_THREADS", "1")))
    except ValueError:
        return 1


def quantize(x) -> np.ndarray:
    """Nearest lattice residue of points in [0, 1)."""
    x = np.asarray(x, dtype=float) % 1.0
    k = np.rint(x * LATTICE_MODULUS).astype(np.int64)
    return k % LATTICE_MODULUS


def to_float(k) -> np.ndarray:
    return np.asarray(k, dtype=np.int64) / LATTICE_MODULUS


def run_sharded(func, shards, threads: int | None = None):
    """Apply ``func`` to each shard, returning results in shard order.

    The shard layout is fixed by the caller, so the merged result does not
    depend on how many threads ran it.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or len(shards) <= 1:
        return [func(s) for s in shards]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, shards))
