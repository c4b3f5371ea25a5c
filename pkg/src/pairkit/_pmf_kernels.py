"""Inner loops for the segment-sum phase-matching integral.

Both kernels evaluate, for every grid point's mismatch dk,

    phi(dk) = sum_j s_j (exp(i dk x_{j+1}) - exp(i dk x_j)) / (i dk)

which is the exact integral of a piecewise-constant orientation profile.
The uniform kernel exploits segments of equal length h: boundary phases are
powers of a single rotor W = exp(i dk h), so each point costs one complex
exponential and one multiply per segment instead of one exponential per
boundary.  Accumulated rotor error after M multiplies is ~M*eps, which for
M ~ 10^4 sits far below the 1e-2 tolerances used downstream.

Numba compiles and parallelizes the loops when available; the numpy
fallbacks are mathematically identical and only used if numba is missing.
"""

from __future__ import annotations

import os

import numpy as np

# The default TBB layer is unusable with older system TBB builds and numba
# then warns on import; OpenMP is always bundled with the manylinux wheels.
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

# |dk| * h below this is treated as the dk -> 0 limit of a segment integral
_SMALL_PHASE = 1e-12


def _pmf_uniform_py(dk_flat, h, signs):
    out = np.empty(dk_flat.size, dtype=np.complex128)
    for p in range(dk_flat.size):
        dk = dk_flat[p]
        ah = dk * h
        if abs(ah) < _SMALL_PHASE:
            total = 0.0
            for m in range(signs.size):
                total += signs[m]
            out[p] = total * h
            continue
        w = complex(np.cos(ah), np.sin(ah))
        seg = (w - 1.0) / complex(0.0, dk)
        acc = 0.0j
        rotor = complex(1.0, 0.0)
        for m in range(signs.size):
            s = signs[m]
            if s != 0:
                acc += s * rotor
            rotor *= w
        out[p] = acc * seg
    return out


def _pmf_general_py(dk_flat, boundaries, signs):
    out = np.empty(dk_flat.size, dtype=np.complex128)
    for p in range(dk_flat.size):
        dk = dk_flat[p]
        if abs(dk) * boundaries[-1] < _SMALL_PHASE:
            total = 0.0
            for j in range(signs.size):
                total += signs[j] * (boundaries[j + 1] - boundaries[j])
            out[p] = total
            continue
        inv = 1.0 / complex(0.0, dk)
        prev = complex(np.cos(dk * boundaries[0]), np.sin(dk * boundaries[0]))
        acc = 0.0j
        for j in range(signs.size):
            ph = dk * boundaries[j + 1]
            cur = complex(np.cos(ph), np.sin(ph))
            s = signs[j]
            if s != 0:
                acc += s * (cur - prev)
            prev = cur
        out[p] = acc * inv
    return out


try:  # pragma: no cover - exercised implicitly everywhere
    import numba

    @numba.njit(parallel=True, cache=True)
    def _pmf_uniform_nb(dk_flat, h, signs):  # noqa: D103
        out = np.empty(dk_flat.size, dtype=np.complex128)
        for p in numba.prange(dk_flat.size):
            dk = dk_flat[p]
            ah = dk * h
            if abs(ah) < _SMALL_PHASE:
                total = 0.0
                for m in range(signs.size):
                    total += signs[m]
                out[p] = total * h
                continue
            w = complex(np.cos(ah), np.sin(ah))
            seg = (w - 1.0) / complex(0.0, dk)
            acc = 0.0j
            rotor = complex(1.0, 0.0)
            for m in range(signs.size):
                s = signs[m]
                if s != 0:
                    acc += s * rotor
                rotor *= w
            out[p] = acc * seg
        return out

    @numba.njit(parallel=True, cache=True)
    def _pmf_general_nb(dk_flat, boundaries, signs):  # noqa: D103
        out = np.empty(dk_flat.size, dtype=np.complex128)
        for p in numba.prange(dk_flat.size):
            dk = dk_flat[p]
            if abs(dk) * boundaries[-1] < _SMALL_PHASE:
                total = 0.0
                for j in range(signs.size):
                    total += signs[j] * (boundaries[j + 1] - boundaries[j])
                out[p] = total
                continue
            inv = 1.0 / complex(0.0, dk)
            prev = complex(np.cos(dk * boundaries[0]), np.sin(dk * boundaries[0]))
            acc = 0.0j
            for j in range(signs.size):
                ph = dk * boundaries[j + 1]
                cur = complex(np.cos(ph), np.sin(ph))
                s = signs[j]
                if s != 0:
                    acc += s * (cur - prev)
                prev = cur
            out[p] = acc * inv
        return out

    pmf_uniform = _pmf_uniform_nb
    pmf_general = _pmf_general_nb
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    pmf_uniform = _pmf_uniform_py
    pmf_general = _pmf_general_py
    HAVE_NUMBA = False
