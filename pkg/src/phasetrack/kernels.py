"""Hot inner loops.

The forward/backward concentration recursion is strictly sequential in the
symbol index, so it is compiled with numba when available. Set
``PHASETRACK_NO_NUMBA=1`` to force the pure-Python/numpy fallback (used by
the benchmark in benchmarks/bench_kernels.py and as a safety hatch).
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("PHASETRACK_NO_NUMBA", "0").lower() in ("1", "true", "yes")

NUMBA_ENABLED = False
if not _DISABLE:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        pass


def _kappa_forward_backward(kappa_gamma, nu_delta):
    """Saturating concentration recursions.

    Forward:  k_a[i+1] = (k_a[i] + k_g[i]) / (1 + nu_delta |k_a[i] + k_g[i]|)
    Backward: mirrored, k_a[0] = k_b[n-1] = 0.
    """
    n = kappa_gamma.shape[0]
    ka = np.zeros(n, dtype=np.complex128)
    kb = np.zeros(n, dtype=np.complex128)
    for i in range(n - 1):
        s = ka[i] + kappa_gamma[i]
        ka[i + 1] = s / (1.0 + nu_delta * abs(s))
    for i in range(n - 1, 0, -1):
        s = kb[i] + kappa_gamma[i]
        kb[i - 1] = s / (1.0 + nu_delta * abs(s))
    return ka, kb


if NUMBA_ENABLED:
    kappa_forward_backward = njit(cache=True, nogil=True)(_kappa_forward_backward)
else:
    kappa_forward_backward = _kappa_forward_backward
