"""Kernel backend selection.

Imports the compiled extension when present, otherwise the pure-Python
fallback. ATTACKSIM_PURE=1 forces the fallback (used by the benchmark and
the backend-parity tests).
"""

import os

if os.environ.get("ATTACKSIM_PURE") == "1":
    from attacksim._kernels import _py as _impl
else:
    try:
        from attacksim._kernels import _c as _impl  # type: ignore[no-redef]
    except ImportError:
        from attacksim._kernels import _py as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND
profile_distances = _impl.profile_distances
scores_from_distances = _impl.scores_from_distances
probabilities_from_scores = _impl.probabilities_from_scores
weighted_index = _impl.weighted_index

__all__ = [
    "BACKEND",
    "profile_distances",
    "scores_from_distances",
    "probabilities_from_scores",
    "weighted_index",
]
