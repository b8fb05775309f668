"""Kernel backend selection: compiled extension when available, pure Python otherwise.

Set FANOKIT_PURE=1 to force the pure backend (used by the benchmark and CI).
"""

import os

from . import pure as _pure

if os.environ.get("FANOKIT_PURE"):
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

dd_exp = _impl.dd_exp
dd_exp_series = _impl.dd_exp_series
dd_exp_weighted = _impl.dd_exp_weighted
compensated_tree_sum = _impl.compensated_tree_sum


def backend_name() -> str:
    return _impl.BACKEND
