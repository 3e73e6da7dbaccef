"""Kernel backend selection.

The compiled extension is used when it is importable; otherwise the numpy
fallback steps in.  Set ``NEWSFLOW_PURE_PYTHON=1`` to force the fallback
(useful for benchmarking and for debugging kernel-level differences).

Both backends expose the same six callables:

``dtw_cost(a, b, band=-1)``
    DTW cost (sum of squared differences), Sakoe-Chiba band if ``band >= 0``.
``dtw_cost_path(a, b, band=-1)``
    Cost plus one optimal warp path, ``(L, 2)`` int64.
``pairwise_dtw(x, band=-1)``
    Symmetric cost matrix over the rows of ``x``.
``softdtw_cost(a, b, gamma)`` / ``softdtw_grad(a, b, gamma)``
    Soft-DTW value, and value plus gradient with respect to ``a``.
``paired_jsd_mean(a, b)``
    Mean JSD in bits over rank-paired simplex rows.
"""

import os

if os.environ.get("NEWSFLOW_PURE_PYTHON"):
    from . import _purepy as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _purepy as _impl

BACKEND_NAME = _impl.BACKEND_NAME

dtw_cost = _impl.dtw_cost
dtw_cost_path = _impl.dtw_cost_path
pairwise_dtw = _impl.pairwise_dtw
softdtw_cost = _impl.softdtw_cost
softdtw_grad = _impl.softdtw_grad
paired_jsd_mean = _impl.paired_jsd_mean


def available_backends():
    """Names of the importable kernel implementations."""
    names = ["purepy"]
    try:
        from . import _kernels  # noqa: F401

        names.insert(0, "cython")
    except ImportError:
        pass
    return names
