"""Hot loops, compiled when the extension is built, numpy fallback otherwise."""

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

BACKEND = "cython" if _compiled is not None else "python"

girth = _impl.girth
nbw_counts = _impl.nbw_counts
legendre = _impl.legendre
assoc_legendre_table = _impl.assoc_legendre_table
zonal_window_sums = _impl.zonal_window_sums


def backends():
    """Available implementations keyed by name (for tests and benchmarks)."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["cython"] = _compiled
    return out
