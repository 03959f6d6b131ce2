"""Hot kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built; set
``DYNORACLE_BACKEND=python`` to force the numpy implementation.
``BACKEND`` names the active one.
"""
import os

from . import _pykernels

CONVERGED = _pykernels.CONVERGED
MAX_ITERS = _pykernels.MAX_ITERS
DIVERGED = _pykernels.DIVERGED

_NAMES = (
    "jacobi_eigvalsh",
    "cholesky_lower",
    "pdgm_quadratic",
    "state_space_quadratic",
    "lmi_min_margin",
)

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def available_backends():
    """Names of the backends importable in this environment."""
    return ["python"] if _ckernels is None else ["cython", "python"]


def get_backend(name):
    """Module implementing the kernels for backend ``name``."""
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


_requested = os.environ.get("DYNORACLE_BACKEND", "").strip().lower()
if _requested == "python" or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "cython"
_impl = get_backend(BACKEND)

jacobi_eigvalsh = _impl.jacobi_eigvalsh
cholesky_lower = _impl.cholesky_lower
pdgm_quadratic = _impl.pdgm_quadratic
state_space_quadratic = _impl.state_space_quadratic
lmi_min_margin = _impl.lmi_min_margin
