"""Small dense linear-algebra kernels with a compiled fast path.

The compiled Cython backend is preferred when its extension module built;
otherwise the pure-Python twin is used.  Both expose the same functions with
identical semantics:

``det``, ``det_many``, ``solve``, ``adjugate``, ``sym_eigenvalues``,
``singular_values``, ``mininorm``, ``mininorm_many``, ``spectral_norm``.

``BACKEND`` names the selected implementation ("compiled" or "pure-python").
"""

try:
    from . import _cy as _impl
    BACKEND = "compiled"
except ImportError:
    from . import _py as _impl
    BACKEND = "pure-python"

det = _impl.det
det_many = _impl.det_many
solve = _impl.solve
adjugate = _impl.adjugate
sym_eigenvalues = _impl.sym_eigenvalues
singular_values = _impl.singular_values
mininorm = _impl.mininorm
mininorm_many = _impl.mininorm_many
spectral_norm = _impl.spectral_norm


def backend():
    """Name of the kernel backend selected at import time."""
    return BACKEND
