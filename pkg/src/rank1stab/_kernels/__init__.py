"""Kernel backend selection.

The compiled Cython module is preferred; set ``RANK1_PURE_PYTHON=1`` to force
the numpy reference implementation, which is also used automatically when the
extension is unavailable.
"""

import os

if os.environ.get("RANK1_PURE_PYTHON"):
    from . import pyref as impl

    BACKEND = "python"
else:
    try:
        from . import _core as impl

        BACKEND = "compiled"
    except ImportError:
        from . import pyref as impl

        BACKEND = "python"

jacobi_eig = impl.jacobi_eig
lu_factor = impl.lu_factor
lu_solve = impl.lu_solve
zlu_factor = impl.zlu_factor
zlu_solve = impl.zlu_solve
rk4_full = impl.rk4_full
rk4_reduced = impl.rk4_reduced
