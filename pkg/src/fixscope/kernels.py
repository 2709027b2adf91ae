"""Backend selection for the hot kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise, or
when ``FIXSCOPE_PURE_PYTHON`` is set to a non-empty value, the numpy versions
in ``_pykernels`` are used. Both expose ``neighbor_sum``,
``neighbor_joint_table`` and ``grouped_entropies`` with identical contracts.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

python_backend: ModuleType = _pykernels
compiled_backend: ModuleType | None
try:
    from . import _ckernels as compiled_backend
except ImportError:
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("FIXSCOPE_PURE_PYTHON"):
    backend = compiled_backend
    BACKEND = "cython"
else:
    backend = python_backend
    BACKEND = "python"

interior_bounds = _pykernels.interior_bounds
neighbor_sum = backend.neighbor_sum
neighbor_joint_table = backend.neighbor_joint_table
grouped_entropies = backend.grouped_entropies
