"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``HIGHERLOCAL_KERNEL=py`` or ``=c`` to force a choice; the default is the
compiled kernel if the extension imported cleanly.
"""

import os

from . import _kernel_py

_choice = os.environ.get("HIGHERLOCAL_KERNEL", "").lower()

_impl = None
if _choice != "py":
    try:
        from . import _core as _impl
    except ImportError:
        if _choice == "c":
            raise ImportError(
                "HIGHERLOCAL_KERNEL=c requested but higherlocal._core is not built"
            )
        _impl = None
if _impl is None:
    _impl = _kernel_py

conv_trunc = _impl.conv_trunc
poly_mul_mod = _impl.poly_mul_mod
KERNEL_NAME = "compiled" if _impl.IS_COMPILED else "pure-python"


def available_kernels():
    """Return {name: module} for every kernel importable in this session."""
    impls = {"pure-python": _kernel_py}
    try:
        from . import _core
        impls["compiled"] = _core
    except ImportError:
        pass
    return impls
