"""Kernel selection: compiled extension if built, NumPy fallback otherwise.

``step_raw`` and ``project`` always come from the reference module (they
are cheap and used for scheme-level tests); the stepping loop and the
geodesic shooting integrator use the compiled versions when available.
"""

from . import _ref
from ._ref import project, step_raw

try:
    from . import _core as _impl
except ImportError:
    _impl = _ref

IMPL = _impl.IMPL
leapfrog_steps = _impl.leapfrog_steps
trace_polar = _impl.trace_polar

__all__ = ["IMPL", "leapfrog_steps", "trace_polar", "step_raw", "project"]
