"""Iterative-narrowing GUI grounding.

Thin wrapper over the C++ core. The extension module lives inside the
package when installed from a wheel; during in-tree builds it is importable
from the CMake build directory instead.
"""

try:
    from ._iterground import *  # noqa: F401,F403
    from ._iterground import __doc__ as _core_doc
except ImportError:  # in-tree build: extension on PYTHONPATH, not in package
    from _iterground import *  # type: ignore  # noqa: F401,F403
    from _iterground import __doc__ as _core_doc

__all__ = [
    "ImageDims",
    "Orientation",
    "NormPoint",
    "AbsPoint",
    "Viewport",
    "ShrinkPolicy",
    "CoordinateScale",
    "RasterImage",
    "load_png",
    "orientation_of",
    "shrink_dims",
    "to_absolute",
    "center_window",
    "parse_point",
    "ground_scripted",
    "ground_oracle",
    "generate_screen",
    "run_sweep",
    "run_context_loss",
    "render_trace_png",
    "GroundingError",
]
