"""Spectral correlation measures of discrete joint distributions.

The numerics live in the `_corrspec` extension module built by CMake; this
package re-exports it. Build the extension first (`cmake --build build`) and
put the build directory on `PYTHONPATH`, or copy the `.so` next to this file.
"""
try:
    from _corrspec import (  # noqa: F401
        Error,
        binary_bounds,
        check_dpi,
        correlation_spectrum,
        lambda2,
        necc_check,
        nletter_spectrum,
        oracle_frontier,
        rd_region_sample,
        witsenhausen,
    )
except ImportError as e:  # pragma: no cover - build-setup guidance only
    raise ImportError(
        "the _corrspec extension is not importable; build it with cmake and add "
        "the build directory to PYTHONPATH"
    ) from e

__all__ = [
    "Error",
    "binary_bounds",
    "check_dpi",
    "correlation_spectrum",
    "lambda2",
    "necc_check",
    "nletter_spectrum",
    "oracle_frontier",
    "rd_region_sample",
    "witsenhausen",
]
