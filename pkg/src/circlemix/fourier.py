"""Fourier coefficient tables for circle measures."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConstructionError, MemoryGuardError
from .measures import CircleMeasure, SOURCE_NAMES

DEFAULT_MAX_HALF_WIDTH = 10**7


@dataclass(eq=False)
class FourierTable:
    """Values of mu_hat(n) for |n| <= half_width with per-entry provenance.

    ``values[n + half_width]`` holds mu_hat(n).  ``source`` carries the
    provenance code of each entry (exact closed form, truncated product with
    the recorded depth, or grid transform).
    """

    half_width: int
    values: np.ndarray
    source: np.ndarray
    depth: int | None = None

    def __post_init__(self):
        n = self.half_width
        if len(self.values) != 2 * n + 1:
            raise ConstructionError("value array length must be 2*half_width + 1")
        mods = np.abs(self.values)
        if float(mods.max()) > 1 + 1e-12:
            raise ConstructionError(
                f"coefficient modulus {mods.max()!r} exceeds 1; not a probability"
            )
        if abs(self.values[n] - 1.0) > 1e-9:
            raise ConstructionError("value at frequency 0 must equal 1")
        self.values[n] = 1.0  # pin the exact normalization

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def value(self, n: int) -> complex:
        if abs(n) > self.half_width:
            raise IndexError(f"frequency {n} outside table window {self.half_width}")
        return complex(self.values[n + self.half_width])

    def source_name(self, n: int) -> str:
        code = int(self.source[n + self.half_width])
        name = SOURCE_NAMES[code]
        if code == 1 and self.depth is not None:
            name = f"{name}({self.depth})"
        return name

    def window(self, half_width: int) -> "FourierTable":
        """Restriction to |n| <= half_width (a view-like copy)."""
        if half_width > self.half_width:
            raise IndexError("cannot widen a table by slicing")
        lo = self.half_width - half_width
        hi = self.half_width + half_width + 1
        return FourierTable(
            half_width, self.values[lo:hi].copy(), self.source[lo:hi].copy(), self.depth
        )

    def is_real(self, tol: float = 1e-12) -> bool:
        return float(np.max(np.abs(self.values.imag))) <= tol


def fourier_coefficient(mu: CircleMeasure, n: int, depth: int | None = None) -> complex:
    """mu_hat(n) = integral exp(-2 pi i n t) dmu(t).

    ``depth`` overrides the automatic truncation of infinite products
    (Cantor); sparse families are exact and ignore it.
    """
    if depth is not None and depth < 1:
        raise ValueError("depth must be at least 1")
    return mu.fourier(n, depth)


def fourier_table(
    mu: CircleMeasure,
    half_width: int,
    depth: int | None = None,
    max_half_width: int = DEFAULT_MAX_HALF_WIDTH,
) -> FourierTable:
    """Table of mu_hat(n) over |n| <= half_width.

    Refuses widths beyond ``max_half_width`` (default 1e7) to keep memory
    bounded; raise the guard explicitly if a bigger scan is really wanted.
    """
    if half_width < 1:
        raise ValueError("half width must be at least 1")
    if half_width > max_half_width:
        raise MemoryGuardError(
            f"half width {half_width} exceeds the guard {max_half_width}; "
            f"pass a larger max_half_width to override"
        )
    # All supported families are real measures, so mu_hat(-n) is exactly the
    # conjugate of mu_hat(n): compute n >= 0 and mirror.  This pins the
    # conjugate-symmetry invariant bit-exactly and halves the work.
    ns = np.arange(0, half_width + 1, dtype=np.int64)
    half, code, depth_used = mu._coeff_block(ns, depth)
    values = np.empty(2 * half_width + 1, dtype=np.complex128)
    values[half_width:] = half
    values[:half_width] = np.conj(half[1:])[::-1]
    source = np.full(len(values), code, dtype=np.int8)
    return FourierTable(half_width, values, source, depth_used)
