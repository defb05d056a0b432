"""Exact angle arithmetic on the circle, parametrized in turns (t in [0,1)).

An angle is stored as a rational part plus an integer combination of
declared irrational generators.  Rational parts are exact fractions; each
irrational generator carries its value as a 128-bit fixed-point integer, so
reductions of ``n*t mod 1`` stay accurate to about 2**-100 over the whole
supported frequency range.  Whether an angle is irrational is an input
declaration, never a numeric inference: no finite-precision test can decide
irrationality, so classifiers trust the tags.  Distinct generators are
treated as rationally independent of each other and of the rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

FIXED_BITS = 128
FIXED_ONE = 1 << FIXED_BITS
_MASK = FIXED_ONE - 1

# frac((sqrt(5)-1)/2) and frac(sqrt(2)), floored to 128 fractional bits.
GOLDEN_FIXED = (math.isqrt(5 << (2 * FIXED_BITS)) - FIXED_ONE) >> 1
SQRT2_FIXED = math.isqrt(2 << (2 * FIXED_BITS)) - FIXED_ONE

# n * p stays inside int64 for every |n| below the table guard (1e7) as long
# as the rational denominator is below this bound; larger ones take the
# big-integer path.
_INT64_SAFE_DEN = 1 << 28


@dataclass(frozen=True)
class Angle:
    """A point of R/Z written as ``rat + sum(coeff * generator)`` mod 1.

    ``irr`` holds ``(tag, fixed_point, coeff)`` triples, one per irrational
    generator appearing with a nonzero integer coefficient.  An angle is
    rational exactly when ``irr`` is empty.
    """

    rat: Fraction
    irr: tuple[tuple[str, int, int], ...] = ()

    # -- constructors -----------------------------------------------------

    @staticmethod
    def _normalize(rat: Fraction, irr: dict[tuple[str, int], int]) -> "Angle":
        cleaned = tuple(
            sorted((tag, fixed, c) for (tag, fixed), c in irr.items() if c != 0)
        )
        return Angle(rat - math.floor(rat), cleaned)

    @classmethod
    def rational(cls, p: int, q: int) -> "Angle":
        if q <= 0:
            raise ValueError("denominator must be positive")
        return cls._normalize(Fraction(p, q), {})

    @classmethod
    def from_fraction(cls, f: Fraction) -> "Angle":
        return cls._normalize(Fraction(f), {})

    @classmethod
    def zero(cls) -> "Angle":
        return cls(Fraction(0))

    @classmethod
    def golden(cls) -> "Angle":
        """frac((sqrt(5)-1)/2), the inverse golden ratio."""
        return cls(Fraction(0), (("golden", GOLDEN_FIXED, 1),))

    @classmethod
    def sqrt2(cls) -> "Angle":
        """frac(sqrt(2))."""
        return cls(Fraction(0), (("sqrt2", SQRT2_FIXED, 1),))

    @classmethod
    def custom(cls, value) -> "Angle":
        """Declare an irrational angle from a numeric value in [0, 1).

        Two customs with the same 128-bit rounding are the same generator.
        """
        frac = Fraction(value)
        frac -= math.floor(frac)
        fixed = round(frac * FIXED_ONE) & _MASK
        if fixed == 0:
            raise ValueError("custom irrational rounds to zero; declare rational instead")
        return cls(Fraction(0), (("custom", fixed, 1),))

    # -- structure ---------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return not self.irr

    @property
    def kind(self) -> str:
        return "rational" if self.is_rational else "irrational"

    @property
    def denominator(self) -> int:
        if not self.is_rational:
            raise ValueError("irrational angle has no denominator")
        return self.rat.denominator

    @property
    def fixed_point(self) -> int:
        """The angle as an integer multiple of 2**-128, in [0, 2**128)."""
        acc = (self.rat.numerator * FIXED_ONE) // self.rat.denominator
        for _tag, fixed, coeff in self.irr:
            acc += coeff * fixed
        return acc & _MASK

    @property
    def value(self) -> float:
        return self.fixed_point / FIXED_ONE

    # -- group arithmetic ----------------------------------------------------

    def _irr_dict(self) -> dict[tuple[str, int], int]:
        return {(tag, fixed): coeff for tag, fixed, coeff in self.irr}

    def __add__(self, other: "Angle") -> "Angle":
        irr = self._irr_dict()
        for key, c in other._irr_dict().items():
            irr[key] = irr.get(key, 0) + c
        return Angle._normalize(self.rat + other.rat, irr)

    def __neg__(self) -> "Angle":
        irr = {key: -c for key, c in self._irr_dict().items()}
        return Angle._normalize(-self.rat, irr)

    def __sub__(self, other: "Angle") -> "Angle":
        return self + (-other)

    def times(self, n: int) -> "Angle":
        """n-fold sum of the angle (exact)."""
        irr = {key: n * c for key, c in self._irr_dict().items()}
        return Angle._normalize(n * self.rat, irr)

    # -- frequency reduction -------------------------------------------------

    def frac_multiples(self, ns) -> np.ndarray:
        """frac(n * t) as float64 for an integer array ``ns``.

        Exact for rational angles; accurate to |n| * 2**-128 otherwise.
        """
        ns = np.asarray(ns, dtype=np.int64)
        if self.is_rational:
            p, q = self.rat.numerator, self.rat.denominator
            if q < _INT64_SAFE_DEN and abs(int(ns.max(initial=0))) < 2**34 \
                    and abs(int(ns.min(initial=0))) < 2**34:
                return np.mod(ns * p, q).astype(np.float64) / q
            return np.array(
                [((int(n) * p) % q) / q for n in ns], dtype=np.float64
            )
        fixed = self.fixed_point
        return np.array(
            [((int(n) * fixed) & _MASK) / FIXED_ONE for n in ns],
            dtype=np.float64,
        )

    def frac_multiple(self, n: int) -> float:
        return float(self.frac_multiples(np.array([n], dtype=np.int64))[0])

    def cell_index(self, n_cells: int) -> int:
        """Index of the half-open cell centered at i/n_cells containing t."""
        if self.is_rational:
            p, q = self.rat.numerator, self.rat.denominator
            return ((2 * p * n_cells + q) // (2 * q)) % n_cells
        fp = self.fixed_point
        return ((fp * n_cells + (FIXED_ONE >> 1)) >> FIXED_BITS) % n_cells

    # -- display -------------------------------------------------------------

    def __str__(self) -> str:
        if self.is_rational:
            return str(self.rat)
        parts = []
        if self.rat:
            parts.append(str(self.rat))
        for tag, fixed, coeff in self.irr:
            label = tag if tag in ("golden", "sqrt2") else f"custom({fixed / FIXED_ONE:.12g})"
            if coeff == 1:
                parts.append(label)
            else:
                parts.append(f"{coeff}*{label}")
        return " + ".join(parts) if parts else "0"

    def to_spec(self) -> dict:
        """Spec-file representation of the angle."""
        if self.is_rational:
            return {"type": "rational", "p": self.rat.numerator, "q": self.rat.denominator}
        if len(self.irr) == 1 and not self.rat:
            tag, fixed, coeff = self.irr[0]
            if tag in ("golden", "sqrt2") and coeff in (1, -1):
                out = {"type": tag}
                if coeff == -1:
                    out["negate"] = True
                return out
        return {"type": "custom", "value": self.value}
