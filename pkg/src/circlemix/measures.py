"""Probability measures on the circle and their Fourier coefficients.

Every family stores just enough structure to produce exact or closed-form
values of ``mu_hat(n) = integral exp(-2*pi*i*n*t) dmu(t)``.  With that
convention the convolution Markov operator acts diagonally on characters:
``P e_k = mu_hat(-k) e_k``.

Families:

* :class:`HaarMeasure` -- normalized Lebesgue measure.
* :class:`AtomicMeasure` -- finitely many weighted atoms with exact angles.
* :class:`GridDensity` -- piecewise-constant density on equal cells.
* :class:`CantorLebesgue` -- centered self-similar measure with dissection
  rate theta > 2: the law of ``sum_k eps_k * c * theta**-k`` with fair signs
  and ``c = (theta-1)/2``, so ``mu_hat(n) = prod_k cos(2 pi n c theta**-k)``.
* :class:`RieszProduct` -- weak* limit of ``prod(1 + a_k cos(2 pi n_k t))``
  with lacunary frequencies; coefficient tables are exactly sparse.
* :class:`GappedProduct` -- product of dilated non-negative trigonometric
  polynomials whose frequency blocks never overlap; also exactly sparse.
* :class:`Mixture`, :class:`PowerMeasure`, :class:`ReversedMeasure`,
  :class:`ConvolutionMeasure` -- the only symbolic combinators supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .angles import Angle
from .errors import ConstructionError, GridBuildError

# Source flags for table entries.
SOURCE_EXACT = 0          # exact-closed-form
SOURCE_TRUNCATED = 1      # truncated-product(depth)
SOURCE_GRID_DFT = 2       # fft-of-grid
SOURCE_NAMES = {
    SOURCE_EXACT: "exact-closed-form",
    SOURCE_TRUNCATED: "truncated-product",
    SOURCE_GRID_DFT: "fft-of-grid",
}

_WEIGHT_TOL = 1e-12
# |cos(x) - 1| < 1e-15 once |x| is below this; used to cut infinite products.
_TAIL_CUT = math.sqrt(2e-15)
# Largest atom expansion produced by symbolic convolution powers.
_MAX_ATOM_EXPANSION = 1_000_000


def _as_int_array(ns) -> np.ndarray:
    arr = np.asarray(ns, dtype=np.int64)
    if arr.ndim != 1:
        raise ValueError("frequency array must be one-dimensional")
    return arr


class CircleMeasure:
    """Common interface of all measure families."""

    # Subclasses fill these in.
    family = "abstract"

    # -- Fourier side -------------------------------------------------------

    def _coeff_block(self, ns: np.ndarray, depth: int | None):
        """Return (values, source_code, depth_used) for integer frequencies."""
        raise NotImplementedError

    def fourier(self, n: int, depth: int | None = None) -> complex:
        vals, _, _ = self._coeff_block(_as_int_array([n]), depth)
        return complex(vals[0])

    # -- structure ----------------------------------------------------------

    @property
    def is_discrete(self) -> bool:
        raise NotImplementedError

    def as_atomic(self) -> "AtomicMeasure | None":
        """Exact atomic expansion for discrete measures, None otherwise."""
        return None

    def reversed(self) -> "CircleMeasure":
        return ReversedMeasure(self)

    def cell_masses(self, n_cells: int, stage: int | None = None) -> tuple[np.ndarray, dict]:
        """Exact masses ``mu([i/N - 1/2N, i/N + 1/2N))`` plus method notes."""
        raise GridBuildError(f"no cell-mass rule for family '{self.family}'")

    def to_spec(self) -> dict:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.to_spec()}>"


# ---------------------------------------------------------------------------
# Haar


class HaarMeasure(CircleMeasure):
    """Normalized Lebesgue measure; annihilates every nonzero frequency."""

    family = "haar"

    def _coeff_block(self, ns, depth):
        ns = _as_int_array(ns)
        return (ns == 0).astype(np.complex128), SOURCE_EXACT, None

    @property
    def is_discrete(self) -> bool:
        return False

    def reversed(self) -> "CircleMeasure":
        return self

    def cell_masses(self, n_cells, stage=None):
        return np.full(n_cells, 1.0 / n_cells), {"method": "uniform"}

    def to_spec(self):
        return {"family": "haar"}

    def __eq__(self, other):
        return isinstance(other, HaarMeasure)

    def __hash__(self):
        return hash("haar")


HAAR = HaarMeasure()


# ---------------------------------------------------------------------------
# Atomic


@dataclass(frozen=True)
class AtomicMeasure(CircleMeasure):
    """Finitely many atoms ``(angle, weight)`` with exact angle arithmetic."""

    atoms: tuple[tuple[Angle, float], ...]
    family = "atomic"

    def __post_init__(self):
        if not self.atoms:
            raise ConstructionError("atomic measure needs at least one atom")
        total = math.fsum(w for _, w in self.atoms)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ConstructionError(f"atom weights sum to {total!r}, not 1")
        if any(w <= 0 for _, w in self.atoms):
            raise ConstructionError("atom weights must be strictly positive")
        seen = set()
        for angle, _ in self.atoms:
            if angle in seen:
                raise ConstructionError(f"duplicate atom angle {angle}")
            seen.add(angle)

    @classmethod
    def from_pairs(cls, pairs) -> "AtomicMeasure":
        """Build from (angle, weight) pairs, merging equal angles."""
        merged: dict[Angle, float] = {}
        for angle, w in pairs:
            merged[angle] = merged.get(angle, 0.0) + float(w)
        atoms = tuple(sorted(merged.items(), key=lambda it: it[0].fixed_point))
        return cls(atoms)

    @classmethod
    def dirac(cls, angle: Angle) -> "AtomicMeasure":
        return cls(((angle, 1.0),))

    @cached_property
    def _symmetric_pairing(self) -> tuple[tuple[Angle, float], ...] | None:
        """Representatives (angle, weight) when atoms are closed under
        negation with matched weights; None otherwise.  Self-inverse atoms
        (0 and 1/2) pair with themselves."""
        remaining = dict(self.atoms)
        pairs = []
        for angle, w in self.atoms:
            if angle not in remaining:
                continue
            neg = -angle
            if neg == angle:
                del remaining[angle]
                pairs.append((angle, w))
                continue
            if remaining.get(neg) != w:
                return None
            del remaining[angle]
            del remaining[neg]
            pairs.append((angle, 2.0 * w))
        return tuple(pairs)

    def _coeff_block(self, ns, depth):
        ns = _as_int_array(ns)
        pairing = self._symmetric_pairing
        if pairing is not None:
            # symmetric measure: coefficients are exactly real cosine sums
            out = np.zeros(len(ns), dtype=np.float64)
            for angle, w in pairing:
                out += w * np.cos(2 * np.pi * angle.frac_multiples(ns))
            return out.astype(np.complex128), SOURCE_EXACT, None
        out = np.zeros(len(ns), dtype=np.complex128)
        for angle, w in self.atoms:
            fr = angle.frac_multiples(ns)
            out += w * np.exp(-2j * np.pi * fr)
        return out, SOURCE_EXACT, None

    @property
    def is_discrete(self) -> bool:
        return True

    def as_atomic(self):
        return self

    def reversed(self):
        return AtomicMeasure.from_pairs((-a, w) for a, w in self.atoms)

    def convolve_atomic(self, other: "AtomicMeasure", prune: float = 0.0) -> "AtomicMeasure":
        merged: dict[Angle, float] = {}
        for a1, w1 in self.atoms:
            for a2, w2 in other.atoms:
                key = a1 + a2
                merged[key] = merged.get(key, 0.0) + w1 * w2
        if prune > 0.0:
            merged = {a: w for a, w in merged.items() if w > prune}
        if len(merged) > _MAX_ATOM_EXPANSION:
            raise ConstructionError("atomic convolution exceeds expansion budget")
        pairs = sorted(merged.items(), key=lambda it: it[0].fixed_point)
        return AtomicMeasure(tuple(pairs))

    def cell_masses(self, n_cells, stage=None):
        p = np.zeros(n_cells)
        for angle, w in self.atoms:
            p[angle.cell_index(n_cells)] += w
        return p, {"method": "exact-binning"}

    def to_spec(self):
        return {
            "family": "atomic",
            "atoms": [
                {"angle": a.to_spec(), "weight": w} for a, w in self.atoms
            ],
        }


def two_atom_symmetric(angle: Angle) -> AtomicMeasure:
    """The symmetric two-point measure with atoms at +-angle."""
    return AtomicMeasure.from_pairs([(angle, 0.5), (-angle, 0.5)])


# ---------------------------------------------------------------------------
# Grid density


@dataclass(frozen=True, eq=False)
class GridDensity(CircleMeasure):
    """Piecewise-constant density w.r.t. normalized Lebesgue measure.

    ``density[j]`` is the value on the cell ``[j/G, (j+1)/G)``; the mean must
    be 1 so the measure is a probability.
    """

    density: np.ndarray
    family = "grid"

    def __post_init__(self):
        d = np.asarray(self.density, dtype=np.float64)
        object.__setattr__(self, "density", d)
        if d.ndim != 1 or len(d) < 1:
            raise ConstructionError("density must be a non-empty vector")
        if np.any(d < 0):
            raise ConstructionError("density entries must be non-negative")
        if abs(float(np.mean(d)) - 1.0) > _WEIGHT_TOL:
            raise ConstructionError("density mean must equal 1")

    @property
    def n_cells(self) -> int:
        return len(self.density)

    @cached_property
    def _mass_dft(self) -> np.ndarray:
        return np.fft.fft(self.density / self.n_cells)

    def _coeff_block(self, ns, depth):
        ns = _as_int_array(ns)
        G = self.n_cells
        base = self._mass_dft[np.mod(ns, G)]
        x = ns / G
        vals = base * np.sinc(x) * np.exp(-1j * np.pi * x)
        return vals, SOURCE_GRID_DFT, None

    @property
    def is_discrete(self) -> bool:
        return False

    def reversed(self):
        return GridDensity(self.density[::-1].copy())

    def cell_masses(self, n_cells, stage=None):
        # Exact overlap integration on the common refinement, in units of
        # 1/(2*N*G) so everything stays in integers.
        G, N = self.n_cells, n_cells
        d = self.density
        p = np.zeros(N)
        width_src = 2 * N           # source cell width in refined units
        for j in range(N):
            lo = G * (2 * j - 1)
            hi = G * (2 * j + 1)
            i = lo // width_src
            acc = 0.0
            while i * width_src < hi:
                seg_lo = max(lo, i * width_src)
                seg_hi = min(hi, (i + 1) * width_src)
                acc += d[i % G] * (seg_hi - seg_lo)
                i += 1
            p[j] = acc / (2 * N * G)
        return p, {"method": "cell-sums"}

    def to_spec(self):
        return {"family": "grid", "density": [float(v) for v in self.density]}


# ---------------------------------------------------------------------------
# Cantor-Lebesgue


@dataclass(frozen=True)
class CantorLebesgue(CircleMeasure):
    """Centered self-similar measure with constant dissection rate theta > 2.

    Distribution of ``X = sum_{k>=1} eps_k * c * theta**-k`` (fair signs,
    ``c = (theta-1)/2``), reduced mod 1.  For theta = 3 the coefficients are
    the classical ``prod_k cos(2 pi n / 3**k)``.
    """

    theta: float
    family = "cantor"

    def __post_init__(self):
        if not self.theta > 2:
            raise ConstructionError("dissection rate theta must exceed 2")

    @property
    def is_integer_rate(self) -> bool:
        return float(self.theta).is_integer()

    @property
    def half_width_c(self) -> float:
        return (self.theta - 1.0) / 2.0

    def product_depth(self, n_max: int) -> int:
        """Factors needed so every dropped factor is within 1e-15 of 1."""
        n_max = max(1, abs(int(n_max)))
        x = 2 * np.pi * n_max * self.half_width_c / _TAIL_CUT
        return max(1, int(math.ceil(math.log(x) / math.log(self.theta))) + 1)

    def _coeff_block(self, ns, depth):
        ns = _as_int_array(ns)
        n_max = int(np.max(np.abs(ns))) if len(ns) else 1
        K = depth if depth is not None else self.product_depth(n_max)
        if K < 1:
            raise ValueError("depth must be at least 1")
        out = np.ones(len(ns))
        if self.is_integer_rate:
            th = int(self.theta)
            num = ns * (th - 1)          # argument numerator of n*c
            for k in range(1, K + 1):
                den = 2 * th**k
                if den < 2**62 and abs(int(num.max(initial=0))) < 2**62:
                    r = np.mod(num, den).astype(np.float64) / den
                else:
                    r = np.array(
                        [((int(v) % den) / den) for v in num], dtype=np.float64
                    )
                out *= np.cos(2 * np.pi * r)
        else:
            c = self.half_width_c
            for k in range(1, K + 1):
                x = c * self.theta ** (-k)
                out *= np.cos(2 * np.pi * np.mod(ns * x, 1.0))
        return out.astype(np.complex128), SOURCE_TRUNCATED, K

    @property
    def is_discrete(self) -> bool:
        return False

    def reversed(self):
        return self  # symmetric by construction

    # -- exact cell masses via the self-similarity recursion ----------------

    def _cdf(self, x, depth_cap: int = 80):
        """P(X < x) for the centered (un-wrapped) law on [-1/2, 1/2]."""
        theta = self.theta
        exact = self.is_integer_rate
        if exact:
            theta = Fraction(int(self.theta))
            c = Fraction(int(self.theta) - 1, 2)
            half = Fraction(1, 2)
        else:
            c = self.half_width_c
            half = 0.5

        def rec(y, depth):
            if y <= -half:
                return 0.0
            if y >= half:
                return 1.0
            if depth >= depth_cap:
                return 0.5
            return 0.5 * rec(theta * y - c, depth + 1) + 0.5 * rec(theta * y + c, depth + 1)

        return rec(x, 0)

    def cell_masses(self, n_cells, stage=None):
        N = n_cells
        exact = self.is_integer_rate
        # Cell j covers [(2j-1)/2N, (2j+1)/2N); unwrap mod 1 onto [-1/2, 1/2].
        bounds = []
        for j in range(N + 1):
            b = Fraction(2 * j - 1, 2 * N) if exact else (2 * j - 1) / (2 * N)
            bounds.append(b)
        cdf = {}

        def F(x):
            key = x
            if key not in cdf:
                cdf[key] = self._cdf(x if exact else float(x))
            return cdf[key]

        p = np.zeros(N)
        for j in range(N):
            lo, hi = bounds[j], bounds[j + 1]
            mass = F(hi) - F(lo)
            # wrapped copy one turn to the left covers angles near 1
            mass += F(hi - 1) - F(lo - 1)
            p[j] = float(mass)
        return p, {"method": "self-similar-recursion"}

    def to_spec(self):
        theta = self.theta
        return {"family": "cantor", "theta": int(theta) if self.is_integer_rate else theta}


# ---------------------------------------------------------------------------
# Riesz products


@dataclass(frozen=True)
class RieszProduct(CircleMeasure):
    """Riesz product ``prod_k (1 + a_k cos(2 pi n_k t))``.

    ``coeff_prefix`` lists the leading a_k explicitly; ``coeff_tail`` extends
    them by a symbolic law so summability questions stay decidable:

    * ``("geometric", r)`` -- a_k = r**k for k beyond the prefix, 0 < |r| <= 1;
    * ``("power", alpha)`` -- a_k = k**-alpha, alpha >= 0;
    * ``None`` -- the tail is unspecified; tables and densities then use the
      finite partial product, and classifiers answer "unknown".

    Frequencies are the explicit ``freq_prefix`` continued by
    ``n_{k+1} = ceil(lacunarity * n_k)``; the lacunarity witness must exceed 3
    so signed frequency sums are unique and tables exactly sparse.
    """

    coeff_prefix: tuple[float, ...]
    freq_prefix: tuple[int, ...]
    coeff_tail: tuple[str, float] | None = None
    lacunarity: float = 4.0
    family = "riesz"

    def __post_init__(self):
        if self.lacunarity <= 3:
            raise ConstructionError("lacunarity witness must exceed 3")
        if not self.freq_prefix:
            raise ConstructionError("at least one frequency is required")
        prev = 0
        for n in self.freq_prefix:
            if n <= 0 or (prev and n + 1e-9 < self.lacunarity * prev):
                raise ConstructionError(
                    f"frequencies must grow by the lacunarity factor: {self.freq_prefix}"
                )
            prev = n
        for a in self.coeff_prefix:
            if not (0 < abs(a) <= 1):
                raise ConstructionError("explicit coefficients must lie in [-1,1] minus 0")
        if self.coeff_tail is not None:
            kind, param = self.coeff_tail
            if kind == "geometric":
                if not (0 < abs(param) <= 1):
                    raise ConstructionError("geometric tail ratio must satisfy 0 < |r| <= 1")
            elif kind == "power":
                if param < 0:
                    raise ConstructionError("power tail exponent must be >= 0")
            else:
                raise ConstructionError(f"unknown tail family {kind!r}")

    # -- sequences -----------------------------------------------------------

    @property
    def n_explicit_factors(self) -> int:
        return len(self.coeff_prefix)

    @property
    def has_tail(self) -> bool:
        return self.coeff_tail is not None

    def coefficient_a(self, k: int) -> float | None:
        """a_k for k >= 1, or None when the sequence ends at the prefix."""
        if k <= len(self.coeff_prefix):
            return self.coeff_prefix[k - 1]
        if self.coeff_tail is None:
            return None
        kind, param = self.coeff_tail
        if kind == "geometric":
            return param**k
        return float(k) ** (-param) if param > 0 else 1.0

    def frequency(self, k: int) -> int:
        if k <= len(self.freq_prefix):
            return self.freq_prefix[k - 1]
        n = self.freq_prefix[-1]
        for _ in range(k - len(self.freq_prefix)):
            n = int(math.ceil(self.lacunarity * n))
        return n

    def stage_max_frequency(self, stage: int) -> int:
        return sum(self.frequency(k) for k in range(1, stage + 1))

    def available_stage(self, target_freq: int) -> int | None:
        """Smallest stage whose maximal frequency reaches ``target_freq``."""
        stage, M = 0, 0
        while M < target_freq:
            stage += 1
            if self.coefficient_a(stage) is None:
                return None
            M += self.frequency(stage)
        return stage

    # -- sparse expansion -----------------------------------------------------

    def sparse_coefficients(self, max_freq: int, stage: int | None = None) -> dict[int, float]:
        """All nonzero mu_hat(n) with |n| <= max_freq (exact).

        With ``stage`` given, expand exactly that many factors instead of
        every factor that can reach the frequency window.
        """
        coeffs = {0: 1.0}
        k, M = 1, 0
        while True:
            if stage is not None and k > stage:
                break
            a = self.coefficient_a(k)
            if a is None:
                break
            nk = self.frequency(k)
            if stage is None and nk - M > max_freq:
                break
            half = a / 2.0
            new = dict(coeffs)
            for m, v in coeffs.items():
                for s in (nk, -nk):
                    key = m + s
                    if key in new:
                        raise ConstructionError(
                            f"sparse index collision at frequency {key} (lacunarity violated)"
                        )
                    new[key] = v * half
            coeffs = new
            M += nk
            k += 1
        return coeffs

    def _coeff_block(self, ns, depth):
        ns = _as_int_array(ns)
        max_freq = int(np.max(np.abs(ns))) if len(ns) else 1
        sparse = self.sparse_coefficients(max_freq)
        out = np.array([sparse.get(int(n), 0.0) for n in ns], dtype=np.complex128)
        return out, SOURCE_EXACT, None

    @property
    def is_discrete(self) -> bool:
        return False

    def reversed(self):
        return self  # real coefficients, symmetric

    def partial_factor_values(self, stage: int, t: np.ndarray) -> np.ndarray:
        p = np.ones_like(t)
        for k in range(1, stage + 1):
            a = self.coefficient_a(k)
            if a is None:
                raise ConstructionError(
                    f"stage {stage} requested but only {k - 1} factors are defined"
                )
            p *= 1.0 + a * np.cos(2 * np.pi * self.frequency(k) * t)
        return p

    def cell_masses(self, n_cells, stage=None):
        return _sparse_cell_masses(self, n_cells, stage)

    def to_spec(self):
        out = {
            "family": "riesz",
            "coefficients": {
                "prefix": list(self.coeff_prefix),
                "tail": None
                if self.coeff_tail is None
                else {"kind": self.coeff_tail[0],
                      ("ratio" if self.coeff_tail[0] == "geometric" else "alpha"): self.coeff_tail[1]},
            },
            "frequencies": {"prefix": list(self.freq_prefix), "ratio": self.lacunarity},
        }
        return out


# ---------------------------------------------------------------------------
# Gapped products (Sato-type)


def fejer_coefficients(m: int) -> np.ndarray:
    """Cosine coefficients of the degree-m Fejer kernel, normalized to mass 1."""
    k = np.arange(m + 1)
    return 1.0 - k / (m + 1.0)


@dataclass(frozen=True, eq=False)
class GappedProduct(CircleMeasure):
    """Product of dilated non-negative trigonometric polynomials.

    ``factors[j]`` holds the cosine coefficients ``c[0..m_j]`` of
    ``phi_j(t) = 1 + 2*sum_k c[k] cos(2 pi k t)`` with ``c[0] = 1`` and
    ``c[k] >= 0``.  The dilation scales ``r_j`` must keep the frequency
    blocks of consecutive stages separated:
    ``(r_{n+1} - M_n) / M_n >= gap_ratio`` with ``M_n = sum r_j m_j``.
    When scales are omitted the minimal admissible ones are generated.
    """

    factors: tuple[np.ndarray, ...]
    scales: tuple[int, ...] | None = None
    gap_ratio: float = 2.0
    family = "gapped"

    def __post_init__(self):
        factors = tuple(np.asarray(f, dtype=np.float64) for f in self.factors)
        object.__setattr__(self, "factors", factors)
        if not factors:
            raise ConstructionError("at least one factor is required")
        for j, c in enumerate(factors):
            if c.ndim != 1 or len(c) < 2:
                raise ConstructionError(f"factor {j} needs a degree of at least 1")
            if abs(c[0] - 1.0) > 1e-12:
                raise ConstructionError(f"factor {j} must have mass 1 (c[0] = 1)")
            if np.any(c < 0) or np.any(c > 1 + 1e-12):
                raise ConstructionError(f"factor {j} cosine coefficients must lie in [0, 1]")
            _check_factor_nonnegative(c, j)
        if self.gap_ratio <= 1:
            raise ConstructionError("gap ratio must exceed 1")
        if self.scales is None:
            object.__setattr__(self, "scales", self._auto_scales())
        scales = tuple(int(r) for r in self.scales)
        object.__setattr__(self, "scales", scales)
        if len(scales) != len(factors):
            raise ConstructionError("need one scale per factor")
        if any(r <= 0 for r in scales) or any(
            scales[i] >= scales[i + 1] for i in range(len(scales) - 1)
        ):
            raise ConstructionError("scales must be strictly increasing positive integers")
        M = 0
        for j, (r, c) in enumerate(zip(scales, factors)):
            if j > 0 and (r - M) < self.gap_ratio * M:
                raise ConstructionError(
                    f"gap condition violated at stage {j + 1}: "
                    f"(r - M)/M = {(r - M) / M:.3f} < {self.gap_ratio}"
                )
            M += r * (len(c) - 1)

    def _auto_scales(self) -> tuple[int, ...]:
        scales = []
        M = 0
        for c in self.factors:
            r = 1 if M == 0 else int(math.ceil((self.gap_ratio + 1.0) * M))
            scales.append(r)
            M += r * (len(c) - 1)
        return tuple(scales)

    @property
    def n_stages(self) -> int:
        return len(self.factors)

    def degree(self, j: int) -> int:
        return len(self.factors[j - 1]) - 1

    def stage_max_frequency(self, stage: int) -> int:
        return sum(self.scales[j] * (len(self.factors[j]) - 1) for j in range(stage))

    def available_stage(self, target_freq: int) -> int | None:
        for s in range(1, self.n_stages + 1):
            if self.stage_max_frequency(s) >= target_freq:
                return s
        return None

    def sparse_coefficients(self, max_freq: int, stage: int | None = None) -> dict[int, float]:
        coeffs = {0: 1.0}
        M = 0
        last = stage if stage is not None else self.n_stages
        for j in range(1, last + 1):
            r = self.scales[j - 1]
            c = self.factors[j - 1]
            if r - M > max_freq and stage is None:
                break
            new = dict(coeffs)
            for m, v in coeffs.items():
                for k in range(1, len(c)):
                    if c[k] == 0.0:
                        continue
                    for s in (r * k, -r * k):
                        key = m + s
                        if key in new:
                            raise ConstructionError(
                                f"sparse index collision at frequency {key} (gap condition violated)"
                            )
                        new[key] = v * c[k]
            coeffs = new
            M += r * (len(c) - 1)
        return coeffs

    def _coeff_block(self, ns, depth):
        ns = _as_int_array(ns)
        max_freq = int(np.max(np.abs(ns))) if len(ns) else 1
        sparse = self.sparse_coefficients(max_freq)
        out = np.array([sparse.get(int(n), 0.0) for n in ns], dtype=np.complex128)
        return out, SOURCE_EXACT, None

    @property
    def is_discrete(self) -> bool:
        return False

    def reversed(self):
        return self

    def partial_factor_values(self, stage: int, t: np.ndarray) -> np.ndarray:
        if stage > self.n_stages:
            raise ConstructionError(
                f"stage {stage} requested but only {self.n_stages} factors are defined"
            )
        p = np.ones_like(t)
        for j in range(1, stage + 1):
            r = self.scales[j - 1]
            c = self.factors[j - 1]
            val = np.ones_like(t)
            for k in range(1, len(c)):
                val += 2.0 * c[k] * np.cos(2 * np.pi * (r * k) * t)
            p *= val
        return p

    def cell_masses(self, n_cells, stage=None):
        return _sparse_cell_masses(self, n_cells, stage)

    def to_spec(self):
        return {
            "family": "gapped",
            "factors": [{"cosine": [float(v) for v in c]} for c in self.factors],
            "scales": list(self.scales),
            "ratio": self.gap_ratio,
        }


def _check_factor_nonnegative(c: np.ndarray, index: int) -> None:
    m = len(c) - 1
    grid = np.arange(10_000 * m) / (10_000 * m)
    val = np.ones_like(grid)
    for k in range(1, len(c)):
        val += 2.0 * c[k] * np.cos(2 * np.pi * k * grid)
    if float(val.min()) < -1e-10:
        raise ConstructionError(
            f"factor {index} is negative on the evaluation grid (min {val.min():.3e})"
        )


def _sparse_cell_masses(mu, n_cells: int, stage: int | None) -> tuple[np.ndarray, dict]:
    """Exact cell integrals of the stage-truncated density of a sparse family.

    The automatic stage is the smallest whose maximal frequency reaches the
    grid's Nyquist limit; an explicit stage is honored as given (the caller
    is choosing which truncated law to discretize).
    """
    if stage is None:
        target = max(1, n_cells // 2)
        stage = mu.available_stage(target)
        if stage is None:
            raise GridBuildError(
                f"truncation stage too low to resolve {n_cells} cells: the "
                f"defined factors do not reach frequency {target}; more factors "
                f"are needed",
                required_stage=None,
            )
    elif stage < 1:
        raise GridBuildError("truncation stage must be at least 1")
    max_freq = mu.stage_max_frequency(stage)
    sparse = mu.sparse_coefficients(max_freq, stage=stage)
    folded = np.zeros(n_cells, dtype=np.complex128)
    for ell, v in sparse.items():
        folded[ell % n_cells] += v * np.sinc(ell / n_cells)
    p = np.fft.ifft(folded).real
    p = np.clip(p, 0.0, None)
    return p, {"method": "stage-truncated-density", "stage": stage}


# ---------------------------------------------------------------------------
# Combinators


@dataclass(frozen=True)
class Mixture(CircleMeasure):
    """Convex combination of measures."""

    components: tuple[tuple[float, CircleMeasure], ...]
    family = "mixture"

    def __post_init__(self):
        if not self.components:
            raise ConstructionError("mixture needs at least one component")
        total = math.fsum(w for w, _ in self.components)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ConstructionError(f"mixture weights sum to {total!r}, not 1")
        if any(w <= 0 for w, _ in self.components):
            raise ConstructionError("mixture weights must be strictly positive")

    def leaves(self):
        """Yield (weight, measure) over the flattened mixture tree."""
        for w, comp in self.components:
            if isinstance(comp, Mixture):
                for w2, leaf in comp.leaves():
                    yield w * w2, leaf
            else:
                yield w, comp

    def _coeff_block(self, ns, depth):
        ns = _as_int_array(ns)
        out = np.zeros(len(ns), dtype=np.complex128)
        code, depth_used = SOURCE_EXACT, None
        for w, comp in self.components:
            vals, c, d = comp._coeff_block(ns, depth)
            out += w * vals
            code = max(code, c)
            if d is not None:
                depth_used = d if depth_used is None else max(depth_used, d)
        return out, code, depth_used

    @property
    def is_discrete(self) -> bool:
        return all(comp.is_discrete for _, comp in self.components)

    def as_atomic(self):
        if not self.is_discrete:
            return None
        pairs = []
        for w, comp in self.components:
            sub = comp.as_atomic()
            if sub is None:
                return None
            pairs.extend((a, w * wa) for a, wa in sub.atoms)
        return AtomicMeasure.from_pairs(pairs)

    def reversed(self):
        return Mixture(tuple((w, comp.reversed()) for w, comp in self.components))

    def cell_masses(self, n_cells, stage=None):
        p = np.zeros(n_cells)
        notes = {"method": "mixture", "components": []}
        for w, comp in self.components:
            sub, subnotes = comp.cell_masses(n_cells, stage)
            p += w * sub
            notes["components"].append(subnotes)
        return p, notes

    def to_spec(self):
        return {
            "family": "mixture",
            "components": [
                {"weight": w, "measure": comp.to_spec()} for w, comp in self.components
            ],
        }


@dataclass(frozen=True)
class PowerMeasure(CircleMeasure):
    """k-fold convolution power of a base measure."""

    base: CircleMeasure
    exponent: int
    family = "power"

    def __post_init__(self):
        if self.exponent < 1:
            raise ConstructionError("power exponent must be at least 1")

    def _coeff_block(self, ns, depth):
        vals, code, d = self.base._coeff_block(ns, depth)
        return vals**self.exponent, code, d

    @property
    def is_discrete(self) -> bool:
        return self.base.is_discrete

    def as_atomic(self):
        base = self.base.as_atomic()
        if base is None:
            return None
        out = base
        for _ in range(self.exponent - 1):
            out = out.convolve_atomic(base)
        return out

    def reversed(self):
        return PowerMeasure(self.base.reversed(), self.exponent)

    def cell_masses(self, n_cells, stage=None):
        atomic = self.as_atomic()
        if atomic is not None:
            return atomic.cell_masses(n_cells)
        base_p, notes = self.base.cell_masses(n_cells, stage)
        hat = np.fft.fft(base_p) ** self.exponent
        p = np.clip(np.fft.ifft(hat).real, 0.0, None)
        return p, {"method": "fft-power-of-base-grid", "base": notes}

    def to_spec(self):
        return {"family": "power", "base": self.base.to_spec(), "exponent": self.exponent}


@dataclass(frozen=True)
class ReversedMeasure(CircleMeasure):
    """Pushforward under t -> -t."""

    base: CircleMeasure
    family = "reversed"

    def _coeff_block(self, ns, depth):
        vals, code, d = self.base._coeff_block(-_as_int_array(ns), depth)
        return vals, code, d

    @property
    def is_discrete(self) -> bool:
        return self.base.is_discrete

    def as_atomic(self):
        base = self.base.as_atomic()
        return None if base is None else base.reversed()

    def reversed(self):
        return self.base

    def cell_masses(self, n_cells, stage=None):
        atomic = self.as_atomic()
        if atomic is not None:
            return atomic.cell_masses(n_cells)
        base_p, notes = self.base.cell_masses(n_cells, stage)
        p = np.roll(base_p[::-1], 1)   # cell j of the reversal is cell -j
        return p, {"method": "reversed-grid", "base": notes}

    def to_spec(self):
        return {"family": "reversed", "base": self.base.to_spec()}


@dataclass(frozen=True)
class ConvolutionMeasure(CircleMeasure):
    """Symbolic convolution node; coefficients multiply pointwise."""

    left: CircleMeasure
    right: CircleMeasure
    family = "convolution"

    def _coeff_block(self, ns, depth):
        lv, lc, ld = self.left._coeff_block(ns, depth)
        rv, rc, rd = self.right._coeff_block(ns, depth)
        d = None
        if ld is not None or rd is not None:
            d = max(ld or 0, rd or 0)
        return lv * rv, max(lc, rc), d

    @property
    def is_discrete(self) -> bool:
        return self.left.is_discrete and self.right.is_discrete

    def as_atomic(self):
        a, b = self.left.as_atomic(), self.right.as_atomic()
        if a is None or b is None:
            return None
        return a.convolve_atomic(b)

    def reversed(self):
        return ConvolutionMeasure(self.left.reversed(), self.right.reversed())

    def cell_masses(self, n_cells, stage=None):
        atomic = self.as_atomic()
        if atomic is not None:
            return atomic.cell_masses(n_cells)
        pl, nl = self.left.cell_masses(n_cells, stage)
        pr, nr = self.right.cell_masses(n_cells, stage)
        p = np.clip(np.fft.ifft(np.fft.fft(pl) * np.fft.fft(pr)).real, 0.0, None)
        return p, {"method": "fft-product-of-grids", "left": nl, "right": nr}

    def to_spec(self):
        return {
            "family": "convolution",
            "left": self.left.to_spec(),
            "right": self.right.to_spec(),
        }


# ---------------------------------------------------------------------------
# Module-level operations


def convolve(mu: CircleMeasure, nu: CircleMeasure) -> CircleMeasure:
    """Convolution of two probabilities; simplifies where exact rules exist.

    Haar absorbs everything; atomic measures convolve exactly by translating
    atoms with exact angle arithmetic.  Every other pair becomes a symbolic
    node whose coefficients are the pointwise product.
    """
    if isinstance(mu, HaarMeasure) or isinstance(nu, HaarMeasure):
        return HAAR
    a, b = mu.as_atomic(), nu.as_atomic()
    if a is not None and b is not None:
        return a.convolve_atomic(b)
    return ConvolutionMeasure(mu, nu)


def partial_density(mu, stage: int, grid_size: int) -> GridDensity:
    """Stage-n partial product of a Riesz or gapped product on a uniform grid.

    The grid must oversample the maximal frequency of the partial product by
    a factor of at least 4.  Non-negativity (tolerance -1e-10) and unit mean
    (tolerance 1e-9) are verified before the density is returned.
    """
    if not isinstance(mu, (RieszProduct, GappedProduct)):
        raise TypeError("partial densities exist for Riesz and gapped products only")
    if stage < 0:
        raise ValueError("stage must be non-negative")
    max_freq = mu.stage_max_frequency(stage) if stage > 0 else 0
    if grid_size < max(4 * max_freq, 4):
        raise ConstructionError(
            f"grid size {grid_size} under-resolves stage {stage} "
            f"(max frequency {max_freq}, need >= {4 * max_freq})"
        )
    t = np.arange(grid_size) / grid_size
    p = mu.partial_factor_values(stage, t)
    if float(p.min()) < -1e-10:
        raise ConstructionError(
            f"partial product negative beyond tolerance (min {p.min():.3e}); bad factor data"
        )
    mean = float(np.mean(p))
    if abs(mean - 1.0) > 1e-9:
        raise ConstructionError(f"partial product mean {mean!r} departs from 1")
    p = np.clip(p, 0.0, None)
    return GridDensity(p / np.mean(p))
