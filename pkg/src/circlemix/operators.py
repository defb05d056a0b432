"""Operator-norm quantities for the convolution Markov operator.

The operator is normal on L2, so ``||P^n - E||_2`` equals the n-th power of
the supremum of |mu_hat| off zero; the table window certifies a lower bound,
exact for rational atomic measures once the window covers their coefficient
period.  Total variation gives the common value of the L1 and L-infinity
norms; closed forms exist for atomic measures, singular families and their
mixtures with the uniform measure.  Everything else is bracketed by grid
circulant norms and endpoint interpolation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .diagnostics import classify_doeblin, rho_sup
from .errors import ConstructionError, DivergentSeriesError, GridBuildError
from .fourier import FourierTable
from .measures import (
    AtomicMeasure,
    CantorLebesgue,
    CircleMeasure,
    GridDensity,
    HaarMeasure,
    Mixture,
    PowerMeasure,
    ReversedMeasure,
    RieszProduct,
)

# |w| this close to 1 is treated as unimodular when testing divergence.
_UNIT_TOL = 1e-13


# ---------------------------------------------------------------------------
# Norm curves


@dataclass(eq=False)
class NormCurve:
    """Values of ||P^n - E|| for n = 1..n_max with an exactness label per n."""

    label: str                   # "1", "2", "inf", "tv", or a generic p
    ns: np.ndarray
    values: np.ndarray
    kinds: tuple[str, ...]       # exact / lower_bound / upper_bound per entry

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ConstructionError("norm values must be non-negative")


# ---------------------------------------------------------------------------
# L2: exact diagonal law


def l2_power_norm(table: FourierTable, n: int) -> float:
    """(windowed sup of |mu_hat| off 0) ** n.

    Equals ``||P^n - E||_2`` whenever the window certifies the global
    supremum (the operator is normal and acts diagonally on characters);
    otherwise it is a lower bound.
    """
    if n < 1:
        raise ValueError("power must be at least 1")
    return rho_sup(table).value ** n


def window_certifies_sup(mu: CircleMeasure, half_width: int) -> bool:
    """True when the scan window provably contains the coefficient supremum.

    Rational atomic measures have periodic coefficients; Haar is constant.
    """
    if isinstance(mu, HaarMeasure):
        return True
    atomic = mu.as_atomic()
    if atomic is None:
        return False
    period = 1
    for angle, _ in atomic.atoms:
        if not angle.is_rational:
            return False
        period = math.lcm(period, angle.denominator)
    return period <= half_width


def l2_norm_curve(table: FourierTable, n_max: int, exact: bool = False) -> NormCurve:
    s = rho_sup(table).value
    ns = np.arange(1, n_max + 1)
    kind = "exact" if exact else "lower_bound"
    return NormCurve("2", ns, s**ns.astype(float), tuple([kind] * n_max))


# ---------------------------------------------------------------------------
# Total variation closed forms


def tv_exact(mu: CircleMeasure, n: int) -> float | None:
    """||P^n - E||_1 = ||mu^n - m||_TV where a closed form exists, else None.

    Closed forms: uniform -> 0; atomic -> 2 (powers stay atomic, mutually
    singular with Lebesgue); pure singular families (Cantor, Riesz without a
    summable power) -> 2; a mixture of a mass-a singular part with the
    uniform measure -> 2 * a**n, because convolving with the uniform measure
    is idempotent and absorbs every cross term.
    """
    if n < 1:
        raise ValueError("power must be at least 1")
    if isinstance(mu, HaarMeasure):
        return 0.0
    if isinstance(mu, AtomicMeasure):
        return 2.0
    if isinstance(mu, CantorLebesgue):
        return 2.0
    if isinstance(mu, RieszProduct):
        verdict = classify_doeblin(mu)
        return 2.0 if verdict.verdict == "no" else None
    if isinstance(mu, PowerMeasure):
        inner = tv_exact(mu.base, n * mu.exponent)
        return inner
    if isinstance(mu, ReversedMeasure):
        return tv_exact(mu.base, n)
    if isinstance(mu, Mixture):
        haar_mass = 0.0
        singular_mass = 0.0
        continuous_singular = 0
        for w, leaf in mu.leaves():
            if isinstance(leaf, HaarMeasure):
                haar_mass += w
            elif isinstance(leaf, AtomicMeasure):
                singular_mass += w
            elif isinstance(leaf, CantorLebesgue) or (
                isinstance(leaf, RieszProduct)
                and classify_doeblin(leaf).verdict == "no"
            ):
                singular_mass += w
                continuous_singular += 1
            else:
                return None
        if haar_mass <= 0.0 or continuous_singular > 1:
            # no uniform part to absorb cross terms, or cross-convolutions of
            # distinct continuous singular families (no singularity rule)
            return None
        return 2.0 * singular_mass**n
    return None


# ---------------------------------------------------------------------------
# Grid chains


@dataclass(eq=False)
class GridChain:
    """Discretized walk on Z_N: exact cell masses plus their transform.

    ``kernel_hat[k] = sum_j p_j exp(-2 pi i j k / N)``; the eigenvalue of the
    grid Markov operator at character k is ``kernel_hat[-k mod N]``, which
    converges to mu_hat(-k) as the grid refines.
    """

    n_cells: int
    p: np.ndarray
    kernel_hat: np.ndarray
    measure: CircleMeasure | None = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        total = float(self.p.sum())
        if abs(total - 1.0) > 1e-9:
            raise ConstructionError(f"cell masses sum to {total!r}, not 1")
        if float(self.p.min()) < -1e-12:
            raise ConstructionError("cell masses must be non-negative")

    def eigenvalue(self, k: int) -> complex:
        return complex(self.kernel_hat[(-k) % self.n_cells])


def grid_build(mu: CircleMeasure, n_cells: int, stage: int | None = None) -> GridChain:
    """Bin a measure into N half-open cells centered at j/N, exactly per family.

    Atoms bin exactly; grid densities integrate cell overlaps exactly; the
    Cantor family uses its self-similarity recursion; Riesz and gapped
    products integrate their stage-truncated densities in closed form (the
    stage is recorded in the notes).
    """
    if n_cells < 2:
        raise ValueError("grid needs at least 2 cells")
    p, notes = mu.cell_masses(n_cells, stage)
    p = np.asarray(p, dtype=np.float64)
    total = float(p.sum())
    if abs(total - 1.0) > 1e-9:
        raise GridBuildError(f"cell masses sum to {total!r}; binning rule failed")
    p = p / total
    return GridChain(n_cells, p, np.fft.fft(p), measure=mu, notes=notes)


def grid_power_norms(chain: GridChain, n_max: int) -> NormCurve:
    """Exact grid operator norms sum_i |p^(n)_i - 1/N| for n = 1..n_max.

    On the grid the L1 and L-infinity operator norms of P^n - E coincide
    with this total variation; for fixed n the value converges to the
    continuum norm as N grows.  Powers are taken in the transform domain.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    N = chain.n_cells
    hat = chain.kernel_hat
    values = np.empty(n_max)
    hat_n = np.ones_like(hat)
    for n in range(1, n_max + 1):
        hat_n = hat_n * hat
        p_n = np.fft.ifft(hat_n).real
        drift = abs(float(p_n.sum()) - 1.0)
        if drift > 1e-8:
            warnings.warn(
                f"power {n}: mass drift {drift:.2e}; renormalizing", RuntimeWarning
            )
            p_n = p_n / p_n.sum()
        values[n - 1] = float(np.abs(p_n - 1.0 / N).sum())
    ns = np.arange(1, n_max + 1)
    return NormCurve("tv", ns, values, tuple(["exact"] * n_max))


def grid_tv_at(chain: GridChain, n: int) -> float:
    """Single-power version of :func:`grid_power_norms`."""
    p_n = np.fft.ifft(chain.kernel_hat**n).real
    return float(np.abs(p_n - 1.0 / chain.n_cells).sum())


# ---------------------------------------------------------------------------
# L_p bounds by interpolation


@dataclass(frozen=True)
class LpBounds:
    p: float                    # math.inf allowed
    n: int
    lower: float
    upper: float
    lower_kind: str
    upper_kind: str

    def to_dict(self) -> dict:
        return {
            "p": "inf" if math.isinf(self.p) else self.p,
            "n": self.n,
            "lower": self.lower,
            "upper": self.upper,
            "lower_kind": self.lower_kind,
            "upper_kind": self.upper_kind,
        }


def lp_norm_bounds(chain: GridChain, table: FourierTable, p: float, n: int) -> LpBounds:
    """Certified two-sided bounds for ||P^n - E||_p.

    The lower bound is the windowed-supremum power: characters have unit
    norm in every L_p and are eigenfunctions.  The upper bound interpolates
    the endpoint (L1 and L-infinity) norms, which share the total variation
    value; the closed form is used when available, the grid value otherwise.
    """
    if n < 1:
        raise ValueError("power must be at least 1")
    if not (p >= 1):
        raise ValueError("p must lie in [1, inf]")
    lower = l2_power_norm(table, n)
    lower_kind = "lower_bound"
    endpoint = None
    upper_kind = "upper_bound(interpolated-closed-form)"
    if chain.measure is not None:
        endpoint = tv_exact(chain.measure, n)
    if endpoint is None:
        endpoint = grid_tv_at(chain, n)
        upper_kind = "upper_bound(interpolated-grid)"
    # Riesz-Thorin between the equal endpoints: the exponent cancels.
    theta = 1.0 / p if not math.isinf(p) else 0.0
    upper = endpoint**theta * endpoint ** (1.0 - theta)
    upper = max(upper, lower)
    return LpBounds(p, n, lower, upper, lower_kind, upper_kind)


# ---------------------------------------------------------------------------
# Mean ergodic (Cesaro) norm


def mean_ergodic_norm(table: FourierTable, n_avg: int) -> float:
    """sup over k != 0 of |(1/N) sum_{j<=N} mu_hat(k)^j| (the Cesaro symbol).

    Uses the closed form w(1 - w^N) / (N(1 - w)) away from w = 1 and direct
    summation next to it; w = 1 contributes exactly 1 (a non-ergodic
    direction).
    """
    if n_avg < 1:
        raise ValueError("averaging length must be at least 1")
    N = table.half_width
    ns = _nonzero_frequencies(N)
    w = table.values[ns + N]
    out = np.zeros(len(w))
    near_one = np.abs(1.0 - w) < 1e-8
    safe = ~near_one
    ws = w[safe]
    out[safe] = np.abs(ws * (1.0 - ws**n_avg) / (n_avg * (1.0 - ws)))
    for i in np.nonzero(near_one)[0]:
        acc, term = 0.0 + 0.0j, 1.0 + 0.0j
        for _ in range(n_avg):
            term *= w[i]
            acc += term
        out[i] = abs(acc) / n_avg
    return float(out.max())


def _nonzero_frequencies(half_width: int) -> np.ndarray:
    mags = np.repeat(np.arange(1, half_width + 1), 2)
    signs = np.tile(np.array([1, -1]), half_width)
    return mags * signs


# ---------------------------------------------------------------------------
# Trigonometric polynomials


@dataclass(eq=False)
class TrigPolynomial:
    """f(t) = sum_{|j| <= J} a_j exp(2 pi i j t) with finite support."""

    coeffs: np.ndarray           # length 2J + 1, a_j at index j + J
    degree: int

    def __post_init__(self):
        if len(self.coeffs) != 2 * self.degree + 1:
            raise ConstructionError("coefficient array length must be 2*degree + 1")

    @classmethod
    def from_dict(cls, coeffs: dict[int, complex]) -> "TrigPolynomial":
        if not coeffs:
            return cls(np.zeros(1, dtype=np.complex128), 0)
        J = max(abs(j) for j in coeffs)
        arr = np.zeros(2 * J + 1, dtype=np.complex128)
        for j, a in coeffs.items():
            arr[j + J] = a
        return cls(arr, J)

    @classmethod
    def basis(cls, k: int) -> "TrigPolynomial":
        return cls.from_dict({k: 1.0})

    def coefficient(self, j: int) -> complex:
        if abs(j) > self.degree:
            return 0.0
        return complex(self.coeffs[j + self.degree])

    @property
    def mean(self) -> complex:
        return self.coefficient(0)

    @property
    def is_centered(self) -> bool:
        return abs(self.mean) == 0.0

    def support(self) -> list[int]:
        J = self.degree
        return [j - J for j in np.nonzero(self.coeffs)[0]]

    def evaluate(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        out = np.zeros(t.shape, dtype=np.complex128)
        for j in self.support():
            out += self.coefficient(j) * np.exp(2j * np.pi * j * t)
        return out

    def map_coefficients(self, fn) -> "TrigPolynomial":
        out = self.coeffs.copy()
        J = self.degree
        for j in self.support():
            out[j + J] = self.coefficient(j) * fn(j)
        return TrigPolynomial(out, J)


# ---------------------------------------------------------------------------
# One-sided ergodic Hilbert transform


def _table_value(table: FourierTable, j: int) -> complex:
    return table.value(j)


def hilbert_partial(table: FourierTable, f: TrigPolynomial, n: int) -> TrigPolynomial:
    """Partial sum sum_{k<=n} P^k f / k, applied per frequency.

    Output coefficients are ``b_j = a_j * sum_{k<=n} mu_hat(-j)^k / k``.
    """
    if not f.is_centered:
        raise ValueError("f must be centered (zero mean)")
    if n < 1:
        raise ValueError("partial order must be at least 1")

    def factor(j: int) -> complex:
        w = _table_value(table, -j)
        acc, term = 0.0 + 0.0j, 1.0 + 0.0j
        for k in range(1, n + 1):
            term *= w
            acc += term / k
        return acc

    return f.map_coefficients(factor)


@dataclass(frozen=True)
class HilbertResidual:
    """Distance of a partial sum from the limit against its analytic bound."""

    order: int
    residual: float
    tail_bound: float


def hilbert_closed_form(
    table: FourierTable,
    f: TrigPolynomial,
    check_order: int = 1000,
    check_grid: int = 257,
) -> tuple[TrigPolynomial, HilbertResidual]:
    """Limit of the series: ``b_j = -a_j log(1 - mu_hat(-j))``.

    Requires |mu_hat(-j)| < 1 on the support of f; at a unimodular value the
    series grows like the harmonic series and a divergence error is raised.
    Alongside the limit, the partial sum of order ``check_order`` is compared
    with the limit on a test grid; the reported residual must stay below the
    analytic geometric tail bound (plus floating-point slack).
    """
    if not f.is_centered:
        raise ValueError("f must be centered (zero mean)")
    support = f.support()
    mods = {}
    for j in support:
        w = _table_value(table, -j)
        if abs(w) >= 1.0 - _UNIT_TOL:
            raise DivergentSeriesError(j)
        mods[j] = abs(w)
    closed = f.map_coefficients(lambda j: -np.log(1.0 - _table_value(table, -j)))
    partial = hilbert_partial(table, f, check_order)
    grid = np.arange(check_grid) / check_grid
    residual = float(
        np.max(np.abs(partial.evaluate(grid) - closed.evaluate(grid)))
    )
    bound = 0.0
    for j in support:
        r = mods[j]
        bound += abs(f.coefficient(j)) * r ** (check_order + 1) / (
            (check_order + 1) * max(1.0 - r, 1e-300)
        )
    return closed, HilbertResidual(check_order, residual, bound)


def hilbert_telescoping_residual(table: FourierTable, f: TrigPolynomial, n: int) -> float:
    """Max coefficient defect of the telescoping identity at order n.

    With g = (I - P)^{-1} f per frequency, the partial sum equals
    ``Pg - sum_{k=2..n} P^k g/(k(k-1)) - P^{n+1} g / n`` exactly; both sides
    are evaluated independently and the largest coefficient gap returned.
    """
    if not f.is_centered:
        raise ValueError("f must be centered (zero mean)")
    if n < 1:
        raise ValueError("order must be at least 1")
    worst = 0.0
    for j in f.support():
        a = f.coefficient(j)
        w = _table_value(table, -j)
        if abs(w) >= 1.0 - _UNIT_TOL:
            raise DivergentSeriesError(j)
        # left side: direct partial sum
        acc, term = 0.0 + 0.0j, 1.0 + 0.0j
        for k in range(1, n + 1):
            term *= w
            acc += term / k
        lhs = a * acc
        # right side: telescoped form through g
        g = a / (1.0 - w)
        mid, term = 0.0 + 0.0j, w
        for k in range(2, n + 1):
            term *= w
            mid += term / (k * (k - 1))
        rhs = g * (w - mid - w ** (n + 1) / n)
        worst = max(worst, abs(lhs - rhs))
    return worst
