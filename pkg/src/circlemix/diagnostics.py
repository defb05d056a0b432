"""Mixing taxonomy for convolution walks: adaptedness, strict aperiodicity,
the rho-mixing supremum, the Doeblin verdict, aperiodicity ratios, Stolz
containment, coefficient summability and the L2 spectrum point cloud.

Classifiers are rule based.  Every verdict carries the identifier of the
mathematical rule that produced it; the registry below maps identifiers to
plain statements so reports stay self-describing.  Suprema computed from a
finite table are certified lower bounds for the supremum over all integers
and are labeled with their scan window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConzeUndefinedError, ZafranPremiseError
from .fourier import FourierTable
from .measures import (
    AtomicMeasure,
    CantorLebesgue,
    CircleMeasure,
    ConvolutionMeasure,
    GappedProduct,
    GridDensity,
    HaarMeasure,
    Mixture,
    PowerMeasure,
    ReversedMeasure,
    RieszProduct,
)

RULES: dict[str, str] = {
    "adapted.nondiscrete": "an uncountable support contains a point of infinite order, so its closed group is the whole circle",
    "adapted.irrational-atom": "an atom at an irrational angle generates a dense subgroup",
    "adapted.rational-cyclic": "atoms at rational angles generate a finite cyclic group (witness: its order)",
    "adapted.unknown": "the support structure is not resolvable from the given data",
    "aperiodic.nondiscrete": "non-discrete measures have |mu_hat(n)| < 1 for every n != 0",
    "aperiodic.irrational-difference": "an irrational difference of atoms prevents |mu_hat(n)| = 1 for n != 0",
    "aperiodic.rational-alignment": "all atom differences share a denominator d, so |mu_hat(d)| = 1",
    "aperiodic.unknown": "the support structure is not resolvable from the given data",
    "doeblin.absolutely-continuous": "the measure has an absolutely continuous component, so a power is non-singular",
    "doeblin.nonsingular-component": "a mixture component already has a non-singular power",
    "doeblin.atomic-powers-singular": "powers of an atomic measure stay atomic, hence singular",
    "doeblin.cantor-powers-singular": "powers of the self-similar Cantor family stay singular",
    "doeblin.riesz-summable-power": "sum |a_k|^m < infinity makes the m-th power absolutely continuous",
    "doeblin.riesz-divergent": "sum |a_k|^m diverges for every m, so no power is absolutely continuous",
    "doeblin.not-adapted": "the verdict presumes adaptedness, which fails or is unknown here",
    "doeblin.undecided": "no finite rule decides singularity of all powers for this family",
}


@dataclass(frozen=True)
class Classification:
    verdict: str                  # yes / no / unknown
    rule: str                     # key into RULES
    witness: str | None = None

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "rule": self.rule, "witness": self.witness}


@dataclass(frozen=True)
class RhoSup:
    """Windowed supremum of |mu_hat| off zero; a lower bound for the true one."""

    value: float
    frequency: int
    window: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "attained_at": self.frequency,
            "window": self.window,
            "certifies": "lower bound for the supremum over all integers",
        }


def _interleaved_order(half_width: int) -> np.ndarray:
    """Frequencies ordered 1, -1, 2, -2, ... for the smallest-|n| tie-break."""
    mags = np.repeat(np.arange(1, half_width + 1), 2)
    signs = np.tile(np.array([1, -1]), half_width)
    return mags * signs


def rho_sup(table: FourierTable) -> RhoSup:
    """max |mu_hat(n)| over 0 < |n| <= N with the attaining frequency.

    Ties break toward the smallest |n|, positive before negative.  The value
    is non-decreasing in N and bounds the supremum over all of Z from below.
    """
    N = table.half_width
    ns = _interleaved_order(N)
    mods = np.abs(table.values[ns + N])
    best = int(np.argmax(mods))
    # moduli of a probability never exceed 1; shave rounding excess
    return RhoSup(min(float(mods[best]), 1.0), int(ns[best]), N)


def alpha_lower_bound(table: FourierTable, n: int) -> float:
    """(windowed sup)^n, a certified lower bound for the n-step alpha-mixing
    coefficient: unimodular characters are admissible test functions."""
    if n < 1:
        raise ValueError("power must be at least 1")
    return rho_sup(table).value ** n


# ---------------------------------------------------------------------------
# Adapted / strictly aperiodic


def classify_adapted(mu: CircleMeasure) -> Classification:
    """Does the closed group generated by the support equal the circle?"""
    if not mu.is_discrete:
        return Classification("yes", "adapted.nondiscrete")
    atomic = mu.as_atomic()
    if atomic is None:
        return Classification("unknown", "adapted.unknown")
    for angle, _ in atomic.atoms:
        if not angle.is_rational:
            return Classification("yes", "adapted.irrational-atom", witness=str(angle))
    d = 1
    for angle, _ in atomic.atoms:
        d = math.lcm(d, angle.denominator)
    return Classification("no", "adapted.rational-cyclic", witness=f"group order divides {d}")


def classify_strictly_aperiodic(mu: CircleMeasure) -> Classification:
    """Is |mu_hat(n)| < 1 for every n != 0?"""
    if not mu.is_discrete:
        return Classification("yes", "aperiodic.nondiscrete")
    atomic = mu.as_atomic()
    if atomic is None:
        return Classification("unknown", "aperiodic.unknown")
    base = atomic.atoms[0][0]
    denoms = []
    for angle, _ in atomic.atoms:
        diff = angle - base
        if not diff.is_rational:
            return Classification(
                "yes", "aperiodic.irrational-difference", witness=str(diff)
            )
        denoms.append(diff.denominator)
    d = 1
    for q in denoms:
        d = math.lcm(d, q)
    return Classification(
        "no", "aperiodic.rational-alignment", witness=f"|mu_hat({d})| = 1"
    )


# ---------------------------------------------------------------------------
# Doeblin


def _power_hint(mu: CircleMeasure) -> Classification:
    """Family rule for 'some convolution power is non-singular'."""
    if isinstance(mu, (HaarMeasure, GridDensity)):
        return Classification("yes", "doeblin.absolutely-continuous")
    if isinstance(mu, AtomicMeasure):
        return Classification("no", "doeblin.atomic-powers-singular")
    if isinstance(mu, CantorLebesgue):
        return Classification("no", "doeblin.cantor-powers-singular")
    if isinstance(mu, RieszProduct):
        if mu.coeff_tail is None:
            return Classification("unknown", "doeblin.undecided",
                                  witness="tail law unspecified")
        try:
            z = zafran_test(mu)
        except ZafranPremiseError:
            return Classification("no", "doeblin.riesz-divergent",
                                  witness="coefficients do not decay")
        return Classification("yes", "doeblin.riesz-summable-power",
                              witness=f"absolutely continuous power at m={z.m}")
    if isinstance(mu, GappedProduct):
        return Classification("unknown", "doeblin.undecided")
    if isinstance(mu, (PowerMeasure, ReversedMeasure)):
        return _power_hint(mu.base)
    if isinstance(mu, ConvolutionMeasure):
        left, right = _power_hint(mu.left), _power_hint(mu.right)
        for side in (left, right):
            if side.verdict == "yes":
                return side
        return Classification("unknown", "doeblin.undecided")
    if isinstance(mu, Mixture):
        leaves = list(mu.leaves())
        hints = [(w, leaf, _power_hint(leaf)) for w, leaf in leaves]
        for _, _, h in hints:
            if h.verdict == "yes":
                return Classification("yes", "doeblin.nonsingular-component",
                                      witness=h.rule)
        if all(h.verdict == "no" for _, _, h in hints):
            continuous = [leaf for _, leaf, _ in hints if not leaf.is_discrete]
            if len(continuous) <= 1:
                # powers mix translates of a single singular family: singular
                return Classification("no", hints[0][2].rule)
        return Classification("unknown", "doeblin.undecided")
    return Classification("unknown", "doeblin.undecided")


def classify_doeblin(mu: CircleMeasure) -> Classification:
    """Uniform mixing in L-infinity, decided by family rules.

    Presumes adaptedness; without it the verdict is reported unknown.  A
    'yes' means some convolution power is non-singular, a 'no' that every
    power stays singular under the family rule named in the result.
    """
    adapted = classify_adapted(mu)
    if adapted.verdict != "yes":
        return Classification("unknown", "doeblin.not-adapted",
                              witness=f"adapted: {adapted.verdict}")
    return _power_hint(mu)


# ---------------------------------------------------------------------------
# Aperiodicity ratio (the j-th uniform ergodicity functional)


def conze_functional(table: FourierTable, j: int) -> tuple[float, int]:
    """max over the window of |1 - w^j| / (1 - |w|^j) at w = mu_hat(n), n != 0.

    Finiteness of the supremum over all of Z is the j-th criterion for
    almost-everywhere convergence of the powers; the windowed maximum is
    monotone in the window.  Requires |w| < 1 on the whole scanned window.
    """
    if j < 1:
        raise ValueError("j must be at least 1")
    N = table.half_width
    ns = _interleaved_order(N)
    w = table.values[ns + N]
    mods = np.abs(w)
    bad = np.nonzero(mods >= 1.0 - 1e-13)[0]
    if len(bad):
        raise ConzeUndefinedError(int(ns[bad[0]]))
    ratio = np.abs(1.0 - w**j) / (1.0 - mods**j)
    best = int(np.argmax(ratio))
    return float(ratio[best]), int(ns[best])


def conze_scan(table: FourierTable, js: tuple[int, ...] = (1, 2)) -> dict[int, np.ndarray]:
    """Per-frequency ratio values for n = 1..N, one array per j.

    Entries where |mu_hat(n)| sits at 1 are reported as NaN: the ratio is
    undefined there (the measure is not strictly aperiodic at n).
    """
    N = table.half_width
    ns = np.arange(1, N + 1)
    w = table.values[ns + N]
    mods = np.abs(w)
    undefined = mods >= 1.0 - 1e-13
    out = {}
    for j in js:
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.abs(1.0 - w**j) / (1.0 - mods**j)
        r[undefined] = np.nan
        out[j] = r
    return out


# ---------------------------------------------------------------------------
# Stolz region fit


@dataclass(frozen=True)
class StolzFit:
    """Minimal disk radius whose hull with 1 contains all coefficients."""

    radius: float | None        # None when no radius <= 1 - eps works
    max_requirement: float      # max over n of the per-point minimal radius
    frequency: int              # where the requirement is attained
    eps: float

    def to_dict(self) -> dict:
        return {
            "radius": self.radius,
            "max_requirement": self.max_requirement,
            "attained_at": self.frequency,
            "eps": self.eps,
        }


def _stolz_requirement(z: complex) -> float:
    """Smallest r >= 0 with z inside the convex hull of {1} and disk(0, r)."""
    u = z - 1.0
    d2 = (u * u.conjugate()).real
    if d2 < 1e-30:
        return 0.0
    if d2 <= 1.0 - z.real:
        return abs(z.imag) / math.sqrt(d2)
    return abs(z)


def stolz_fit(table: FourierTable, eps: float = 1e-6) -> StolzFit:
    """Fit the scanned coefficients into a closed Stolz region.

    Returns the smallest admissible radius, or None when even 1 - eps fails
    (coefficients crowd the unit circle away from 1).
    """
    N = table.half_width
    ns = _interleaved_order(N)
    w = table.values[ns + N]
    reqs = np.array([_stolz_requirement(complex(z)) for z in w])
    best = int(np.argmax(reqs))
    max_req = float(reqs[best])
    radius = max_req if max_req <= 1.0 - eps else None
    return StolzFit(radius, max_req, int(ns[best]), eps)


# ---------------------------------------------------------------------------
# Spectrum point cloud


@dataclass(eq=False)
class SpectrumCloud:
    """The coefficient point cloud {mu_hat(n)} with closure annotations.

    ``rajchman_consistent`` is a heuristic decay flag over the window (band
    maxima non-increasing and the outer band below half the inner one); it
    never asserts the measure actually is Rajchman.
    """

    frequencies: np.ndarray
    points: np.ndarray
    real_only: bool
    max_modulus: RhoSup
    band_maxima: list[float]
    rajchman_consistent: bool

    def to_dict(self) -> dict:
        return {
            "real_only": self.real_only,
            "max_modulus": self.max_modulus.to_dict(),
            "band_maxima": self.band_maxima,
            "rajchman_consistent": bool(self.rajchman_consistent),
            "note": "decay flag is consistent-with-Rajchman over the window, not a proof",
        }


def spectrum_cloud(table: FourierTable, bands: int = 4) -> SpectrumCloud:
    N = table.half_width
    ns = table.frequencies
    rho = rho_sup(table)
    mods = np.abs(table.values)
    edges = np.unique(
        np.round(np.geomspace(1, N, bands + 1)).astype(int)
    )
    band_maxima = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        mask = (np.abs(ns) >= lo) & (np.abs(ns) <= hi)
        band_maxima.append(float(mods[mask].max()) if mask.any() else 0.0)
    noninc = all(
        band_maxima[i + 1] <= band_maxima[i] + 1e-12
        for i in range(len(band_maxima) - 1)
    )
    decayed = bool(band_maxima) and (
        band_maxima[-1] <= 0.5 * max(band_maxima[0], 1e-300)
    )
    return SpectrumCloud(
        frequencies=ns,
        points=table.values.copy(),
        real_only=table.is_real(),
        max_modulus=rho,
        band_maxima=band_maxima,
        rajchman_consistent=noninc and decayed,
    )


# ---------------------------------------------------------------------------
# Coefficient summability (Riesz products)


@dataclass(frozen=True)
class ZafranResult:
    """Outcome of the summability test: is some power absolutely continuous?

    kind is one of ``ac_power_at`` (with the minimal exponent m), ``never``
    or ``unknown``.
    """

    kind: str
    m: int | None = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "m": self.m}


def zafran_test(riesz: RieszProduct) -> ZafranResult:
    """Smallest m with sum_k |a_k|^m < infinity, decided from the tail law.

    Explicit-prefix-only sequences are undecidable from finite data and give
    ``unknown``.  Tails that do not decay to zero violate the premise of the
    summability criterion and raise :class:`ZafranPremiseError`.
    """
    if riesz.coeff_tail is None:
        return ZafranResult("unknown", None)
    kind, param = riesz.coeff_tail
    if kind == "geometric":
        if abs(param) >= 1:
            raise ZafranPremiseError("Zafran premise violated (a_k must tend to 0)")
        return ZafranResult("ac_power_at", 1)
    # power tail a_k = k**-alpha
    alpha = param
    if alpha <= 0:
        raise ZafranPremiseError("Zafran premise violated (a_k must tend to 0)")
    m = max(1, int(math.floor(1.0 / alpha)) + 1)
    while m * alpha <= 1.0:
        m += 1
    while m > 1 and (m - 1) * alpha > 1.0:
        m -= 1
    return ZafranResult("ac_power_at", m)


# ---------------------------------------------------------------------------
# Report


@dataclass(eq=False)
class MixingReport:
    """Full classification record of a measure over a scan window."""

    window: int
    adapted: Classification
    strictly_aperiodic: Classification
    rho: RhoSup
    doeblin: Classification
    conze: dict[int, tuple[float, int] | None]
    conze_error: str | None
    zafran: ZafranResult | None
    stolz: StolzFit
    spectrum: SpectrumCloud

    def to_dict(self) -> dict:
        conze = {
            str(j): (None if v is None else {"value": v[0], "attained_at": v[1]})
            for j, v in self.conze.items()
        }
        return {
            "window": self.window,
            "adapted": self.adapted.to_dict(),
            "strictly_aperiodic": self.strictly_aperiodic.to_dict(),
            "rho_sup": self.rho.to_dict(),
            "doeblin": self.doeblin.to_dict(),
            "conze": conze,
            "conze_error": self.conze_error,
            "zafran": None if self.zafran is None else self.zafran.to_dict(),
            "stolz": self.stolz.to_dict(),
            "spectrum": self.spectrum.to_dict(),
            "rules": {
                rule: RULES[rule]
                for rule in sorted(
                    {self.adapted.rule, self.strictly_aperiodic.rule, self.doeblin.rule}
                )
            },
        }


def build_mixing_report(
    mu: CircleMeasure,
    table: FourierTable,
    js: tuple[int, ...] = (1, 2),
    stolz_eps: float = 1e-6,
) -> MixingReport:
    conze: dict[int, tuple[float, int] | None] = {}
    conze_error = None
    for j in js:
        try:
            conze[j] = conze_functional(table, j)
        except ConzeUndefinedError as exc:
            conze[j] = None
            conze_error = str(exc)
    zafran = None
    if isinstance(mu, RieszProduct):
        try:
            zafran = zafran_test(mu)
        except ZafranPremiseError:
            zafran = ZafranResult("premise-violated", None)
    return MixingReport(
        window=table.half_width,
        adapted=classify_adapted(mu),
        strictly_aperiodic=classify_strictly_aperiodic(mu),
        rho=rho_sup(table),
        doeblin=classify_doeblin(mu),
        conze=conze,
        conze_error=conze_error,
        zafran=zafran,
        stolz=stolz_fit(table, stolz_eps),
        spectrum=spectrum_cloud(table),
    )
