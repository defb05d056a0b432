"""Monte-Carlo machinery for the random walk driven by a circle measure.

All randomness flows through the counter-based Philox generator keyed by the
experiment seed, with draws made in a fixed chunked order, so identical
(seed, measure, sizes) inputs reproduce bit-identical streams.  Trajectories
are independent; the chunk size is a fixed constant so the stream layout
never depends on the host.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SamplingError
from .fourier import fourier_coefficient
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
from .operators import TrigPolynomial

_CHUNK = 1 << 16
_MAX_COMPOSITION_DEPTH = 64
# Sign depth that exhausts double precision for the self-similar family.
_CANTOR_DEPTH_EPS = 2.0**-53


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based 64-bit generator; fixed across versions."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def sample_increments(
    mu: CircleMeasure, rng: np.random.Generator, size: int, _depth: int = 0
) -> np.ndarray:
    """``size`` independent draws from mu, as angles in [0, 1)."""
    if _depth > _MAX_COMPOSITION_DEPTH:
        raise SamplingError("measure composition too deep to sample")
    if isinstance(mu, HaarMeasure):
        return rng.random(size)
    if isinstance(mu, AtomicMeasure):
        values = np.array([a.value for a, _ in mu.atoms])
        weights = np.array([w for _, w in mu.atoms])
        idx = rng.choice(len(values), size=size, p=weights / weights.sum())
        return values[idx]
    if isinstance(mu, GridDensity):
        masses = mu.density / mu.density.sum()
        cells = rng.choice(mu.n_cells, size=size, p=masses)
        return (cells + rng.random(size)) / mu.n_cells
    if isinstance(mu, CantorLebesgue):
        depth = int(math.ceil(-math.log(_CANTOR_DEPTH_EPS) / math.log(mu.theta))) + 1
        signs = rng.integers(0, 2, size=(size, depth)) * 2.0 - 1.0
        scales = mu.half_width_c * mu.theta ** -np.arange(1, depth + 1, dtype=float)
        return np.mod(signs @ scales, 1.0)
    if isinstance(mu, Mixture):
        weights = np.array([w for w, _ in mu.components])
        choice = rng.choice(len(weights), size=size, p=weights / weights.sum())
        out = np.empty(size)
        for i, (_, comp) in enumerate(mu.components):
            mask = choice == i
            count = int(mask.sum())
            if count:
                out[mask] = sample_increments(comp, rng, count, _depth + 1)
        return out
    if isinstance(mu, (RieszProduct, GappedProduct)):
        return _sample_truncated_density(mu, rng, size)
    if isinstance(mu, PowerMeasure):
        out = np.zeros(size)
        for _ in range(mu.exponent):
            out += sample_increments(mu.base, rng, size, _depth + 1)
        return np.mod(out, 1.0)
    if isinstance(mu, ReversedMeasure):
        return np.mod(-sample_increments(mu.base, rng, size, _depth + 1), 1.0)
    if isinstance(mu, ConvolutionMeasure):
        a = sample_increments(mu.left, rng, size, _depth + 1)
        b = sample_increments(mu.right, rng, size, _depth + 1)
        return np.mod(a + b, 1.0)
    raise SamplingError(f"family '{mu.family}' is not samplable")


def sample_increment(mu: CircleMeasure, rng: np.random.Generator) -> float:
    return float(sample_increments(mu, rng, 1)[0])


def _sampling_stage(mu) -> int:
    stage = mu.available_stage(256)
    if stage is not None:
        return stage
    # finitely many factors below the target resolution: use them all
    if isinstance(mu, RieszProduct):
        k = 0
        while mu.coefficient_a(k + 1) is not None:
            k += 1
        return k
    return mu.n_stages


def _sample_truncated_density(mu, rng: np.random.Generator, size: int) -> np.ndarray:
    """Inverse-CDF sampling of the stage-truncated density on a fine grid.

    The sampled law is the truncated one, not mu itself; the stage and grid
    are part of the experiment record wherever this is used.
    """
    stage = _sampling_stage(mu)
    if stage == 0:
        return rng.random(size)
    grid = max(1024, 4 * mu.stage_max_frequency(stage))
    masses, _ = mu.cell_masses(grid, stage)
    masses = np.clip(masses, 0.0, None)
    masses = masses / masses.sum()
    cells = rng.choice(grid, size=size, p=masses)
    return (cells + rng.random(size)) / grid


def sampling_notes(mu: CircleMeasure) -> dict:
    """Truncation metadata for families sampled through a surrogate density."""
    if isinstance(mu, (RieszProduct, GappedProduct)):
        stage = _sampling_stage(mu)
        grid = max(1024, 4 * mu.stage_max_frequency(stage)) if stage else 0
        return {"stage": stage, "grid": grid, "law": "stage-truncated density"}
    return {}


# ---------------------------------------------------------------------------
# Walks and estimates


@dataclass(eq=False)
class WalkSample:
    """A reproducible batch of trajectories of the driven walk."""

    seed: int
    n_trajectories: int
    horizon: int
    positions: np.ndarray        # (n_trajectories, horizon) angles after each step

    @classmethod
    def generate(
        cls, mu: CircleMeasure, x0: float, horizon: int, n_trajectories: int, seed: int
    ) -> "WalkSample":
        rng = make_rng(seed)
        pos = np.empty((n_trajectories, horizon))
        current = np.full(n_trajectories, x0 % 1.0)
        for step in range(horizon):
            current = np.mod(current + sample_increments(mu, rng, n_trajectories), 1.0)
            pos[:, step] = current
        return cls(seed, n_trajectories, horizon, pos)


def empirical_fourier(
    mu: CircleMeasure, ns, n_draws: int, seed: int
) -> np.ndarray:
    """Empirical characteristic function (1/M) sum exp(-2 pi i n X) at each n.

    Streams draws in fixed chunks; the CLT puts each entry within 4/sqrt(M)
    of mu_hat(n) outside events of probability below 1e-4.
    """
    ns = np.asarray(ns, dtype=np.int64)
    rng = make_rng(seed)
    acc = np.zeros(len(ns), dtype=np.complex128)
    remaining = n_draws
    while remaining > 0:
        count = min(_CHUNK, remaining)
        draws = sample_increments(mu, rng, count)
        acc += np.exp(-2j * np.pi * np.outer(ns, draws)).sum(axis=1)
        remaining -= count
    return acc / n_draws


@dataclass(frozen=True)
class PnfEstimate:
    """Monte-Carlo estimate of P^n f(x0) with its exact counterpart."""

    estimate: complex
    stderr: float
    exact: complex | None
    sigma_distance: float | None
    n_steps: int
    n_trajectories: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "estimate": {"re": self.estimate.real, "im": self.estimate.imag},
            "stderr": self.stderr,
            "exact": None
            if self.exact is None
            else {"re": self.exact.real, "im": self.exact.imag},
            "sigma_distance": self.sigma_distance,
            "n_steps": self.n_steps,
            "n_trajectories": self.n_trajectories,
            "seed": self.seed,
        }


def exact_pnf(mu: CircleMeasure, f: TrigPolynomial, x0: float, n: int) -> complex:
    """P^n f(x0) = sum_j a_j mu_hat(-j)^n e_j(x0), exact per frequency."""
    out = 0.0 + 0.0j
    for j in f.support():
        out += (
            f.coefficient(j)
            * fourier_coefficient(mu, -j) ** n
            * np.exp(2j * np.pi * j * x0)
        )
    return complex(out)


def estimate_pnf(
    mu: CircleMeasure,
    f: TrigPolynomial,
    x0: float,
    n: int,
    n_trajectories: int,
    seed: int,
) -> PnfEstimate:
    """Monte-Carlo average of f(x0 + S_n) over independent n-step walks.

    The exact value is computed alongside from the coefficient table and the
    deviation reported in standard-error units.
    """
    if n_trajectories < 100:
        raise ValueError("need at least 100 trajectories")
    if n < 0:
        raise ValueError("step count must be non-negative")
    rng = make_rng(seed)
    total = 0.0 + 0.0j
    total_sq = 0.0
    remaining = n_trajectories
    while remaining > 0:
        count = min(_CHUNK, remaining)
        s = np.zeros(count)
        for _ in range(n):
            s += sample_increments(mu, rng, count)
        vals = f.evaluate(np.mod(x0 + s, 1.0))
        total += vals.sum()
        total_sq += float((np.abs(vals) ** 2).sum())
        remaining -= count
    mean = total / n_trajectories
    var = max(total_sq / n_trajectories - abs(mean) ** 2, 0.0)
    stderr = math.sqrt(var / n_trajectories)
    exact = exact_pnf(mu, f, x0, n)
    sigma = abs(mean - exact) / stderr if stderr > 0 else (0.0 if mean == exact else math.inf)
    return PnfEstimate(complex(mean), stderr, exact, sigma, n, n_trajectories, seed)


# ---------------------------------------------------------------------------
# Almost-everywhere convergence probe


@dataclass(eq=False)
class AeProbe:
    """Exact values of P^n f over start points and a step schedule."""

    schedule: tuple[int, ...]
    x0s: tuple[float, ...]
    deviations: np.ndarray       # (len(schedule), len(x0s)) |P^n f(x0) - Ef|
    max_deviation: float
    decay_rate: float | None     # fitted geometric rate, None if degenerate

    def to_dict(self) -> dict:
        return {
            "schedule": list(self.schedule),
            "x0s": list(self.x0s),
            "max_abs_deviation": self.max_deviation,
            "decay_rate": self.decay_rate,
        }


def ae_convergence_probe(
    mu: CircleMeasure, f: TrigPolynomial, x0s, schedule
) -> AeProbe:
    """Evaluate P^n f exactly on a schedule; no Monte Carlo is involved.

    Reports the worst deviation from the mean of f and the empirical
    geometric decay rate fitted on the log-deviations.
    """
    schedule = tuple(int(n) for n in schedule)
    x0s = tuple(float(x) for x in x0s)
    mean = f.mean
    dev = np.empty((len(schedule), len(x0s)))
    for i, n in enumerate(schedule):
        for k, x0 in enumerate(x0s):
            dev[i, k] = abs(exact_pnf(mu, f, x0, n) - mean)
    max_dev = float(dev.max()) if dev.size else 0.0
    rate = None
    worst = dev.max(axis=1)
    if len(schedule) >= 2 and np.all(worst > 0):
        slope = np.polyfit(schedule, np.log(worst), 1)[0]
        rate = float(np.exp(slope))
    return AeProbe(schedule, x0s, dev, max_dev, rate)


# ---------------------------------------------------------------------------
# Sweeping-out probe


@dataclass(eq=False)
class SweepProbe:
    """Extrema of P^n 1_A over a grid, per step and running."""

    n_max: int
    per_step_max: np.ndarray
    per_step_min: np.ndarray
    running_max: np.ndarray
    running_min: np.ndarray
    retained_mass: np.ndarray

    def to_dict(self) -> dict:
        return {
            "n_max": self.n_max,
            "per_step_max": [float(v) for v in self.per_step_max],
            "per_step_min": [float(v) for v in self.per_step_min],
            "running_max": [float(v) for v in self.running_max],
            "running_min": [float(v) for v in self.running_min],
            "retained_mass": [float(v) for v in self.retained_mass],
        }


def sweeping_probe(
    mu: CircleMeasure,
    arcs: list[tuple[float, float]],
    n_max: int,
    grid_size: int,
    prune: float = 1e-15,
) -> SweepProbe:
    """Track extrema of P^n 1_A on a grid for a union of arcs A.

    The measure must be discrete with exactly expandable atoms; convolution
    powers are expanded symbolically (exact angle arithmetic) with weights
    below ``prune`` dropped, and the retained mass reported per step.  An
    illustrative probe: grid extrema over finitely many steps prove nothing
    about almost-everywhere limits.
    """
    atomic = mu.as_atomic()
    if atomic is None:
        raise SamplingError("sweeping probe needs a discrete measure with exact atoms")
    for lo, hi in arcs:
        if not (0.0 <= lo < hi <= 1.0):
            raise ValueError(f"arc ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1")
    per_max = np.empty(n_max)
    per_min = np.empty(n_max)
    retained = np.empty(n_max)
    current = atomic
    for n in range(1, n_max + 1):
        if n > 1:
            current = current.convolve_atomic(atomic, prune=prune)
        retained[n - 1] = math.fsum(w for _, w in current.atoms)
        if retained[n - 1] < 1.0 - 1e-9:
            warnings.warn(
                f"step {n}: pruning retained mass {retained[n - 1]:.12f}",
                RuntimeWarning,
            )
        # accumulate P^n 1_A on the grid with an interval difference array
        diff = np.zeros(grid_size + 1)
        for angle, w in current.atoms:
            shift = angle.value
            for lo, hi in arcs:
                a = (lo - shift) % 1.0
                b = a + (hi - lo)
                ia = int(math.ceil(a * grid_size))
                ib = int(math.ceil((b % 1.0) * grid_size)) if b > 1.0 else int(math.ceil(b * grid_size))
                if b <= 1.0:
                    diff[ia] += w
                    diff[int(math.ceil(b * grid_size))] -= w
                else:
                    diff[ia] += w
                    diff[grid_size] -= w
                    diff[0] += w
                    diff[ib] -= w
        vals = np.cumsum(diff[:-1])
        per_max[n - 1] = float(vals.max())
        per_min[n - 1] = float(vals.min())
    return SweepProbe(
        n_max,
        per_max,
        per_min,
        np.maximum.accumulate(per_max),
        np.minimum.accumulate(per_min),
        retained,
    )
