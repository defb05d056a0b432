"""Mixing and spectral diagnostics for convolution random walks on the circle.

The package represents probability measures on the circle (atomic, grid
densities, self-similar Cantor measures, Riesz and gapped trigonometric
products, and their mixtures, powers, reversals and convolutions), computes
exact or closed-form Fourier coefficient tables, and turns them into
operator-level diagnostics: classification of adaptedness and strict
aperiodicity, the rho-mixing supremum, Doeblin verdicts, aperiodicity
ratios, Stolz-region fits, exact L2 decay, total-variation closed forms,
grid circulant norms, the one-sided ergodic Hilbert transform and
Monte-Carlo walk experiments.
"""

from .angles import Angle
from .diagnostics import (
    RULES,
    Classification,
    MixingReport,
    RhoSup,
    SpectrumCloud,
    StolzFit,
    ZafranResult,
    alpha_lower_bound,
    build_mixing_report,
    classify_adapted,
    classify_doeblin,
    classify_strictly_aperiodic,
    conze_functional,
    conze_scan,
    rho_sup,
    spectrum_cloud,
    stolz_fit,
    zafran_test,
)
from .errors import (
    CircleMixError,
    ConstructionError,
    ConzeUndefinedError,
    DivergentSeriesError,
    GridBuildError,
    MemoryGuardError,
    SamplingError,
    SpecError,
    ZafranPremiseError,
)
from .fourier import FourierTable, fourier_coefficient, fourier_table
from .measures import (
    HAAR,
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
    convolve,
    fejer_coefficients,
    partial_density,
    two_atom_symmetric,
)
from .operators import (
    GridChain,
    HilbertResidual,
    LpBounds,
    NormCurve,
    TrigPolynomial,
    grid_build,
    grid_power_norms,
    grid_tv_at,
    hilbert_closed_form,
    hilbert_partial,
    hilbert_telescoping_residual,
    l2_norm_curve,
    l2_power_norm,
    lp_norm_bounds,
    mean_ergodic_norm,
    tv_exact,
    window_certifies_sup,
)
from .specio import (
    load_measure,
    parse_angle,
    parse_measure,
    read_chain_snapshot,
    write_chain_snapshot,
    write_fourier_table,
    write_norm_curve,
)
from .walks import (
    AeProbe,
    PnfEstimate,
    SweepProbe,
    WalkSample,
    ae_convergence_probe,
    empirical_fourier,
    estimate_pnf,
    exact_pnf,
    make_rng,
    sample_increment,
    sample_increments,
    sweeping_probe,
)

__version__ = "0.1.0"
