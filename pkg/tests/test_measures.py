import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlemix import (
    HAAR,
    Angle,
    AtomicMeasure,
    CantorLebesgue,
    ConstructionError,
    GappedProduct,
    GridDensity,
    MemoryGuardError,
    Mixture,
    PowerMeasure,
    RieszProduct,
    convolve,
    fejer_coefficients,
    fourier_coefficient,
    fourier_table,
    partial_density,
    two_atom_symmetric,
)
from conftest import GOLDEN, brute_force_atomic_coefficient


# ---------------------------------------------------------------------------
# fourier_coefficient examples


def test_haar_annihilates_nonzero_frequencies():
    assert fourier_coefficient(HAAR, 5) == 0
    assert fourier_coefficient(HAAR, 0) == 1


def test_two_atom_equals_cosine(golden_two_atom):
    # oracle: direct two-term sum from the definition
    atoms = [(GOLDEN, 0.5), (1 - GOLDEN, 0.5)]
    for n in (1, 2, 3, 17):
        want = brute_force_atomic_coefficient(atoms, n)
        got = fourier_coefficient(golden_two_atom, n)
        assert got == pytest.approx(want, abs=1e-12)
        assert got.imag == 0.0
        assert got.real == pytest.approx(math.cos(2 * math.pi * n * GOLDEN), abs=1e-12)


def test_riesz_singleton_frequency(riesz_two_factor):
    # expanding (1 + a1 cos 4x)(1 + a2 cos 16x) by hand: the coefficient at
    # frequency 16 is a2/2 = 1/8; at 4 it is a1/2; at 12 and 20 the products
    assert fourier_coefficient(riesz_two_factor, 16) == 0.125
    assert fourier_coefficient(riesz_two_factor, 4) == 0.25
    assert fourier_coefficient(riesz_two_factor, 20) == 0.25 * 0.125
    assert fourier_coefficient(riesz_two_factor, 12) == 0.25 * 0.125
    assert fourier_coefficient(riesz_two_factor, 5) == 0.0


def test_cantor_self_similarity_small(cantor3):
    for m in (1, 2, 5, 11):
        assert fourier_coefficient(cantor3, 3 * m) == pytest.approx(
            fourier_coefficient(cantor3, m), abs=1e-13
        )


def test_cantor_classical_product_value(cantor3):
    # oracle: directly multiply cos(2 pi / 3**k) until the factors saturate
    want = 1.0
    for k in range(1, 60):
        want *= math.cos(2 * math.pi * 3.0 ** (-k))
    assert fourier_coefficient(cantor3, 1) == pytest.approx(want, abs=1e-12)


# ---------------------------------------------------------------------------
# fourier_table examples


def test_haar_table_trivial():
    t = fourier_table(HAAR, 3)
    want = np.zeros(7, dtype=complex)
    want[3] = 1.0
    assert np.array_equal(t.values, want)


def test_dirac_quarter_table(dirac_quarter):
    t = fourier_table(dirac_quarter, 4)
    # e^{-pi i n / 2}: frozen by hand
    want = {0: 1, 1: -1j, 2: -1, 3: 1j, 4: 1}
    for n, v in want.items():
        assert t.value(n) == pytest.approx(v, abs=1e-15)
        assert t.value(-n) == pytest.approx(np.conj(v), abs=1e-15)
    assert abs(t.value(4)) == 1.0  # witnesses the lack of strict aperiodicity


def test_mixture_with_haar_scales_coefficients(golden_two_atom):
    mix = Mixture(((0.3, golden_two_atom), (0.7, HAAR)))
    t = fourier_table(mix, 16)
    base = fourier_table(golden_two_atom, 16)
    assert t.value(0) == 1.0
    for n in range(1, 17):
        assert t.value(n) == pytest.approx(0.3 * base.value(n), abs=1e-15)


def test_table_memory_guard():
    with pytest.raises(MemoryGuardError):
        fourier_table(HAAR, 10**7 + 1)


def test_table_sources(cantor3, golden_two_atom):
    assert fourier_table(golden_two_atom, 4).source_name(1) == "exact-closed-form"
    tc = fourier_table(cantor3, 4)
    assert tc.source_name(1).startswith("truncated-product(")
    tg = fourier_table(GridDensity(np.ones(4)), 4)
    assert tg.source_name(1) == "fft-of-grid"


# ---------------------------------------------------------------------------
# invariants


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=30),
            st.integers(min_value=1, max_value=31),
            st.floats(min_value=0.05, max_value=1.0),
        ),
        min_size=1,
        max_size=4,
    )
)
def test_atomic_invariants_random(data):
    pairs = []
    for p, q, w in data:
        pairs.append((Angle.rational(p % q, q), w))
    total = sum(w for _, w in pairs)
    pairs = [(a, w / total) for a, w in pairs]
    mu = AtomicMeasure.from_pairs(pairs)
    t = fourier_table(mu, 64)
    assert t.value(0) == 1.0
    assert np.all(np.abs(t.values) <= 1 + 1e-12)
    # conjugate symmetry is pinned exactly by construction
    assert np.array_equal(t.values[:64], np.conj(t.values[65:])[::-1])


def test_grid_density_validation():
    with pytest.raises(ConstructionError):
        GridDensity(np.array([1.0, 0.5]))   # mean != 1
    with pytest.raises(ConstructionError):
        GridDensity(np.array([2.0, -0.1, 1.0, 1.1]))   # negative cell


def test_grid_density_coefficients_decay_and_normalize():
    g = GridDensity(np.array([2.0, 0.5, 0.5, 1.0]))
    t = fourier_table(g, 64)
    assert t.value(0) == 1.0
    # absolutely continuous: zero at multiples of the cell count, 1/n decay
    assert abs(t.value(4)) == pytest.approx(0.0, abs=1e-14)
    assert abs(t.value(63)) < 0.05


def test_atom_weight_validation():
    with pytest.raises(ConstructionError):
        AtomicMeasure(((Angle.zero(), 0.5), (Angle.rational(1, 2), 0.6)))
    with pytest.raises(ConstructionError):
        AtomicMeasure(((Angle.zero(), 1.0), (Angle.zero(), 0.0)))


# ---------------------------------------------------------------------------
# convolution


def test_convolve_with_haar_is_haar(golden_two_atom):
    assert convolve(golden_two_atom, HAAR) is HAAR
    assert convolve(HAAR, CantorLebesgue(3)) is HAAR


def test_convolve_diracs_translates():
    a = AtomicMeasure.dirac(Angle.rational(1, 3))
    b = AtomicMeasure.dirac(Angle.rational(1, 2))
    c = convolve(a, b)
    assert isinstance(c, AtomicMeasure)
    assert c.atoms == ((Angle.rational(5, 6), 1.0),)


def test_convolve_with_reversal_squares_modulus(golden_two_atom):
    rev = golden_two_atom.reversed()
    c = convolve(golden_two_atom, rev)
    t = fourier_table(c, 32)
    base = fourier_table(golden_two_atom, 32)
    for n in range(-32, 33):
        want = abs(base.value(n)) ** 2
        got = t.value(n)
        assert got.imag == pytest.approx(0.0, abs=1e-15)
        assert got.real == pytest.approx(want, abs=1e-13)
        assert got.real >= -1e-15


@settings(max_examples=25, deadline=None)
@given(
    st.integers(min_value=1, max_value=11),
    st.integers(min_value=1, max_value=11),
    st.integers(min_value=-20, max_value=20),
)
def test_convolve_coefficient_law(pa, pb, n):
    mu = AtomicMeasure.from_pairs(
        [(Angle.rational(pa, 13), 0.25), (Angle.golden(), 0.75)]
    )
    nu = Mixture(((0.5, AtomicMeasure.dirac(Angle.rational(pb, 7))), (0.5, HAAR)))
    c = convolve(mu, nu)
    lhs = fourier_coefficient(c, n)
    rhs = fourier_coefficient(mu, n) * fourier_coefficient(nu, n)
    assert lhs == pytest.approx(rhs, abs=1e-14)


# ---------------------------------------------------------------------------
# partial densities


def test_partial_density_stage_zero_is_flat(riesz_two_factor):
    d = partial_density(riesz_two_factor, 0, 64)
    assert np.array_equal(d.density, np.ones(64))


def test_partial_density_stage_one_matches_formula():
    r = RieszProduct((0.5,), (4,))
    G = 64
    d = partial_density(r, 1, G)
    t = np.arange(G) / G
    want = 1 + 0.5 * np.cos(2 * np.pi * 4 * t)   # oracle: direct evaluation
    assert np.allclose(d.density, want, atol=1e-12)


def test_partial_density_fejer_gapped_nonnegative():
    gp = GappedProduct((fejer_coefficients(2),) * 3)
    d = partial_density(gp, 1, 128)
    assert float(d.density.min()) >= 0.0
    assert float(d.density.mean()) == pytest.approx(1.0, abs=1e-12)


def test_partial_density_grid_too_coarse(riesz_two_factor):
    with pytest.raises(ConstructionError):
        partial_density(riesz_two_factor, 2, 16)


@pytest.mark.parametrize("stage", [1, 2, 3])
def test_riesz_sparse_table_matches_partial_density_transform(stage):
    r = RieszProduct((0.5, 0.4, 0.3), (4, 16, 64))
    M = r.stage_max_frequency(stage)
    G = 4 * M
    d = partial_density(r, stage, G)
    dft = np.fft.fft(d.density) / G   # oracle: transform of the grid samples
    sparse = r.sparse_coefficients(M)
    for ell in range(-M, M + 1):
        want = sparse.get(ell, 0.0)
        assert dft[ell % G] == pytest.approx(want, abs=1e-10)


def test_gapped_sparse_table_matches_partial_density_transform():
    gp = GappedProduct((fejer_coefficients(1), fejer_coefficients(2)))
    stage = 2
    M = gp.stage_max_frequency(stage)
    G = 4 * M
    d = partial_density(gp, stage, G)
    dft = np.fft.fft(d.density) / G
    sparse = gp.sparse_coefficients(M, stage=stage)
    for ell in range(-M, M + 1):
        assert dft[ell % G] == pytest.approx(sparse.get(ell, 0.0), abs=1e-10)


# ---------------------------------------------------------------------------
# construction guards for products


def test_riesz_lacunarity_enforced():
    with pytest.raises(ConstructionError):
        RieszProduct((0.5, 0.5), (4, 8))   # ratio 2 < lacunarity witness
    with pytest.raises(ConstructionError):
        RieszProduct((1.5,), (4,))          # |a| > 1


def test_gapped_scale_gap_enforced():
    good = GappedProduct((fejer_coefficients(2), fejer_coefficients(2)))
    # auto scales satisfy the strengthened gap condition
    r1, r2 = good.scales
    M1 = r1 * 2
    assert (r2 - M1) / M1 >= good.gap_ratio
    with pytest.raises(ConstructionError):
        GappedProduct((fejer_coefficients(2), fejer_coefficients(2)), scales=(1, 3))


def test_gapped_negative_factor_rejected():
    # 1 + 2 cos(2 pi t) dips to -1: not a valid factor
    with pytest.raises(ConstructionError):
        GappedProduct((np.array([1.0, 1.0]),))


def test_power_and_reversed_tables(golden_two_atom, cantor3):
    p = PowerMeasure(cantor3, 3)
    for n in (1, 2, 7):
        assert fourier_coefficient(p, n) == pytest.approx(
            fourier_coefficient(cantor3, n) ** 3, abs=1e-14
        )
    rev = golden_two_atom.reversed()
    for n in (1, 5):
        assert fourier_coefficient(rev, n) == pytest.approx(
            np.conj(fourier_coefficient(golden_two_atom, n)), abs=1e-15
        )
