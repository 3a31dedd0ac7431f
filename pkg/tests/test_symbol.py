"""Tests of the momentum-space symbol layer: evaluation, fibering, bulk
bands, gap location, Fermi projections and Chern pairings.

Closed-form expectations: the 2x2 massive two-band model has bands
+-sqrt(k^2 + m^2), the scalar second-order model has band k^2, and the 3x3
rotating shallow-water model has bands {0, +-sqrt(k^2 + (f - nu k^2)^2)}.
"""
import numpy as np
import pytest

from bec.errors import (
    ContractViolation,
    DomainError,
    GaplessPointError,
    NoGapError,
)
from bec.symbol import (
    GapWindow,
    Symbol,
    bulk_bands,
    chern,
    eval_symbol,
    fermi_projection,
    fiberize,
    find_gap,
    relative_chern,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1.0j], [1.0j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
Y = np.array([[0.0, 1.0], [-1.0, 0.0]])


def dirac_symbol(m):
    return Symbol(2, {(1, 0): SX, (0, 1): SY, (0, 0): m * SZ})


# ---------------------------------------------------------------------------
# construction and evaluation


def test_symbol_rejects_non_hermitian_coefficient():
    with pytest.raises(ContractViolation):
        Symbol(2, {(0, 0): np.array([[0.0, 1.0], [0.0, 0.0]])})


def test_symbol_rejects_degree_above_four():
    with pytest.raises(ContractViolation):
        Symbol(1, {(3, 2): np.array([[1.0]])})


def test_symbol_drops_zero_coefficients():
    S = Symbol(1, {(0, 0): [[1.0]], (2, 0): [[0.0]]})
    assert set(S.terms) == {(0, 0)}
    assert S.max_degree() == 0


def test_eval_two_band_at_origin_is_mass_term(dirac_model):
    H = eval_symbol(dirac_model.symbol, 0.0, 0.0)
    assert np.allclose(H, SZ)


def test_eval_scalar_second_order(lap_model):
    assert np.allclose(eval_symbol(lap_model.symbol, 1.0, 2.0), [[5.0]])


def test_eval_shallow_water_matrix():
    from bec.models import shallow_water

    S = shallow_water(1.0, 0.0).symbol
    H = eval_symbol(S, 1.0, 0.0)
    want = np.array([[0.0, 1.0, 0.0],
                     [1.0, 0.0, 1.0j],
                     [0.0, -1.0j, 0.0]])
    assert np.allclose(H, want)


def test_eval_is_hermitian_at_random_momenta(shallow_model, regdirac_model):
    rng = np.random.default_rng(3)
    for S in (shallow_model.symbol, regdirac_model.symbol):
        for k1, k2 in rng.normal(scale=3.0, size=(25, 2)):
            H = eval_symbol(S, k1, k2)
            assert np.max(np.abs(H - H.conj().T)) < 1e-12


# ---------------------------------------------------------------------------
# fibering over the boundary momentum


def test_fiberize_two_band_coefficients(dirac_model):
    for k in (0.0, 1.0, -2.0):
        F = fiberize(dirac_model.symbol, k)
        assert F.order == 1
        assert np.max(np.abs(F.Ds[0] - (k * SX + SZ))) < 1e-14
        assert np.max(np.abs(F.Ds[1] - Y)) < 1e-14


def test_fiberize_scalar_coefficients(lap_model):
    for k in (0.0, 1.0, -2.0):
        F = fiberize(lap_model.symbol, k)
        assert F.order == 2
        assert np.max(np.abs(F.Ds[0] - np.array([[k * k]]))) < 1e-14
        assert np.max(np.abs(F.Ds[1])) < 1e-14
        assert np.max(np.abs(F.Ds[2] - np.array([[-1.0]]))) < 1e-14


def test_fiberize_fourth_order_coefficients(regdirac_model):
    m, eps = 1.0, 0.1
    for k in (0.0, 1.0, -2.0):
        F = fiberize(regdirac_model.symbol, k)
        assert F.order == 2
        D0 = k * SX + (m + eps * k * k) * SZ
        assert np.max(np.abs(F.Ds[0] - D0)) < 1e-14
        assert np.max(np.abs(F.Ds[1] - Y)) < 1e-14
        assert np.max(np.abs(F.Ds[2] - (-eps * SZ))) < 1e-14


def test_char_matrix_of_fiber(dirac_model):
    F = fiberize(dirac_model.symbol, 0.5)
    # D0 - mu D1 - z at mu=2, z=i
    M = F.char_matrix(2.0, 1j)
    want = (0.5 * SX + SZ) - 2.0 * Y - 1j * np.eye(2)
    assert np.max(np.abs(M - want)) < 1e-14


# ---------------------------------------------------------------------------
# bulk bands and gaps


def test_bulk_bands_two_band_closed_form(dirac_model):
    ky = np.linspace(-3.0, 3.0, 11)
    w = bulk_bands(dirac_model.symbol, 0.0, ky)
    assert w.shape == (2, 11)
    assert np.allclose(w[0], -np.sqrt(1.0 + ky * ky))
    assert np.allclose(w[1], np.sqrt(1.0 + ky * ky))


def test_bulk_bands_scalar_closed_form(lap_model):
    ky = np.linspace(0.0, 2.0, 5)
    w = bulk_bands(lap_model.symbol, 0.0, ky)
    assert np.allclose(w[0], ky * ky)


def test_bulk_bands_shallow_closed_form():
    from bec.models import shallow_water

    S = shallow_water(1.0, 0.0).symbol
    ky = np.linspace(-2.0, 2.0, 9)
    w = bulk_bands(S, 0.0, ky)
    assert np.allclose(w[1], 0.0, atol=1e-12)
    assert np.allclose(w[2], np.sqrt(1.0 + ky * ky))
    assert np.allclose(w[0], -np.sqrt(1.0 + ky * ky))


def test_bulk_bands_shallow_frozen_sample(shallow_model):
    w = bulk_bands(shallow_model.symbol, 0.7, np.array([-0.4]))
    assert np.allclose(sorted(w[:, 0]),
                       [-1.23459507531822, 0.0, 1.23459507531822],
                       atol=1e-12)


def test_bulk_bands_two_band_frozen_sample(dirac_model):
    w = bulk_bands(dirac_model.symbol, 0.6, np.array([-0.8]))
    assert abs(w[1, 0] - 1.4142135623731) < 1e-10


def test_bulk_bands_rejects_bad_grid(dirac_model):
    with pytest.raises(ContractViolation):
        bulk_bands(dirac_model.symbol, 0.0, np.array([1.0, 0.0]))
    with pytest.raises(ContractViolation):
        bulk_bands(dirac_model.symbol, 0.0, np.array([]))


def test_gap_window_contract():
    with pytest.raises(ContractViolation):
        GapWindow(1.0, 1.0)
    g = GapWindow(-1.0, 1.0)
    assert g.width() == 2.0


def test_find_gap_two_band(dirac_model):
    g = find_gap(dirac_model.symbol, 0.0, 6.0)
    assert abs(g.lo + 1.0) < 1e-2
    assert abs(g.hi - 1.0) < 1e-2


def test_find_gap_below_scalar_spectrum(lap_model):
    g = find_gap(lap_model.symbol, -1.0, 6.0)
    assert g.lo == -np.inf
    assert 0.0 <= g.hi < 0.05


def test_find_gap_rejects_filled_level(shallow_model):
    # the flat band sits at zero, so there is no gap around zero
    with pytest.raises(NoGapError):
        find_gap(shallow_model.symbol, 0.0, 6.0)


def test_find_gap_rejects_coarse_resolution(dirac_model):
    with pytest.raises(ContractViolation):
        find_gap(dirac_model.symbol, 0.0, 6.0, resolution=32)


# ---------------------------------------------------------------------------
# Fermi projections


def test_fermi_projection_two_band_at_origin():
    P = fermi_projection(dirac_symbol(1.0), 0.0, 0.0, 0.0)
    assert np.allclose(P, (np.eye(2) - SZ) / 2.0)
    P = fermi_projection(dirac_symbol(-1.0), 0.0, 0.0, 0.0)
    assert np.allclose(P, (np.eye(2) + SZ) / 2.0)


def test_fermi_projection_is_projection(regdirac_model):
    rng = np.random.default_rng(11)
    for k1, k2 in rng.normal(scale=2.0, size=(10, 2)):
        P = fermi_projection(regdirac_model.symbol, k1, k2, 0.0)
        assert np.max(np.abs(P @ P - P)) < 1e-10
        assert np.max(np.abs(P - P.conj().T)) < 1e-10
        assert abs(np.trace(P).real - 1.0) < 1e-10


def test_fermi_projection_rejects_gapless_point(lap_model):
    # the scalar band passes through k^2 = 1 at |k| = 1
    with pytest.raises(GaplessPointError):
        fermi_projection(lap_model.symbol, 1.0, 0.0, 1.0)


# ---------------------------------------------------------------------------
# Chern pairings


def test_chern_of_scalar_symbol_is_zero(lap_model):
    value, resid = chern(lap_model.symbol, -1.0, tol=1e-4)
    assert abs(value) < 1e-8
    assert resid < 1e-8


def test_chern_fourth_order_negative_mass():
    from bec.models import regularized_dirac

    S = regularized_dirac(-1.0, 0.1).symbol
    value, resid = chern(S, 0.0, tol=1e-4)
    assert abs(value + 1.0) < 1e-3
    assert resid < 1e-3


def test_chern_two_band_half_integer_warns(dirac_model):
    with pytest.warns(UserWarning):
        value, _ = chern(dirac_model.symbol, 0.0, tol=1e-4)
    assert abs(value - 0.5) < 1e-2


def test_relative_chern_same_symbol_is_zero(dirac_model):
    value, resid = relative_chern(dirac_model.symbol, dirac_model.symbol,
                                  0.0, tol=1e-4)
    assert value == 0.0
    assert resid == 0.0


def test_relative_chern_two_band_masses():
    S1, S2 = dirac_symbol(1.0), dirac_symbol(-1.0)
    v12, r12 = relative_chern(S1, S2, 0.0, tol=1e-4)
    v21, r21 = relative_chern(S2, S1, 0.0, tol=1e-4)
    assert abs(v12 - 1.0) < 1e-3 and r12 < 1e-3
    assert abs(v21 + 1.0) < 1e-3
    # antisymmetry up to quadrature error
    assert abs(v12 + v21) < 2e-4


def test_relative_chern_rejects_size_mismatch(dirac_model, shallow_model):
    with pytest.raises(DomainError):
        relative_chern(dirac_model.symbol, shallow_model.symbol, 0.0)
