"""Unit tests of the dense linear-algebra / polynomial / quadrature kernels.

Expected numbers are either exact by construction or frozen values of simple
closed forms (square roots, Gaussian integrals) computed independently.
"""
import numpy as np
import pytest

from bec.errors import (
    ContractViolation,
    DomainError,
    InsufficientResolutionError,
)
from bec.numerics import (
    as_matrix,
    as_square,
    check_hermitian,
    complex_eig,
    golden_min,
    herm_eig,
    min_singular,
    norm_inf,
    null_vectors,
    num_threads,
    parallel_map,
    poly_eval,
    poly_from_roots,
    poly_roots,
    quad_2d,
    trim_poly,
    unwind_phase,
)

# sqrt(1 - i), principal branch (positive real part)
SQRT_1_MINUS_I = 1.09868411346781 - 0.455089860562227j


# ---------------------------------------------------------------------------
# matrix validation helpers


def test_as_matrix_rejects_wrong_rank():
    with pytest.raises(ContractViolation):
        as_matrix(np.zeros(3))
    with pytest.raises(ContractViolation):
        as_matrix(np.zeros((2, 2, 2)))


def test_as_matrix_rejects_nonfinite_and_oversize():
    with pytest.raises(ContractViolation):
        as_matrix([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(ContractViolation):
        as_matrix(np.zeros((65, 65)))


def test_as_square_rejects_rectangular():
    with pytest.raises(ContractViolation):
        as_square(np.zeros((2, 3)))


def test_norm_inf_known_value():
    assert norm_inf(np.array([[1.0, -2.0], [3.0, 4.0]])) == 7.0
    assert norm_inf(np.zeros((2, 2))) == 0.0


def test_check_hermitian_accepts_and_rejects():
    check_hermitian(np.array([[1.0, 2.0 + 1j], [2.0 - 1j, 3.0]]))
    with pytest.raises(ContractViolation):
        check_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))


# ---------------------------------------------------------------------------
# eigen / singular kernels


def test_herm_eig_diagonal_matrix():
    lam, V = herm_eig(np.diag([2.0, -1.0]))
    assert np.allclose(lam, [-1.0, 2.0])
    # columns are eigenvectors
    M = np.diag([2.0, -1.0])
    assert norm_inf(M @ V - V @ np.diag(lam)) < 1e-12


def test_herm_eig_pauli_x():
    lam, V = herm_eig(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert np.allclose(lam, [-1.0, 1.0])
    assert norm_inf(V.conj().T @ V - np.eye(2)) < 1e-12


def test_herm_eig_two_band_fiber_sample():
    # k.sigma + m sigma_z at k=(1,1), m=1: eigenvalues +-sqrt(3)
    M = np.array([[1.0, 1.0 - 1.0j], [1.0 + 1.0j, -1.0]])
    lam, _ = herm_eig(M)
    assert np.allclose(lam, [-np.sqrt(3.0), np.sqrt(3.0)], atol=1e-12)


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(ContractViolation):
        herm_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_complex_eig_nilpotent_block():
    pairs = complex_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))
    assert len(pairs) == 2
    assert all(abs(lam) < 1e-12 for lam, _ in pairs)


def test_complex_eig_companion_of_quadratic():
    # companion matrix of z^2 + 1 -> eigenvalues +-i
    C = np.array([[0.0, -1.0], [1.0, 0.0]])
    lams = sorted((lam for lam, _ in complex_eig(C)), key=lambda z: z.imag)
    assert abs(lams[0] + 1j) < 1e-12 and abs(lams[1] - 1j) < 1e-12


def test_complex_eig_matches_exponent_closed_form():
    # companion of mu^2 - (k^2 - z) at k=1, z=i: roots +-sqrt(1 - i)
    C = np.array([[0.0, 1.0 - 1.0j], [1.0, 0.0]])
    lams = sorted((lam for lam, _ in complex_eig(C)), key=lambda z: z.real)
    assert abs(lams[1] - SQRT_1_MINUS_I) < 1e-12
    assert abs(lams[0] + SQRT_1_MINUS_I) < 1e-12


def test_complex_eig_eigenvector_residual():
    A = np.array([[1.0, 2.0], [3.0, 4.0]]) + 1j * np.eye(2)
    for lam, v in complex_eig(A):
        assert np.linalg.norm(A @ v - lam * v) < 1e-10
        assert abs(np.linalg.norm(v) - 1.0) < 1e-12


def test_min_singular_values():
    assert abs(min_singular(np.eye(3)) - 1.0) < 1e-14
    assert min_singular(np.diag([5.0, 0.0])) < 1e-14
    assert min_singular(np.array([[1.0, 1.0], [1.0, 1.0]])) < 1e-14


def test_null_vectors_of_rank_one_matrix():
    ns = null_vectors(np.array([[1.0, 1.0], [1.0, 1.0]]), 1e-10)
    assert ns.shape == (2, 1)
    v = ns[:, 0]
    assert abs(abs(v @ np.array([1.0, -1.0]) / np.sqrt(2.0)) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# polynomials


def test_trim_poly_drops_trailing_noise():
    c = trim_poly([1.0, 2.0, 1e-16])
    assert c.size == 2
    assert trim_poly([0.0, 0.0]).size == 0


def test_poly_eval_horner():
    assert poly_eval([1.0, 0.0, 1.0], 2.0) == 5.0
    assert poly_eval([1j, 1.0], 1j) == 2j


def test_poly_roots_simple_quadratics():
    r = sorted(poly_roots([-4.0, 0.0, 1.0]), key=lambda z: z.real)
    assert abs(r[0] + 2.0) < 1e-12 and abs(r[1] - 2.0) < 1e-12
    r = sorted(poly_roots([-1.0, 0.0, 1.0]), key=lambda z: z.real)
    assert abs(r[0] + 1.0) < 1e-12 and abs(r[1] - 1.0) < 1e-12


def test_poly_roots_fourth_order_dispersion_quartic():
    # mu^4 - 120 mu^2 + 200 factors through mu^2 = (60 +- sqrt(3400));
    # the same quartic arises as a fourth-order characteristic polynomial
    # with zeta_+ = 118.309518948453, zeta_- = 1.690481051547.
    roots = poly_roots([200.0, 0.0, -120.0, 0.0, 1.0])
    got = sorted(abs(r) for r in roots)
    want = [1.30018500666136, 1.30018500666136,
            10.8770179253531, 10.8770179253531]
    assert np.allclose(got, want, atol=1e-10)
    assert np.allclose(sorted(r.real for r in roots),
                       [-10.8770179253531, -1.30018500666136,
                        1.30018500666136, 10.8770179253531], atol=1e-10)


def test_poly_roots_rejects_degenerate_input():
    with pytest.raises(DomainError):
        poly_roots([0.0])
    with pytest.raises(DomainError):
        poly_roots([3.0])


def test_poly_from_roots_round_trip():
    rng = np.random.default_rng(42)
    for n in (2, 4, 8):
        roots = rng.normal(size=n) + 1j * rng.normal(size=n)
        # keep the roots well separated so the match is unambiguous
        roots = np.array([r + 0.5 * i for i, r in enumerate(roots)])
        c = poly_from_roots(roots, leading=1.0)
        back = poly_roots(c)
        assert np.allclose(sorted(back, key=lambda z: (z.real, z.imag)),
                           sorted(roots, key=lambda z: (z.real, z.imag)),
                           atol=1e-7)


# ---------------------------------------------------------------------------
# quadrature


def test_quad_2d_zero_integrand():
    res = quad_2d(lambda x, y: np.zeros_like(x))
    assert res.value == 0.0
    assert res.converged


def test_quad_2d_gaussian_integral():
    res = quad_2d(lambda x, y: np.exp(-(x * x + y * y)), tol=1e-8)
    assert res.converged
    assert abs(res.value - np.pi) < 1e-8


def test_quad_2d_is_linear():
    f = lambda x, y: np.exp(-(x * x + y * y))
    g = lambda x, y: np.exp(-((x - 1.0) ** 2 + y * y)) * x
    vf = quad_2d(f, tol=1e-8).value
    vg = quad_2d(g, tol=1e-8).value
    vfg = quad_2d(lambda x, y: 2.0 * f(x, y) - 3.0 * g(x, y), tol=1e-8).value
    assert abs(vfg - (2.0 * vf - 3.0 * vg)) < 1e-6


# ---------------------------------------------------------------------------
# phase unwinding


def test_unwind_phase_constant_is_zero():
    assert unwind_phase([1.0, 1.0, 1.0]) == 0.0


def test_unwind_phase_full_loop_in_quarter_steps():
    s = np.exp(1j * np.pi / 2.0 * np.arange(5))
    assert unwind_phase(s) == 1.0


def test_unwind_phase_direction():
    s = np.exp(-1j * np.pi / 2.0 * np.arange(5))
    assert unwind_phase(s) == -1.0


def test_unwind_phase_rejects_bad_magnitudes():
    with pytest.raises(ContractViolation):
        unwind_phase([1.0, 3.0])
    with pytest.raises(ContractViolation):
        unwind_phase([1.0, 0.1])


def test_unwind_phase_rejects_coarse_sampling():
    # a jump of 3/4 pi cannot be told apart from -5/4 pi
    with pytest.raises(InsufficientResolutionError):
        unwind_phase([1.0, np.exp(0.75j * np.pi)])


def test_unwind_phase_concatenation_is_additive():
    rng = np.random.default_rng(7)
    angles = np.cumsum(rng.uniform(-1.2, 1.4, size=40))
    s = np.exp(1j * angles)
    for j in (1, 17, 38):
        total = unwind_phase(s)
        parts = unwind_phase(s[: j + 1]) + unwind_phase(s[j:])
        assert abs(total - parts) < 1e-12


# ---------------------------------------------------------------------------
# scalar minimisation / threading helpers


def test_golden_min_quadratic():
    x, fx = golden_min(lambda t: (t - 0.3) ** 2 + 1.0, -1.0, 1.0, xtol=1e-10)
    assert abs(x - 0.3) < 1e-6
    assert abs(fx - 1.0) < 1e-12


def test_num_threads_env(monkeypatch):
    monkeypatch.delenv("BEC_NUM_THREADS", raising=False)
    assert num_threads() == 1
    monkeypatch.setenv("BEC_NUM_THREADS", "4")
    assert num_threads() == 4
    monkeypatch.setenv("BEC_NUM_THREADS", "junk")
    assert num_threads() == 1
    monkeypatch.setenv("BEC_NUM_THREADS", "-2")
    assert num_threads() == 1


def test_parallel_map_preserves_order(monkeypatch):
    monkeypatch.setenv("BEC_NUM_THREADS", "3")
    items = list(range(20))
    assert parallel_map(lambda x: x * x, items) == [x * x for x in items]
    monkeypatch.setenv("BEC_NUM_THREADS", "1")
    assert parallel_map(lambda x: x + 1, items) == [x + 1 for x in items]
