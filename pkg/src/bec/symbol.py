"""Matrix-polynomial bulk Hamiltonians on the plane.

A Symbol is a finite sum  H(k1, k2) = sum_ab c_ab k1^a k2^b  with Hermitian
matrix coefficients.  This module evaluates symbols, restricts them to
half-plane fibers (k2 -> derivative along y), samples bulk bands, locates
spectral gaps, and computes Chern / relative-Chern pairings of the Fermi
projection by adaptive quadrature.
"""

import warnings

import numpy as np

from .errors import (
    ContractViolation,
    DomainError,
    GaplessPointError,
    NoGapError,
)
from .numerics import as_square, check_hermitian, norm_inf, quad_2d


class Symbol:
    """Matrix polynomial in (k1, k2) with Hermitian coefficients.

    terms: dict mapping (a, b) degree pairs to NxN coefficient matrices.
    Total degree is capped at 4.
    """

    def __init__(self, N, terms):
        self.N = int(N)
        self.terms = {}
        for (a, b), c in terms.items():
            a, b = int(a), int(b)
            if a < 0 or b < 0 or a + b > 4:
                raise ContractViolation(
                    "term degree (%d,%d) outside supported range" % (a, b))
            C = check_hermitian(as_square(c))
            if C.shape != (self.N, self.N):
                raise ContractViolation("coefficient shape %s != N=%d"
                                        % (C.shape, self.N))
            if norm_inf(C) > 0:
                self.terms[(a, b)] = C

    def __call__(self, k1, k2):
        return eval_symbol(self, k1, k2)

    def eval_batch(self, k1, k2):
        """Evaluate at arrays of momenta; returns a (n, N, N) stack."""
        k1 = np.asarray(k1, dtype=float).ravel()
        k2 = np.asarray(k2, dtype=float).ravel()
        out = np.zeros((k1.size, self.N, self.N), dtype=complex)
        for (a, b), C in self.terms.items():
            out += (k1 ** a * k2 ** b)[:, None, None] * C
        return out

    def max_degree(self):
        return max((a + b for a in [0] for a, b in self.terms), default=0)


def eval_symbol(S, k1, k2):
    """H(k1, k2) = sum c_ab k1^a k2^b; Hermitian for real momenta."""
    out = np.zeros((S.N, S.N), dtype=complex)
    for (a, b), C in S.terms.items():
        out += (float(k1) ** a) * (float(k2) ** b) * C
    return out


class FiberOperator:
    """Half-plane fiber of a symbol at boundary momentum k:
    an ordinary differential operator  sum_j D_j d^j/dy^j  acting on
    C^N-valued functions of y."""

    def __init__(self, k, N, Ds):
        self.k = float(k)
        self.N = int(N)
        Ds = [as_square(D) for D in Ds]
        order = 0
        for j, D in enumerate(Ds):
            if norm_inf(D) > 0:
                order = j
        self.Ds = [np.asarray(D, dtype=complex) for D in Ds[: order + 1]]
        self.order = order

    def char_matrix(self, mu, z):
        """sum_j D_j (-mu)^j - z, whose kernel gives exponential solutions
        e^{-mu y} phi of the fiber eigenvalue problem."""
        out = -z * np.eye(self.N, dtype=complex)
        for j, D in enumerate(self.Ds):
            out = out + D * (-mu) ** j
        return out


def fiberize(S, k):
    """Restrict the symbol to the fiber over boundary momentum k.

    The transverse momentum becomes a derivative, k2^j -> (i d/dy)^j, so the
    coefficient of d^j/dy^j is  D_j = i^j sum_a c_aj k^a.  With this choice
    the massive 2x2 model k1 sx + k2 sy + m sz maps onto
    sx k + [[0,1],[-1,0]] d/dy + m sz.
    """
    k = float(k)
    nmax = max((b for (_, b) in S.terms), default=0)
    Ds = [np.zeros((S.N, S.N), dtype=complex) for _ in range(nmax + 1)]
    for (a, b), C in S.terms.items():
        Ds[b] = Ds[b] + (1j ** b) * (k ** a) * C
    return FiberOperator(k, S.N, Ds)


def bulk_bands(S, k, ky_grid):
    """Eigenvalue branches of H(k, ky) over a ky grid.

    Returns an (N, len(grid)) array; row j is the j-th band in ascending
    order at each grid point.
    """
    ky = np.asarray(ky_grid, dtype=float).ravel()
    if ky.size == 0:
        raise ContractViolation("ky_grid must be nonempty")
    if np.any(np.diff(ky) < 0):
        raise ContractViolation("ky_grid must be sorted")
    H = S.eval_batch(np.full(ky.shape, float(k)), ky)
    w = np.linalg.eigvalsh(H)
    return w.T


class GapWindow:
    """Open energy interval (lo, hi) free of bulk spectrum."""

    def __init__(self, lo, hi, provenance="declared"):
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            raise ContractViolation("gap window needs lo < hi")
        self.lo = lo
        self.hi = hi
        self.provenance = provenance

    def __repr__(self):
        return "GapWindow(%g, %g, %s)" % (self.lo, self.hi, self.provenance)

    def width(self):
        return self.hi - self.lo

    def clipped(self, depth):
        """Finite version of a half-infinite window for plotting/scanning."""
        lo = self.lo if np.isfinite(self.lo) else self.hi - abs(depth)
        hi = self.hi if np.isfinite(self.hi) else self.lo + abs(depth)
        return GapWindow(lo, hi, self.provenance)


def find_gap(S, around, k_window, resolution=128):
    """Largest interval around `around` free of sampled band energies over
    the momentum square [-k_window, k_window]^2."""
    if resolution < 64:
        raise ContractViolation("resolution must be >= 64")
    g = np.linspace(-k_window, k_window, int(resolution))
    K1, K2 = np.meshgrid(g, g, indexing="ij")
    w = np.linalg.eigvalsh(S.eval_batch(K1.ravel(), K2.ravel())).ravel()
    below = w[w <= around]
    above = w[w >= around]
    if np.any(np.abs(w - around) < 1e-12):
        raise NoGapError("bulk band passes through %g on the sampling grid"
                         % around)
    lo = float(np.max(below)) if below.size else -np.inf
    hi = float(np.min(above)) if above.size else np.inf
    if hi - lo <= 0:
        raise NoGapError("no gap around %g" % around)
    return GapWindow(lo, hi, provenance="computed")


# ---------------------------------------------------------------------------
# Fermi projection and Chern pairings


def _projection_stack(S, K1, K2, level):
    """Spectral projections below `level` at a batch of momenta."""
    H = S.eval_batch(K1, K2)
    w, V = np.linalg.eigh(H)
    gap_dist = np.min(np.abs(w - level))
    if gap_dist <= 1e-8:
        i = int(np.argmin(np.min(np.abs(w - level), axis=1)))
        raise GaplessPointError(
            "eigenvalue within 1e-8 of level %g at k=(%g, %g)"
            % (level, K1[i], K2[i]))
    mask = (w < level).astype(float)
    Vm = V * mask[:, None, :]
    return Vm @ V.conj().swapaxes(1, 2)


def fermi_projection(S, k1, k2, level):
    """Projection onto the eigenspaces of H(k1,k2) with energy below level."""
    P = _projection_stack(S, np.array([float(k1)]), np.array([float(k2)]),
                          level)[0]
    herm = norm_inf(P - P.conj().T)
    idem = norm_inf(P @ P - P)
    if herm >= 1e-10 or idem >= 1e-10:
        raise GaplessPointError(
            "projection residuals too large (herm %.2e, idem %.2e)"
            % (herm, idem))
    return P


def _curvature_batch(S, level, k1, k2):
    """Berry-curvature-style integrand Tr(P [d2 P, d1 P]) / (2 pi i) at a
    batch of momenta, with Richardson-extrapolated central differences."""
    k1 = np.asarray(k1, dtype=float).ravel()
    k2 = np.asarray(k2, dtype=float).ravel()
    n = k1.size
    h = 1e-4 * (1.0 + np.hypot(k1, k2))
    K1 = np.concatenate([k1, k1 + h, k1 - h, k1 + h / 2, k1 - h / 2,
                         k1, k1, k1, k1])
    K2 = np.concatenate([k2, k2, k2, k2, k2,
                         k2 + h, k2 - h, k2 + h / 2, k2 - h / 2])
    P = _projection_stack(S, K1, K2, level).reshape(9, n, S.N, S.N)
    hh = h[:, None, None]
    d1_h = (P[1] - P[2]) / (2 * hh)
    d1_h2 = (P[3] - P[4]) / hh
    d1 = (4 * d1_h2 - d1_h) / 3.0
    d2_h = (P[5] - P[6]) / (2 * hh)
    d2_h2 = (P[7] - P[8]) / hh
    d2 = (4 * d2_h2 - d2_h) / 3.0
    comm = d2 @ d1 - d1 @ d2
    tr = np.einsum("nij,nji->n", P[0], comm)
    return tr / (2j * np.pi)


def chern(S, level, tol=1e-4):
    """Chern pairing of the Fermi projection below `level`.

    Integrates Tr(P [d2 P, d1 P]) / (2 pi i) over the momentum plane.
    Returns (value, residual) where residual is the distance of the value
    from the nearest integer; a large residual triggers a warning because it
    signals the integrand does not actually pair with an integer class (the
    projection fails to settle at momentum infinity).
    """

    def f(x1, x2):
        return _curvature_batch(S, level, x1, x2)

    res = quad_2d(f, tol=tol)
    if not res.converged:
        warnings.warn("chern quadrature did not reach tol=%g (error %.2e)"
                      % (tol, res.error))
    val = float(res.value.real)
    resid = abs(val - round(val))
    if resid > max(10 * tol, 1e-3):
        warnings.warn(
            "Chern pairing %.6f is not close to an integer (residual %.3f): "
            "the symbol is not strongly affiliated at this level" % (val, resid))
    return val, resid


def relative_chern(S1, S2, level, tol=1e-4):
    """Relative Chern pairing of two symbols that agree at large momentum.

    Integrates the pointwise difference of the two curvature integrands in a
    single quadrature, which converges even when the individual pairings do
    not (the half-integer mass contributions at infinity cancel).
    """
    if S1.N != S2.N:
        raise DomainError("relative pairing needs equal matrix sizes "
                          "(%d vs %d)" % (S1.N, S2.N))
    radius = 1e3
    angles = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    K1, K2 = radius * np.cos(angles), radius * np.sin(angles)
    P1 = _projection_stack(S1, K1, K2, level)
    P2 = _projection_stack(S2, K1, K2, level)
    dev = max(norm_inf(a - b) for a, b in zip(P1, P2))
    if dev > 0.1:
        warnings.warn(
            "projections differ by %.3f at momentum radius %g: the two "
            "symbols are not comparable and the relative pairing may not be "
            "an integer" % (dev, radius))

    def f(x1, x2):
        return (_curvature_batch(S1, level, x1, x2)
                - _curvature_batch(S2, level, x1, x2))

    res = quad_2d(f, tol=tol)
    if not res.converged:
        warnings.warn("relative chern quadrature did not reach tol=%g "
                      "(error %.2e)" % (tol, res.error))
    val = float(res.value.real)
    return val, abs(val - round(val))
