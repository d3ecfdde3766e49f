"""Dense complex-matrix kernels underlying the decomposition engines.

Hermitian eigendecomposition, PSD tests with re-checkable witnesses, kernel
bases, PSD factorization, nonnegative least squares (active set), and the
PSD-constrained least-squares solver used to fit atom blocks.

All tolerances are relative to max(1, input magnitude), so behaviour is
stable across input scales.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    BadParamsError,
    NoConvergenceError,
    NotHermitianError,
    NotPSDError,
)

DEFAULT_TOL = 1e-9
HERMITIAN_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-D complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise BadParamsError(f"expected a matrix, got array of ndim {m.ndim}")
    return m


def max_abs(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def frob(a) -> float:
    return float(np.linalg.norm(np.asarray(a).ravel()))


def require_hermitian(a, tol: float = HERMITIAN_TOL, what: str = "matrix") -> np.ndarray:
    """Check A = A* within tol*max(1, |A|_max) and return the symmetrized copy."""
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"{what} is not square: shape {m.shape}")
    dev = max_abs(m - m.conj().T)
    if dev > tol * max(1.0, max_abs(m)):
        raise NotHermitianError(f"{what} deviates from Hermitian by {dev:.3e}")
    return 0.5 * (m + m.conj().T)


def herm_eig(a, tol: float = HERMITIAN_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, V) with A = V diag(w) V*.
    """
    m = require_hermitian(a, tol)
    try:
        w, v = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise NoConvergenceError(f"eigensolver failed: {exc}") from exc
    return w, v


@dataclass(frozen=True)
class PsdWitness:
    """Outcome of a PSD test: verdict plus the extreme eigenpair backing it."""

    ok: bool
    lambda_min: float
    eigenvector: np.ndarray

    def __bool__(self) -> bool:
        return self.ok


def is_psd(a, tol: float = DEFAULT_TOL) -> PsdWitness:
    """Test lambda_min(A) >= -tol*max(1, |A|_max), with the minimizing eigenpair."""
    if tol < 0:
        raise BadParamsError("tol must be nonnegative")
    w, v = herm_eig(a)
    lam = float(w[0])
    return PsdWitness(lam >= -tol * max(1.0, max_abs(a)), lam, v[:, 0])


def kernel_basis(a, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical kernel of a PSD matrix.

    Counts every eigenvalue <= tol*|A|_max as zero.
    """
    w, v = herm_eig(a)
    cut = tol * max_abs(a)
    keep = w <= cut
    return v[:, keep]


def psd_factor(b, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Factor a PSD matrix as B = C*C with rows(C) = numerical rank of B."""
    w, v = herm_eig(b)
    scale = max(1.0, max_abs(b))
    if w[0] < -tol * scale:
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3e}")
    keep = w > tol * max_abs(b)
    w_kept = np.clip(w[keep], 0.0, None)
    return (np.sqrt(w_kept)[:, None] * v[:, keep].conj().T)


def numerical_rank(a, tol: float = DEFAULT_TOL) -> int:
    """Number of eigenvalues of a Hermitian matrix above tol*|A|_max in modulus."""
    w, _ = herm_eig(a)
    return int(np.sum(np.abs(w) > tol * max_abs(a)))


def nnls(m, y, tol: float = DEFAULT_TOL, max_iter: int | None = None) -> np.ndarray:
    """Nonnegative least squares min ||Mx - y||_2 s.t. x >= 0 (Lawson-Hanson).

    Terminates at the scaled KKT point: for x_i = 0 the gradient of the
    objective is >= -tol*scale and for x_i > 0 it is |.| <= tol*scale.
    """
    m = np.asarray(m, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if m.ndim != 2 or m.shape[0] != y.shape[0]:
        raise BadParamsError(f"shape mismatch: M {m.shape}, y {y.shape}")
    if not (np.all(np.isfinite(m)) and np.all(np.isfinite(y))):
        raise BadParamsError("nnls requires finite entries")
    ncols = m.shape[1]
    if max_iter is None:
        max_iter = 10 * ncols + 100

    x = np.zeros(ncols)
    passive = np.zeros(ncols, dtype=bool)
    mty = m.T @ y
    gscale = max(1.0, max_abs(mty))

    for _ in range(max_iter):
        w = mty - m.T @ (m @ x)
        w_masked = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_masked))
        if w_masked[j] <= tol * gscale:
            return x
        passive[j] = True

        while True:
            cols = np.flatnonzero(passive)
            z = np.linalg.lstsq(m[:, cols], y, rcond=None)[0]
            if np.all(z > 0):
                x[:] = 0.0
                x[cols] = z
                break
            zfull = np.zeros(ncols)
            zfull[cols] = z
            bad = passive & (zfull <= 0)
            ratios = x[bad] / (x[bad] - zfull[bad])
            alpha = float(np.min(ratios))
            x = x + alpha * (zfull - x)
            passive &= x > 1e-14 * max(1.0, float(x.max(initial=0.0)))
            x[~passive] = 0.0
    raise NoConvergenceError("nnls exceeded its iteration budget")


def proj_psd(blocks: np.ndarray) -> np.ndarray:
    """Project a batch (..., p, p) of Hermitian matrices onto the PSD cone."""
    b = np.asarray(blocks, dtype=np.complex128)
    b = 0.5 * (b + np.conj(np.swapaxes(b, -1, -2)))
    if b.shape[-1] == 1:
        return np.maximum(b.real, 0.0).astype(np.complex128)
    w, v = np.linalg.eigh(b)
    w = np.clip(w, 0.0, None)
    return (v * w[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def gram_max_eig(g: np.ndarray, iters: int = 200, rtol: float = 1e-14) -> float:
    """Largest eigenvalue of an entrywise-nonnegative symmetric matrix.

    Power iteration from the all-ones vector; safe for nonnegative matrices
    because the Perron eigenvector is itself nonnegative.
    """
    g = np.asarray(g, dtype=np.float64)
    size = g.shape[0]
    if size == 0:
        return 0.0
    x = np.ones(size) / np.sqrt(size)
    lam = 0.0
    for _ in range(iters):
        y = g @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        lam_new = float(x @ y)
        x = y / norm
        if abs(lam_new - lam) <= rtol * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam = lam_new
    return lam * (1.0 + 1e-9)


@dataclass
class PsdLsqResult:
    """Blocks fitted by the projected-gradient PSD least-squares solver."""

    blocks: np.ndarray          # (m, p, p), each PSD
    residual: float             # Frobenius distance in the weighted geometry
    stationarity: float         # final gradient-mapping norm
    iterations: int
    converged: bool


def psd_weighted_lsq(
    vand: np.ndarray,
    mults: np.ndarray,
    targets: np.ndarray,
    max_iter: int = 5000,
    tol: float = DEFAULT_TOL,
    blocks0: np.ndarray | None = None,
) -> PsdLsqResult:
    """Minimize sum_s mults[s] * ||sum_j vand[s,j] b_j - targets[s]||_F^2 over b_j >= 0.

    Projected gradient with step 1/L, L = largest eigenvalue of the scalar
    Gram of the fitting operator (entrywise nonnegative by construction in
    both call sites), projection by eigenvalue clipping.
    """
    vand = np.asarray(vand, dtype=np.complex128)
    mults = np.asarray(mults, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.complex128)
    nslots, m = vand.shape
    p = targets.shape[-1]

    if m == 0:
        return PsdLsqResult(
            blocks=np.zeros((0, p, p), dtype=np.complex128),
            residual=float(np.sqrt(np.sum(mults * np.sum(np.abs(targets) ** 2, axis=(1, 2))))),
            stationarity=0.0,
            iterations=0,
            converged=True,
        )

    gram = ((vand.conj().T * mults) @ vand)
    gram = np.ascontiguousarray(gram.real)
    lin = np.einsum("sj,s,sab->jab", vand.conj(), mults, targets)
    lin = 0.5 * (lin + np.conj(np.swapaxes(lin, -1, -2)))
    lstep = gram_max_eig(gram)
    if lstep == 0.0:
        lstep = 1.0
    gscale = max(1.0, frob(lin))

    b = np.zeros((m, p, p), dtype=np.complex128) if blocks0 is None else np.array(blocks0, dtype=np.complex128)
    stationarity = np.inf
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = np.einsum("jk,kab->jab", gram, b) - lin
        grad = 0.5 * (grad + np.conj(np.swapaxes(grad, -1, -2)))
        b_next = proj_psd(b - grad / lstep)
        stationarity = lstep * frob(b_next - b)
        b = b_next
        if stationarity <= tol * gscale:
            converged = True
            break

    pred = np.einsum("sj,jab->sab", vand, b)
    res2 = float(np.sum(mults * np.sum(np.abs(pred - targets) ** 2, axis=(1, 2))))
    return PsdLsqResult(
        blocks=b,
        residual=float(np.sqrt(max(res2, 0.0))),
        stationarity=float(stationarity),
        iterations=it,
        converged=converged,
    )


def toeplitz_atom_system(lambdas: np.ndarray, n: int):
    """Vandermonde-on-exponents system for fitting sum_j T_n(lambda_j) (x) b_j.

    Returns (vand, mults) over coefficient slots l = -n+1..n-1 such that the
    weighted objective of :func:`psd_weighted_lsq` equals the squared
    Frobenius distance between the assembled block-Toeplitz matrices.
    """
    lambdas = np.asarray(lambdas, dtype=np.complex128)
    ells = np.arange(-n + 1, n)
    vand = lambdas[None, :] ** ells[:, None]
    mults = (n - np.abs(ells)).astype(np.float64)
    return vand, mults


def psd_lsq(
    lambdas,
    target_coeffs,
    max_iter: int = 5000,
    tol: float = DEFAULT_TOL,
    blocks0: np.ndarray | None = None,
    strict: bool = True,
) -> PsdLsqResult:
    """PSD blocks b_j minimizing ||sum_j T_n(lambda_j) (x) b_j - T||_F.

    `target_coeffs` is the (2n-1, p, p) coefficient stack of the Hermitian
    block-Toeplitz target, ascending in l. The returned residual is measured
    on the assembled np x np matrices. Raises NoConvergenceError when strict
    and the stationarity tolerance was not reached within `max_iter`.
    """
    target_coeffs = np.asarray(target_coeffs, dtype=np.complex128)
    n = (target_coeffs.shape[0] + 1) // 2
    vand, mults = toeplitz_atom_system(np.asarray(lambdas, dtype=np.complex128), n)
    result = psd_weighted_lsq(vand, mults, target_coeffs, max_iter=max_iter, tol=tol, blocks0=blocks0)
    if strict and not result.converged:
        raise NoConvergenceError(
            f"psd_lsq stationarity {result.stationarity:.3e} after {result.iterations} iterations"
        )
    return result
