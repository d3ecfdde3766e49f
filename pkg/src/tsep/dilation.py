"""Naimark-style factorization T = (1_n (x) w)* T_n(u) (1_n (x) w).

An atomic decomposition sum_j T_n(lambda_j) (x) b_j lifts to a unitary
u = sum_j lambda_j p_j with mutually orthogonal coordinate projections p_j
and a stacked operator w with w* p_j w = b_j; the dilation dimension is the
sum of the block ranks, which is minimal."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import (
    DegenerateAtomWarning,
    DimensionMismatchError,
    NotUnitaryError,
)
from .separability import AtomicDecomposition
from .toeplitz import BlockToeplitz

UNITARY_TOL = 1e-10


@dataclass
class DilationFactorization:
    """Spectral-form unitary u (q x q), operator w (q x p), and the spectrum
    (lambda_j, multiplicity r_j) defining the coordinate projections."""

    q: int
    u: np.ndarray
    w: np.ndarray
    spectrum: list  # [(lambda_j, r_j)]

    def projections(self):
        """Yield (lambda_j, p_j) with p_j the orthogonal coordinate
        projection onto the j-th multiplicity slot; the p_j sum to I_q."""
        offset = 0
        for lam, mult in self.spectrum:
            proj = np.zeros((self.q, self.q), dtype=np.complex128)
            proj[offset:offset + mult, offset:offset + mult] = np.eye(mult)
            yield lam, proj
            offset += mult


def naimark_from_atoms(dec: AtomicDecomposition, tol: float = 1e-9) -> DilationFactorization:
    """Build the dilation from an atomic decomposition.

    Each block factors as b_j = c_j* c_j with rank(b_j) rows; w stacks the
    c_j and u is diagonal with lambda_j repeated rank(b_j) times. Atoms with
    numerically zero blocks are dropped with a warning.
    """
    factors = []
    spectrum = []
    for lam, block in dec.atoms():
        c = matcore.psd_factor(block, tol)
        if c.shape[0] == 0:
            warnings.warn(f"atom at {lam} has a numerically zero block; dropped",
                          DegenerateAtomWarning)
            continue
        factors.append(c)
        spectrum.append((lam, c.shape[0]))
    q = sum(mult for _, mult in spectrum)
    if q == 0:
        return DilationFactorization(0, np.zeros((0, 0), dtype=np.complex128),
                                     np.zeros((0, dec.p), dtype=np.complex128), [])
    w = np.concatenate(factors, axis=0)
    u = np.zeros((q, q), dtype=np.complex128)
    offset = 0
    for lam, mult in spectrum:
        u[offset:offset + mult, offset:offset + mult] = lam * np.eye(mult)
        offset += mult
    return DilationFactorization(q, u, w, spectrum)


def universal_at_unitary(n: int, u) -> BlockToeplitz:
    """The universal Toeplitz matrix evaluated at a unitary: tau_l = u^l."""
    u = matcore.as_matrix(u)
    q = u.shape[0]
    if u.shape[1] != q:
        raise NotUnitaryError(f"matrix is not square: shape {u.shape}")
    if q and matcore.max_abs(u.conj().T @ u - np.eye(q)) > UNITARY_TOL:
        raise NotUnitaryError("matrix fails u*u = I within 1e-10")
    coeffs = np.empty((2 * n - 1, q, q), dtype=np.complex128)
    coeffs[n - 1] = np.eye(q)
    for ell in range(1, n):
        coeffs[n - 1 + ell] = coeffs[n - 2 + ell] @ u
        coeffs[n - 1 - ell] = coeffs[n - ell] @ u.conj().T
    return BlockToeplitz(n, q, coeffs)


def factorization_matrix(n: int, fac: DilationFactorization) -> np.ndarray:
    """Assemble (1_n (x) w)* T_n(u) (1_n (x) w)."""
    lift = np.kron(np.eye(n), fac.w)
    return lift.conj().T @ universal_at_unitary(n, fac.u).assemble() @ lift


def verify_factorization(t: BlockToeplitz, fac: DilationFactorization) -> float:
    """Frobenius residual of the factorization identity.

    The coefficientwise identity tau_l = w* u^l w is what the assembled
    residual measures slot by slot; :func:`coefficient_deviation` reports
    its max-norm version separately.
    """
    if fac.w.shape[1] != t.p or fac.w.shape[0] != fac.q:
        raise DimensionMismatchError(
            f"w has shape {fac.w.shape}, expected ({fac.q}, {t.p})"
        )
    diff = t.assemble() - factorization_matrix(t.n, fac)
    return float(np.linalg.norm(diff))


def coefficient_deviation(t: BlockToeplitz, fac: DilationFactorization) -> float:
    """Max deviation of tau_l from w* u^l w over all coefficients."""
    upow = np.eye(fac.q, dtype=np.complex128)
    worst = 0.0
    for ell in range(t.n):
        coeff = fac.w.conj().T @ upow @ fac.w
        worst = max(worst, matcore.max_abs(coeff - t.coeff(ell)))
        worst = max(worst, matcore.max_abs(coeff.conj().T - t.coeff(-ell)))
        upow = upow @ fac.u
    return worst
