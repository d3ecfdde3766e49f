"""Core domain types for the two operator systems and their pairing.

A block-Toeplitz matrix is stored by its 2n-1 block coefficients tau_l
(assembled block (k, j) = tau_{k-j}); a matrix trigonometric polynomial by
its 2n-1 Fourier coefficients c_l (F(z) = sum_l z^l c_l). The index
convention is fixed here and inherited by every other module.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import BadParamsError, DimensionMismatchError, NotOnCircleError

CIRCLE_TOL = 1e-9
COEFF_HERM_TOL = 1e-12


def unit_circle(z, tol: float = CIRCLE_TOL) -> complex:
    """Validate |z| = 1 within tol and return z rescaled to exact modulus 1."""
    z = complex(z)
    r = abs(z)
    if abs(r - 1.0) > tol:
        raise NotOnCircleError(f"|z| = {r!r} is not 1 within {tol}")
    return z / r


def gamma_vec(n: int, z: complex) -> np.ndarray:
    """Moment vector (1, z, ..., z^{n-1})."""
    return np.asarray(z, dtype=np.complex128) ** np.arange(n)


def shift_basis(n: int, k: int) -> np.ndarray:
    """Toeplitz basis matrix r_k: ones on the k-th subdiagonal (k < 0: super)."""
    if abs(k) >= n:
        raise BadParamsError(f"basis index {k} out of range for order {n}")
    return np.eye(n, k=-k, dtype=np.complex128)


def flip_unitary(n: int) -> np.ndarray:
    """Permutation unitary u_n reversing coordinates; conjugation by it
    transposes every Toeplitz matrix of order n."""
    return np.eye(n, dtype=np.complex128)[::-1].copy()


def _coerce_coeffs(n: int, p: int, coeffs) -> np.ndarray:
    c = np.asarray(coeffs, dtype=np.complex128)
    if c.shape != (2 * n - 1, p, p):
        raise DimensionMismatchError(
            f"coefficient stack has shape {c.shape}, expected {(2 * n - 1, p, p)}"
        )
    return c


def _coeffs_hermitian(coeffs: np.ndarray, tol: float) -> bool:
    flipped = np.conj(np.swapaxes(coeffs[::-1], -1, -2))
    return matcore.max_abs(coeffs - flipped) <= tol * max(1.0, matcore.max_abs(coeffs))


@dataclass
class BlockToeplitz:
    """Element of the block-Toeplitz cone side, stored coefficientwise.

    coeffs has shape (2n-1, p, p), ascending in l = -n+1..n-1.
    """

    n: int
    p: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise BadParamsError(f"need n, p >= 1, got n={self.n}, p={self.p}")
        self.coeffs = _coerce_coeffs(self.n, self.p, self.coeffs)

    @classmethod
    def from_coeff_map(cls, n: int, p: int, mapping) -> "BlockToeplitz":
        """Build from a {l: matrix} dict; unspecified coefficients are zero."""
        coeffs = np.zeros((2 * n - 1, p, p), dtype=np.complex128)
        for ell, mat in mapping.items():
            if abs(ell) >= n:
                raise BadParamsError(f"coefficient index {ell} out of range for order {n}")
            coeffs[ell + n - 1] = np.asarray(mat, dtype=np.complex128).reshape(p, p)
        return cls(n, p, coeffs)

    @classmethod
    def order_unit(cls, n: int, p: int = 1) -> "BlockToeplitz":
        """tau_0 = I_p, all other coefficients zero."""
        return cls.from_coeff_map(n, p, {0: np.eye(p)})

    def coeff(self, ell: int) -> np.ndarray:
        if abs(ell) >= self.n:
            raise BadParamsError(f"coefficient index {ell} out of range for order {self.n}")
        return self.coeffs[ell + self.n - 1]

    def assemble(self) -> np.ndarray:
        """The np x np matrix with block (k, j) = tau_{k-j}."""
        k = np.arange(self.n)
        idx = k[:, None] - k[None, :] + self.n - 1
        blocks = self.coeffs[idx]  # (n, n, p, p)
        return np.ascontiguousarray(
            blocks.transpose(0, 2, 1, 3).reshape(self.n * self.p, self.n * self.p)
        )

    def is_hermitian(self, tol: float = COEFF_HERM_TOL) -> bool:
        """True iff tau_{-l} = tau_l* for all l, within tol."""
        return _coeffs_hermitian(self.coeffs, tol)

    def norm_fro(self) -> float:
        return float(np.linalg.norm(self.assemble()))

    def __add__(self, other: "BlockToeplitz") -> "BlockToeplitz":
        self._check_compatible(other)
        return BlockToeplitz(self.n, self.p, self.coeffs + other.coeffs)

    def __sub__(self, other: "BlockToeplitz") -> "BlockToeplitz":
        self._check_compatible(other)
        return BlockToeplitz(self.n, self.p, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "BlockToeplitz":
        return BlockToeplitz(self.n, self.p, self.coeffs * complex(scalar))

    __rmul__ = __mul__

    def _check_compatible(self, other):
        if not isinstance(other, BlockToeplitz) or (self.n, self.p) != (other.n, other.p):
            raise DimensionMismatchError("block-Toeplitz operands have mismatched (n, p)")


@dataclass
class TrigMatrixPoly:
    """Matrix-valued trigonometric polynomial F(z) = sum_l z^l c_l, |l| < n."""

    n: int
    p: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise BadParamsError(f"need n, p >= 1, got n={self.n}, p={self.p}")
        self.coeffs = _coerce_coeffs(self.n, self.p, self.coeffs)

    @classmethod
    def from_coeff_map(cls, n: int, p: int, mapping) -> "TrigMatrixPoly":
        coeffs = np.zeros((2 * n - 1, p, p), dtype=np.complex128)
        for ell, mat in mapping.items():
            if abs(ell) >= n:
                raise BadParamsError(f"coefficient index {ell} out of range for degree bound {n}")
            coeffs[ell + n - 1] = np.asarray(mat, dtype=np.complex128).reshape(p, p)
        return cls(n, p, coeffs)

    @classmethod
    def order_unit(cls, n: int, p: int = 1) -> "TrigMatrixPoly":
        """The constant function I_p."""
        return cls.from_coeff_map(n, p, {0: np.eye(p)})

    def coeff(self, ell: int) -> np.ndarray:
        if abs(ell) >= self.n:
            raise BadParamsError(f"coefficient index {ell} out of range for degree bound {self.n}")
        return self.coeffs[ell + self.n - 1]

    def eval(self, z) -> np.ndarray:
        """Evaluate at a point of the unit circle (Horner on the z powers)."""
        z = unit_circle(z)
        acc = np.zeros((self.p, self.p), dtype=np.complex128)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc * z ** (-(self.n - 1))

    def eval_grid(self, thetas: np.ndarray) -> np.ndarray:
        """Vectorized evaluation at z = exp(i*theta) for an array of angles."""
        thetas = np.asarray(thetas, dtype=np.float64)
        ells = np.arange(-self.n + 1, self.n)
        phases = np.exp(1j * thetas[:, None] * ells[None, :])
        return np.einsum("kl,lab->kab", phases, self.coeffs)

    def is_hermitian_valued(self, tol: float = COEFF_HERM_TOL) -> bool:
        """True iff c_{-l} = c_l* for all l (then F(z) is Hermitian on S^1)."""
        return _coeffs_hermitian(self.coeffs, tol)

    def norm_coeff(self) -> float:
        """Sum of spectral norms of the coefficients (used in sampling bounds)."""
        return float(np.sum(np.linalg.svd(self.coeffs, compute_uv=False)[:, 0]))

    def __add__(self, other: "TrigMatrixPoly") -> "TrigMatrixPoly":
        if not isinstance(other, TrigMatrixPoly) or (self.n, self.p) != (other.n, other.p):
            raise DimensionMismatchError("trig-poly operands have mismatched (n, p)")
        return TrigMatrixPoly(self.n, self.p, self.coeffs + other.coeffs)

    def __mul__(self, scalar) -> "TrigMatrixPoly":
        return TrigMatrixPoly(self.n, self.p, self.coeffs * complex(scalar))

    __rmul__ = __mul__


def universal_toeplitz(n: int, lam) -> BlockToeplitz:
    """Rank-1 scalar Toeplitz matrix T_n(lam) with coefficients lam^l.

    Assembles to gamma_n(lam) gamma_n(lam)*, the generator of pure elements.
    """
    if n < 1:
        raise BadParamsError("order must be >= 1")
    lam = unit_circle(lam)
    ells = np.arange(-n + 1, n)
    coeffs = (lam ** ells).reshape(2 * n - 1, 1, 1)
    return BlockToeplitz(n, 1, coeffs)


def assemble(t: BlockToeplitz) -> np.ndarray:
    return t.assemble()


def flip_conjugate(t: BlockToeplitz) -> BlockToeplitz:
    """Conjugate by u_n (x) I_p and re-read as a block-Toeplitz matrix.

    Coefficientwise this reverses l -> -l; computed from the assembled matrix
    so the similarity transformation is what is actually returned.
    """
    u = np.kron(flip_unitary(t.n), np.eye(t.p))
    conj = u.conj().T @ t.assemble() @ u
    p = t.p
    coeffs = np.empty_like(t.coeffs)
    for ell in range(-t.n + 1, t.n):
        k, j = (ell, 0) if ell >= 0 else (0, -ell)
        coeffs[ell + t.n - 1] = conj[k * p:(k + 1) * p, j * p:(j + 1) * p]
    return BlockToeplitz(t.n, t.p, coeffs)


def duality_pair(t: BlockToeplitz, f: TrigMatrixPoly) -> complex:
    """Pairing of a scalar Toeplitz element with a scalar trig polynomial:
    sum_k tau_{-k} fhat(k)."""
    if t.n != f.n:
        raise DimensionMismatchError(f"order mismatch: toeplitz n={t.n}, trigpoly n={f.n}")
    if t.p != 1 or f.p != 1:
        raise DimensionMismatchError("duality_pair is defined for scalar (p=1) inputs")
    total = 0.0 + 0.0j
    for k in range(-t.n + 1, t.n):
        total += complex(t.coeff(-k)[0, 0]) * complex(f.coeff(k)[0, 0])
    return total
