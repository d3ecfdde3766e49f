"""Complete positivity via operator-system duality.

A map out of the trig-polynomial system is completely positive iff the
block-Toeplitz element built from its basis values is PSD, and vice versa:
the duality makes the subspace test exact, so no Choi matrix over the full
matrix algebra is ever formed. Also: matrix maps applied blockwise to
Toeplitz inputs, and the randomized Toeplitz-complete-positivity probe.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import generators, matcore
from .errors import (
    BadParamsError,
    DimensionMismatchError,
    InconsistentAdjointsError,
)
from .positivity import PositivityCertificate, check_toeplitz_psd, check_trigpoly_psd
from .toeplitz import BlockToeplitz, TrigMatrixPoly

FROM_DUAL = "FromDual"          # map C(S^1)_(n) -> M_p, values on the monomials
FROM_TOEPLITZ = "FromToeplitz"  # map C(S^1)^(n) -> M_p, values on the shift basis

DEFAULT_PROBE_SEED = 1952577


@dataclass
class DualSystemMap:
    """Linear map out of one of the two operator systems, stored by its
    values on the canonical basis (index k ascending, |k| < n)."""

    direction: str
    n: int
    p: int
    basis_values: np.ndarray  # (2n-1, p, p)

    def __post_init__(self):
        if self.direction not in (FROM_DUAL, FROM_TOEPLITZ):
            raise BadParamsError(f"unknown direction {self.direction!r}")
        self.basis_values = np.asarray(self.basis_values, dtype=np.complex128)
        if self.basis_values.shape != (2 * self.n - 1, self.p, self.p):
            raise DimensionMismatchError(
                f"basis values have shape {self.basis_values.shape}, "
                f"expected {(2 * self.n - 1, self.p, self.p)}"
            )

    def value(self, k: int) -> np.ndarray:
        if abs(k) >= self.n:
            raise BadParamsError(f"basis index {k} out of range")
        return self.basis_values[k + self.n - 1]

    def require_selfadjoint(self, tol: float = 1e-12):
        """Check value(-k) = value(k)* (the Hermitian-tensor convention)."""
        flipped = np.conj(np.swapaxes(self.basis_values[::-1], -1, -2))
        dev = matcore.max_abs(self.basis_values - flipped)
        if dev > tol * max(1.0, matcore.max_abs(self.basis_values)):
            raise InconsistentAdjointsError(
                f"basis values deviate from self-adjointness by {dev:.3e}"
            )

    def apply_to_trigpoly(self, f: TrigMatrixPoly) -> np.ndarray:
        """phi(f) = sum_k fhat(k) phi(chi_k), for scalar f (FromDual only)."""
        if self.direction != FROM_DUAL:
            raise BadParamsError("map does not act on trig polynomials")
        if f.n != self.n or f.p != 1:
            raise DimensionMismatchError("expected a scalar trig polynomial of matching order")
        weights = f.coeffs[:, 0, 0]
        return np.einsum("k,kab->ab", weights, self.basis_values)

    def apply_to_toeplitz(self, t: BlockToeplitz) -> np.ndarray:
        """phi(t) = sum_k tau_k phi(r_k), for scalar t (FromToeplitz only)."""
        if self.direction != FROM_TOEPLITZ:
            raise BadParamsError("map does not act on Toeplitz matrices")
        if t.n != self.n or t.p != 1:
            raise DimensionMismatchError("expected a scalar Toeplitz element of matching order")
        weights = t.coeffs[:, 0, 0]
        return np.einsum("k,kab->ab", weights, self.basis_values)


def hat_of_toeplitz(t: BlockToeplitz) -> DualSystemMap:
    """The map That: C(S^1)_(n) -> M_p of a block-Toeplitz element,
    determined by chi_k -> tau_{-k}."""
    return DualSystemMap(FROM_DUAL, t.n, t.p, t.coeffs[::-1].copy())


def hat_of_trigpoly(f: TrigMatrixPoly) -> DualSystemMap:
    """The map Fhat: C(S^1)^(n) -> M_p of a trig polynomial, determined by
    r_k -> c_{-k}."""
    return DualSystemMap(FROM_TOEPLITZ, f.n, f.p, f.coeffs[::-1].copy())


def toeplitz_of_dual_map(phi: DualSystemMap) -> BlockToeplitz:
    """Inverse of hat_of_toeplitz: the element with tau_{-k} = phi(chi_k)."""
    if phi.direction != FROM_DUAL:
        raise BadParamsError("expected a FromDual map")
    return BlockToeplitz(phi.n, phi.p, phi.basis_values[::-1].copy())


def trigpoly_of_toeplitz_map(phi: DualSystemMap) -> TrigMatrixPoly:
    """Inverse of hat_of_trigpoly: the polynomial with c_l = phi(r_{-l})."""
    if phi.direction != FROM_TOEPLITZ:
        raise BadParamsError("expected a FromToeplitz map")
    return TrigMatrixPoly(phi.n, phi.p, phi.basis_values[::-1].copy())


def is_cp_dual_map(phi: DualSystemMap, tol: float = 1e-9) -> PositivityCertificate:
    """Complete positivity of a map out of the trig-polynomial system:
    positive iff the induced block-Toeplitz element is PSD."""
    phi.require_selfadjoint()
    return check_toeplitz_psd(toeplitz_of_dual_map(phi), tol)


def is_cp_toeplitz_map(phi: DualSystemMap, grid: int | None = None,
                       tol: float = 1e-9) -> PositivityCertificate:
    """Complete positivity of a map out of the Toeplitz system: positive iff
    the induced trig polynomial is pointwise PSD on the circle."""
    phi.require_selfadjoint()
    return check_trigpoly_psd(trigpoly_of_toeplitz_map(phi), grid, tol)


@dataclass
class MatrixMap:
    """Linear map M_p -> M_q given by its values on the matrix units."""

    p: int
    q: int
    unit_values: np.ndarray  # (p, p, q, q); psi(E_ij) = unit_values[i, j]

    def __post_init__(self):
        self.unit_values = np.asarray(self.unit_values, dtype=np.complex128)
        if self.unit_values.shape != (self.p, self.p, self.q, self.q):
            raise DimensionMismatchError(
                f"unit values have shape {self.unit_values.shape}, "
                f"expected {(self.p, self.p, self.q, self.q)}"
            )

    @classmethod
    def identity(cls, p: int) -> "MatrixMap":
        units = np.zeros((p, p, p, p), dtype=np.complex128)
        for i in range(p):
            for j in range(p):
                units[i, j, i, j] = 1.0
        return cls(p, p, units)

    @classmethod
    def transpose(cls, p: int) -> "MatrixMap":
        units = np.zeros((p, p, p, p), dtype=np.complex128)
        for i in range(p):
            for j in range(p):
                units[i, j, j, i] = 1.0
        return cls(p, p, units)

    @classmethod
    def depolarizing(cls, p: int) -> "MatrixMap":
        """x -> tr(x) I_p / p."""
        units = np.zeros((p, p, p, p), dtype=np.complex128)
        for i in range(p):
            units[i, i] = np.eye(p) / p
        return cls(p, p, units)

    @classmethod
    def from_function(cls, p: int, q: int, fun) -> "MatrixMap":
        units = np.zeros((p, p, q, q), dtype=np.complex128)
        for i in range(p):
            for j in range(p):
                e = np.zeros((p, p), dtype=np.complex128)
                e[i, j] = 1.0
                units[i, j] = np.asarray(fun(e), dtype=np.complex128)
        return cls(p, q, units)

    def apply(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.complex128)
        if x.shape != (self.p, self.p):
            raise DimensionMismatchError(f"argument has shape {x.shape}, expected {(self.p, self.p)}")
        return np.einsum("ij,ijab->ab", x, self.unit_values)


def apply_map_blockwise(psi: MatrixMap, t: BlockToeplitz) -> BlockToeplitz:
    """The restriction of id (x) psi to the Toeplitz subspace: tau_l -> psi(tau_l)."""
    if t.p != psi.p:
        raise DimensionMismatchError(f"block size {t.p} does not match map domain {psi.p}")
    coeffs = np.einsum("lij,ijab->lab", t.coeffs, psi.unit_values)
    return BlockToeplitz(t.n, psi.q, coeffs)


@dataclass
class ProbeViolation:
    """One PSD-violation witness: the input element, its image's most
    negative eigenvalue, and that eigenvalue's eigenvector."""

    n: int
    trial: int
    generator: str
    lambda_min: float
    eigenvector: np.ndarray
    input_element: BlockToeplitz


@dataclass
class ProbeReport:
    """Result of the randomized Toeplitz-complete-positivity probe."""

    seed: int
    prng: str
    prng_version: int
    n_max: int
    trials: int
    tol: float
    num_checked: int = 0
    violations: list = field(default_factory=list)
    max_negative_eigenvalue: float | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def toeplitz_cp_probe(psi: MatrixMap, n_max: int = 5, trials: int = 100,
                      seed: int = DEFAULT_PROBE_SEED, tol: float = 1e-9) -> ProbeReport:
    """Empirically probe whether psi maps positive block-Toeplitz inputs to
    positive outputs.

    For each order n = 2..n_max, draws `trials` PSD inputs alternating
    between the atomic and density generators, applies psi blockwise, and
    records every PSD violation with a re-checkable witness. For a positive
    map on M_p, zero violations are expected; a violation refutes positivity
    of the map (never separability of the input, which is PSD by
    construction).
    """
    if n_max < 2:
        raise BadParamsError("n_max must be at least 2")
    rng = generators.make_rng(seed)
    report = ProbeReport(seed=seed, prng=generators.PRNG_NAME,
                         prng_version=generators.PRNG_VERSION,
                         n_max=n_max, trials=trials, tol=tol)
    worst = 0.0
    for n in range(2, n_max + 1):
        for trial in range(trials):
            if trial % 2 == 0:
                num_atoms = int(rng.integers(1, 2 * n))
                t, _ = generators.gen_atoms(n, psi.p, num_atoms, rng)
                gen_name = "atoms"
            else:
                t = generators.gen_density(n, psi.p, rng)
                gen_name = "density"
            out = apply_map_blockwise(psi, t)
            a = out.assemble()
            a = 0.5 * (a + a.conj().T)
            w, v = matcore.herm_eig(a)
            lam = float(w[0])
            worst = min(worst, lam)
            report.num_checked += 1
            if lam < -tol * max(1.0, matcore.max_abs(a)):
                report.violations.append(ProbeViolation(
                    n=n, trial=trial, generator=gen_name,
                    lambda_min=lam, eigenvector=v[:, 0], input_element=t,
                ))
    report.max_negative_eigenvalue = worst if worst < 0.0 else 0.0
    return report
