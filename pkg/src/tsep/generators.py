"""Seeded instance generators shared by the CLI and the probe.

All randomness flows from a single 64-bit seed through one named PRNG so
that runs are replayable; the name/version pair is recorded in manifests
and probe reports.
"""

from __future__ import annotations

import numpy as np

from .errors import BadParamsError
from .separability import AtomicDecomposition, atoms_to_coeffs
from .toeplitz import BlockToeplitz, TrigMatrixPoly, universal_toeplitz

PRNG_NAME = "numpy-pcg64"
PRNG_VERSION = 1

DENSITY_NODES = 4096
MAX_N = 12
MAX_P = 8


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _check_range(n: int, p: int):
    if not (1 <= n <= MAX_N) or not (1 <= p <= MAX_P):
        raise BadParamsError(f"(n={n}, p={p}) outside supported range n<={MAX_N}, p<={MAX_P}")


def random_unit(rng: np.random.Generator) -> complex:
    return complex(np.exp(2j * np.pi * rng.random()))


def random_psd(rng: np.random.Generator, p: int, rank: int | None = None) -> np.ndarray:
    """Random Gram matrix X*X with X complex Gaussian (rank rows)."""
    r = p if rank is None else rank
    x = rng.normal(size=(r, p)) + 1j * rng.normal(size=(r, p))
    x /= np.sqrt(2.0 * p)
    return x.conj().T @ x


def gen_atoms(n: int, p: int, m: int, rng: np.random.Generator):
    """Separable-by-construction sum of m random atoms; returns the target
    together with its ground-truth decomposition."""
    _check_range(n, p)
    if m < 1:
        raise BadParamsError("need at least one atom")
    lambdas = np.array([random_unit(rng) for _ in range(m)])
    blocks = np.stack([random_psd(rng, p) for _ in range(m)])
    target = BlockToeplitz(n, p, atoms_to_coeffs(lambdas, blocks, n))
    truth = AtomicDecomposition(n, p, lambdas, blocks, 0.0)
    truth.residual = truth.residual_against(target)
    return target, truth


def gen_scalar_atoms(n: int, m: int, rng: np.random.Generator,
                     min_gap: float = 0.1, shift: float = 0.0):
    """Scalar forward-constructed instance with well-separated atoms and an
    optional multiple of the identity added on top."""
    _check_range(n, 1)
    if m < 1 or (n > 1 and m > n - 1) or (n == 1 and m > 1):
        raise BadParamsError(f"need 1 <= m <= n-1 atoms, got m={m} for n={n}")
    while True:
        angles = np.sort(rng.random(m) * 2.0 * np.pi)
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * np.pi]]))
        if m == 1 or gaps.min() >= min_gap:
            break
    weights = 0.25 + rng.random(m)
    lambdas = np.exp(1j * angles)
    blocks = weights.astype(np.complex128).reshape(-1, 1, 1)
    coeffs = atoms_to_coeffs(lambdas, blocks, n)
    coeffs[n - 1, 0, 0] += shift
    target = BlockToeplitz(n, 1, coeffs)
    truth = AtomicDecomposition(n, 1, lambdas, blocks, 0.0)
    return target, truth


def gen_density(n: int, p: int, rng: np.random.Generator,
                degree: int | None = None, nodes: int = DENSITY_NODES) -> BlockToeplitz:
    """Moment matrix of the matrix density G(z)*G(z) for a random polynomial
    G of the given degree, integrated by uniform-node quadrature.

    The integrand is a trig polynomial of degree <= 2*degree < nodes, so the
    quadrature is exact and the result is PSD (and separable) by
    construction.
    """
    _check_range(n, p)
    deg = n - 1 if degree is None else degree
    if not 0 <= deg < nodes // 2:
        raise BadParamsError(f"degree {deg} incompatible with {nodes} quadrature nodes")
    coeff_mats = (rng.normal(size=(deg + 1, p, p)) + 1j * rng.normal(size=(deg + 1, p, p)))
    coeff_mats /= np.sqrt(2.0 * (deg + 1))
    thetas = 2.0 * np.pi * np.arange(nodes) / nodes
    powers = np.exp(1j * thetas[:, None] * np.arange(deg + 1)[None, :])
    gvals = np.einsum("kd,dab->kab", powers, coeff_mats)
    dens = np.conj(np.swapaxes(gvals, -1, -2)) @ gvals
    ells = np.arange(-n + 1, n)
    phases = np.exp(-1j * ells[:, None] * thetas[None, :])
    coeffs = np.einsum("lk,kab->lab", phases, dens) / nodes
    coeffs = 0.5 * (coeffs + np.conj(np.swapaxes(coeffs[::-1], -1, -2)))
    return BlockToeplitz(n, p, coeffs)


def gen_pure(n: int, p: int, rng: np.random.Generator):
    """Pure element T_n(lambda^{-1}) (x) (alpha Q) with Q a random rank-1
    projection; returns (target, (lambda, alpha, Q))."""
    _check_range(n, p)
    lam = random_unit(rng)
    xi = rng.normal(size=p) + 1j * rng.normal(size=p)
    xi /= np.linalg.norm(xi)
    q = np.outer(xi, xi.conj())
    alpha = 0.25 + rng.random()
    lambdas = np.array([1.0 / lam])
    blocks = (alpha * q)[None]
    target = BlockToeplitz(n, p, atoms_to_coeffs(lambdas, blocks, n))
    return target, (lam, alpha, q)


def gen_universal(n: int, lam=1.0) -> BlockToeplitz:
    return universal_toeplitz(n, lam)


def gen_dualpure(n: int, p: int, rng: np.random.Generator):
    """Pure dual element F(z) = w* T_n(z^{-1}) w for a random w; returns
    (trig polynomial, w)."""
    from .entanglement import dual_pure_element

    _check_range(n, p)
    w = (rng.normal(size=(n, p)) + 1j * rng.normal(size=(n, p))) / np.sqrt(2.0 * n)
    return dual_pure_element(w), w


def gen_product_mix(rng: np.random.Generator, num_atoms: int = 5,
                    ridge: float = 1e-2) -> BlockToeplitz:
    """Strictly positive Toeplitz (x) Toeplitz instance: a few random product
    atoms T_2(lambda) (x) T_2(mu) plus ridge * I_4."""
    coeffs = np.zeros((3, 2, 2), dtype=np.complex128)
    for _ in range(num_atoms):
        lam, mu = random_unit(rng), random_unit(rng)
        weight = 0.25 + rng.random()
        for ell in (-1, 0, 1):
            coeffs[ell + 1] += weight * lam ** ell * np.array(
                [[1.0, mu ** (-1)], [mu, 1.0]], dtype=np.complex128)
    coeffs[1] += ridge * np.eye(2)
    return BlockToeplitz(2, 2, coeffs)


def gen_hermitian_toeplitz(n: int, p: int, rng: np.random.Generator,
                           scale: float = 1.0) -> BlockToeplitz:
    """Random Hermitian (not necessarily positive) block-Toeplitz element."""
    _check_range(n, p)
    coeffs = scale * (rng.normal(size=(2 * n - 1, p, p))
                      + 1j * rng.normal(size=(2 * n - 1, p, p)))
    coeffs = 0.5 * (coeffs + np.conj(np.swapaxes(coeffs[::-1], -1, -2)))
    return BlockToeplitz(n, p, coeffs)


def gen_hermitian_trigpoly(n: int, p: int, rng: np.random.Generator,
                           scale: float = 1.0) -> TrigMatrixPoly:
    """Random Hermitian-valued trig polynomial."""
    _check_range(n, p)
    coeffs = scale * (rng.normal(size=(2 * n - 1, p, p))
                      + 1j * rng.normal(size=(2 * n - 1, p, p)))
    coeffs = 0.5 * (coeffs + np.conj(np.swapaxes(coeffs[::-1], -1, -2)))
    return TrigMatrixPoly(n, p, coeffs)
