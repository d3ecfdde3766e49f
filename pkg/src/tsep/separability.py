"""Atomic (separable) decompositions of positive block-Toeplitz matrices.

Four engines:

* ``caratheodory_scalar``: exact scalar decomposition by kernel-polynomial
  root extraction, with a Pisarenko shift for full-rank inputs;
* ``decompose_block``: greedy atomic pursuit for block instances, certified
  by the reported reconstruction residual;
* ``decompose_toeplitz_toeplitz``: 2-D gridded product-atom engine for
  strictly positive 2x2-of-2x2 Toeplitz-of-Toeplitz matrices;
* ``purity_check``: detects generators of extremal rays, which are exactly
  the rank-1 tensors of a universal Toeplitz matrix with a rank-1 block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import matcore
from .errors import (
    BadParamsError,
    BudgetExhaustedError,
    DecompositionFailedError,
    DimensionMismatchError,
    NotPositiveError,
    NotStrictlyPositiveError,
)
from .positivity import check_toeplitz_psd
from .toeplitz import BlockToeplitz, gamma_vec, unit_circle

MERGE_TOL = 1e-6            # radians; atoms closer than this are merged
DROP_TOL = 1e-12            # blocks with norm below DROP_TOL*scale are dropped
ROOT_SCAN_GRID = 8192
ROOT_ANGLE_TOL = 1e-12


def atoms_to_coeffs(lambdas, blocks, n: int) -> np.ndarray:
    """Coefficient stack of sum_j T_n(lambda_j) (x) b_j."""
    lambdas = np.asarray(lambdas, dtype=np.complex128)
    blocks = np.asarray(blocks, dtype=np.complex128)
    ells = np.arange(-n + 1, n)
    if lambdas.size == 0:
        p = blocks.shape[-1] if blocks.ndim == 3 else 1
        return np.zeros((2 * n - 1, p, p), dtype=np.complex128)
    vand = lambdas[None, :] ** ells[:, None]
    return np.einsum("lj,jab->lab", vand, blocks)


@dataclass
class AtomicDecomposition:
    """List of atoms (lambda_j on the circle, PSD block b_j) with the
    Frobenius residual of the reconstruction against the target."""

    n: int
    p: int
    lambdas: np.ndarray   # (m,) unit complex
    blocks: np.ndarray    # (m, p, p) PSD
    residual: float

    @property
    def num_atoms(self) -> int:
        return int(self.lambdas.shape[0])

    def atoms(self):
        for lam, b in zip(self.lambdas, self.blocks):
            yield complex(lam), b

    def reconstruct(self) -> BlockToeplitz:
        return BlockToeplitz(self.n, self.p, atoms_to_coeffs(self.lambdas, self.blocks, self.n))

    def residual_against(self, target: BlockToeplitz) -> float:
        """Independent re-check of the reported residual."""
        diff = self.reconstruct().assemble() - target.assemble()
        return float(np.linalg.norm(diff))


def _build_decomposition(n, p, lambdas, blocks, target: BlockToeplitz) -> AtomicDecomposition:
    lambdas = np.asarray(lambdas, dtype=np.complex128)
    blocks = np.asarray(blocks, dtype=np.complex128).reshape(-1, p, p)
    dec = AtomicDecomposition(n, p, lambdas, blocks, 0.0)
    dec.residual = dec.residual_against(target)
    return dec


def decompose_identity(n: int) -> AtomicDecomposition:
    """Scalar order unit as the uniform atomic measure on the n-th roots of
    unity: I_n = sum_k (1/n) T_n(omega^k)."""
    if n < 1:
        raise BadParamsError("order must be >= 1")
    lambdas = np.exp(2j * np.pi * np.arange(n) / n)
    blocks = np.full((n, 1, 1), 1.0 / n, dtype=np.complex128)
    return _build_decomposition(n, 1, lambdas, blocks, BlockToeplitz.order_unit(n))


# ---------------------------------------------------------------------------
# scalar Caratheodory engine
# ---------------------------------------------------------------------------


def _poly_eval(coeffs: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate q(z) = sum_k coeffs[k] z^k (ascending) at an array of points."""
    acc = np.zeros_like(z, dtype=np.complex128)
    for c in coeffs[::-1]:
        acc = acc * z + c
    return acc


def _abs2_deriv(coeffs: np.ndarray, theta: float) -> float:
    """d/dtheta |q(e^{i theta})|^2."""
    z = np.exp(1j * theta)
    q = complex(_poly_eval(coeffs, np.asarray(z)))
    dq = complex(_poly_eval(np.arange(1, len(coeffs)) * coeffs[1:], np.asarray(z)))
    return 2.0 * (np.conj(q) * 1j * z * dq).real


def _golden_min(fun, a: float, b: float, tol: float) -> float:
    """Deterministic golden-section minimizer on [a, b]."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fun(x2)
    return 0.5 * (a + b)


def circle_roots(coeffs: np.ndarray, scan: int = ROOT_SCAN_GRID) -> np.ndarray:
    """Angles theta with q(e^{i theta}) = 0, located by scanning |q|^2 on a
    dense grid and refining each candidate basin to ~1e-12 radians.

    Refinement is bisection on the sign of d|q|^2/dtheta when the bracket is
    valid, golden section on |q|^2 otherwise.
    """
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    thetas = 2.0 * np.pi * np.arange(scan) / scan
    vals = np.abs(_poly_eval(coeffs, np.exp(1j * thetas))) ** 2
    vmax = float(vals.max())
    if vmax == 0.0:
        return np.array([])

    local_min = (vals <= np.roll(vals, 1)) & (vals < np.roll(vals, -1))
    candidates = np.flatnonzero(local_min & (vals <= 1e-3 * vmax))
    step = 2.0 * np.pi / scan

    roots = []
    for idx in candidates:
        a = thetas[idx] - step
        b = thetas[idx] + step
        da, db = _abs2_deriv(coeffs, a), _abs2_deriv(coeffs, b)
        if da < 0.0 < db:
            while b - a > ROOT_ANGLE_TOL:
                mid = 0.5 * (a + b)
                if _abs2_deriv(coeffs, mid) < 0.0:
                    a = mid
                else:
                    b = mid
            theta = 0.5 * (a + b)
        else:
            theta = _golden_min(
                lambda t: float(np.abs(_poly_eval(coeffs, np.asarray(np.exp(1j * t)))) ** 2),
                a, b, ROOT_ANGLE_TOL,
            )
        if np.abs(_poly_eval(coeffs, np.asarray(np.exp(1j * theta)))) <= 1e-6 * np.sqrt(vmax):
            roots.append(theta % (2.0 * np.pi))
    return np.asarray(sorted(roots))


def _merge_angles(angles: np.ndarray, tol: float = MERGE_TOL) -> np.ndarray:
    """Collapse circle angles that are within tol of each other."""
    if angles.size == 0:
        return angles
    angles = np.sort(angles % (2.0 * np.pi))
    kept = [angles[0]]
    for a in angles[1:]:
        if a - kept[-1] > tol:
            kept.append(a)
    # wraparound: first and last may now coincide
    if len(kept) > 1 and (kept[0] + 2.0 * np.pi) - kept[-1] <= tol:
        kept.pop()
    return np.asarray(kept)


def _scalar_weight_system(n: int, lambdas: np.ndarray, coeffs: np.ndarray):
    """Real NNLS system whose residual equals the assembled Frobenius
    distance: rows are the moment equations weighted by multiplicity."""
    rows = [np.sqrt(n) * np.ones(len(lambdas))]
    rhs = [np.sqrt(n) * coeffs[n - 1, 0, 0].real]
    for ell in range(1, n):
        w = np.sqrt(2.0 * (n - ell))
        powers = lambdas ** ell
        tau = coeffs[ell + n - 1, 0, 0]
        rows.append(w * powers.real)
        rhs.append(w * tau.real)
        rows.append(w * powers.imag)
        rhs.append(w * tau.imag)
    return np.asarray(rows), np.asarray(rhs)


def _solve_scalar_atoms(t: BlockToeplitz, angles: np.ndarray, scale: float):
    lambdas = np.exp(1j * angles)
    m, y = _scalar_weight_system(t.n, lambdas, t.coeffs)
    weights = matcore.nnls(m, y)
    keep = weights > DROP_TOL * scale
    blocks = weights[keep].astype(np.complex128).reshape(-1, 1, 1)
    return _build_decomposition(t.n, 1, lambdas[keep], blocks, t)


def caratheodory_scalar(t: BlockToeplitz, tol: float = 1e-9) -> AtomicDecomposition:
    """Exact atomic decomposition of a PSD scalar Toeplitz matrix.

    Full-rank inputs are first reduced by subtracting lambda_min * I; the
    singular remainder is decomposed through the zeros of a kernel
    polynomial, weights come from NNLS on the moment equations, and the
    identity part is re-expanded over the n-th roots of unity.
    """
    if t.p != 1:
        raise DimensionMismatchError("caratheodory_scalar requires scalar entries (p=1)")
    cert = check_toeplitz_psd(t)
    if not cert.is_positive():
        raise NotPositiveError(f"input is not PSD: lambda_min = {cert.margin:.3e}")

    n = t.n
    a = t.assemble()
    scale = max(1.0, matcore.max_abs(a))
    evals, vecs = matcore.herm_eig(a)
    d = float(evals[0])
    if d <= 1e-12 * scale:
        d = 0.0

    shifted = t.coeffs.copy()
    shifted[n - 1, 0, 0] -= d
    if matcore.max_abs(shifted) <= 1e-13 * scale:
        # pure multiple of the order unit
        ident = decompose_identity(n)
        return _build_decomposition(n, 1, ident.lambdas, d * ident.blocks, t)

    kernel_sel = (evals - d) <= 1e-9 * scale
    kernel_vecs = vecs[:, kernel_sel]
    root_angles = circle_roots(kernel_vecs[:, 0])
    # kernel polynomials vanish at conj(lambda_j), so atoms are the conjugates
    atom_angles = (-root_angles) % (2.0 * np.pi)
    if d > 0.0:
        atom_angles = np.concatenate([atom_angles, 2.0 * np.pi * np.arange(n) / n])
    atom_angles = _merge_angles(atom_angles)
    if atom_angles.size == 0:
        raise DecompositionFailedError("no unit-circle kernel roots found")

    dec = _solve_scalar_atoms(t, atom_angles, scale)
    if dec.residual <= tol * scale:
        return dec

    # residual too large: intersect root sets across the whole kernel basis
    if kernel_vecs.shape[1] > 1:
        zs = np.exp(-1j * atom_angles)  # polynomial roots for atoms
        ok = np.ones(len(atom_angles), dtype=bool)
        for j in range(1, kernel_vecs.shape[1]):
            q = kernel_vecs[:, j]
            qmax = float(np.max(np.abs(_poly_eval(q, np.exp(1j * 2 * np.pi * np.arange(256) / 256)))))
            ok &= np.abs(_poly_eval(q, zs)) <= 1e-6 * max(qmax, 1e-30)
        if d > 0.0:
            # identity atoms are always admissible
            ok |= np.isin(atom_angles, 2.0 * np.pi * np.arange(n) / n)
        filtered = atom_angles[ok]
        if filtered.size:
            refit = _solve_scalar_atoms(t, filtered, scale)
            if refit.residual < dec.residual:
                dec = refit
    if dec.residual > tol * scale:
        raise DecompositionFailedError(
            f"residual {dec.residual:.3e} above tolerance {tol * scale:.3e}"
        )
    return dec


# ---------------------------------------------------------------------------
# greedy block engine
# ---------------------------------------------------------------------------


def _score_grid(resid_coeffs: np.ndarray, n: int, grid: int):
    """Atom score s(theta) = lambda_max of the residual compressed by
    gamma_n(e^{i theta}) (x) I_p, on a uniform grid."""
    thetas = 2.0 * np.pi * np.arange(grid) / grid
    ells = np.arange(-n + 1, n)
    mults = (n - np.abs(ells)).astype(np.float64)
    phases = np.exp(-1j * thetas[:, None] * ells[None, :])
    mats = np.einsum("kl,l,lab->kab", phases, mults, resid_coeffs)
    mats = 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))
    scores = np.linalg.eigvalsh(mats)[:, -1]
    return thetas, scores


def _score_at(resid_coeffs: np.ndarray, n: int, theta: float) -> float:
    ells = np.arange(-n + 1, n)
    mults = n - np.abs(ells)
    phases = np.exp(-1j * theta * ells)
    mat = np.einsum("l,l,lab->ab", phases, mults, resid_coeffs)
    mat = 0.5 * (mat + mat.conj().T)
    return float(np.linalg.eigvalsh(mat)[-1])


def _refine_angle(resid_coeffs: np.ndarray, n: int, theta: float, window: float) -> float:
    return _golden_min(
        lambda th: -_score_at(resid_coeffs, n, th),
        theta - window, theta + window, 1e-10,
    )


def _min_circle_dist(theta: float, angles: np.ndarray) -> float:
    if angles.size == 0:
        return np.inf
    d = np.abs((angles - theta + np.pi) % (2.0 * np.pi) - np.pi)
    return float(d.min())


def decompose_block(
    t: BlockToeplitz,
    tol: float = 1e-8,
    max_atoms: int = 60,
    max_rounds: int = 200,
    grid: int = 1024,
    lsq_iter: int = 400,
) -> AtomicDecomposition:
    """Greedy atomic pursuit for a PSD Hermitian block-Toeplitz target.

    Each round scores candidate angles by the compression of the residual,
    adds the best atom, refits all blocks by PSD-constrained least squares
    (warm started), slides atom locations locally, and merges near-duplicate
    atoms. Stops when the Frobenius residual drops below tol*max(1, ||T||_F).
    Raises BudgetExhaustedError (best decomposition attached) if the budgets
    run out first; by the separation theorem this means insufficient budget,
    not entanglement.
    """
    cert = check_toeplitz_psd(t)
    if not cert.is_positive():
        raise NotPositiveError(f"input is not PSD: lambda_min = {cert.margin:.3e}")
    n, p = t.n, t.p
    target = 0.5 * (t.coeffs + np.conj(np.swapaxes(t.coeffs[::-1], -1, -2)))
    norm_t = t.norm_fro()
    scale = max(1.0, norm_t)
    stop = tol * scale

    angles = np.array([])
    blocks = np.zeros((0, p, p), dtype=np.complex128)
    resid_coeffs = target.copy()
    residual = norm_t
    iter_budget = lsq_iter

    def refit(blocks0):
        res = matcore.psd_lsq(
            np.exp(1j * angles), target,
            max_iter=iter_budget, tol=1e-10, blocks0=blocks0, strict=False,
        )
        return res.blocks, res.residual

    for _ in range(max_rounds):
        if residual <= stop:
            break
        gthetas, gscores = _score_grid(resid_coeffs, n, grid)
        theta = _refine_angle(resid_coeffs, n, float(gthetas[int(np.argmax(gscores))]),
                              2.0 * np.pi / grid)
        theta %= 2.0 * np.pi
        if _min_circle_dist(theta, angles) > MERGE_TOL and len(angles) < max_atoms:
            angles = np.append(angles, theta)
            blocks = np.concatenate([blocks, np.zeros((1, p, p), dtype=np.complex128)])
        else:
            # stalled on an existing direction: spend more inner iterations
            iter_budget = min(iter_budget * 2, 20000)

        blocks, residual = refit(blocks)

        # slide each atom to the local optimum of its own residual score
        if len(angles) > 1:
            for j in range(len(angles)):
                own = atoms_to_coeffs(np.exp(1j * angles[j:j + 1]), blocks[j:j + 1], n)
                resid_j = target - atoms_to_coeffs(np.exp(1j * angles), blocks, n) + own
                angles[j] = _refine_angle(resid_j, n, angles[j], 0.05) % (2.0 * np.pi)
            blocks, residual = refit(blocks)

        # drop tiny blocks, merge near-duplicate atoms
        norms = np.sqrt(np.sum(np.abs(blocks) ** 2, axis=(1, 2)))
        keep = norms > DROP_TOL * scale
        if len(angles) and not np.all(keep):
            angles, blocks = angles[keep], blocks[keep]
        if len(angles) > 1:
            order = np.argsort(angles)
            angles, blocks = angles[order], blocks[order]
            merged_a, merged_b = [angles[0]], [blocks[0]]
            for a, b in zip(angles[1:], blocks[1:]):
                if a - merged_a[-1] <= MERGE_TOL:
                    merged_b[-1] = merged_b[-1] + b
                else:
                    merged_a.append(a)
                    merged_b.append(b)
            if len(merged_a) > 1 and (merged_a[0] + 2 * np.pi) - merged_a[-1] <= MERGE_TOL:
                merged_b[0] = merged_b[0] + merged_b.pop()
                merged_a.pop()
            if len(merged_a) != len(angles):
                angles = np.asarray(merged_a)
                blocks = np.asarray(merged_b)
                blocks, residual = refit(blocks)

        resid_coeffs = target - atoms_to_coeffs(np.exp(1j * angles), blocks, n)

    dec = _build_decomposition(n, p, np.exp(1j * angles), blocks, t)
    if dec.residual > stop:
        raise BudgetExhaustedError(
            f"residual {dec.residual:.3e} above {stop:.3e} after budgets", best=dec,
        )
    return dec


# ---------------------------------------------------------------------------
# Toeplitz (x) Toeplitz engine
# ---------------------------------------------------------------------------


@dataclass
class ProductDecomposition:
    """x ~ sum_i w_i T_2(lambda_i) (x) T_2(mu_i), all weights nonnegative."""

    lambdas: np.ndarray
    mus: np.ndarray
    weights: np.ndarray
    residual: float

    @property
    def num_atoms(self) -> int:
        return int(self.weights.shape[0])

    def terms(self):
        for lam, mu, w in zip(self.lambdas, self.mus, self.weights):
            yield complex(lam), complex(mu), float(w)

    def reconstruct_matrix(self) -> np.ndarray:
        out = np.zeros((4, 4), dtype=np.complex128)
        for lam, mu, w in self.terms():
            g = np.kron(gamma_vec(2, lam), gamma_vec(2, mu))
            out += w * np.outer(g, g.conj())
        return out


def _herm_vec(mats: np.ndarray) -> np.ndarray:
    """Isometric real vectorization of Hermitian 4x4 matrices (batched):
    ||vec||_2 = ||M||_F."""
    mats = np.asarray(mats)
    single = mats.ndim == 2
    if single:
        mats = mats[None]
    cols = [mats[:, i, i].real for i in range(4)]
    rt2 = np.sqrt(2.0)
    for i in range(4):
        for j in range(i + 1, 4):
            cols.append(rt2 * mats[:, i, j].real)
            cols.append(rt2 * mats[:, i, j].imag)
    out = np.stack(cols, axis=-1)
    return out[0] if single else out


def _product_gammas(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """Stack of product moment vectors gamma_2(e^{i theta}) (x) gamma_2(e^{i phi})."""
    zt = np.exp(1j * np.asarray(thetas))
    zp = np.exp(1j * np.asarray(phis))
    ones = np.ones_like(zt)
    return np.stack([ones, zp, zt, zt * zp], axis=-1)


def _product_columns(thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    g = _product_gammas(thetas, phis)
    outer = g[:, :, None] * g.conj()[:, None, :]
    return _herm_vec(outer).T  # (16, natoms)


def _is_toeplitz_block(mat: np.ndarray, tol: float) -> bool:
    return abs(mat[0, 0] - mat[1, 1]) <= tol


def decompose_toeplitz_toeplitz(
    x: BlockToeplitz,
    tol: float = 1e-9,
    grid: int = 128,
    max_passes: int = 8,
    max_atoms: int = 64,
) -> ProductDecomposition:
    """Separable product decomposition of a strictly positive element whose
    4x4 assembly is block-Toeplitz with Toeplitz 2x2 blocks.

    Seeds atoms by NNLS over a (theta, phi) grid of product atoms, then
    alternates local refinement of the active atoms with NNLS re-solves
    until the Frobenius residual is below tol*max(1, ||x||_F).
    """
    if (x.n, x.p) != (2, 2):
        raise DimensionMismatchError("expected a 2x2 block-Toeplitz element with 2x2 blocks")
    a = x.assemble()
    scale = max(1.0, float(np.linalg.norm(a)))
    for ell in range(-1, 2):
        if not _is_toeplitz_block(x.coeff(ell), 1e-9 * scale):
            raise BadParamsError("inner factor is not Toeplitz: tau_l[0,0] != tau_l[1,1]")
    cert = check_toeplitz_psd(x)
    if not cert.is_strict():
        raise NotStrictlyPositiveError(
            f"input is not strictly positive: lambda_min = {cert.margin:.3e}"
        )
    a = 0.5 * (a + a.conj().T)
    y = _herm_vec(a)
    stop = tol * scale

    base = 2.0 * np.pi * np.arange(grid) / grid
    gt, gp = np.meshgrid(base, base, indexing="ij")
    grid_thetas, grid_phis = gt.ravel(), gp.ravel()

    m = _product_columns(grid_thetas, grid_phis)
    w = matcore.nnls(m, y)
    active = w > DROP_TOL * scale
    thetas, phis, weights = grid_thetas[active], grid_phis[active], w[active]

    def residual_of(th, ph, wt):
        cols = _product_columns(th, ph)
        return float(np.linalg.norm(cols @ wt - y))

    def score(th, ph, rmat):
        g = _product_gammas(np.asarray([th]), np.asarray([ph]))[0]
        return float((g.conj() @ rmat @ g).real)

    best = (thetas, phis, weights, residual_of(thetas, phis, weights))
    spacing = 2.0 * np.pi / grid

    for _ in range(max_passes):
        thetas, phis, weights, residual = best
        if residual <= stop:
            break

        # merge clusters of nearby actives (weight-weighted position)
        order = np.argsort(-weights)
        taken = np.zeros(len(weights), dtype=bool)
        m_th, m_ph, m_w = [], [], []
        for i in order:
            if taken[i]:
                continue
            dth = np.abs((thetas - thetas[i] + np.pi) % (2 * np.pi) - np.pi)
            dph = np.abs((phis - phis[i] + np.pi) % (2 * np.pi) - np.pi)
            near = (~taken) & (np.maximum(dth, dph) <= 2.5 * spacing)
            taken |= near
            wsum = weights[near].sum()
            off_th = (thetas[near] - thetas[i] + np.pi) % (2 * np.pi) - np.pi
            off_ph = (phis[near] - phis[i] + np.pi) % (2 * np.pi) - np.pi
            m_th.append((thetas[i] + (weights[near] * off_th).sum() / wsum) % (2 * np.pi))
            m_ph.append((phis[i] + (weights[near] * off_ph).sum() / wsum) % (2 * np.pi))
            m_w.append(wsum)
        thetas, phis, weights = np.asarray(m_th), np.asarray(m_ph), np.asarray(m_w)

        # local alternating refinement of each atom against its own residual
        recon = _product_columns(thetas, phis) @ weights
        for i in range(len(weights)):
            cols_i = _product_columns(thetas[i:i + 1], phis[i:i + 1])[:, 0]
            resvec = y - recon + weights[i] * cols_i
            rmat = np.zeros((4, 4), dtype=np.complex128)
            # unvec the residual for scoring (inverse of _herm_vec)
            k = 4
            for d in range(4):
                rmat[d, d] = resvec[d]
            for r in range(4):
                for c in range(r + 1, 4):
                    val = (resvec[k] + 1j * resvec[k + 1]) / np.sqrt(2.0)
                    rmat[r, c] = val
                    rmat[c, r] = np.conj(val)
                    k += 2
            window = 1.5 * spacing
            th, ph = thetas[i], phis[i]
            for _ in range(3):
                th = _golden_min(lambda t: -score(t, ph, rmat), th - window, th + window, 1e-12)
                ph = _golden_min(lambda t: -score(th, t, rmat), ph - window, ph + window, 1e-12)
                window *= 0.25
            thetas[i], phis[i] = th % (2 * np.pi), ph % (2 * np.pi)
            recon = _product_columns(thetas, phis) @ weights

        # re-solve weights on the refined atoms
        cols = _product_columns(thetas, phis)
        weights = matcore.nnls(cols, y)
        keep = weights > DROP_TOL * scale
        thetas, phis, weights = thetas[keep], phis[keep], weights[keep]
        residual = residual_of(thetas, phis, weights)

        # top up with the best residual atom from the grid if stuck
        if residual > stop and len(weights) < max_atoms:
            resvec = y - _product_columns(thetas, phis) @ weights
            rnorm = np.linalg.norm(resvec)
            if rnorm > 0:
                scores = (m.T @ resvec)
                j = int(np.argmax(scores))
                thetas = np.append(thetas, grid_thetas[j])
                phis = np.append(phis, grid_phis[j])
                weights = np.append(weights, 0.0)
                cols = _product_columns(thetas, phis)
                weights = matcore.nnls(cols, y)
                residual = residual_of(thetas, phis, weights)

        if residual < best[3]:
            best = (thetas, phis, weights, residual)

    thetas, phis, weights, residual = best
    dec = ProductDecomposition(
        np.exp(1j * thetas), np.exp(1j * phis), weights, residual,
    )
    if residual > stop:
        raise BudgetExhaustedError(
            f"residual {residual:.3e} above {stop:.3e} after {max_passes} passes", best=dec,
        )
    return dec


# ---------------------------------------------------------------------------
# purity
# ---------------------------------------------------------------------------


@dataclass
class PurityResult:
    """Outcome of the extremal-ray test.

    Pure elements are exactly T_n(lambda^{-1}) (x) (alpha Q) for a point
    lambda on the circle, alpha >= 0, and a rank-1 projection Q.
    """

    pure: bool
    reason: str | None = None
    lam: complex | None = None
    alpha: float | None = None
    projection: np.ndarray | None = None

    def __bool__(self) -> bool:
        return self.pure


def purity_check(t: BlockToeplitz, tol: float = 1e-9) -> PurityResult:
    """Decide whether a PSD block-Toeplitz element generates an extremal ray,
    extracting (lambda, alpha, Q) when it does."""
    cert = check_toeplitz_psd(t)
    if not cert.is_positive():
        raise NotPositiveError(f"input is not PSD: lambda_min = {cert.margin:.3e}")
    n, p = t.n, t.p
    a = t.assemble()
    scale = max(1.0, matcore.max_abs(a))
    evals, vecs = matcore.herm_eig(a)
    if evals[-1] <= tol * scale:
        return PurityResult(False, reason="numerically zero element")
    if a.shape[0] > 1 and evals[-2] > tol * scale:
        rank = int(np.sum(evals > tol * scale))
        return PurityResult(False, reason=f"assembled rank {rank} exceeds 1")

    top = vecs[:, -1]
    vmat = top.reshape(n, p)
    u_svd, s_svd, wh_svd = np.linalg.svd(vmat)
    if s_svd.shape[0] > 1 and s_svd[1] > 1e-7 * s_svd[0]:
        return PurityResult(False, reason="top eigenvector is not a product vector")
    left = u_svd[:, 0]
    right = wh_svd[0, :]

    if n == 1:
        mu = 1.0 + 0.0j
    else:
        num = np.sum(np.conj(left[:-1]) * left[1:])
        den = np.sum(np.abs(left[:-1]) ** 2)
        if den <= 1e-14 or abs(num) / den < 1e-7:
            return PurityResult(False, reason="left factor is not geometric")
        mu = num / den
        if abs(abs(mu) - 1.0) > 1e-6:
            return PurityResult(False, reason=f"geometric ratio has modulus {abs(mu):.6f}")
        mu /= abs(mu)
        geo = gamma_vec(n, mu) / np.sqrt(n)
        phase = np.vdot(geo, left)
        if np.linalg.norm(left - phase * geo) > 1e-6:
            return PurityResult(False, reason="left factor deviates from a geometric vector")

    lam = np.conj(mu)
    alpha = float(evals[-1]) / n
    q = np.outer(right, right.conj())
    q /= np.trace(q).real

    # final reconstruction check: T = T_n(lambda^{-1}) (x) (alpha Q)
    gam = gamma_vec(n, mu)
    recon = np.kron(np.outer(gam, gam.conj()), alpha * q)
    if np.linalg.norm(recon - a) > max(tol, 1e-9) * scale * np.sqrt(a.size):
        return PurityResult(False, reason="rank-1 model does not reconstruct the input")
    return PurityResult(True, lam=complex(lam), alpha=alpha, projection=q)
