"""Dense symmetric linear algebra at desk scale (matrix side <= 512).

Matrices are plain float64 numpy arrays.  The helpers here wrap the few
factorizations the rest of the package needs and pin down failure behavior:
``cholesky`` applies a small jitter ladder before giving up on nearly
semi-definite input, and ``sym_eigenvalues`` runs classical cyclic Jacobi
sweeps so eigenvalues of tiny matrices stay reproducible to the last bit.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NoConvergence, NotPositiveDefinite

MAX_SIDE = 512
# Diagonal shifts tried, in order, when a factorization meets a matrix that
# is positive semi-definite only up to round-off.
JITTER_LADDER = (1e-12, 1e-10, 1e-8)
# Symmetry slack accepted on input matrices (absolute, entrywise).
SYMMETRY_TOL = 1e-8


def check_square(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if a.shape[0] > MAX_SIDE:
        raise DimensionMismatch(
            f"{name} side {a.shape[0]} exceeds supported maximum {MAX_SIDE}"
        )
    if not np.isfinite(a).all():
        raise ValueError(f"{name} has non-finite entries")
    return a


def check_symmetric(a: np.ndarray, name: str = "matrix") -> np.ndarray:
    """Validate and return the symmetrized copy of ``a``.

    Symmetrizing after the check removes harmless round-off skew so that
    downstream factorizations see an exactly symmetric operand.
    """
    a = check_square(a, name)
    skew = np.abs(a - a.T).max() if a.size else 0.0
    if skew > SYMMETRY_TOL:
        raise ValueError(f"{name} is not symmetric (max skew {skew:.3e})")
    return (a + a.T) / 2.0


def cholesky(a: np.ndarray, jitter: bool = True) -> np.ndarray:
    """Lower-triangular factor L with L @ L.T == a.

    With ``jitter`` enabled, a factorization failure is retried with
    ``a + eps*I`` for eps in ``JITTER_LADDER``; this rescues covariance
    matrices that are semi-definite up to round-off.  With ``jitter``
    disabled the first failure raises, which callers use to detect
    genuinely singular systems.

    :raises NotPositiveDefinite: if no ladder step succeeds.
    """
    a = check_symmetric(a)
    shifts = (0.0,) + (JITTER_LADDER if jitter else ())
    eye = np.eye(a.shape[0])
    for eps in shifts:
        try:
            return np.linalg.cholesky(a + eps * eye if eps else a)
        except np.linalg.LinAlgError:
            continue
    raise NotPositiveDefinite(
        f"matrix of side {a.shape[0]} is not positive definite"
        + (" (jitter ladder exhausted)" if jitter else "")
    )


def solve_spd(a: np.ndarray, b: np.ndarray, jitter: bool = True) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric positive definite ``a``."""
    low = cholesky(a, jitter=jitter)
    y = np.linalg.solve(low, b)
    return np.linalg.solve(low.T, y)


def spd_inverse(a: np.ndarray, jitter: bool = True) -> np.ndarray:
    """Inverse of a symmetric positive definite matrix, symmetrized."""
    inv = solve_spd(a, np.eye(a.shape[0]), jitter=jitter)
    return (inv + inv.T) / 2.0


def logdet_from_cholesky(low: np.ndarray) -> float:
    """log det(L @ L.T) given the lower Cholesky factor L."""
    return 2.0 * float(np.sum(np.log(np.diag(low))))


def _jacobi_rotate(a: np.ndarray, vecs: np.ndarray, p: int, q: int) -> None:
    """Apply one two-sided Jacobi rotation zeroing a[p, q], in place."""
    apq = a[p, q]
    if apq == 0.0:
        return
    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
    # Stable tangent of the smaller rotation angle.
    t = np.sign(theta) / (abs(theta) + np.hypot(1.0, theta)) if theta != 0.0 else 1.0
    c = 1.0 / np.hypot(1.0, t)
    s = t * c

    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p - s * row_q
    a[q, :] = s * row_p + c * row_q
    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p - s * col_q
    a[:, q] = s * col_p + c * col_q
    a[p, q] = 0.0
    a[q, p] = 0.0

    vcol_p = vecs[:, p].copy()
    vcol_q = vecs[:, q].copy()
    vecs[:, p] = c * vcol_p - s * vcol_q
    vecs[:, q] = s * vcol_p + c * vcol_q


def sym_eigh(
    a: np.ndarray, sweep_limit: int = 100, tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvectors of a symmetric matrix.

    Classical cyclic Jacobi iteration: sweep all (p, q) pairs, rotating away
    each off-diagonal entry, until the off-diagonal Frobenius mass falls
    below ``tol`` relative to the matrix norm.  Column ``v[:, i]`` of the
    returned basis pairs with eigenvalue ``w[i]``.

    :raises NoConvergence: if ``sweep_limit`` sweeps do not reach ``tol``.
    """
    a = check_symmetric(a).copy()
    d = a.shape[0]
    vecs = np.eye(d)
    if d < 2:
        return np.diag(a).copy(), vecs

    scale = max(float(np.linalg.norm(a)), 1.0)

    def off_norm() -> float:
        off = a - np.diag(np.diag(a))
        return float(np.linalg.norm(off))

    for _ in range(sweep_limit):
        if off_norm() <= tol * scale:
            break
        for p in range(d - 1):
            for q in range(p + 1, d):
                if abs(a[p, q]) > tol * scale / (d * d):
                    _jacobi_rotate(a, vecs, p, q)
    else:
        if off_norm() > tol * scale:
            raise NoConvergence(
                f"Jacobi iteration did not converge in {sweep_limit} sweeps"
            )

    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], vecs[:, order]


def sym_eigenvalues(
    a: np.ndarray, sweep_limit: int = 100, tol: float = 1e-12
) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, sorted ascending."""
    w, _ = sym_eigh(a, sweep_limit=sweep_limit, tol=tol)
    return w
