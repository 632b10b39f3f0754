"""Dense matrix primitives: thin SVD, PSD fractional powers, Kronecker, vec.

Matrices are plain 2-D ``numpy.ndarray`` objects of dtype float64.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

SYMMETRY_TOL = 1e-9
NEG_EIG_TOL = 1e-9


class NumericFailure(RuntimeError):
    """A dense linear-algebra routine failed to converge."""


class NotPSDError(ValueError):
    pass


class SvdFactors(NamedTuple):
    u: np.ndarray  # k x p, orthonormal columns
    s: np.ndarray  # p singular values, non-increasing
    v: np.ndarray  # d x p, orthonormal columns


def as_matrix(a) -> np.ndarray:
    """Coerce ``a`` to a finite 2-D float64 array (1-D input becomes a row)."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[None, :]
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def svd(a) -> SvdFactors:
    """Thin SVD ``a = u @ diag(s) @ v.T`` with ``p = min(k, d)`` triplets."""
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"SVD did not converge for {a.shape} matrix") from exc
    return SvdFactors(u, s, vt.T)


def full_svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD with ``u`` (k x k) and ``v`` (d x d) completed to orthonormal bases.

    ``s`` still has only ``min(k, d)`` entries; callers pad with zeros.
    """
    a = as_matrix(a)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"SVD did not converge for {a.shape} matrix") from exc
    return u, s, vt.T


def drop_negligible(s, shape) -> np.ndarray:
    """Zero singular values below the usual rank tolerance ``max(shape) * eps * s_max``."""
    s = np.array(s, dtype=np.float64)
    if s.size:
        s[s <= max(shape) * np.finfo(np.float64).eps * s.max()] = 0.0
    return s


def _check_psd_input(a: np.ndarray) -> np.ndarray:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if np.max(np.abs(a - a.T), initial=0.0) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return 0.5 * (a + a.T)


def psd_eigh(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric PSD matrix with round-off cleanup.

    Eigenvalues in ``[-1e-9, 0)`` are clamped to zero; anything more negative
    raises :class:`NotPSDError`.  Eigenvalues below ``n * eps * lambda_max``
    are treated as exact zeros, since fractional powers would otherwise
    blow round-off noise up to visible magnitudes (``(1e-16) ** 0.2 ~ 6e-4``).
    """
    a = _check_psd_input(a)
    try:
        lam, q = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure("symmetric eigendecomposition failed") from exc
    if lam.size and lam[0] < -NEG_EIG_TOL:
        raise NotPSDError(f"matrix is not PSD (min eigenvalue {lam[0]:.3e})")
    lam = np.clip(lam, 0.0, None)
    if lam.size:
        cutoff = lam.size * np.finfo(np.float64).eps * lam[-1]
        lam[lam <= cutoff] = 0.0
    return lam, q


def psd_frac_power(a, alpha: float) -> np.ndarray:
    """Fractional power ``a ** alpha`` of a symmetric PSD matrix, alpha in [0, 1].

    Uses the convention ``0 ** 0 == 1`` so that ``a ** 0`` is the identity
    even when ``a`` is singular.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    lam, q = psd_eigh(a)
    if alpha == 0.0:
        return np.eye(lam.size)
    powered = lam**alpha
    out = (q * powered) @ q.T
    return 0.5 * (out + out.T)


def kron(a, b) -> np.ndarray:
    """Kronecker product: block ``(i, j)`` of the result is ``a[i, j] * b``."""
    return np.kron(as_matrix(a), as_matrix(b))


def vec(a) -> np.ndarray:
    """Column-first (Fortran order) vectorization."""
    return as_matrix(a).reshape(-1, order="F")


def unvec(x, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    x = np.asarray(x, dtype=np.float64)
    if x.size != rows * cols:
        raise ValueError(f"cannot reshape {x.size} entries into {rows}x{cols}")
    return x.reshape(rows, cols, order="F")
