"""Dense complex matrix utilities shared by every flow-equation module.

Matrices are plain ``numpy.ndarray`` objects of dtype complex128 (square,
row-major).  All energies are expressed in units of a scale J with hbar = 1,
so no physical constants appear in any formula.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "EigensolverError",
    "BandMask",
    "as_matrix",
    "hermitian_split",
    "rod",
    "commutator",
    "apply_band_mask",
    "band_mask_array",
    "eigenvalues",
    "eigenpairs",
    "spectral_distance",
    "match_spectra",
    "matrix_to_json",
    "matrix_from_json",
    "save_matrix_json",
    "load_matrix_json",
    "save_matrix_binary",
    "load_matrix_binary",
]


class EigensolverError(RuntimeError):
    """Raised when the dense eigensolver fails to converge."""


def as_matrix(m, *, require_finite: bool = True) -> np.ndarray:
    """Validate and return ``m`` as a square complex128 array.

    Raises ``ValueError`` for non-square input and for non-finite entries
    (NaN/Inf) unless ``require_finite`` is disabled.
    """
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if require_finite and not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def hermitian_split(m) -> tuple[np.ndarray, np.ndarray]:
    """Split M into its Hermitian part H = (M + M†)/2 and antihermitian
    part A = (M - M†)/2, so that H + A reconstructs M entrywise."""
    a = as_matrix(m)
    herm = 0.5 * (a + a.conj().T)
    anti = 0.5 * (a - a.conj().T)
    return herm, anti


def rod(m) -> float:
    """Residual off-diagonality: (1/D) * sqrt(sum over i != j of |m_ij|^2)."""
    a = as_matrix(m, require_finite=False)
    off = a - np.diag(np.diag(a))
    return float(np.sqrt(np.sum(np.abs(off) ** 2)) / a.shape[0])


def commutator(x, y) -> np.ndarray:
    """[X, Y] = XY - YX."""
    a = as_matrix(x, require_finite=False)
    b = as_matrix(y, require_finite=False)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a @ b - b @ a


@dataclass(frozen=True)
class BandMask:
    """Band-diagonal truncation: element (n, j) is kept iff |n - j| <= order."""

    order: int
    dim: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("band order must be non-negative")
        if self.dim <= 0:
            raise ValueError("dimension must be positive")

    def as_array(self) -> np.ndarray:
        return band_mask_array(self.dim, self.order)


def band_mask_array(dim: int, order: int) -> np.ndarray:
    """Boolean (dim, dim) array, True where |n - j| <= order."""
    idx = np.arange(dim)
    return np.abs(idx[:, None] - idx[None, :]) <= order


def apply_band_mask(m, mask: BandMask) -> np.ndarray:
    """Zero all entries with |n - j| > mask.order; others unchanged."""
    a = as_matrix(m, require_finite=False)
    if mask.dim != a.shape[0]:
        raise ValueError(f"mask dim {mask.dim} does not match matrix dim {a.shape[0]}")
    return np.where(mask.as_array(), a, 0.0)


def eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a general complex matrix.

    Delegates to the LAPACK dense nonsymmetric solver (Hessenberg reduction
    followed by shifted QR iteration, internally capped at O(100 D) sweeps).
    Raises ``EigensolverError`` instead of returning silently wrong values
    when the iteration fails to converge.

    The returned order is whatever the solver produces; any canonical
    pairing of two spectra is done by :func:`match_spectra`.
    """
    a = as_matrix(m)
    if a.shape[0] < 1:
        raise ValueError("matrix must have dimension >= 1")
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigensolverError(f"eigenvalue iteration failed: {exc}") from exc


def eigenpairs(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and right eigenvectors with a backward-stability check.

    Each returned pair satisfies ||M v - lambda v|| / ||M|| <= 1e-10 where
    ||.|| is the Frobenius/2-norm; otherwise ``EigensolverError`` is raised.
    """
    a = as_matrix(m)
    try:
        vals, vecs = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigensolverError(f"eigenvalue iteration failed: {exc}") from exc
    scale = max(np.linalg.norm(a), 1e-300)
    resid = np.linalg.norm(a @ vecs - vecs * vals[None, :], axis=0)
    norms = np.linalg.norm(vecs, axis=0)
    if np.any(resid > 1e-10 * scale * np.maximum(norms, 1e-300)):
        raise EigensolverError("eigenpair residual exceeds 1e-10 * ||M||")
    return vals, vecs


def match_spectra(a, b) -> np.ndarray:
    """Permutation sigma minimizing the total pairwise distance |a_i - b_sigma(i)|.

    The minimal-cost perfect matching (Hungarian algorithm) makes spectral
    comparisons permutation-invariant; it reduces to index pairing when the
    two spectra are well separated.  This pairing rule is our convention:
    no index alignment between a truncated and an exact spectrum is implied
    by the definitions of either.
    """
    sa = np.asarray(a, dtype=np.complex128).ravel()
    sb = np.asarray(b, dtype=np.complex128).ravel()
    if sa.shape != sb.shape:
        raise ValueError(f"spectra have different lengths: {sa.size} vs {sb.size}")
    cost = np.abs(sa[:, None] - sb[None, :])
    _, cols = linear_sum_assignment(cost)
    return cols


def spectral_distance(a, b) -> float:
    """Root-sum-square distance between two spectra after optimal matching.

    Returns sqrt(sum_i |a_i - b_sigma(i)|^2) with sigma from
    :func:`match_spectra`.  Symmetric in its arguments.
    """
    sa = np.asarray(a, dtype=np.complex128).ravel()
    sb = np.asarray(b, dtype=np.complex128).ravel()
    sigma = match_spectra(sa, sb)
    return float(np.sqrt(np.sum(np.abs(sa - sb[sigma]) ** 2)))


# ---------------------------------------------------------------------------
# Serialization: JSON for small matrices, flat little-endian binary for large
# runs.  Both round-trip bit-exactly.
# ---------------------------------------------------------------------------

def matrix_to_json(m) -> dict:
    a = as_matrix(m, require_finite=False)
    return {
        "dim": int(a.shape[0]),
        "re": a.real.tolist(),
        "im": a.imag.tolist(),
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    dim = int(obj["dim"])
    re = np.asarray(obj["re"], dtype=np.float64)
    im = np.asarray(obj["im"], dtype=np.float64)
    if re.shape != (dim, dim) or im.shape != (dim, dim):
        raise ValueError("JSON matrix fields do not match declared dimension")
    return re + 1j * im


def save_matrix_json(m, path) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(m), fh)


def load_matrix_json(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))


def save_matrix_binary(m, path) -> None:
    """Row-major little-endian float64 (re, im) pairs, no header."""
    a = as_matrix(m, require_finite=False)
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(a).astype("<c16").tobytes())


def load_matrix_binary(path) -> np.ndarray:
    raw = np.fromfile(path, dtype="<c16")
    dim = int(round(np.sqrt(raw.size)))
    if dim * dim != raw.size:
        raise ValueError(f"binary matrix file holds {raw.size} entries, not a square count")
    return raw.astype(np.complex128).reshape(dim, dim)
