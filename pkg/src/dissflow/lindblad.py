"""Random purely dissipative Lindbladians on Fock-Liouville space.

The dissipator

    L_D(rho) = i sum_{m,n} K_mn [ F_n rho F_m^dagger
                                  - (F_m^dagger F_n rho + rho F_m^dagger F_n)/2 ]

uses a traceless orthonormal Hilbert-Schmidt basis {F_n} (the Hermitian
SU(N) generators) and a positive semidefinite Kossakowski matrix K sampled
from the complex Wishart ensemble.  K is rescaled to Tr K = N: with that
normalization the nonzero eigenvalues of the superoperator cluster around
-i (their mean is -N^2/(N^2 - 1) on average), which fixes the energy scale
the spectra are quoted in.

Vectorization is column-stacking: vec(rho)[a + b N] = rho[a, b], so the
superoperator of rho -> A rho B is B^T (x) A.  Only spectra are consumed
downstream, so any fixed convention would do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import spawn_rng

__all__ = [
    "LindbladSpec",
    "su_n_basis",
    "sample_kossakowski",
    "build_superoperator",
    "dissipator_matrix",
    "vec",
    "unvec",
]


@dataclass(frozen=True)
class LindbladSpec:
    """Random Lindbladian on an N-dimensional Hilbert space (D = N^2)."""

    n: int
    seed: int = 0
    include_hamiltonian: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Hilbert dimension must be >= 2")

    @property
    def dim(self) -> int:
        return self.n * self.n


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(rho, dtype=np.complex128).ravel(order="F")


def unvec(v: np.ndarray, n: int) -> np.ndarray:
    return np.asarray(v, dtype=np.complex128).reshape((n, n), order="F")


def su_n_basis(n: int) -> np.ndarray:
    """The N^2 - 1 Hermitian SU(N) generators, stacked as (N^2-1, N, N).

    N(N-1)/2 symmetric matrices S_jk = (|j><k| + |k><j|)/sqrt(2), as many
    antisymmetric J_jk = -i(|j><k| - |k><j|)/sqrt(2), and N-1 diagonal
    D_l = (sum_{m<=l} |m><m| - l |l+1><l+1|)/sqrt(l(l+1)).  All traceless
    and orthonormal under Tr(F_a F_b^dagger) = delta_ab; for N=2 these are
    the Pauli matrices over sqrt(2), for N=3 the Gell-Mann set.
    """
    if n < 2:
        raise ValueError("N must be >= 2")
    basis = []
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=np.complex128)
            s[j, k] = inv_sqrt2
            s[k, j] = inv_sqrt2
            basis.append(s)
    for j in range(n):
        for k in range(j + 1, n):
            a = np.zeros((n, n), dtype=np.complex128)
            a[j, k] = -1j * inv_sqrt2
            a[k, j] = 1j * inv_sqrt2
            basis.append(a)
    for l in range(1, n):
        d = np.zeros((n, n), dtype=np.complex128)
        d[np.diag_indices(n)] = [1.0 if m < l else (-float(l) if m == l else 0.0)
                                 for m in range(n)]
        basis.append(d / math.sqrt(l * (l + 1)))
    return np.stack(basis)


def sample_kossakowski(n: int, seed: int) -> np.ndarray:
    """Wishart-sampled PSD Kossakowski matrix, rescaled to Tr K = N.

    K = G G^dagger with G a complex square Ginibre matrix of dimension
    N^2 - 1 (independent standard complex Gaussian entries).
    """
    dim = n * n - 1
    rng = spawn_rng(seed, 2)
    g = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
    g /= math.sqrt(2.0)
    k = g @ g.conj().T
    return k * (n / np.trace(k).real)


def dissipator_matrix(f: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Superoperator matrix of i * sum_mn K_mn [F_n . F_m^dag - anticomm/2].

    Columns are read off by applying the dissipator to each elementary
    basis matrix B_(ij) = |i><j| of Fock-Liouville space.  For these,
    every product F_n B_ij F_m^dagger is an outer product of F columns,
    which are precomputed outside the (i, j) loop together with their
    K-weighted combinations, keeping the assembly within the documented
    O(N^7) worst case.
    """
    n = f.shape[1]

    # P = sum_mn K_mn F_m^dagger F_n, shared by every column.
    p = np.einsum("mn,mca,ncb->ab", k, f.conj(), f, optimize=True)

    cols = np.transpose(f, (1, 0, 2))      # cols[a, l, i] = F_l[a, i]
    weighted = np.einsum("ali,ml->iam", cols, k, optimize=True)

    dim = n * n
    out = np.empty((dim, dim), dtype=np.complex128)
    for i in range(n):
        for j in range(n):
            # sum_mn K_mn F_n |i><j| F_m^dagger = weighted[i] @ conj(cols[:, :, j])^T
            s = weighted[i] @ cols[:, :, j].conj().T
            s -= 0.5 * np.outer(p[:, i], _unit_row(n, j))
            s -= 0.5 * np.outer(_unit_row(n, i), p[j, :])
            out[:, i + j * n] = (1j * s).ravel(order="F")
    return out


def build_superoperator(spec: LindbladSpec) -> np.ndarray:
    """Matrix of a randomly sampled Lindbladian on vectorized densities."""
    n = spec.n
    f = su_n_basis(n)
    k = sample_kossakowski(n, spec.seed)
    out = dissipator_matrix(f, k)
    if spec.include_hamiltonian:
        h = _random_hamiltonian(n, spec.seed)
        ident = np.eye(n)
        out += np.kron(ident, h) - np.kron(h.T, ident)
    return out


def _unit_row(n: int, idx: int) -> np.ndarray:
    e = np.zeros(n, dtype=np.complex128)
    e[idx] = 1.0
    return e


def _random_hamiltonian(n: int, seed: int) -> np.ndarray:
    rng = spawn_rng(seed, 3)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)
