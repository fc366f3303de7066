"""Generator schemes for flow equations on complex matrices.

Every generator maps a square complex matrix M to the matrix eta that drives
the flow dM/dl = [eta[M], M].  The phase-carrying family

    eta(r)_nj = exp(-i phi_nj) |m_nn - m_jj|^r m_nj,   phi_nj = arg(m_nn - m_jj)

contains the three workhorses: r=1 recovers the quadratic scheme ("r2"),
r=0 the generalized particle-conserving scheme ("gpc") whose prefactor has
unit modulus, and r=-1 the energy-independent scheme ("r3").

Degenerate diagonal pairs make the phase undefined, so all phase-carrying
generators zero the affected entries when |m_nn - m_jj| falls below a cutoff
(1e-10 by default, the guard also used to stabilize r3 flows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix

__all__ = [
    "DEGENERACY_CUTOFF",
    "GeneratorScheme",
    "SCHEME_NAMES",
    "eta",
    "eta_pc",
    "eta_ipc",
    "eta_gpc",
    "eta_r1",
    "eta_r2",
    "eta_r3",
    "eta_powerlaw",
    "eta_ppc",
    "eta_hpc",
]

DEGENERACY_CUTOFF = 1e-10

SCHEME_NAMES = (
    "pc",
    "pc_sorted",
    "ipc",
    "ipc_sorted",
    "ppc",
    "hpc",
    "gpc",
    "r1",
    "r2",
    "r3",
    "powerlaw",
)


def _index_signs(dim: int) -> np.ndarray:
    idx = np.arange(dim)
    return np.sign(idx[:, None] - idx[None, :]).astype(np.float64)


def _zero_diag(a: np.ndarray) -> np.ndarray:
    np.fill_diagonal(a, 0.0)
    return a


def eta_pc(m, sorted_variant: bool = False) -> np.ndarray:
    """Particle-conserving generator eta_nj = sign(n - j) m_nj.

    With ``sorted_variant`` the sign is keyed on the Hermitian diagonal,
    sign(h_nn - h_jj) with h_nn = Re(m_nn), which avoids the index-sorting
    rearrangements of the plain variant when the diagonal is unsorted.
    """
    a = as_matrix(m, require_finite=False)
    if sorted_variant:
        key = a.diagonal().real
        signs = np.sign(key[:, None] - key[None, :])
    else:
        signs = _index_signs(a.shape[0])
    return _zero_diag(signs * a)


def eta_ipc(m, sorted_variant: bool = False) -> np.ndarray:
    """Imaginary particle-conserving generator eta_nj = i sign(n - j) m_nj.

    This is the pc generator with an extra phase exp(i pi/2), appropriate
    for antihermitian matrices.  The sorted variant keys the sign on
    Re(i m_nn), the real diagonal of i*A for antihermitian A.
    """
    a = as_matrix(m, require_finite=False)
    if sorted_variant:
        key = (1j * a.diagonal()).real
        signs = np.sign(key[:, None] - key[None, :])
    else:
        signs = _index_signs(a.shape[0])
    return _zero_diag(1j * signs * a)


def eta_gpc(m, cutoff: float = DEGENERACY_CUTOFF) -> np.ndarray:
    """Generalized particle-conserving generator.

    eta_nj = (m_nn* - m_jj*) / |m_nn* - m_jj*| * m_nj, zero on degenerate
    pairs.  The unit-modulus prefactor reduces to sign(h_nn - h_jj) on
    Hermitian matrices (pc) and to i sign(i a_nn - i a_jj) on antihermitian
    ones (ipc).
    """
    a = as_matrix(m, require_finite=False)
    d = np.conj(a.diagonal())
    w = d[:, None] - d[None, :]
    mag = np.abs(w)
    keep = mag >= cutoff
    np.divide(w, mag, out=w, where=keep)
    w[~keep] = 0.0
    w *= a
    return _zero_diag(w)


def eta_r1(m) -> np.ndarray:
    """eta = [M^dagger, M_nondiag].

    Unlike the entrywise-defined generators, this commutator carries a
    nonzero diagonal for non-normal M, and that diagonal feeds the flow.
    """
    a = as_matrix(m, require_finite=False)
    v = a - np.diag(a.diagonal())
    adag = a.conj().T
    return adag @ v - v @ adag


def eta_r2(m) -> np.ndarray:
    """eta_nj = (m_nn* - m_jj*) m_nj, the commutator [M_diag^dagger, M_nondiag]."""
    a = as_matrix(m, require_finite=False)
    d = np.conj(a.diagonal())
    return _zero_diag((d[:, None] - d[None, :]) * a)


def eta_r3(m, cutoff: float = DEGENERACY_CUTOFF) -> np.ndarray:
    """eta_nj = m_nj / (m_nn - m_jj), zeroed where |m_nn - m_jj| < cutoff."""
    a = as_matrix(m, require_finite=False)
    d = a.diagonal()
    delta = d[:, None] - d[None, :]
    keep = np.abs(delta) >= cutoff
    out = np.where(keep, a, 0.0)
    np.divide(out, delta, out=out, where=keep)
    return _zero_diag(out)


def eta_powerlaw(m, r: float, cutoff: float = DEGENERACY_CUTOFF) -> np.ndarray:
    """Power-law family eta(r)_nj = exp(-i phi_nj) |m_nn - m_jj|^r m_nj.

    r=1, 0, -1 reproduce :func:`eta_r2`, :func:`eta_gpc` and :func:`eta_r3`.
    """
    if not math.isfinite(r):
        raise ValueError("power-law exponent must be finite")
    a = as_matrix(m, require_finite=False)
    d = a.diagonal()
    delta = d[:, None] - d[None, :]
    mag = np.abs(delta)
    keep = mag >= cutoff
    safe = np.where(keep, mag, 1.0)
    # exp(-i phi) |delta|^r = conj(delta) * |delta|^(r - 1)
    weight = np.where(keep, np.conj(delta), 0.0) * safe ** (r - 1.0)
    return _zero_diag(weight * a)


def eta_ppc(m, theta: float) -> np.ndarray:
    """Phase-shifted pc generator eta_nj = sign(n - j) exp(i theta) m_nj.

    theta = 0 gives pc, theta = pi/2 gives ipc; intermediate angles trade
    off convergence of the Hermitian against the antihermitian content.
    """
    if not 0.0 <= theta <= math.pi / 2:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    a = as_matrix(m, require_finite=False)
    signs = _index_signs(a.shape[0])
    return _zero_diag(np.exp(1j * theta) * signs * a)


def eta_hpc(m) -> np.ndarray:
    """Hermitized pc generator: pc applied to H = M^dagger M.

    eta_nj = sign(n - j) sum_k m_kn* m_kj.  Fixed points are matrices with
    pairwise orthogonal columns, which need not be diagonal; H is rebuilt
    from M at every evaluation rather than co-flowed.
    """
    a = as_matrix(m, require_finite=False)
    h = a.conj().T @ a
    signs = _index_signs(a.shape[0])
    return _zero_diag(signs * h)


@dataclass(frozen=True)
class GeneratorScheme:
    """Named generator with its scheme-specific parameters.

    kind is one of ``SCHEME_NAMES``; ``theta`` applies to ppc only, ``r`` to
    powerlaw only, and ``cutoff`` is the degeneracy guard shared by the
    phase-carrying schemes (gpc, r3, powerlaw).
    """

    kind: str
    theta: float = 0.0
    r: float = 0.0
    cutoff: float = DEGENERACY_CUTOFF

    def __post_init__(self):
        if self.kind not in SCHEME_NAMES:
            raise ValueError(f"unknown generator scheme {self.kind!r}")
        if self.kind == "ppc" and not 0.0 <= self.theta <= math.pi / 2:
            raise ValueError("ppc theta must lie in [0, pi/2]")
        if self.kind == "powerlaw" and not math.isfinite(self.r):
            raise ValueError("powerlaw exponent must be finite")

    @classmethod
    def from_name(cls, name: str, **params) -> "GeneratorScheme":
        return cls(kind=name.lower(), **params)

    @property
    def label(self) -> str:
        if self.kind == "powerlaw":
            return f"powerlaw({self.r:g})"
        if self.kind == "ppc":
            return f"ppc({self.theta:g})"
        return self.kind

    @property
    def r_exponent(self) -> float | None:
        """Exponent r of the power-law family, None for schemes outside it."""
        return {"gpc": 0.0, "r2": 1.0, "r3": -1.0, "powerlaw": self.r}.get(self.kind)

    def eta(self, m) -> np.ndarray:
        return eta(m, self)


def eta(m, scheme: GeneratorScheme) -> np.ndarray:
    """Evaluate the generator selected by ``scheme`` on matrix ``m``."""
    kind = scheme.kind
    if kind == "pc":
        return eta_pc(m)
    if kind == "pc_sorted":
        return eta_pc(m, sorted_variant=True)
    if kind == "ipc":
        return eta_ipc(m)
    if kind == "ipc_sorted":
        return eta_ipc(m, sorted_variant=True)
    if kind == "ppc":
        return eta_ppc(m, scheme.theta)
    if kind == "hpc":
        return eta_hpc(m)
    if kind == "gpc":
        return eta_gpc(m, scheme.cutoff)
    if kind == "r1":
        return eta_r1(m)
    if kind == "r2":
        return eta_r2(m)
    if kind == "r3":
        return eta_r3(m, scheme.cutoff)
    if kind == "powerlaw":
        return eta_powerlaw(m, scheme.r, scheme.cutoff)
    raise ValueError(f"unknown generator scheme {kind!r}")
