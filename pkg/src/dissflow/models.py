"""Benchmark matrix families and truncation preparation.

All builders are pure functions of (spec, seed): sampling uses the
counter-based Philox generator keyed through a ``SeedSequence`` on the
spec's seed, so the same spec yields the same matrix regardless of which
generator scheme consumes it or how many workers run in parallel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, band_mask_array

__all__ = [
    "SingleModeSpec",
    "OrderedScatteringSpec",
    "DisorderedScatteringSpec",
    "RandomCrossoverSpec",
    "spawn_rng",
    "build_single_mode",
    "build_ordered_scattering",
    "build_disordered_scattering",
    "sample_random_crossover",
    "impose_ordered_diagonal",
    "prepare_truncated",
    "lambda_sds_reference",
    "find_strongly_dissipative",
    "build_matrix",
]


def spawn_rng(*key) -> np.random.Generator:
    """Philox generator keyed on a tuple of integers (splittable, stable)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


@dataclass(frozen=True)
class SingleModeSpec:
    """Single fermionic mode with loss rate gamma1 and gain rate gamma2."""

    epsilon: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ValueError("rates must be non-negative")


@dataclass(frozen=True)
class OrderedScatteringSpec:
    """Linear-dispersion modes n in [-N, N] with a uniform localized loss.

    Dimension D = 2N + 1; energies eps(k_n) = v (2 pi / L) n; every entry
    additionally carries -i gamma / (2 L).
    """

    N: int
    v: float = 1.0
    gamma: float = 1.0
    L: float = 2.0 * math.pi

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.L <= 0 or self.v <= 0:
            raise ValueError("v and L must be positive")

    @property
    def dim(self) -> int:
        return 2 * self.N + 1

    @property
    def lambda_cutoff(self) -> float:
        """Energy cutoff Lambda_N = v (2 pi / L) N."""
        return self.v * (2.0 * math.pi / self.L) * self.N


@dataclass(frozen=True)
class DisorderedScatteringSpec:
    """Disordered tight-binding chain with loss gamma on site 0.

    Diagonal h_j drawn uniformly from [-W, W]; hopping entries -J on the
    tridiagonal and on the periodic corners, the matrix elements of the
    Hamiltonian -J sum_j (c_j^dag c_{j-1} + h.c.).  With these a single
    strongly dissipative eigenvalue detaches for gamma >= 4J.
    """

    n_sites: int
    j_hop: float = 1.0
    w: float = 1.0
    gamma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.n_sites < 3:
            raise ValueError("n_sites must be >= 3")


@dataclass(frozen=True)
class RandomCrossoverSpec:
    """Uniform random matrix interpolating Hermitian <-> antihermitian.

    M = (1 - alpha)(R + R^dagger) + alpha (R - R^dagger) with the real and
    imaginary parts of R drawn uniformly from [-1, 1].  With
    ``ordered_diagonal`` the diagonal is replaced by a cumulative walk along
    the ray exp(i alpha pi / 2), which makes the matrix complex-sorted.
    """

    dim: int
    alpha: float
    seed: int = 0
    ordered_diagonal: bool = False
    lambda_expansion: float | None = None
    truncation_order: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if self.lambda_expansion is not None and not 0.0 < self.lambda_expansion <= 1.0:
            raise ValueError("lambda must lie in (0, 1]")
        if self.dim < 2:
            raise ValueError("dim must be >= 2")


def build_single_mode(spec: SingleModeSpec) -> np.ndarray:
    """2x2 matrix [[eps + i a, mu2], [-mu1, eps - i a]] at l = 0.

    Initial conditions: a(0) = -(gamma1 - gamma2)/2, mu_i(0) = gamma_i.
    Its eigenvalues are eps +- i (gamma1 + gamma2)/2.
    """
    alpha0 = -0.5 * (spec.gamma1 - spec.gamma2)
    return np.array(
        [[spec.epsilon + 1j * alpha0, spec.gamma2],
         [-spec.gamma1, spec.epsilon - 1j * alpha0]],
        dtype=np.complex128,
    )


def build_ordered_scattering(spec: OrderedScatteringSpec) -> np.ndarray:
    """m_nj = eps(k_n) delta_nj - i gamma/(2L) for all n, j."""
    n = np.arange(-spec.N, spec.N + 1, dtype=np.float64)
    eps = spec.v * (2.0 * math.pi / spec.L) * n
    m = np.full((spec.dim, spec.dim), -1j * spec.gamma / (2.0 * spec.L),
                dtype=np.complex128)
    m[np.diag_indices(spec.dim)] += eps
    return m


def build_disordered_scattering(spec: DisorderedScatteringSpec) -> np.ndarray:
    """Tridiagonal -J hopping with periodic corners; loss -i gamma/2 on site 0."""
    rng = spawn_rng(spec.seed)
    d = spec.n_sites
    h = rng.uniform(-spec.w, spec.w, size=d)
    m = np.zeros((d, d), dtype=np.complex128)
    m[np.diag_indices(d)] = h
    m[0, 0] -= 0.5j * spec.gamma
    hop = -spec.j_hop
    for n in range(d - 1):
        m[n, n + 1] = hop
        m[n + 1, n] = hop
    m[0, d - 1] = hop
    m[d - 1, 0] = hop
    return m


def sample_random_crossover(spec: RandomCrossoverSpec) -> np.ndarray:
    """M = R + (1 - 2 alpha) R^dagger; Hermitian at alpha=0, antihermitian at 1.

    When ``lambda_expansion`` or ``truncation_order`` are set on the spec the
    sampled matrix is additionally run through :func:`prepare_truncated`, so
    the instance describes the prepared band-diagonal matrix directly.
    """
    rng = spawn_rng(spec.seed, 0)
    d = spec.dim
    r = rng.uniform(-1.0, 1.0, size=(d, d)) + 1j * rng.uniform(-1.0, 1.0, size=(d, d))
    m = r + (1.0 - 2.0 * spec.alpha) * r.conj().T
    if spec.ordered_diagonal:
        m = impose_ordered_diagonal(m, spec.alpha, rng=spawn_rng(spec.seed, 1))
    if spec.lambda_expansion is not None or spec.truncation_order is not None:
        lam = 1.0 if spec.lambda_expansion is None else spec.lambda_expansion
        order = d - 1 if spec.truncation_order is None else spec.truncation_order
        m = prepare_truncated(m, lam, order)
    return m


def impose_ordered_diagonal(m, alpha: float, seed: int | None = None,
                            rng: np.random.Generator | None = None) -> np.ndarray:
    """Replace the diagonal by a nondecreasing walk along exp(i alpha pi/2).

    m_00 = dir * r_0 and m_nn = m_(n-1)(n-1) + dir * r_n with r_n uniform on
    [0, 1], so all diagonal entries lie sorted on one ray through the origin
    (the complex-sorted class).  Off-diagonal entries are untouched.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if rng is None:
        rng = spawn_rng(0 if seed is None else seed)
    a = as_matrix(m).copy()
    d = a.shape[0]
    direction = np.exp(1j * alpha * math.pi / 2.0)
    steps = rng.uniform(0.0, 1.0, size=d)
    a[np.diag_indices(d)] = direction * np.cumsum(steps)
    return a


def prepare_truncated(m, lam: float, n_max: int) -> np.ndarray:
    """Scale entry (n, j) by lam^|n-j| and zero everything beyond |n-j| > n_max."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    if n_max < 0:
        raise ValueError("n_max must be non-negative")
    a = as_matrix(m)
    d = a.shape[0]
    idx = np.arange(d)
    dist = np.abs(idx[:, None] - idx[None, :])
    scaled = a * lam ** dist
    return np.where(band_mask_array(d, n_max), scaled, 0.0)


def lambda_sds_reference(spec: OrderedScatteringSpec) -> complex:
    """Closed form -i Lambda_N tan((pi/2)(4v/gamma - 1)) for gamma >= 4v.

    Only the magnitude of the imaginary part is meaningful for comparisons:
    the printed branch yields Im > 0 for gamma > 4v while every eigenvalue
    of the dissipative matrix satisfies Im <= 0, so callers should compare
    |Im lambda| against |lambda_sds|.  At gamma = 4v the expression is 0
    (threshold); below threshold no strongly dissipative state exists and a
    ``ValueError`` is raised.
    """
    if spec.gamma < 4.0 * spec.v:
        raise ValueError("lambda_sds is only defined for gamma >= 4 v")
    arg = 0.5 * math.pi * (4.0 * spec.v / spec.gamma - 1.0)
    return -1j * spec.lambda_cutoff * math.tan(arg)


def find_strongly_dissipative(spectrum, scale: float, *,
                              re_tol: float = 1e-6,
                              dominance: float = 3.0) -> complex | None:
    """Extract the strongly dissipative eigenvalue, if one exists.

    Returns the eigenvalue maximizing |Im| provided its real part vanishes
    (|Re| < re_tol * scale) and its |Im| exceeds ``dominance`` times the
    largest |Im| among all other eigenvalues; otherwise None.
    """
    s = np.asarray(spectrum, dtype=np.complex128).ravel()
    if s.size < 2:
        return None
    order = np.argsort(np.abs(s.imag))
    top, runner_up = s[order[-1]], s[order[-2]]
    if abs(top.real) >= re_tol * scale:
        return None
    if abs(top.imag) < dominance * abs(runner_up.imag):
        return None
    return complex(top)


def build_matrix(spec) -> np.ndarray:
    """Dispatch a model spec to its builder (Lindblad specs included)."""
    from . import lindblad

    if isinstance(spec, SingleModeSpec):
        return build_single_mode(spec)
    if isinstance(spec, OrderedScatteringSpec):
        return build_ordered_scattering(spec)
    if isinstance(spec, DisorderedScatteringSpec):
        return build_disordered_scattering(spec)
    if isinstance(spec, RandomCrossoverSpec):
        return sample_random_crossover(spec)
    if isinstance(spec, lindblad.LindbladSpec):
        return lindblad.build_superoperator(spec)
    raise TypeError(f"unknown model spec type {type(spec).__name__}")
