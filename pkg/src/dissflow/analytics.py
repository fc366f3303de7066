"""Closed-form solutions and identities used as ground truth in tests.

Single-mode model: with A = (gamma1 + gamma2)/2 and
B = -(gamma1 - gamma2)/(gamma1 + gamma2), the gpc flow of
M = [[eps + i a, mu2], [-mu1, eps - i a]] admits

    a(l)  = sign(a0) A tanh(2 A l + sign(a0) atanh(B))
    mu(l) = sqrt(gamma1/gamma2) A / cosh(2 A l + sign(a0) atanh(B))

where mu = mu1 = (gamma1/gamma2) mu2 and the sign of a never changes along
the flow.  a0 = 0 (equal rates) sits on the unstable fixed point and is
rejected rather than silently defaulted.

The auxiliary angle is B' = sign(a0) asin(B); note sin(B') = |B| (because
sign(a0) = sign(B)), which is what feeds the stationary observable
occupations (1 +- |gamma1 - gamma2|/(gamma1 + gamma2))/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .generators import DEGENERACY_CUTOFF, GeneratorScheme
from .linalg import as_matrix

__all__ = [
    "SingleModeAnalytic",
    "alpha_exact",
    "mu_exact",
    "gamma2_zero_exact",
    "observable_exact",
    "closed_form_rhs_r2",
    "closed_form_rhs_r3",
]


@dataclass(frozen=True)
class SingleModeAnalytic:
    gamma1: float
    gamma2: float

    def __post_init__(self):
        if self.gamma1 < 0 or self.gamma2 < 0:
            raise ValueError("rates must be non-negative")
        if self.gamma1 + self.gamma2 <= 0:
            raise ValueError("at least one rate must be positive")
        if self.gamma1 == self.gamma2:
            raise ValueError(
                "gamma1 = gamma2 puts alpha(0) on the unstable fixed point; "
                "sign(alpha(0)) is undefined")

    @property
    def a(self) -> float:
        return 0.5 * (self.gamma1 + self.gamma2)

    @property
    def b(self) -> float:
        return -(self.gamma1 - self.gamma2) / (self.gamma1 + self.gamma2)

    @property
    def c(self) -> float:
        if self.gamma1 <= 0:
            raise ValueError("C = gamma2/gamma1 requires gamma1 > 0")
        return self.gamma2 / self.gamma1

    @property
    def sign0(self) -> float:
        """sign(alpha(0)) = sign(gamma2 - gamma1)."""
        return math.copysign(1.0, self.gamma2 - self.gamma1)

    @property
    def b_prime(self) -> float:
        return self.sign0 * math.asin(self.b)


def alpha_exact(l, sm: SingleModeAnalytic):
    """a(l) = sign(a0) A tanh(2 A l + sign(a0) atanh(B))."""
    l = np.asarray(l, dtype=np.float64)
    if abs(sm.b) >= 1.0:
        # gamma2 = 0 (or gamma1 = 0): alpha is constant at sign(a0) * A
        const = sm.sign0 * sm.a
        return const if l.ndim == 0 else np.full(l.shape, const)
    out = sm.sign0 * sm.a * np.tanh(2.0 * sm.a * l + sm.sign0 * math.atanh(sm.b))
    return float(out) if out.ndim == 0 else out


def mu_exact(l, sm: SingleModeAnalytic):
    """mu1(l); mu2 follows as C * mu1.  Requires gamma2 > 0."""
    if sm.gamma2 <= 0:
        raise ValueError("gamma2 = 0: use gamma2_zero_exact for the closed forms")
    l = np.asarray(l, dtype=np.float64)
    out = (math.sqrt(sm.gamma1 / sm.gamma2) * sm.a
           / np.cosh(2.0 * sm.a * l + sm.sign0 * math.atanh(sm.b)))
    return float(out) if out.ndim == 0 else out


def gamma2_zero_exact(l, gamma1: float, scheme) -> float:
    """mu1(l) for gamma2 = 0, per generator scheme.

    With alpha pinned at -gamma1/2 the reduced flows and solutions are

        gpc: d mu1 = -gamma1 mu1                 -> gamma1 exp(-gamma1 l)
        r1:  d mu1 = -(gamma1^2 + 2 mu1^2) mu1   -> gamma1 / sqrt(3 e^(2 g^2 l) - 2)
        r2:  d mu1 = -gamma1^2 mu1               -> gamma1 exp(-gamma1^2 l)
        r3:  d mu1 = -mu1                        -> gamma1 exp(-l)

    so gpc decays with the energy scale, r1/r2 quadratically in it and r3
    independently of it.  The r1 solution follows from the Bernoulli
    substitution w = 1/mu1^2 and decays asymptotically as exp(-gamma1^2 l),
    the same |dE|^2 law as r2.
    """
    if gamma1 <= 0:
        raise ValueError("gamma1 must be positive")
    kind = scheme.kind if isinstance(scheme, GeneratorScheme) else str(scheme).lower()
    l = np.asarray(l, dtype=np.float64)
    if kind == "gpc":
        out = gamma1 * np.exp(-gamma1 * l)
    elif kind == "r1":
        out = gamma1 / np.sqrt(3.0 * np.exp(2.0 * gamma1 ** 2 * l) - 2.0)
    elif kind == "r2":
        out = gamma1 * np.exp(-gamma1 ** 2 * l)
    elif kind == "r3":
        out = gamma1 * np.exp(-l)
    else:
        raise ValueError(f"no closed form for scheme {kind!r}")
    return float(out) if out.ndim == 0 else out


def observable_exact(l, sm: SingleModeAnalytic):
    """(omega1, omega2, chi) of the co-flowed occupation observable.

    chi(l) = sign(a0) sin(2 atan tanh(A l + sign(a0) atanh(B)/2) - B')
             / (2 sqrt(C)),
    omega1 = 1/2 + sqrt(1/4 - C chi^2) (positive branch, matching
    omega1(0) = 1), omega2 = 1 - omega1.  The sign(a0) prefactor follows
    from d chi/dl = sign(a) (omega1 - omega2) mu and is what makes
    chi(inf) = sign(a) gamma1 / (gamma1 + gamma2).
    """
    if sm.gamma1 <= 0 or sm.gamma2 <= 0:
        raise ValueError("observable closed forms require both rates positive")
    l = np.asarray(l, dtype=np.float64)
    arg = sm.a * l + sm.sign0 * 0.5 * math.atanh(sm.b)
    chi = (sm.sign0 * np.sin(2.0 * np.arctan(np.tanh(arg)) - sm.b_prime)
           / (2.0 * math.sqrt(sm.c)))
    omega1 = 0.5 + np.sqrt(np.maximum(0.25 - sm.c * chi ** 2, 0.0))
    omega2 = 1.0 - omega1
    if l.ndim == 0:
        return float(omega1), float(omega2), float(chi)
    return omega1, omega2, chi


def closed_form_rhs_r2(m) -> np.ndarray:
    """Flow derivative for the r2 scheme from the second-quantization route.

    Off-diagonal: d m_kq = -|d_qq - d_kk|^2 v_kq
                           + sum_s v_ks v_sq (d_kk* + d_qq* - 2 d_ss*),
    diagonal:     d m_kk = 2 sum_s v_ks v_sk (d_kk* - d_ss*),
    with d the diagonal and v the off-diagonal part of M.  Because v has a
    zero diagonal the excluded s terms vanish identically, so plain matrix
    products evaluate the restricted sums.
    """
    a = as_matrix(m)
    d = a.diagonal()
    v = a - np.diag(d)
    dc = np.conj(d)
    delta2 = np.abs(d[:, None] - d[None, :]) ** 2
    vv = v @ v
    weighted = v @ (dc[:, None] * v)
    out = -delta2 * v + dc[:, None] * vv + vv * dc[None, :] - 2.0 * weighted
    return out


def closed_form_rhs_r3(m, cutoff: float = DEGENERACY_CUTOFF) -> np.ndarray:
    """Flow derivative for the r3 scheme from the second-quantization route.

    Off-diagonal: d m_kq = -v_kq + sum_s v_ks v_sq (d_kk + d_qq - 2 d_ss)
                                    / ((d_kk - d_ss)(d_qq - d_ss)),
    diagonal:     d m_kk = 2 sum_s v_ks v_sk / (d_kk - d_ss).

    The double-pole weight splits as 1/(d_kk - d_ss) + 1/(d_qq - d_ss);
    pairs degenerate below ``cutoff`` are zeroed, consistent with the r3
    generator's guard.
    """
    a = as_matrix(m)
    d = a.diagonal()
    v = a - np.diag(d)
    delta = d[:, None] - d[None, :]
    keep = np.abs(delta) >= cutoff
    inv = np.where(keep, 1.0, 0.0) / np.where(keep, delta, 1.0)
    left = (v * inv) @ v        # sum_s v_ks v_sq / (d_kk - d_ss)
    right = v @ (v * inv.T)     # sum_s v_ks v_sq / (d_qq - d_ss)
    # the first-order -v_kq exists only where the generator entry does
    return -np.where(keep, v, 0.0) + left + right
