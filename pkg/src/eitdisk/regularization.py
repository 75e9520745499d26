"""SVD-based regularization and the two noise models used in the experiments.

Tikhonov solutions are evaluated through the singular value decomposition so
they remain meaningful on rank-deficient systems: the minimizer of
``|A x - b|^2 + alpha |x|^2`` is ``sum_i s_i/(alpha + s_i^2) (u_i . b) v_i``.
The penalty weight can be chosen by the Morozov discrepancy principle, i.e.
as the root of ``|A x_alpha - b| = target``, which is monotone increasing in
``alpha`` and is bracketed here on ``[1e-14 s1^2, s1^2]``.

The spectral cutoff alternative keeps the singular triplets with
``s_i >= tau * s_1`` (or above an absolute, noise-tied threshold) and applies
the plain pseudoinverse on that subspace.

Noise models: multiplicative entrywise perturbations ``A (1 + delta E)`` with
a zero-mean uniform matrix scaled to unit spectral norm, and the vector
analogue ``g (1 + delta e)`` with recentered uniform entries.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import AllModesCutWarning, NoiseDominates, SingularSystem

__all__ = [
    "SvdFactorization",
    "RegStrategy",
    "tikhonov_solve",
    "discrepancy_alpha",
    "cutoff_solve",
    "regularized_solve",
    "perturb_matrix",
    "perturb_vector",
    "expected_noise_norm",
]

_ALPHA_FLOOR = 1e-14  # bottom of the discrepancy bracket, relative to s1^2


@dataclass(frozen=True)
class SvdFactorization:
    """Thin SVD ``A = U diag(s) Vh`` with nonincreasing singular values."""

    u: np.ndarray
    s: np.ndarray
    vh: np.ndarray

    @classmethod
    def from_matrix(cls, a):
        u, s, vh = np.linalg.svd(np.asarray(a), full_matrices=False)
        return cls(u, s, vh)

    @property
    def rank(self):
        if self.s[0] == 0:
            return 0
        return int(np.sum(self.s > self.s[0] * np.finfo(float).eps * max(self.u.shape)))

    def project(self, b):
        """Coefficients of ``b`` in the left singular basis."""
        return self.u.conj().T @ np.asarray(b)

    def reconstruct(self):
        return (self.u * self.s) @ self.vh


@dataclass(frozen=True)
class RegStrategy:
    """Choice of regularization for an ill-posed dense solve.

    ``kind`` is one of ``tikhonov``, ``cutoff`` or ``none``.  A Tikhonov
    strategy carries either an explicit ``alpha`` or a relative noise level
    plus safety factor for the discrepancy principle.  A cutoff strategy
    carries either a relative threshold ``tau`` (measured against the largest
    singular value) or, when ``noise_level`` is set instead, an absolute
    threshold of ``safety`` times the expected noise magnitude of the data.
    """

    kind: str
    alpha: float | None = None
    tau: float | None = None
    noise_level: float | None = None
    safety: float = 1.5

    @classmethod
    def tikhonov(cls, alpha):
        if alpha <= 0:
            raise ValueError("explicit alpha must be positive")
        return cls("tikhonov", alpha=float(alpha))

    @classmethod
    def tikhonov_discrepancy(cls, noise_level, safety=1.5):
        if safety < 1:
            raise ValueError("safety factor must be >= 1")
        return cls("tikhonov", noise_level=float(noise_level), safety=float(safety))

    @classmethod
    def spectral_cutoff(cls, tau):
        if not 0 < tau < 1:
            raise ValueError("relative cutoff must lie in (0, 1)")
        return cls("cutoff", tau=float(tau))

    @classmethod
    def cutoff_by_noise(cls, noise_level, safety=2.0):
        return cls("cutoff", noise_level=float(noise_level), safety=float(safety))

    @classmethod
    def none(cls):
        return cls("none")


def tikhonov_solve(svd, b, alpha):
    """Penalized least-squares solution through the SVD filter."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    beta = svd.project(b)
    return svd.vh.conj().T @ (svd.s / (alpha + svd.s**2) * beta)


def _residual_profile(svd, b):
    beta = svd.project(b)
    beta2 = np.abs(beta) ** 2
    b_perp2 = max(float(np.linalg.norm(b) ** 2 - beta2.sum()), 0.0)
    return beta2, b_perp2


def discrepancy_alpha(svd, b, delta_abs, safety=1.5):
    """Penalty weight with residual ``safety * delta_abs``, by bisection.

    The residual norm ``sqrt(sum (alpha/(alpha+s^2))^2 |u.b|^2 + |b_perp|^2)``
    increases monotonically with ``alpha``; bisection on ``log alpha`` over
    ``[1e-14 s1^2, s1^2]`` resolves the root essentially to rounding.  When
    the target cannot be reached inside the bracket the nearer endpoint is
    returned.  Raises :class:`NoiseDominates` when the target exceeds the
    data norm, in which case no fit is meaningful.
    """
    target = safety * delta_abs
    bnorm = float(np.linalg.norm(b))
    if target >= bnorm:
        raise NoiseDominates(f"discrepancy target {target:.3e} >= |b| {bnorm:.3e}")
    beta2, b_perp2 = _residual_profile(svd, b)
    s2 = svd.s**2

    def residual(alpha):
        return np.sqrt(np.sum((alpha / (alpha + s2)) ** 2 * beta2) + b_perp2)

    lo, hi = _ALPHA_FLOOR * s2[0], s2[0]
    if residual(lo) >= target:
        return lo
    if residual(hi) <= target:
        return hi
    for _ in range(80):
        mid = np.sqrt(lo * hi)
        if residual(mid) < target:
            lo = mid
        else:
            hi = mid
    return np.sqrt(lo * hi)


def cutoff_solve(svd, b, tau_rel=None, tau_abs=None):
    """Truncated pseudoinverse keeping ``s_i >= tau_rel * s_1`` (or ``tau_abs``).

    Returns the zero vector (with :class:`AllModesCutWarning`) when the
    threshold removes every mode.
    """
    if (tau_rel is None) == (tau_abs is None):
        raise ValueError("pass exactly one of tau_rel, tau_abs")
    thr = tau_abs if tau_abs is not None else tau_rel * svd.s[0]
    keep = svd.s >= thr
    if not keep.any():
        warnings.warn("cutoff removed every singular mode", AllModesCutWarning)
        return np.zeros(svd.vh.shape[1], dtype=np.result_type(svd.vh, b))
    beta = svd.u[:, keep].conj().T @ np.asarray(b)
    return svd.vh[keep].conj().T @ (beta / svd.s[keep])


def regularized_solve(svd, b, reg, delta_abs=None):
    """Dispatch a right-hand side through the chosen strategy.

    ``delta_abs`` supplies the absolute noise magnitude for noise-tied
    strategies; by default it is ``reg.noise_level * |b|``.  Returns the
    solution and a diagnostics dict (chosen alpha or kept rank, residual).
    """
    b = np.asarray(b)
    if reg.kind == "none":
        smin = svd.s[-1] if len(svd.s) else 0.0
        if smin <= svd.s[0] * 1e-14:
            raise SingularSystem("unregularized solve of a singular system",
                                 condition=np.inf)
        x = svd.vh.conj().T @ (svd.project(b) / svd.s)
        info = {"alpha": 0.0, "rank": len(svd.s)}
    elif reg.kind == "tikhonov":
        if reg.alpha is not None:
            alpha = reg.alpha
        else:
            if delta_abs is None:
                delta_abs = reg.noise_level * float(np.linalg.norm(b))
            alpha = discrepancy_alpha(svd, b, delta_abs, reg.safety)
        x = tikhonov_solve(svd, b, alpha)
        info = {"alpha": float(alpha)}
    elif reg.kind == "cutoff":
        if reg.tau is not None:
            x = cutoff_solve(svd, b, tau_rel=reg.tau)
            info = {"rank": int(np.sum(svd.s >= reg.tau * svd.s[0]))}
        else:
            if delta_abs is None:
                delta_abs = reg.noise_level * float(np.linalg.norm(b))
            thr = reg.safety * delta_abs
            x = cutoff_solve(svd, b, tau_abs=thr)
            info = {"rank": int(np.sum(svd.s >= thr))}
    else:
        raise ValueError(f"unknown strategy kind {reg.kind!r}")
    info["residual"] = float(np.linalg.norm((svd.u * svd.s) @ (svd.vh @ x) - b))
    return x, info


def perturb_matrix(a, delta, seed):
    """Entrywise multiplicative noise ``A (1 + delta E)``.

    ``E`` has independent uniform[-1, 1] entries recentered to exact zero
    mean and scaled to unit spectral norm.  Deterministic for a fixed seed.
    """
    a = np.asarray(a)
    if delta < 0:
        raise ValueError("noise level must be nonnegative")
    if delta == 0:
        return a.copy()
    rng = np.random.Generator(np.random.Philox(seed))
    e = rng.uniform(-1.0, 1.0, size=a.shape)
    e -= e.mean()
    e /= np.linalg.norm(e, 2)
    return a * (1.0 + delta * e)


def perturb_vector(g, delta, seed):
    """Entrywise multiplicative noise ``g (1 + delta e)`` with recentered
    uniform[-1, 1] entries."""
    g = np.asarray(g)
    if delta < 0:
        raise ValueError("noise level must be nonnegative")
    if delta == 0:
        return g.copy()
    rng = np.random.Generator(np.random.Philox(seed))
    e = rng.uniform(-1.0, 1.0, size=g.shape)
    e -= e.mean()
    return g * (1.0 + delta * e)


def expected_noise_norm(g, delta):
    """Expected magnitude of the vector noise model, ``delta |g| / sqrt(3)``."""
    return delta * float(np.linalg.norm(g)) / np.sqrt(3.0)
