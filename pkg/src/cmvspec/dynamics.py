"""Fibered rotation numbers and Lyapunov exponents of transfer-matrix cocycles.

Convention contract: the rotation number is calibrated so that for a constant
coefficient at coupling zero the estimate equals ``arg(ev_plus)/(2*pi)`` with
``ev_plus`` the upper eigenvalue from :func:`cmvspec.cocycle.eigenvalues_qp_constant`.
Estimates carry a raw (lift) value on the branch that is monotone
non-decreasing in ``theta`` over ``(0, 2*pi)``; the published ``value`` field
is the raw value reduced mod 1 into ``[0, 1)``.  Circle comparisons use
``dist(a, b) = min(|a-b|, 1-|a-b|)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import PERIOD_TWO, ModelSpec

LE_NOISE_FLOOR = -1e-4


class BracketError(ValueError):
    """Raised when a bisection bracket does not straddle its target."""


def circle_dist(a: float, b: float) -> float:
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


@dataclass(frozen=True)
class RotationEstimate:
    """Rotation number estimate in revolutions.

    ``value`` is in ``[0, 1)``; ``raw`` is the un-reduced lift value used for
    monotone bracketing; ``residual`` is an O(1/n) error proxy from comparing
    the half-orbit and full-orbit estimates.
    """

    value: float
    n_iter: int
    residual: float
    raw: float | None = None

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if self.raw is None:
            object.__setattr__(self, "raw", self.value)
        object.__setattr__(self, "value", self.raw % 1.0)


@dataclass(frozen=True)
class LyapunovEstimate:
    value: float
    n_iter: int

    def __post_init__(self):
        # determinant-one cocycles have nonnegative exponents; the estimator
        # undershoots by at most log(condition)/n, hence the n-aware floor
        floor = -max(-LE_NOISE_FLOOR, 20.0 / self.n_iter)
        if self.value < floor:
            raise ValueError(
                f"Lyapunov estimate {self.value} below the {floor} noise floor; "
                "renormalization is broken or the input is not unimodular"
            )


def _estimates(rot, rot_h, le, le_h, n) -> tuple[RotationEstimate, LyapunovEstimate]:
    residual = abs(rot - rot_h) + 2.0 / n
    return (RotationEstimate(rot % 1.0, n, residual, raw=rot),
            LyapunovEstimate(le, n))


def _alpha_orbit(model: ModelSpec, n_iter: int, x0=None) -> np.ndarray:
    return np.ascontiguousarray(model.alpha_sequence(n_iter, x0=x0))


MIN_N_ITER = 1000


def _check_n(n_iter: int):
    if n_iter < MIN_N_ITER:
        raise ValueError(f"n_iter too small: {n_iter} < {MIN_N_ITER}; "
                         "the estimators carry O(1/n) error")


def orbit_estimates_model(model: ModelSpec, theta: float, n_iter: int, x0=None,
                          _cache=[]):
    """Rotation and Lyapunov estimates from one shared orbit pass (fast path)."""
    _check_n(n_iter)
    x0key = None if x0 is None else tuple(np.atleast_1d(x0))
    if _cache and _cache[0][0] is model and _cache[0][1] == (n_iter, x0key):
        alphas = _cache[0][2]
    else:
        alphas = _alpha_orbit(model, n_iter, x0=x0)
        _cache.clear()  # keep exactly one orbit alive; the model pin keeps ids valid
        _cache.append((model, (n_iter, x0key), alphas))
    rot, rot_h, le, le_h = _kernels.orbit_alpha(alphas, float(theta), math.pi)
    return _estimates(rot, rot_h, le, le_h, n_iter)


def rotation_number_model(model: ModelSpec, theta: float, n_iter: int, x0=None) -> RotationEstimate:
    return orbit_estimates_model(model, theta, n_iter, x0=x0)[0]


def lyapunov_model(model: ModelSpec, theta: float, n_iter: int, x0=None) -> LyapunovEstimate:
    return orbit_estimates_model(model, theta, n_iter, x0=x0)[1]


def scan_rotation_lyapunov(model: ModelSpec, thetas, n_iter: int, x0=None):
    """Per-theta (rot_raw, le) arrays over a grid, sharing one coefficient orbit."""
    thetas = np.ascontiguousarray(thetas, dtype=float)
    alphas = _alpha_orbit(model, n_iter, x0=x0)
    return _kernels.orbit_alpha_grid(alphas, thetas, math.pi)


def two_step_wrap(lam1: float, lam2: float) -> float:
    """Residual wrap period for the double-step kernel.

    ``pi`` is exact when ``lam1^2 + lam2^2 < 1`` (residual displacement below
    a quarter turn); otherwise fall back to ``2*pi``, which loses plateau
    robustness only at half-integer rotation values.
    """
    return math.pi if lam1 ** 2 + lam2 ** 2 < 1.0 else 2.0 * math.pi


def two_step_estimates(model: ModelSpec, theta: float, n_iter: int, x0=None):
    """Rotation/Lyapunov of the closed-form double step over the doubled frequency.

    Independent of the one-step path (no doubling identity is used), so the
    relation ``rot_2step = 2 * rot_1step mod 1`` is a genuine cross-check.
    """
    if model.kind != PERIOD_TWO:
        raise ValueError("two_step_estimates requires a PeriodTwo model")
    _check_n(n_iter)
    base = model.base_point if x0 is None else np.atleast_1d(np.asarray(x0, float))
    ns = np.arange(n_iter)
    om = model.omega.vector
    x_even = (base[None, :] + (2.0 * ns)[:, None] * om[None, :]) % 1.0
    x_odd = (base[None, :] + (2.0 * ns + 1.0)[:, None] * om[None, :]) % 1.0
    hx = np.ascontiguousarray(model.h.sample(x_even))
    hp = np.ascontiguousarray(model.h.sample(x_odd))
    rot, rot_h, le, le_h = _kernels.orbit_two_step(
        hx, hp, model.lam1, model.lam2, model.delta, float(theta),
        two_step_wrap(model.lam1, model.lam2))
    return _estimates(rot, rot_h, le, le_h, n_iter)


def _sequence_arrays(step_fn, x0, omega, n_iter):
    x = np.atleast_1d(np.asarray(x0, dtype=float)) % 1.0
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    a = np.empty(n_iter, dtype=complex)
    b = np.empty(n_iter, dtype=complex)
    for i in range(n_iter):
        m = step_fn(x)
        a[i] = m.a
        b[i] = m.b
        x = (x + om) % 1.0
    return a, b


def orbit_estimates(step_fn, x0, omega, n_iter: int):
    """Generic-path estimates for an arbitrary SU(1,1) step function.

    ``step_fn`` maps a torus point to an :class:`cmvspec.cocycle.SU11Matrix`.
    The step must be homotopic to the identity with per-step projective
    displacement under a half turn (true for Szego steps on the fixed
    half-angle branch).  O(n) Python-call cost; use the model fast paths for
    long orbits.
    """
    _check_n(n_iter)
    a, b = _sequence_arrays(step_fn, x0, omega, n_iter)
    rot, rot_h, le, le_h = _kernels.orbit_sequence(a, b)
    return _estimates(rot, rot_h, le, le_h, n_iter)


def rotation_number(step_fn, x0, omega, n_iter: int) -> RotationEstimate:
    return orbit_estimates(step_fn, x0, omega, n_iter)[0]


def lyapunov(step_fn, x0, omega, n_iter: int) -> LyapunovEstimate:
    return orbit_estimates(step_fn, x0, omega, n_iter)[1]


def rotation_bisect(rot2_fn, target: float, theta_lo: float, theta_hi: float,
                    tol_theta: float, side: str = "lower",
                    slack: float = 1e-4, plateau_band: float = 0.0) -> float:
    """Bisection for the crossing of ``2*rot(theta)`` through ``target``.

    ``rot2_fn`` must return raw (lift-branch) values of ``2 * rot`` and be
    monotone non-decreasing in ``theta`` up to estimator noise; ``slack``
    absorbs that noise when validating the bracket.  On a locked plateau the
    crossing is a whole interval: ``side='lower'`` converges to its lower
    endpoint (largest theta with ``2*rot < target``), ``side='upper'`` to the
    upper one.

    ``plateau_band`` matters when locating gap edges: the estimator's locked
    value differs from the exact target by an O(1/n) bias, so points within
    the band of the target must count as on-plateau, otherwise the bisection
    chases that bias into the gap interior.  Callers working at orbit length
    ``n`` should pass roughly ``10/n``.
    """
    if side not in ("lower", "upper"):
        raise ValueError("side must be 'lower' or 'upper'")
    if theta_hi < theta_lo:
        raise BracketError(f"empty bracket [{theta_lo}, {theta_hi}]")
    slack = max(slack, 2.0 * plateau_band)
    f_lo = rot2_fn(theta_lo)
    if theta_hi == theta_lo:
        if abs(f_lo - target) <= slack:
            return theta_lo
        raise BracketError(f"degenerate bracket with 2*rot={f_lo}, target={target}")
    f_hi = rot2_fn(theta_hi)
    if f_lo > target + slack or f_hi < target - slack:
        raise BracketError(
            f"bracket does not straddle target: 2*rot in [{f_lo}, {f_hi}], target {target}")
    lo, hi = theta_lo, theta_hi
    while hi - lo > tol_theta:
        mid = 0.5 * (lo + hi)
        f = rot2_fn(mid)
        if side == "lower":
            if f < target - plateau_band:
                lo = mid
            else:
                hi = mid
        else:
            if f > target + plateau_band:
                hi = mid
            else:
                lo = mid
    return 0.5 * (lo + hi)
