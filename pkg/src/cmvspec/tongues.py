"""Resonance-tongue boundaries, opening slopes, and their closed-form predictions.

A tongue with label ``k`` is the locus in the ``(theta, delta)`` plane where
twice the rotation number locks to ``<k, omega> mod 1`` (plus ``1/2`` for the
half-shifted labels of the period-two model).  Boundaries are traced as level
sets of the rotation number, which is monotone in ``theta`` and admits
certified bisection; Lyapunov thresholds are noisy near the edges and are not
used here.

At coupling zero the first-order opening of the tongue is governed by three
averaged linearization coefficients ``a1 > 0`` (real), ``b1`` (real) and
``b2`` (complex): the two boundary slopes are the roots ``(-b1 +/- |b2|)/a1``
and the opening is transversal exactly when ``b2 != 0``, which happens exactly
when the ``k``-th Fourier coefficient of the sampling phase is nonzero.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cocycle import (CocycleError, SU11Generator, _diag_params,
                      constant_step_generator, szego_step)
from .dynamics import BracketError, rotation_bisect, rotation_number_model
from .model import PERIOD_TWO, FourierPoly

TWO_PI = 2.0 * math.pi


class TongueError(ValueError):
    pass


def _pair_frac(k, omega) -> float:
    om = np.atleast_1d(np.asarray(getattr(omega, "vector", omega), dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if k.shape != om.shape:
        raise TongueError(f"label length {k.shape} != frequency dimension {om.shape}")
    return float(np.dot(k, om)) % 1.0


def tip_theta(k, omega, lam: float) -> float:
    """Spectral-parameter tip of the label-``k`` tongue at coupling zero.

    The rotation value attained in the (possibly collapsed) gap is
    ``L = frac(<k, omega>)/2 in [0, 1/2)``; inverting the constant-step
    eigenvalue argument gives
    ``theta = 2*arccos(sqrt(1-lam^2) * cos(2*pi*L))``.
    The ``-k`` tongue tips at the mirror point ``2*pi - theta``.
    """
    ell = _pair_frac(k, omega) / 2.0
    c = math.sqrt(1.0 - lam ** 2) * math.cos(TWO_PI * ell)
    return 2.0 * math.acos(max(-1.0, min(1.0, c)))


def tip_theta_p2(k, omega, lam1: float, lam2: float, half_shift: bool = False) -> float:
    """Tip for the period-two model, from the double-step eigenvalue formula.

    The double-step rotation value at the tip is
    ``r = frac(<k, omega> + 1/2*half_shift)``; the tip solves
    ``cos(theta) = sqrt((1-lam1^2)(1-lam2^2)) * cos(2*pi*r) - lam1*lam2`` with
    the branch ``theta in (0, pi)`` for ``r <= 1/2`` and the mirror branch
    otherwise.
    """
    r = (_pair_frac(k, omega) + (0.5 if half_shift else 0.0)) % 1.0
    c = math.sqrt((1.0 - lam1 ** 2) * (1.0 - lam2 ** 2)) * math.cos(TWO_PI * r) \
        - lam1 * lam2
    theta = math.acos(max(-1.0, min(1.0, c)))
    return theta if r <= 0.5 else TWO_PI - theta


@dataclass(frozen=True)
class TongueTrace:
    """Sampled boundary curves ``theta_k^-(delta), theta_k^+(delta)``."""

    k: tuple
    half_shift: bool
    deltas: np.ndarray
    theta_minus: np.ndarray
    theta_plus: np.ndarray
    width: np.ndarray
    failures: list = field(default_factory=list)
    n_iter: int = 0
    refine_tol: float = 0.0

    def ok_fraction(self) -> float:
        return 1.0 - len(self.failures) / max(len(self.deltas), 1)


def _bracket(rot2, target: float, seed: float, step0: float, side: str,
             max_half_width: float = 1.5, clearance: float = 1e-4,
             band: float = 1e-5):
    """Expand around a seed until the raw level set is straddled.

    The outer endpoint must clear the target by ``clearance`` (above the
    estimator noise), otherwise it may still sit on the locked plateau and
    the subsequent bisection would converge to noise.  The inner endpoint
    starts at the seed but may itself lie outside the locked region once the
    boundary has moved with the coupling, so it is walked across the target
    first (within ``band`` counts as on-plateau).
    """
    w = step0
    if side == "lower":
        hi = seed
        while w <= max_half_width and rot2(hi) < target - band:
            hi += w
            w *= 2.0
        w = step0
        while w <= max_half_width:
            lo = hi - w
            if rot2(lo) < target - clearance:
                return lo, hi
            w *= 2.0
    else:
        lo = seed
        while w <= max_half_width and rot2(lo) > target + band:
            lo -= w
            w *= 2.0
        w = step0
        while w <= max_half_width:
            hi = lo + w
            if rot2(hi) > target + clearance:
                return lo, hi
            w *= 2.0
    raise BracketError(f"no bracket for target {target} around theta={seed} ({side})")


def trace_tongue(model_family, k, delta_max: float, steps: int,
                 refine_tol: float = 1e-5, n_iter: int = 200_000,
                 half_shift: bool = False) -> TongueTrace:
    """Trace both boundaries of a tongue on a forward coupling grid from zero.

    ``model_family`` maps a coupling value to a model (typically
    ``model.with_delta``).  For each coupling, ``theta_-`` is the largest
    theta with ``2*rot < target`` and ``theta_+`` the smallest with
    ``2*rot > target``, located by monotone bisection seeded at the tip.
    Bracket failures are recorded per coupling and tracing continues.
    """
    if delta_max < 0 or steps < 2:
        raise TongueError("need delta_max >= 0 and at least two grid points")
    if delta_max > 0.5:
        warnings.warn(f"delta_max={delta_max} is outside the perturbative regime")
    k = tuple(np.atleast_1d(k).astype(int))
    model0 = model_family(0.0)
    if model0.kind == PERIOD_TWO:
        target = (_pair_frac(k, model0.omega) + (0.5 if half_shift else 0.0)) % 1.0
        seed = tip_theta_p2(k, model0.omega, model0.lam1, model0.lam2, half_shift)
    else:
        if half_shift:
            raise TongueError("half-shifted labels only exist for the period-two model")
        target = _pair_frac(k, model0.omega)
        seed = tip_theta(k, model0.omega, model0.lam)
    if all(i == 0 for i in k) and not half_shift:
        warnings.warn("k=0 gap is open at coupling zero; tracing its boundaries anyway")
        return _trace_zero_label(model_family, k, delta_max, steps, refine_tol, n_iter)

    deltas = np.linspace(0.0, delta_max, steps)
    th_lo = np.full(steps, np.nan)
    th_hi = np.full(steps, np.nan)
    failures = []
    step0 = max(8.0 * refine_tol, 1e-3)
    band = 10.0 / n_iter + 1e-6
    clearance = max(1e-4, 4.0 * band)
    for i, d in enumerate(deltas):
        model = model_family(float(d))

        def rot2(theta):
            return 2.0 * rotation_number_model(model, theta, n_iter).raw

        try:
            lo, hi = _bracket(rot2, target, seed, step0, "lower",
                              clearance=clearance, band=band)
            th_lo[i] = rotation_bisect(rot2, target, lo, hi, refine_tol,
                                       side="lower", plateau_band=band)
            lo, hi = _bracket(rot2, target, seed, step0, "upper",
                              clearance=clearance, band=band)
            th_hi[i] = rotation_bisect(rot2, target, lo, hi, refine_tol,
                                       side="upper", plateau_band=band)
        except BracketError as exc:
            failures.append((i, str(exc)))
            continue
    width = np.clip(th_hi - th_lo, 0.0, None)
    return TongueTrace(k, half_shift, deltas, th_lo, th_hi, width,
                       failures, n_iter, refine_tol)


def _trace_zero_label(model_family, k, delta_max, steps, refine_tol, n_iter):
    """The k = 0 gap wraps through the seam; trace its two edges separately."""
    deltas = np.linspace(0.0, delta_max, steps)
    th_lo = np.full(steps, np.nan)
    th_hi = np.full(steps, np.nan)
    failures = []
    model0 = model_family(0.0)
    if model0.kind == PERIOD_TWO:
        tip_hi = tip_theta_p2(k, model0.omega, model0.lam1, model0.lam2)
    else:
        tip_hi = tip_theta(k, model0.omega, model0.lam)
    step0 = max(8.0 * refine_tol, 1e-3)
    band = 10.0 / n_iter + 1e-6
    clearance = max(1e-4, 4.0 * band)
    for i, d in enumerate(deltas):
        model = model_family(float(d))

        def rot2(theta):
            return 2.0 * rotation_number_model(model, theta, n_iter).raw

        try:
            lo, hi = _bracket(rot2, 0.0, tip_hi, step0, "upper",
                              clearance=clearance, band=band)
            th_hi[i] = rotation_bisect(rot2, 0.0, lo, hi, refine_tol,
                                       side="upper", plateau_band=band)
            # the raw branch of 2*rot runs from 0 to 1 over (0, 2*pi)
            lo, hi = _bracket(rot2, 1.0, TWO_PI - tip_hi, step0, "lower",
                              clearance=clearance, band=band)
            # report the wrapped lower edge as a negative angle, arc mod 2*pi
            th_lo[i] = rotation_bisect(rot2, 1.0, lo, hi, refine_tol,
                                       side="lower", plateau_band=band) - TWO_PI
        except BracketError as exc:
            failures.append((i, str(exc)))
    width = np.clip(th_hi - th_lo, 0.0, None)
    return TongueTrace(tuple(k), False, deltas, th_lo, th_hi, width,
                       failures, n_iter, refine_tol)


def measure_slopes(trace: TongueTrace, fit_fraction: float = 0.5):
    """Least-squares slope of ``width ~ s * delta`` on the initial grid segment.

    Returns ``(s, residual)`` with the RMS fit residual normalized by the
    largest width in the window.  Requires at least five usable points.
    """
    dmax = trace.deltas[-1]
    mask = (trace.deltas <= fit_fraction * dmax + 1e-15) & np.isfinite(trace.width)
    d = trace.deltas[mask]
    w = trace.width[mask]
    if d.size < 5:
        raise TongueError(f"only {d.size} points in the fit window; need >= 5")
    denom = float(np.dot(d, d))
    if denom == 0.0:
        raise TongueError("fit window is degenerate (all couplings zero)")
    s = float(np.dot(d, w)) / denom
    resid = float(np.sqrt(np.mean((w - s * d) ** 2)))
    top = float(np.max(np.abs(w), initial=0.0))
    return s, (resid / top if top > 0 else 0.0)


@dataclass(frozen=True)
class SlopePrediction:
    """First-order tongue data at coupling zero."""

    a1: float
    b1: float
    b2: complex
    slope_minus: float
    slope_plus: float
    transversal: bool

    @property
    def slope_difference(self) -> float:
        return self.slope_plus - self.slope_minus


def predicted_slopes_qp(lam: float, theta0: float, k, h: FourierPoly) -> SlopePrediction:
    """Closed-form opening slopes of the quasi-periodic tongue with label ``k``.

    ``theta0`` must be the tip angle (see :func:`tip_theta`).  Diagonalizing
    the elliptic constant step at the tip yields angles ``(theta_t, phi)``;
    the averaged linearization coefficients are then

    * ``a1 = 1 / (2 cos 2*theta_t)``,
    * ``b1 = mean(h) * lam (sin 2*theta_t cos(theta0 + 2*phi) - lam)
              / ((1-lam^2) cos 2*theta_t)``,
    * ``b2 = i lam (e^{i(theta0+4*phi)} sin^2 theta_t + e^{-i theta0} cos^2 theta_t
              - lam e^{2i*phi} sin 2*theta_t) hk / ((1-lam^2) cos 2*theta_t)``,

    with ``hk`` the ``k``-th Fourier coefficient of ``h``.  The oscillating
    coefficient ``a2`` averages to zero for ``k != 0``, so the boundary slopes
    are ``(-b1 +/- |b2|)/a1`` and transversality is exactly ``hk != 0``.
    """
    k = tuple(np.atleast_1d(k).astype(int))
    if all(i == 0 for i in k):
        raise TongueError("label k=0 has no closed tongue at coupling zero")
    if not (0.0 < lam < 1.0):
        raise TongueError(f"lambda={lam} outside (0, 1)")
    step = szego_step(lam, theta0)
    gen = constant_step_generator(step)
    theta_t, phi, _ = _diag_params(gen)
    c2 = math.cos(2.0 * theta_t)
    if abs(c2) < 1e-8:
        raise TongueError("tip diagonalization degenerates: cos(2*theta_t) ~ 0")
    hk = h.coeff(k)
    a1 = 1.0 / (2.0 * c2)
    b1 = h.mean * lam * (math.sin(2.0 * theta_t) * math.cos(theta0 + 2.0 * phi) - lam) \
        / ((1.0 - lam ** 2) * c2)
    inner = (cmath.exp(1j * (theta0 + 4.0 * phi)) * math.sin(theta_t) ** 2
             + cmath.exp(-1j * theta0) * math.cos(theta_t) ** 2
             - lam * cmath.exp(2j * phi) * math.sin(2.0 * theta_t))
    b2 = 1j * lam * inner * hk / ((1.0 - lam ** 2) * c2)
    mag = abs(b2)
    return SlopePrediction(a1=a1, b1=b1, b2=b2,
                           slope_minus=(-b1 - mag) / a1,
                           slope_plus=(-b1 + mag) / a1,
                           transversal=mag > 1e-15)


@dataclass(frozen=True)
class P2Coefficients:
    """k-th Fourier mode of the period-two linearization at coupling zero."""

    f11: complex
    f12: complex
    b2: complex
    small_cond: bool


def p2_coefficients(lam1: float, lam2: float, theta0: float, k, h: FourierPoly,
                    omega) -> P2Coefficients:
    """Averaged period-two linearization data at the tip ``theta0``.

    ``f11`` and ``f12`` are the mode coefficients defined through
    ``mean(e^{-2*pi*i<k,x>} f_1j) = f_1j_tilde * hk``; the phase
    ``eps = e^{2*pi*i<k,omega>}`` enters through the shifted sample
    ``h(x + omega)``, which is why the frequency is required here.  At
    ``lam2 = 0`` they reduce to ``-lam1^2`` and ``lam1 e^{-2i theta0}``.
    ``small_cond`` reports the contraction condition ``|f11| < |f12|`` under
    which a nonzero ``hk`` forces ``b2 != 0``.

    Only the principal tip branch ``theta0 in (0, pi)`` is supported; the
    mirror tip carries the complex-conjugate data.
    """
    k = tuple(np.atleast_1d(k).astype(int))
    if not (0.0 < theta0 < math.pi):
        raise TongueError("theta0 must lie in (0, pi); use conjugation for the mirror tip")
    eps = cmath.exp(2j * math.pi * _pair_frac(k, omega))
    e1 = cmath.exp(-1j * theta0)
    e2 = cmath.exp(-2j * theta0)
    f11 = (lam1 ** 2 * lam2 ** 2 * (eps - 1.0) - lam1 ** 2 - lam2 ** 2 * eps
           - 2.0 * lam1 * lam2 * math.cos(theta0))
    f12 = (lam1 * e2 + 2.0 * lam1 ** 2 * lam2 * e1 + lam1 * lam2 ** 2
           + lam2 * (1.0 - lam1 ** 2) * e1 * eps)
    if abs(f12) < 1e-14:
        raise TongueError("degenerate mode coefficient f12 = 0; no slope statement")
    # diagonalize the constant double step at the tip
    pref = 1.0 / math.sqrt((1.0 - lam1 ** 2) * (1.0 - lam2 ** 2))
    a_t = pref * (cmath.exp(1j * theta0) + lam1 * lam2)
    b_t = pref * (-lam1 * cmath.exp(-1j * theta0) - lam2)
    gen = SU11Generator(a_t.imag, b_t)
    if gen.det() <= 0:
        raise CocycleError("tip is not elliptic for the double step")
    theta_t, phi, _ = _diag_params(gen)
    c2 = math.cos(2.0 * theta_t)
    hk = h.coeff(k)
    b2 = 1j * (2.0 * cmath.exp(2j * phi) * math.sin(theta_t) * math.cos(theta_t) * f11
               + cmath.exp(4j * phi) * math.sin(theta_t) ** 2 * np.conj(f12)
               + math.cos(theta_t) ** 2 * f12) * hk / ((1.0 - lam2 ** 2) * c2)
    return P2Coefficients(f11=f11, f12=f12, b2=b2,
                          small_cond=abs(f11) < abs(f12))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_tongue_csv(path, trace: TongueTrace, metadata: dict):
    import json

    lines = ["# " + json.dumps(metadata, sort_keys=True),
             "delta,theta_minus,theta_plus,width"]
    for d, lo, hi, w in zip(trace.deltas, trace.theta_minus, trace.theta_plus,
                            trace.width):
        lines.append(",".join([_fmt(d), _fmt(lo), _fmt(hi), _fmt(w)]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
