"""Hot orbit loops (numba).

All kernels track a unit vector in R^2 under the SL(2,R) conjugates of the
SU(1,1) steps and accumulate two sums per orbit:

* the projective angle lift, split as ``-drift + delta`` per step, with the
  known drift removed exactly and the residual ``delta`` wrapped into
  ``(-wrap/2, wrap/2]``.  For a one-step transfer matrix the residual is the
  displacement of a positive-definite factor, bounded by ``arcsin|alpha| <
  pi/2``, so ``wrap = pi`` is exact and the wrap also cancels the antipodal
  sign noise of collapsed directions in hyperbolic regions;
* the log of the per-step growth factor (telescopes to the Lyapunov sum).

The raw rotation value returned is ``drift/(2*pi) - delta_sum/(2*pi*n)``,
already on the monotone branch in ``theta``; callers reduce mod 1.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_PI = np.pi


@njit(cache=True, inline="always")
def _advance(v1, v2, a, b):
    """Apply the Cayley conjugate of [[a, b], [conj b, conj a]] to (v1, v2)."""
    m11 = a.real + b.real
    m12 = a.imag - b.imag
    m21 = -(a.imag + b.imag)
    m22 = a.real - b.real
    w1 = m11 * v1 + m12 * v2
    w2 = m21 * v1 + m22 * v2
    nw = np.sqrt(w1 * w1 + w2 * w2)
    w1 /= nw
    w2 /= nw
    dpsi = np.arctan2(v1 * w2 - v2 * w1, v1 * w1 + v2 * w2)
    return w1, w2, dpsi, np.log(nw)


@njit(cache=True, inline="always")
def _wrap(x, period):
    return x - period * np.floor(x / period + 0.5)


@njit(cache=True)
def orbit_alpha(alphas, theta, wrap):
    """Szego orbit over a precomputed coefficient sequence at one theta.

    Returns (rot_raw, rot_raw_half, le, le_half).
    """
    n = alphas.shape[0]
    half = 0.5 * (theta % (2.0 * _PI))
    ehr = np.cos(half)
    ehi = np.sin(half)
    v1, v2 = 0.5403023058681398, 0.8414709848078965  # generic direction
    dsum = 0.0
    lsum = 0.0
    dsum_h = 0.0
    lsum_h = 0.0
    nh = n // 2
    for i in range(n):
        al = alphas[i]
        inv = 1.0 / np.sqrt(1.0 - (al.real * al.real + al.imag * al.imag))
        a = complex(ehr, ehi) * inv
        b = -np.conj(al) * complex(ehr, -ehi) * inv
        v1, v2, dpsi, lg = _advance(v1, v2, a, b)
        dsum += _wrap(dpsi + half, wrap)
        lsum += lg
        if i == nh - 1:
            dsum_h = dsum
            lsum_h = lsum
    rot = half / (2.0 * _PI) - dsum / (2.0 * _PI * n)
    rot_h = half / (2.0 * _PI) - dsum_h / (2.0 * _PI * max(nh, 1))
    return rot, rot_h, lsum / n, lsum_h / max(nh, 1)


@njit(cache=True, parallel=True)
def orbit_alpha_grid(alphas, thetas, wrap):
    """orbit_alpha over a theta grid; returns (rot_raw[:], le[:])."""
    m = thetas.shape[0]
    rot = np.empty(m)
    le = np.empty(m)
    for j in prange(m):
        r, _, l, _ = orbit_alpha(alphas, thetas[j], wrap)
        rot[j] = r
        le[j] = l
    return rot, le


@njit(cache=True)
def orbit_two_step(hx, hp, lam1, lam2, delta, theta, wrap):
    """Double-step orbit from the closed-form two-step matrix.

    ``hx[i] = h(x + 2*i*omega)`` and ``hp[i] = h(x + (2*i+1)*omega)``.
    Drift per step is ``theta``; with ``lam1^2 + lam2^2 < 1`` the residual
    stays below pi/2 and ``wrap = pi`` is exact.
    """
    n = hx.shape[0]
    th = theta % (2.0 * _PI)
    pref = 1.0 / np.sqrt((1.0 - lam1 * lam1) * (1.0 - lam2 * lam2))
    eth = complex(np.cos(th), np.sin(th))
    v1, v2 = 0.5403023058681398, 0.8414709848078965
    dsum = 0.0
    lsum = 0.0
    dsum_h = 0.0
    lsum_h = 0.0
    nh = n // 2
    for i in range(n):
        dh = delta * (hp[i] - hx[i])
        a = pref * (eth + lam1 * lam2 * complex(np.cos(dh), np.sin(dh)))
        p1 = th + delta * hx[i]
        p2 = delta * hp[i]
        b = pref * (-lam1 * complex(np.cos(p1), -np.sin(p1))
                    - lam2 * complex(np.cos(p2), -np.sin(p2)))
        v1, v2, dpsi, lg = _advance(v1, v2, a, b)
        dsum += _wrap(dpsi + th, wrap)
        lsum += lg
        if i == nh - 1:
            dsum_h = dsum
            lsum_h = lsum
    rot = th / (2.0 * _PI) - dsum / (2.0 * _PI * n)
    rot_h = th / (2.0 * _PI) - dsum_h / (2.0 * _PI * max(nh, 1))
    return rot, rot_h, lsum / n, lsum_h / max(nh, 1)


@njit(cache=True)
def orbit_sequence(a_arr, b_arr):
    """Orbit over an explicit SU(1,1) sequence; no drift is removed.

    Valid when every step moves directions by less than a half turn, which
    holds for steps of moderate norm; plateaus with negative eigenvalues can
    pick up antipodal sign noise here, so prefer the drift-split kernels for
    transfer-matrix work.  Returns (rot_raw, rot_raw_half, le, le_half).
    """
    n = a_arr.shape[0]
    v1, v2 = 0.5403023058681398, 0.8414709848078965
    dsum = 0.0
    lsum = 0.0
    dsum_h = 0.0
    lsum_h = 0.0
    nh = n // 2
    for i in range(n):
        v1, v2, dpsi, lg = _advance(v1, v2, a_arr[i], b_arr[i])
        dsum += dpsi
        lsum += lg
        if i == nh - 1:
            dsum_h = dsum
            lsum_h = lsum
    rot = -dsum / (2.0 * _PI * n)
    rot_h = -dsum_h / (2.0 * _PI * max(nh, 1))
    return rot, rot_h, lsum / n, lsum_h / max(nh, 1)
