"""Coined quantum walks on the integer lattice and their CMV conjugates.

Basis ordering interleaves spin with site: index ``2n`` is spin-up at site
``n`` and ``2n+1`` is spin-down at site ``n``.  The stored walk matrix ``W``
follows the transition-matrix convention (row = source state, column =
target state), so the one-step action on amplitude vectors is ``W.T @ psi``;
the update rules are

    up(n)   ->  c11(n) * up(n+1)  +  c21(n) * dn(n-1),
    dn(n)   ->  c12(n) * up(n+1)  +  c22(n) * dn(n-1).

Finite windows are decoupled by replacing the two end coins with the
reflecting coin ``[[0, -1], [1, 0]]``, whose unimodular off-diagonal entries
become the modulus-one boundary Verblunsky coefficients of the CMV block; the
invariant subspace runs from spin-down at the first site to spin-up at the
last.  With the diagonal phase matrix built from the coin-argument recursion
(anchored at one for the pair of phases below index zero), the conjugated
walk equals the CMV block with vanishing odd coefficients exactly, including
at the boundary.  This particular reflecting coin keeps the boundary phase
contribution trivial, so interior coefficients are unaffected by the cut.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import Frequency, FourierPoly, eval_h, period_two_model
from .spectrum import detect_gaps, extended_cmv_block, half_cell_grid, scan

_UNITARY_TOL = 1e-12


class WalkError(ValueError):
    pass


class CoinStructureError(WalkError):
    """Coin outside the admissible unitary class."""


@dataclass(frozen=True)
class Coin:
    """A 2x2 unitary coin."""

    c11: complex
    c12: complex
    c21: complex
    c22: complex

    def __post_init__(self):
        u = self.array
        if np.max(np.abs(u.conj().T @ u - np.eye(2))) > _UNITARY_TOL:
            raise CoinStructureError("coin matrix is not unitary")

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.c11, self.c12], [self.c21, self.c22]], dtype=complex)

    @property
    def symmetric(self) -> bool:
        """Entry symmetry ``c22 = conj(c11)``, ``c21 = -conj(c12)``.

        The unitary coins with conjugate-paired entries and determinant one;
        the naive pairing ``c21 = +conj(c12)`` admits no unitary matrices
        with both entries nonzero, so this is the workable symmetric class.
        """
        return (abs(self.c22 - np.conj(self.c11)) <= 1e-12
                and abs(self.c21 + np.conj(self.c12)) <= 1e-12)

    @classmethod
    def from_array(cls, m) -> "Coin":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def reflecting(cls) -> "Coin":
        return cls(0.0, -1.0, 1.0, 0.0)

    @classmethod
    def su2(cls, a: complex, b: complex) -> "Coin":
        n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
        a, b = complex(a) / n, complex(b) / n
        return cls(a, b, -np.conj(b), np.conj(a))

    @classmethod
    def phase_coin(cls, lam: float, phase: float) -> "Coin":
        """Symmetric coin with ``|c12| = lam`` whose CMV image is
        ``alpha = lam * exp(i * phase)``."""
        if not (0.0 <= lam < 1.0):
            raise WalkError(f"coin modulus {lam} outside [0, 1)")
        return cls.su2(math.sqrt(1.0 - lam ** 2), -lam * cmath.exp(1j * phase))


@dataclass(frozen=True)
class WalkWindow:
    """Decoupled finite walk on sites ``n_lo..n_hi`` (boundary coins reflecting)."""

    n_lo: int
    n_hi: int
    coins: tuple
    matrix: np.ndarray

    @property
    def lo(self) -> int:
        return 2 * self.n_lo + 1

    @property
    def hi(self) -> int:
        return 2 * self.n_hi

    @property
    def dim(self) -> int:
        return self.hi - self.lo + 1

    def coin_at(self, n: int) -> Coin:
        return self.coins[n - self.n_lo]

    def index_of(self, site: int, spin_up: bool) -> int:
        p = 2 * site + (0 if spin_up else 1)
        if not (self.lo <= p <= self.hi):
            raise WalkError(f"(site={site}, {'up' if spin_up else 'down'}) outside the window")
        return p - self.lo

    def basis_state(self, site: int, spin_up: bool = True) -> np.ndarray:
        psi = np.zeros(self.dim, dtype=complex)
        psi[self.index_of(site, spin_up)] = 1.0
        return psi

    def apply(self, state: np.ndarray) -> np.ndarray:
        """One time step of the walk operator (transpose of the stored matrix)."""
        return self.matrix.T @ state

    def unitarity_residual(self) -> float:
        u = self.matrix
        return float(np.max(np.abs(u.conj().T @ u - np.eye(self.dim))))


def build_walk(coins, window) -> WalkWindow:
    """Assemble the banded walk matrix on a decoupled window.

    ``coins`` supplies one coin per site of ``window = (n_lo, n_hi)``; the two
    end coins are replaced by the reflecting coin, which cuts the line.  The
    stored matrix follows the transition-matrix convention of the module
    docstring; its action on states (via ``apply``) matches
    :func:`step_state` entry by entry.
    """
    n_lo, n_hi = int(window[0]), int(window[1])
    nsites = n_hi - n_lo + 1
    if nsites < 3:
        raise WalkError("window must contain at least three sites")
    coins = [c if isinstance(c, Coin) else Coin.from_array(c) for c in coins]
    if len(coins) != nsites:
        raise WalkError(f"{len(coins)} coins for {nsites} sites")
    coins[0] = Coin.reflecting()
    coins[-1] = Coin.reflecting()
    lo, hi = 2 * n_lo + 1, 2 * n_hi
    dim = hi - lo + 1
    w = np.zeros((dim, dim), dtype=complex)

    def put(i, j, v):
        if lo <= i <= hi and lo <= j <= hi:
            w[i - lo, j - lo] = v

    for offset, coin in enumerate(coins):
        n = n_lo + offset
        put(2 * n, 2 * n + 2, coin.c11)
        put(2 * n, 2 * n - 1, coin.c21)
        put(2 * n + 1, 2 * n + 2, coin.c12)
        put(2 * n + 1, 2 * n - 1, coin.c22)
    ww = WalkWindow(n_lo, n_hi, tuple(coins), w)
    resid = ww.unitarity_residual()
    if resid > _UNITARY_TOL:
        raise WalkError(f"window matrix is not unitary: residual {resid}")
    return ww


def step_state(state: np.ndarray, window: WalkWindow) -> np.ndarray:
    """Apply the update rules once to an amplitude vector on the window block.

    The state must vanish at the two boundary half-sites (spin-down at the
    first site, spin-up at the last); amplitude there would bounce off the
    reflecting boundary coins and contaminate the evolution.
    """
    state = np.asarray(state, dtype=complex)
    if state.shape != (window.dim,):
        raise WalkError(f"state length {state.shape} != window dimension {window.dim}")
    if state[0] != 0.0 or state[-1] != 0.0:
        raise WalkError("state support touches the window boundary")
    out = np.zeros_like(state)
    lo = window.lo
    for n in range(window.n_lo, window.n_hi + 1):
        coin = window.coin_at(n)
        p_up, p_dn = 2 * n - lo, 2 * n + 1 - lo
        amp_up = state[p_up] if 0 <= p_up < window.dim else 0.0
        amp_dn = state[p_dn] if 0 <= p_dn < window.dim else 0.0
        if amp_up == 0.0 and amp_dn == 0.0:
            continue
        q_up, q_dn = 2 * (n + 1) - lo, 2 * (n - 1) + 1 - lo
        if 0 <= q_up < window.dim:
            out[q_up] += coin.c11 * amp_up + coin.c12 * amp_dn
        if 0 <= q_dn < window.dim:
            out[q_dn] += coin.c21 * amp_up + coin.c22 * amp_dn
    return out


@dataclass(frozen=True)
class CGMVData:
    """Phases and Verblunsky coefficients conjugating a walk window to CMV form."""

    n_lo: int
    n_hi: int
    lambdas: dict
    alphas: dict

    def __post_init__(self):
        for p, lam in self.lambdas.items():
            if abs(abs(lam) - 1.0) > 1e-14:
                raise WalkError(f"phase at index {p} is not unimodular")
        for j, al in self.alphas.items():
            if j % 2 == 1 and al != 0.0:
                raise WalkError(f"odd coefficient alpha_{j} must vanish")

    def phase_diagonal(self) -> np.ndarray:
        lo, hi = 2 * self.n_lo + 1, 2 * self.n_hi
        return np.diag([self.lambdas[p] for p in range(lo, hi + 1)])


def _coin_sigmas(coin: Coin, site: int) -> tuple[float, float]:
    """Arguments of the diagonal coin entries in [0, 2*pi).

    A reflecting boundary coin has no diagonal; there the pair is chosen to
    satisfy the off-diagonal phase identity, which keeps the conjugation exact
    up to the very edge of the block.
    """
    if abs(coin.c11) < 1e-14 or abs(coin.c22) < 1e-14:
        if abs(coin.c12) < 1e-14 or abs(coin.c21) < 1e-14:
            raise WalkError(f"coin at site {site} has a vanishing diagonal entry "
                            "and no unimodular off-diagonal; phases undefined")
        s = cmath.phase(-coin.c12 / np.conj(coin.c21)) % (2.0 * math.pi)
        return s, 0.0
    return (cmath.phase(coin.c11) % (2.0 * math.pi),
            cmath.phase(coin.c22) % (2.0 * math.pi))


def cgmv_map(window: WalkWindow) -> CGMVData:
    """Phase recursion and Verblunsky coefficients for a walk window.

    Interior coins need nonvanishing diagonal entries (their arguments drive
    the recursion ``lam_{2n+1} = e^{i s2_n} lam_{2n-1}``,
    ``lam_{2n+2} = e^{-i s1_n} lam_{2n}``); the error names the first site
    violating this.  Anchors are ``lam_{-1} = lam_0 = 1`` when the window
    covers index zero, else the lowest phase pair of the window.
    The coefficients are ``alpha_{2n} = (lam_{2n}/lam_{2n-1}) * conj(c21_n)``
    with vanishing odd entries.
    """
    n_lo, n_hi = window.n_lo, window.n_hi
    sig = {}
    for n in range(n_lo, n_hi + 1):
        coin = window.coin_at(n)
        if n_lo < n < n_hi and (abs(coin.c11) < 1e-14 or abs(coin.c22) < 1e-14):
            raise WalkError(f"interior coin at site {n} has a vanishing diagonal entry")
        sig[n] = _coin_sigmas(coin, n)

    lam = {}
    if n_lo <= 0 and n_hi >= 0:
        lam[-1] = 1.0 + 0.0j
        lam[0] = 1.0 + 0.0j
    else:
        lam[2 * n_lo - 1] = 1.0 + 0.0j
        lam[2 * n_lo] = 1.0 + 0.0j
    anchor = 0 if (-1 in lam) else n_lo
    for n in range(anchor, n_hi + 1):
        s1, s2 = sig.get(n, (0.0, 0.0))
        lam[2 * n + 1] = cmath.exp(1j * s2) * lam[2 * n - 1]
        lam[2 * n + 2] = cmath.exp(-1j * s1) * lam[2 * n]
    for n in range(anchor - 1, n_lo - 1, -1):
        s1, s2 = sig.get(n, (0.0, 0.0))
        lam[2 * n - 1] = cmath.exp(-1j * s2) * lam[2 * n + 1]
        lam[2 * n] = cmath.exp(1j * s1) * lam[2 * n + 2]

    alphas = {}
    for n in range(n_lo, n_hi + 1):
        coin = window.coin_at(n)
        alphas[2 * n] = (lam[2 * n] / lam[2 * n - 1]) * np.conj(coin.c21)
        if n < n_hi:
            alphas[2 * n + 1] = 0.0
    lam_block = {p: lam[p] for p in range(2 * n_lo - 1, 2 * n_hi + 1)}
    return CGMVData(n_lo, n_hi, lam_block, alphas)


def verify_cgmv(window: WalkWindow, band: int = 4) -> float:
    """Max-entry residual of the phase conjugation against the CMV block.

    The residual is taken over the interior (a band of the given width is
    dropped at each end, per the verification contract); with the boundary
    phase convention of :func:`cgmv_map` the full-block residual is at
    rounding level as well.
    """
    if window.dim < 2 * band + 2:
        raise WalkError(f"window dimension {window.dim} too small for band {band}")
    data = cgmv_map(window)
    cmv = extended_cmv_block(data.alphas, window.lo, window.hi)
    lam = data.phase_diagonal()
    resid = lam.conj().T @ window.matrix @ lam - cmv
    inner = resid[band:window.dim - band, band:window.dim - band]
    return float(np.max(np.abs(inner)))


def coin_sequence(lam: float, h: FourierPoly, omega, delta: float,
                  n_lo: int, n_hi: int, x0=None) -> list:
    """Site-sampled symmetric coins with CMV image ``lam * e^{i delta h(x + n w)}``."""
    om = omega if isinstance(omega, Frequency) else Frequency(np.atleast_1d(omega))
    base = np.zeros(om.dim) if x0 is None else np.atleast_1d(np.asarray(x0, float))
    coins = []
    for n in range(n_lo, n_hi + 1):
        phase = delta * eval_h(h, (base + n * om.vector) % 1.0)
        coins.append(Coin.phase_coin(lam, phase))
    return coins


def walk_spectrum(lam: float, h: FourierPoly, omega, delta: float,
                  n_points: int = 512, n_iter: int = 200_000,
                  x0=None, **detect_kwargs):
    """Spectral scan of the coined-walk operator via its CMV image.

    The walk with coin frequency ``omega`` maps to the period-two model with
    moduli ``(lam, 0)`` over the halved frequency ``omega/2`` (the coefficient
    at CMV index ``2m`` samples ``h(x + m*omega)``).  Returns
    ``(scan, gaps, metadata)``; half-shifted labels are enabled.
    """
    om = omega if isinstance(omega, Frequency) else Frequency(np.atleast_1d(omega))
    om_cmv = Frequency(np.atleast_1d(om.vector) / 2.0)
    model = period_two_model(lam, 0.0, h, om_cmv, delta=delta, x0=x0)
    sc = scan(model, half_cell_grid(n_points), n_iter)
    gaps = detect_gaps(sc, allow_half_shift=True, **detect_kwargs)
    meta = {"frequency_realignment": "omega_cmv = omega_walk / 2",
            "omega_walk": [float(v) for v in om.vector],
            "omega_cmv": [float(v) for v in om_cmv.vector]}
    return sc, gaps, meta
