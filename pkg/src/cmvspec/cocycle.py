"""2x2 cocycle algebra: SU(1,1) steps, SL(2,R) conjugates, elliptic diagonalization.

The transfer-matrix step for spectral parameter ``exp(i*theta)`` and
Verblunsky coefficient ``alpha`` is

    S(alpha, theta) = (exp(-i*theta/2) / sqrt(1 - |alpha|^2))
                      * [[exp(i*theta),              -conj(alpha)],
                         [-alpha*exp(i*theta),        1          ]],

an SU(1,1) matrix ``[[a, b], [conj(b), conj(a)]]`` with
``a = exp(i*theta/2)/sqrt(1-|alpha|^2)``.  The half-angle branch is fixed by
reducing ``theta`` into ``[0, 2*pi)`` before halving; scans offset their grids
by half a cell so the seam at ``theta = 0`` is never a grid point.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .model import PERIOD_TWO, ModelSpec, rho_of

_DET_TOL = 1e-10

#: Cayley-type conjugation with M = (1/(1+i)) [[1, -i], [1, i]]:
#: M^{-1} SU(1,1) M = SL(2,R).
CAYLEY_M = (1.0 / (1.0 + 1.0j)) * np.array([[1.0, -1.0j], [1.0, 1.0j]])
CAYLEY_M_INV = np.linalg.inv(CAYLEY_M)


class CocycleError(ValueError):
    pass


@dataclass(frozen=True)
class SU11Matrix:
    """Matrix ``[[a, b], [conj(b), conj(a)]]`` with ``|a|^2 - |b|^2 = 1``."""

    a: complex
    b: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "b", complex(self.b))
        d = abs(self.a) ** 2 - abs(self.b) ** 2
        if abs(d - 1.0) > _DET_TOL * max(1.0, abs(self.a) ** 2):
            raise CocycleError(f"|a|^2 - |b|^2 = {d} violates the SU(1,1) structure")

    @classmethod
    def identity(cls) -> "SU11Matrix":
        return cls(1.0, 0.0)

    @classmethod
    def from_array(cls, m: np.ndarray, tol: float = 1e-8) -> "SU11Matrix":
        m = np.asarray(m, dtype=complex)
        if abs(m[1, 1] - np.conj(m[0, 0])) > tol or abs(m[1, 0] - np.conj(m[0, 1])) > tol:
            raise CocycleError("array does not have the SU(1,1) entry pattern")
        return cls(m[0, 0], m[0, 1])

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [np.conj(self.b), np.conj(self.a)]])

    def det(self) -> float:
        return abs(self.a) ** 2 - abs(self.b) ** 2

    def trace(self) -> float:
        return 2.0 * self.a.real

    def __matmul__(self, other: "SU11Matrix") -> "SU11Matrix":
        # (a1 a2 + b1 conj(b2), a1 b2 + b1 conj(a2))
        a = self.a * other.a + self.b * np.conj(other.b)
        b = self.a * other.b + self.b * np.conj(other.a)
        return SU11Matrix(a, b)

    def inverse(self) -> "SU11Matrix":
        return SU11Matrix(np.conj(self.a), -self.b)

    def renormalized(self) -> "SU11Matrix":
        """Rescale to restore ``|a|^2 - |b|^2 = 1`` after floating-point drift."""
        d = abs(self.a) ** 2 - abs(self.b) ** 2
        if d <= 0.0:
            raise CocycleError("cannot renormalize: determinant lost positivity")
        s = 1.0 / math.sqrt(d)
        return SU11Matrix(self.a * s, self.b * s)


@dataclass(frozen=True)
class SL2RMatrix:
    """Real 2x2 matrix with determinant 1."""

    m11: float
    m12: float
    m21: float
    m22: float

    def __post_init__(self):
        d = self.m11 * self.m22 - self.m12 * self.m21
        if abs(d - 1.0) > _DET_TOL * max(1.0, self.m11 ** 2 + self.m12 ** 2):
            raise CocycleError(f"determinant {d} != 1")

    @property
    def array(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m21

    def trace(self) -> float:
        return self.m11 + self.m22

    def __matmul__(self, other: "SL2RMatrix") -> "SL2RMatrix":
        a = self.array @ other.array
        return SL2RMatrix(a[0, 0], a[0, 1], a[1, 0], a[1, 1])


@dataclass(frozen=True)
class SU11Generator:
    """Traceless ``[[i*t, z], [conj(z), -i*t]]`` in su(1,1); det = t^2 - |z|^2."""

    t: float
    z: complex

    @property
    def array(self) -> np.ndarray:
        return np.array([[1j * self.t, self.z], [np.conj(self.z), -1j * self.t]])

    def det(self) -> float:
        return self.t ** 2 - abs(self.z) ** 2


def szego_step(alpha: complex, theta: float) -> SU11Matrix:
    """One transfer-matrix step; see the module docstring for the branch."""
    r = rho_of(alpha)
    half = cmath.exp(0.5j * (theta % (2.0 * math.pi)))
    return SU11Matrix(half / r, -np.conj(alpha) * np.conj(half) / r)


def two_step(model: ModelSpec, theta: float, x=None) -> SU11Matrix:
    """Closed-form product of the two transfer steps of a period-two model.

    Equals ``szego_step(alpha_0(x), theta) @ szego_step(alpha_1(x), theta)``
    where ``alpha_0(x)`` samples the even modulus at ``x`` and ``alpha_1(x)``
    the odd modulus at ``x + omega``; iterating it over the doubled frequency
    ``2*omega`` interleaves the same bi-infinite transfer sequence.
    """
    if model.kind != PERIOD_TWO:
        raise CocycleError("two_step requires a PeriodTwo model")
    base = model.base_point if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    from .model import eval_h  # local import to avoid cycle at module load

    l1, l2, d = model.lam1, model.lam2, model.delta
    hx = eval_h(model.h, base % 1.0)
    hp = eval_h(model.h, (base + model.omega.vector) % 1.0)
    pref = 1.0 / math.sqrt((1.0 - l1 ** 2) * (1.0 - l2 ** 2))
    a = pref * (cmath.exp(1j * theta) + l1 * l2 * cmath.exp(1j * d * (hp - hx)))
    b = pref * (-l1 * cmath.exp(-1j * (theta + d * hx)) - l2 * cmath.exp(-1j * d * hp))
    return SU11Matrix(a, b)


def iterate(step_fn, x0, omega, n: int, renorm_every: int = 1000) -> SU11Matrix:
    """Ordered cocycle product ``A(x + (n-1) w) ... A(x + w) A(x)``.

    ``step_fn`` maps a torus point (1-d array) to an SU11Matrix.  The group
    constraint is restored every ``renorm_every`` factors; without that, long
    products lose ``|a|^2 - |b|^2 = 1`` in floating point.
    """
    if n < 0:
        raise CocycleError("iterate requires n >= 0")
    x = np.atleast_1d(np.asarray(x0, dtype=float)) % 1.0
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    acc = SU11Matrix.identity()
    for j in range(n):
        acc = step_fn(x) @ acc
        x = (x + om) % 1.0
        if (j + 1) % renorm_every == 0:
            acc = acc.renormalized()
    return acc


def to_sl2(m: SU11Matrix, tol: float = 1e-10) -> SL2RMatrix:
    """Conjugate by the Cayley matrix; closed form
    ``[[Re a + Re b, Im a - Im b], [-(Im a + Im b), Re a - Re b]]``.

    The conjugation is evaluated numerically and its residual imaginary part
    checked, so inputs that drifted off SU(1,1) are rejected.
    """
    conj = CAYLEY_M_INV @ m.array @ CAYLEY_M
    if np.max(np.abs(conj.imag)) > tol:
        raise CocycleError("conjugation left a residual imaginary part; input not in SU(1,1)")
    r = conj.real
    return SL2RMatrix(r[0, 0], r[0, 1], r[1, 0], r[1, 1])


def _diag_params(g: SU11Generator) -> tuple[float, float, float]:
    """(theta_tilde, phi, rho) of the elliptic diagonalization.

    ``2*theta_tilde = -arctan(|z| / sqrt(t^2 - |z|^2))`` and
    ``2*phi = arg(z) - pi/2``; requires ``t > |z|`` (positive rotation
    direction: SU(1,1) conjugation cannot swap ``diag(i*rho, -i*rho)`` to
    ``diag(-i*rho, i*rho)``, so ``t < 0`` generators are rejected).
    """
    det = g.det()
    if det <= 0.0:
        raise CocycleError(f"generator is not elliptic: t^2 - |z|^2 = {det} <= 0")
    if g.t < 0.0:
        raise CocycleError("elliptic generator has t < 0; negate it to fix the orientation")
    rho = math.sqrt(det)
    if abs(g.z) == 0.0:
        return 0.0, 0.0, rho
    theta_tilde = -0.5 * math.atan(abs(g.z) / rho)
    phi = 0.5 * (cmath.phase(g.z) - 0.5 * math.pi)
    return theta_tilde, phi, rho


def diagonalize_su11(g: SU11Generator) -> tuple[SU11Matrix, float]:
    """Diagonalize an elliptic su(1,1) generator.

    Returns ``(U, rho)`` with ``U`` in SU(1,1), ``rho = sqrt(t^2 - |z|^2)``
    and ``U^{-1} g U = diag(i*rho, -i*rho)``.  The conjugator satisfies
    ``norm(U)^2 = (|t| + |z|) / rho`` (operator norm).
    """
    theta_tilde, phi, rho = _diag_params(g)
    c2 = math.cos(2.0 * theta_tilde)
    s = 1.0 / math.sqrt(c2)
    a = s * math.cos(theta_tilde)
    b = s * math.sin(theta_tilde) * cmath.exp(2j * phi)
    return SU11Matrix(a, b), rho


def eigenvalues_qp_constant(lam: float, theta: float) -> tuple[complex, complex]:
    """Eigenvalues of the constant-coefficient step at coupling zero.

    With ``c = cos(theta/2)/sqrt(1-lam^2)``: a unit-modulus conjugate pair
    ``c +/- i*sqrt(1-c^2)`` inside the band (``|c| <= 1``), a real reciprocal
    pair ``c +/- sqrt(c^2-1)`` in a gap.
    """
    if not (0.0 <= lam < 1.0):
        raise CocycleError(f"lambda={lam} outside [0, 1)")
    c = math.cos(0.5 * theta) / math.sqrt(1.0 - lam ** 2)
    if abs(c) <= 1.0:
        s = math.sqrt(1.0 - c * c)
        return complex(c, s), complex(c, -s)
    s = math.sqrt(c * c - 1.0)
    return complex(c + s), complex(c - s)


def eigenvalues_p2_constant(lam1: float, lam2: float, theta: float) -> tuple[complex, complex]:
    """Same dichotomy for the period-two double step:
    ``c = (lam1*lam2 + cos(theta)) / sqrt((1-lam1^2)(1-lam2^2))``.
    """
    for name, v in (("lambda1", lam1), ("lambda2", lam2)):
        if not (0.0 <= v < 1.0):
            raise CocycleError(f"{name}={v} outside [0, 1)")
    c = (lam1 * lam2 + math.cos(theta)) / math.sqrt((1.0 - lam1 ** 2) * (1.0 - lam2 ** 2))
    if abs(c) <= 1.0:
        s = math.sqrt(1.0 - c * c)
        return complex(c, s), complex(c, -s)
    s = math.sqrt(c * c - 1.0)
    return complex(c + s), complex(c - s)


def constant_step_generator(m: SU11Matrix) -> SU11Generator:
    """Elliptic generator sharing eigenvectors with a band-interior constant step.

    For ``m = [[a, b], [conj(b), conj(a)]]`` with ``|Re a| < 1`` the matrix
    ``[[i*Im(a), b], [conj(b), -i*Im(a)]]`` has determinant ``1 - (Re a)^2 > 0``
    and is diagonalized by the same conjugator that sends ``m`` to
    ``diag(exp(i xi), exp(-i xi))`` with ``cos(xi) = Re a``.
    """
    if abs(m.a.real) >= 1.0:
        raise CocycleError("step is not elliptic (|trace| >= 2)")
    return SU11Generator(m.a.imag, m.b)
