"""Verblunsky-coefficient families over torus translations.

A model is a rule ``n -> alpha_n`` producing a bi-infinite sequence of
Verblunsky coefficients in the open unit disc.  Two families are supported:

* quasi-periodic: ``alpha_n = lam * exp(i * delta * h(x0 + n*omega))``,
* period-two almost periodic: the modulus alternates between ``lam1``
  (even n) and ``lam2`` (odd n) with the same phase sampling.

``h`` is a finitely supported real trigonometric polynomial on the torus
``T^d = R^d / Z^d`` with the character convention ``exp(2*pi*i*<k, x>)``.
All label arithmetic elsewhere in the package is done mod 1 in this
convention.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * math.pi

QUASI_PERIODIC = "QuasiPeriodic"
PERIOD_TWO = "PeriodTwo"


class ModelError(ValueError):
    """Raised when model data violates a structural invariant."""


def _as_key(k) -> tuple[int, ...]:
    if isinstance(k, (int, np.integer)):
        return (int(k),)
    return tuple(int(v) for v in k)


@dataclass(frozen=True)
class FourierPoly:
    """Real trigonometric polynomial ``h(x) = sum_k hk * exp(2*pi*i*<k,x>)``.

    ``coeffs`` maps integer vectors ``k`` (tuples of length ``dim``) to
    complex coefficients.  Reality requires ``coeffs[-k] == conj(coeffs[k])``
    for every ``k`` in the support; this is checked on construction.
    """

    coeffs: dict = field(default_factory=dict)
    dim: int = 1

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            key = _as_key(k)
            if len(key) != self.dim:
                raise ModelError(
                    f"h.coeffs: key {key} has length {len(key)}, expected dim={self.dim}"
                )
            clean[key] = complex(c)
        object.__setattr__(self, "coeffs", clean)
        mass = self.mass()
        tol = 1e-12 * max(mass, 1.0)
        for k, c in clean.items():
            mk = tuple(-v for v in k)
            if abs(clean.get(mk, 0.0) - c.conjugate()) > tol:
                raise ModelError(
                    f"h.coeffs: reality violated at k={k}: need coeff(-k) == conj(coeff(k))"
                )

    def mass(self) -> float:
        return float(sum(abs(c) for c in self.coeffs.values()))

    def coeff(self, k) -> complex:
        return self.coeffs.get(_as_key(k), 0.0 + 0.0j)

    @property
    def mean(self) -> float:
        return self.coeff((0,) * self.dim).real

    @classmethod
    def zero(cls, dim: int = 1) -> "FourierPoly":
        return cls({}, dim)

    @classmethod
    def cosine(cls, k=1, amplitude: float = 1.0) -> "FourierPoly":
        """``amplitude * cos(2*pi*<k, x>)`` as a FourierPoly."""
        key = _as_key(k)
        mk = tuple(-v for v in key)
        half = 0.5 * amplitude
        if key == mk:
            return cls({key: complex(amplitude)}, len(key))
        return cls({key: complex(half), mk: complex(half)}, len(key))

    def sample(self, x: np.ndarray) -> np.ndarray:
        """Evaluate on an ``(n, dim)`` array of torus points; returns ``(n,)`` reals."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise ModelError(f"point dimension {x.shape[1]} != h dimension {self.dim}")
        out = np.zeros(x.shape[0], dtype=complex)
        for k, c in self.coeffs.items():
            out += c * np.exp(1j * TWO_PI * (x @ np.asarray(k, dtype=float)))
        mass = self.mass()
        if np.max(np.abs(out.imag), initial=0.0) > 1e-12 * max(mass, 1.0):
            raise ModelError("evaluation produced a non-real value; coefficients corrupt")
        return out.real


def eval_h(h: FourierPoly, x) -> float:
    """Evaluate ``h`` at a single torus point ``x`` (length-``dim`` vector)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1 or x.shape[0] != h.dim:
        raise ModelError(f"point of length {x.shape} does not match h dimension {h.dim}")
    return float(h.sample(x[None, :])[0])


def diophantine_margin(omega, n_check: int, tau: float) -> float:
    """Smallest ``|n|_inf^tau * dist(<n, omega>, Z)`` over ``0 < |n|_inf <= n_check``.

    A finite-range lower-bound estimate of the Diophantine constant; zero
    signals a resonance within the checked box (e.g. rational frequency).
    """
    if n_check < 1:
        raise ModelError("n_check must be >= 1")
    om = np.atleast_1d(np.asarray(omega, dtype=float))
    d = om.shape[0]
    grids = np.meshgrid(*([np.arange(-n_check, n_check + 1)] * d), indexing="ij")
    ks = np.stack([g.ravel() for g in grids], axis=1)
    ks = ks[np.any(ks != 0, axis=1)]
    vals = ks @ om
    dist = np.abs(vals - np.round(vals))
    weight = np.max(np.abs(ks), axis=1).astype(float) ** tau
    return float(np.min(weight * dist))


@dataclass(frozen=True)
class Frequency:
    """Translation vector on ``T^d``, coordinates reduced mod 1."""

    omega: tuple = ()
    kappa: float | None = None
    tau: float | None = None

    def __post_init__(self):
        om = np.atleast_1d(np.asarray(self.omega, dtype=float)) % 1.0
        object.__setattr__(self, "omega", tuple(float(v) for v in om))

    @property
    def dim(self) -> int:
        return len(self.omega)

    @property
    def vector(self) -> np.ndarray:
        return np.asarray(self.omega, dtype=float)

    def margin(self, n_check: int = 20, tau: float | None = None) -> float:
        t = tau if tau is not None else (self.tau if self.tau is not None else 2.0)
        return diophantine_margin(self.vector, n_check, t)

    def pair(self, k) -> float:
        """``<k, omega>`` as a plain real number (not reduced)."""
        return float(np.dot(np.asarray(_as_key(k), dtype=float), self.vector))


GOLDEN_MEAN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ModelSpec:
    """A Verblunsky-coefficient family; see the module docstring."""

    kind: str
    h: FourierPoly
    omega: Frequency
    delta: float = 0.0
    lam: float | None = None
    lam1: float | None = None
    lam2: float | None = None
    x0: tuple = None

    def __post_init__(self):
        if self.kind not in (QUASI_PERIODIC, PERIOD_TWO):
            raise ModelError(f"unknown model kind {self.kind!r}")
        if self.kind == QUASI_PERIODIC:
            if self.lam is None:
                raise ModelError("QuasiPeriodic model requires lambda")
            if not (0.0 <= self.lam < 1.0):
                raise ModelError(f"lambda={self.lam} outside [0, 1)")
        else:
            if self.lam1 is None or self.lam2 is None:
                raise ModelError("PeriodTwo model requires lambda1 and lambda2")
            for name, v in (("lambda1", self.lam1), ("lambda2", self.lam2)):
                if not (0.0 <= v < 1.0):
                    raise ModelError(f"{name}={v} outside [0, 1)")
            if self.lam1 ** 2 + self.lam2 ** 2 == 0.0:
                raise ModelError("PeriodTwo model requires lambda1^2 + lambda2^2 != 0")
        d = self.omega.dim
        if self.h.dim != d:
            raise ModelError(f"h dimension {self.h.dim} != omega dimension {d}")
        x0 = np.zeros(d) if self.x0 is None else np.atleast_1d(np.asarray(self.x0, dtype=float))
        if x0.shape[0] != d:
            raise ModelError(f"x0 length {x0.shape[0]} != dimension {d}")
        object.__setattr__(self, "x0", tuple(float(v) % 1.0 for v in x0))

    @property
    def dim(self) -> int:
        return self.omega.dim

    @property
    def base_point(self) -> np.ndarray:
        return np.asarray(self.x0, dtype=float)

    def modulus(self, n: int) -> float:
        if self.kind == QUASI_PERIODIC:
            return self.lam
        return self.lam1 if n % 2 == 0 else self.lam2

    def alpha(self, n: int) -> complex:
        """Verblunsky coefficient at index ``n``."""
        x = (self.base_point + n * self.omega.vector) % 1.0
        phase = self.delta * eval_h(self.h, x)
        return self.modulus(n) * complex(math.cos(phase), math.sin(phase))

    def alpha_sequence(self, count: int, start: int = 0, x0=None) -> np.ndarray:
        """Vectorized ``alpha_n`` for ``n = start, ..., start + count - 1``."""
        base = self.base_point if x0 is None else np.atleast_1d(np.asarray(x0, float))
        ns = np.arange(start, start + count)
        x = (base[None, :] + ns[:, None] * self.omega.vector[None, :]) % 1.0
        phases = self.delta * self.h.sample(x)
        moduli = np.where(ns % 2 == 0, self.modulus(0), self.modulus(1))
        return moduli * np.exp(1j * phases)

    def with_delta(self, delta: float) -> "ModelSpec":
        return ModelSpec(self.kind, self.h, self.omega, delta,
                         self.lam, self.lam1, self.lam2, self.x0)

    def with_x0(self, x0) -> "ModelSpec":
        return ModelSpec(self.kind, self.h, self.omega, self.delta,
                         self.lam, self.lam1, self.lam2, tuple(np.atleast_1d(x0)))

    def as_dict(self) -> dict:
        doc = {
            "kind": self.kind,
            "delta": self.delta,
            "omega": list(self.omega.vector),
            "x0": list(self.base_point),
            "h": {"coeffs": [
                {"k": list(k), "re": c.real, "im": c.imag}
                for k, c in sorted(self.h.coeffs.items())
            ]},
        }
        if self.kind == QUASI_PERIODIC:
            doc["lambda"] = self.lam
        else:
            doc["lambda1"] = self.lam1
            doc["lambda2"] = self.lam2
        return doc


def rho_of(alpha: complex) -> float:
    """``sqrt(1 - |alpha|^2)``; valid only for coefficients inside the disc."""
    m2 = abs(alpha) ** 2
    if m2 >= 1.0:
        raise ModelError(f"|alpha|={math.sqrt(m2):.6g} >= 1 is not a valid Verblunsky coefficient")
    return math.sqrt(1.0 - m2)


def quasiperiodic_model(lam, h, omega, delta=0.0, x0=None) -> ModelSpec:
    om = omega if isinstance(omega, Frequency) else Frequency(np.atleast_1d(omega))
    return ModelSpec(QUASI_PERIODIC, h, om, delta, lam=lam, x0=x0)


def period_two_model(lam1, lam2, h, omega, delta=0.0, x0=None) -> ModelSpec:
    om = omega if isinstance(omega, Frequency) else Frequency(np.atleast_1d(omega))
    return ModelSpec(PERIOD_TWO, h, om, delta, lam1=lam1, lam2=lam2, x0=x0)


def model_from_dict(doc: dict) -> ModelSpec:
    """Build a model from the JSON document schema; raise ModelError naming the field."""
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    try:
        kind = doc["kind"]
    except KeyError:
        raise ModelError("model document missing 'kind'") from None
    for name in ("omega", "h"):
        if name not in doc:
            raise ModelError(f"model document missing '{name}'")
    omega = Frequency(doc["omega"])
    raw = doc["h"].get("coeffs", [])
    coeffs = {}
    for i, entry in enumerate(raw):
        try:
            coeffs[_as_key(entry["k"])] = complex(entry.get("re", 0.0), entry.get("im", 0.0))
        except (KeyError, TypeError) as exc:
            raise ModelError(f"h.coeffs[{i}]: malformed entry ({exc})") from None
    h = FourierPoly(coeffs, omega.dim) if coeffs else FourierPoly.zero(omega.dim)
    delta = float(doc.get("delta", 0.0))
    x0 = doc.get("x0")
    if kind == QUASI_PERIODIC:
        if "lambda" not in doc:
            raise ModelError("QuasiPeriodic model document missing 'lambda'")
        return ModelSpec(kind, h, omega, delta, lam=float(doc["lambda"]), x0=x0)
    if kind == PERIOD_TWO:
        for name in ("lambda1", "lambda2"):
            if name not in doc:
                raise ModelError(f"PeriodTwo model document missing '{name}'")
        return ModelSpec(kind, h, omega, delta,
                         lam1=float(doc["lambda1"]), lam2=float(doc["lambda2"]), x0=x0)
    raise ModelError(f"unknown model kind {kind!r}")


def load_model(path) -> ModelSpec:
    """Load a model from a JSON file; parse errors carry the line/column."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return model_from_dict(doc)
