"""Local interaction potentials for scalar monotone recurrence relations.

A local potential ``S(x_0, ..., x_r)`` is evaluated on batches: every method
takes an array whose last axis has length ``r + 1`` and broadcasts over the
leading axes.  Built-in families carry analytic derivatives; user supplied
callables fall back to central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.stats import qmc

TWO_PI = 2.0 * np.pi
FD_STEP = 1e-5


class InvalidModelError(ValueError):
    """Raised when a model violates the twist (monotonicity) condition."""


class EvaluationDomainError(ArithmeticError):
    """Raised when a potential returns a non-finite value."""

    def __init__(self, point, what="value"):
        self.point = np.asarray(point, dtype=float)
        super().__init__(f"non-finite potential {what} at x = {self.point.tolist()}")


@dataclass(frozen=True)
class FKForm:
    """Coefficients of ``sum_k a_k/2 (x_k - x_0)^2 + V(x_0) + const``.

    Potentials that can be written this way are handled by the compiled
    Newton kernel.
    """

    couplings: tuple
    amplitudes: tuple
    const: float = 0.0


@dataclass(frozen=True)
class CosineSeries:
    """On-site potential ``V(x) = sum_m lam_m / (2 pi m)^2 (1 - cos 2 pi m x)``."""

    amplitudes: tuple = (0.0,)

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(a) for a in self.amplitudes))

    def _modes(self):
        lam = np.asarray(self.amplitudes, dtype=float)
        m = np.arange(1, lam.size + 1, dtype=float)
        return lam, m

    def value(self, x):
        lam, m = self._modes()
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(lam / (TWO_PI * m) ** 2 * (1.0 - np.cos(TWO_PI * m * x)), axis=-1)

    def derivative(self, x):
        lam, m = self._modes()
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(lam / (TWO_PI * m) * np.sin(TWO_PI * m * x), axis=-1)

    def second_derivative(self, x):
        lam, m = self._modes()
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(lam * np.cos(TWO_PI * m * x), axis=-1)

    def sup_norm(self):
        # sum of |lam_m| * 2/(2 pi m)^2 bounds |V|; attained for a single mode
        lam, m = self._modes()
        return float(np.sum(np.abs(lam) * 2.0 / (TWO_PI * m) ** 2))


class LocalPotential:
    """Base class.  Subclasses set ``range`` and implement ``evaluate``.

    ``gradient`` and ``hessian`` default to central differences with step
    ``FD_STEP``; built-in models override them.
    """

    range: int = 1
    declared_coercive: bool = True

    def evaluate(self, X):
        raise NotImplementedError

    def __call__(self, X):
        return self.evaluate(X)

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        n = self.range + 1
        out = np.empty(X.shape)
        for k in range(n):
            e = np.zeros(n)
            e[k] = FD_STEP
            out[..., k] = (self.evaluate(X + e) - self.evaluate(X - e)) / (2 * FD_STEP)
        return out

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        n = self.range + 1
        out = np.empty(X.shape + (n,))
        for k in range(n):
            e = np.zeros(n)
            e[k] = FD_STEP
            out[..., k, :] = (self.gradient(X + e) - self.gradient(X - e)) / (2 * FD_STEP)
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def fk_form(self) -> Optional[FKForm]:
        return None

    def descriptor(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no JSON descriptor")


@dataclass(frozen=True)
class FrenkelKontorovaModel(LocalPotential):
    """Generalized Frenkel-Kontorova chain with linear couplings of range r.

    ``S(x_0..x_r) = sum_k a_k/2 (x_k - x_0)^2 + V(x_0)``.  Each pair of
    sites is counted once, so the equilibrium equation is
    ``sum_k a_k (x_{i-k} - 2 x_i + x_{i+k}) = V'(x_i)``.
    """

    couplings: tuple = (1.0,)
    onsite: CosineSeries = field(default_factory=CosineSeries)

    def __post_init__(self):
        object.__setattr__(self, "couplings", tuple(float(a) for a in self.couplings))

    @property
    def range(self):
        return len(self.couplings)

    def evaluate(self, X):
        X = np.asarray(X, dtype=float)
        a = np.asarray(self.couplings)
        d = X[..., 1:] - X[..., :1]
        return 0.5 * np.sum(a * d * d, axis=-1) + self.onsite.value(X[..., 0])

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        a = np.asarray(self.couplings)
        d = a * (X[..., 1:] - X[..., :1])
        g = np.empty(X.shape)
        g[..., 1:] = d
        g[..., 0] = -np.sum(d, axis=-1) + self.onsite.derivative(X[..., 0])
        return g

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        a = np.asarray(self.couplings)
        n = a.size + 1
        H = np.zeros(X.shape + (n,))
        idx = np.arange(1, n)
        H[..., idx, idx] = a
        H[..., 0, idx] = -a
        H[..., idx, 0] = -a
        H[..., 0, 0] = a.sum() + self.onsite.second_derivative(X[..., 0])
        return H

    def fk_form(self):
        return FKForm(self.couplings, self.onsite.amplitudes, 0.0)

    def descriptor(self):
        return {"type": "frenkel_kontorova", "a": list(self.couplings),
                "lambda": list(self.onsite.amplitudes)}


@dataclass(frozen=True)
class TwistGeneratingFunction(LocalPotential):
    """Standard-map generating function ``(x' - x)^2/2 - K/(4 pi^2) cos 2 pi x``."""

    kick: float = 0.0

    range = 1

    def evaluate(self, X):
        X = np.asarray(X, dtype=float)
        d = X[..., 1] - X[..., 0]
        return 0.5 * d * d - self.kick / TWO_PI ** 2 * np.cos(TWO_PI * X[..., 0])

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        d = X[..., 1] - X[..., 0]
        g = np.empty(X.shape)
        g[..., 0] = -d + self.kick / TWO_PI * np.sin(TWO_PI * X[..., 0])
        g[..., 1] = d
        return g

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        H = np.empty(X.shape + (2,))
        H[..., 0, 0] = 1.0 + self.kick * np.cos(TWO_PI * X[..., 0])
        H[..., 0, 1] = -1.0
        H[..., 1, 0] = -1.0
        H[..., 1, 1] = 1.0
        return H

    def fk_form(self):
        # V(x) = K/4pi^2 (1 - cos 2 pi x), so S = FK + const
        return FKForm((1.0,), (float(self.kick),), -float(self.kick) / TWO_PI ** 2)

    def descriptor(self):
        return {"type": "twist_standard", "K": float(self.kick)}


@dataclass(frozen=True)
class OnsitePotential(LocalPotential):
    """Pure on-site term ``V(x_0)`` of a given range; used as a perturbation."""

    onsite: CosineSeries = field(default_factory=CosineSeries)
    width: int = 1

    @property
    def range(self):
        return self.width

    def evaluate(self, X):
        X = np.asarray(X, dtype=float)
        return self.onsite.value(X[..., 0])

    def gradient(self, X):
        X = np.asarray(X, dtype=float)
        g = np.zeros(X.shape)
        g[..., 0] = self.onsite.derivative(X[..., 0])
        return g

    def hessian(self, X):
        X = np.asarray(X, dtype=float)
        H = np.zeros(X.shape + (X.shape[-1],))
        H[..., 0, 0] = self.onsite.second_derivative(X[..., 0])
        return H

    def fk_form(self):
        return FKForm((0.0,) * self.width, self.onsite.amplitudes, 0.0)

    def sup_norm(self):
        return self.onsite.sup_norm()

    def descriptor(self):
        return {"type": "onsite_cosine", "lambda": list(self.onsite.amplitudes),
                "range": self.width}


@dataclass(frozen=True)
class PerturbedPotential(LocalPotential):
    """``base + delta * bump`` with a bump of the same range."""

    base: LocalPotential = None
    delta: float = 0.0
    bump: LocalPotential = None

    def __post_init__(self):
        if self.base.range != self.bump.range:
            raise InvalidModelError(
                f"bump range {self.bump.range} differs from base range {self.base.range}")

    @property
    def range(self):
        return self.base.range

    def evaluate(self, X):
        return self.base.evaluate(X) + self.delta * self.bump.evaluate(X)

    def gradient(self, X):
        return self.base.gradient(X) + self.delta * self.bump.gradient(X)

    def hessian(self, X):
        return self.base.hessian(X) + self.delta * self.bump.hessian(X)

    def fk_form(self):
        fb, fp = self.base.fk_form(), self.bump.fk_form()
        if fb is None or fp is None:
            return None
        a = tuple(x + self.delta * y for x, y in zip(fb.couplings, fp.couplings))
        n = max(len(fb.amplitudes), len(fp.amplitudes))
        lb = np.zeros(n)
        lb[:len(fb.amplitudes)] = fb.amplitudes
        lp = np.zeros(n)
        lp[:len(fp.amplitudes)] = fp.amplitudes
        lam = tuple(float(v) for v in lb + self.delta * lp)
        return FKForm(a, lam, fb.const + self.delta * fp.const)

    def descriptor(self):
        return {"type": "perturbed", "base": self.base.descriptor(),
                "delta": float(self.delta), "bump": self.bump.descriptor()}


class CallablePotential(LocalPotential):
    """Wrap a user function ``f(X) -> S`` (batched over leading axes).

    Derivatives are optional; missing ones use finite differences.
    """

    def __init__(self, func: Callable, range: int, gradient: Callable = None,
                 hessian: Callable = None, coercive: bool = True):
        self._func = func
        self.range = int(range)
        self._grad = gradient
        self._hess = hessian
        self.declared_coercive = coercive

    def evaluate(self, X):
        return np.asarray(self._func(np.asarray(X, dtype=float)), dtype=float)

    def gradient(self, X):
        if self._grad is not None:
            return np.asarray(self._grad(np.asarray(X, dtype=float)), dtype=float)
        return super().gradient(X)

    def hessian(self, X):
        if self._hess is not None:
            return np.asarray(self._hess(np.asarray(X, dtype=float)), dtype=float)
        return super().hessian(X)


def make_fk(a, lambdas) -> FrenkelKontorovaModel:
    """Validated constructor for a Frenkel-Kontorova model."""
    a = [float(v) for v in np.atleast_1d(a)]
    if not a:
        raise InvalidModelError("need at least one coupling")
    if a[0] <= 0:
        raise InvalidModelError(f"a_1 = {a[0]} must be positive (twist condition)")
    if any(v < 0 for v in a):
        raise InvalidModelError(f"couplings must be nonnegative, got {a}")
    return FrenkelKontorovaModel(tuple(a), CosineSeries(tuple(np.atleast_1d(lambdas))))


def make_twist(K) -> TwistGeneratingFunction:
    if K < 0:
        raise InvalidModelError(f"kick amplitude must be nonnegative, got {K}")
    return TwistGeneratingFunction(float(K))


def from_descriptor(desc: dict, range_hint: int = None) -> LocalPotential:
    """Build a potential from its JSON descriptor."""
    kind = desc.get("type")
    if kind == "frenkel_kontorova":
        return make_fk(desc["a"], desc.get("lambda", [0.0]))
    if kind == "twist_standard":
        return make_twist(float(desc["K"]))
    if kind == "onsite_cosine":
        width = int(desc.get("range", range_hint or 1))
        return OnsitePotential(CosineSeries(tuple(desc["lambda"])), width)
    if kind == "perturbed":
        base = from_descriptor(desc["base"])
        bump = from_descriptor(desc["bump"], range_hint=base.range)
        return PerturbedPotential(base, float(desc["delta"]), bump)
    raise InvalidModelError(f"unknown model type {kind!r}")


@dataclass
class ConditionReport:
    sample_count: int
    periodicity_violation: float
    max_offdiag_hessian: float
    max_d01: float
    gradient_error: float
    periodic: bool
    monotone: bool
    gradient_consistent: bool
    coercivity: str = "not checkable"

    @property
    def passed(self):
        return self.periodic and self.monotone and self.gradient_consistent


def _check_finite(pot, X, values, what="value"):
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise EvaluationDomainError(X[np.argwhere(bad)[0][0]], what)


def sample_box(dim, count, width, seed=0):
    """Scrambled Sobol points in ``[0, width]^dim``."""
    sampler = qmc.Sobol(d=dim, scramble=True, seed=seed)
    m = int(np.ceil(np.log2(max(count, 1))))
    return sampler.random_base2(m)[:count] * width


def check_conditions(pot: LocalPotential, sample_count=10_000, box_width=4.0,
                     seed=0) -> ConditionReport:
    """Sample periodicity, monotonicity and derivative consistency.

    Coercivity cannot be sampled on a bounded box and is only declared.
    """
    if sample_count < 1:
        raise ValueError("sample_count must be >= 1")
    if box_width <= 0:
        raise ValueError("box_width must be positive")
    n = pot.range + 1
    X = sample_box(n, sample_count, box_width, seed)
    S = pot.evaluate(X)
    _check_finite(pot, X, S)
    S1 = pot.evaluate(X + 1.0)
    _check_finite(pot, X + 1.0, S1)
    per = float(np.max(np.abs(S1 - S)))

    H = pot.hessian(X)
    _check_finite(pot, X, H.reshape(len(X), -1).sum(axis=1), "hessian")
    off = H.copy()
    off[:, np.arange(n), np.arange(n)] = -np.inf
    max_off = float(np.max(off))
    max_d01 = float(np.max(H[:, 0, 1]))

    G = pot.gradient(X)
    fd = np.empty_like(G)
    for k in range(n):
        e = np.zeros(n)
        e[k] = FD_STEP
        fd[:, k] = (pot.evaluate(X + e) - pot.evaluate(X - e)) / (2 * FD_STEP)
    gerr = float(np.max(np.abs(fd - G) / np.maximum(1.0, np.abs(G))))

    return ConditionReport(
        sample_count=sample_count,
        periodicity_violation=per,
        max_offdiag_hessian=max_off,
        max_d01=max_d01,
        gradient_error=gerr,
        periodic=per <= 1e-12 * max(1.0, float(np.max(np.abs(S)))),
        monotone=max_off <= 1e-12 and max_d01 < 0.0,
        gradient_consistent=gerr <= 1e-6,
    )
