"""Potentials as functions of the two invariants, evaluated as 2-jets."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError, ParameterError

# relative tolerance for treating a slightly negative radicand as zero
_RADICAND_SLACK = 1e-13


@dataclass(frozen=True)
class PotentialJet:
    """Value and first/second partials of ``rho(eta1, eta2)``."""

    rho: float
    rho1: float
    rho2: float
    rho11: float
    rho12: float
    rho22: float

    def scaled(self, factor: float) -> PotentialJet:
        return PotentialJet(*(factor * getattr(self, f.name) for f in fields(self)))

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def gradient(self) -> np.ndarray:
        return np.array([self.rho1, self.rho2])

    @property
    def hessian(self) -> np.ndarray:
        return np.array([[self.rho11, self.rho12], [self.rho12, self.rho22]])


def _sqrt_jet(a, u, du, ddu):
    """Jet of ``a * sqrt(u)`` from the jet of ``u`` (gradient ``du``, Hessian ``ddu``)."""
    r = math.sqrt(u)
    grad = a * du / (2 * r)
    hess = a * (ddu / (2 * r) - np.outer(du, du) / (4 * u * r))
    return PotentialJet(a * r, grad[0], grad[1], hess[0, 0], hess[0, 1], hess[1, 1])


def _margin(value: float, grad) -> np.ndarray:
    """Per-coordinate distance to the zero set of a radicand, linearised."""
    with np.errstate(divide="ignore"):
        return abs(value) / np.abs(np.asarray(grad, dtype=float))


def _radicand(value: float, scale: float, what: str) -> float:
    if value < -_RADICAND_SLACK * scale:
        raise DomainError(f"{what} is negative ({value:.3g}); point is outside the domain")
    return max(value, 0.0)


class Potential:
    """Base class: ``jet(eta1, eta2)`` returns a PotentialJet."""

    kind = "abstract"
    k = None
    c = None

    def jet(self, eta1: float, eta2: float) -> PotentialJet:
        raise NotImplementedError

    def value(self, eta1: float, eta2: float) -> float:
        return self.jet(eta1, eta2).rho

    def singular_margin(self, eta1: float, eta2: float) -> np.ndarray:
        """Distance along each ``eta_i`` to where the jet becomes singular."""
        return np.array([np.inf, np.inf])

    def __repr__(self) -> str:
        args = ", ".join(f"{n}={getattr(self, n)!r}" for n in ("k", "c") if getattr(self, n) is not None)
        return f"{type(self).__name__}({args})"


class TheoremPotential(Potential):
    """``rho = 2k sqrt(eta1 + 2 sqrt(eta1^2/2 - k^2 eta2))``."""

    kind = "theorem"

    def __init__(self, k: float):
        if not k > 0:
            raise ParameterError("k must be positive")
        self.k = float(k)

    def _inner(self, eta1, eta2):
        if not eta1 > 0:
            raise DomainError("eta1 must be positive")
        k2 = self.k**2
        return _radicand(0.5 * eta1**2 - k2 * eta2, eta1**2, "eta1^2/2 - k^2 eta2")

    def value(self, eta1, eta2):
        d = self._inner(eta1, eta2)
        return 2 * self.k * math.sqrt(eta1 + 2 * math.sqrt(d))

    def singular_margin(self, eta1, eta2):
        return _margin(0.5 * eta1**2 - self.k**2 * eta2, (eta1, self.k**2))

    def jet(self, eta1, eta2):
        d = self._inner(eta1, eta2)
        if d == 0.0:
            raise DomainError("derivatives are singular on the minimal-orbit boundary")
        k2, r = self.k**2, math.sqrt(d)
        u = eta1 + 2 * r
        du = np.array([1 + eta1 / r, -k2 / r])
        ddu = np.array([[-k2 * eta2 / r**3, eta1 * k2 / (2 * r**3)],
                        [eta1 * k2 / (2 * r**3), -(k2**2) / (2 * r**3)]])
        return _sqrt_jet(2 * self.k, u, du, ddu)


class G2Potential(Potential):
    """``rho = eps sqrt(8) sqrt(eta1 + sqrt(6) sqrt(eta1^2 - 4 eta2))``."""

    kind = "g2"

    def __init__(self, eps: int = 1):
        if eps not in (1, -1):
            raise ParameterError("eps must be +1 or -1")
        self.eps = eps

    def __repr__(self) -> str:
        return f"G2Potential(eps={self.eps})"

    def _inner(self, eta1, eta2):
        if not eta1 > 0:
            raise DomainError("eta1 must be positive")
        return _radicand(eta1**2 - 4 * eta2, eta1**2, "eta1^2 - 4 eta2")

    def value(self, eta1, eta2):
        d = self._inner(eta1, eta2)
        return self.eps * math.sqrt(8) * math.sqrt(eta1 + math.sqrt(6 * d))

    def singular_margin(self, eta1, eta2):
        return _margin(eta1**2 - 4 * eta2, (2 * eta1, 4))

    def jet(self, eta1, eta2):
        d = self._inner(eta1, eta2)
        if d == 0.0:
            raise DomainError("derivatives are singular where eta1^2 = 4 eta2")
        r, w = math.sqrt(d), math.sqrt(6)
        u = eta1 + w * r
        du = np.array([1 + w * eta1 / r, -2 * w / r])
        ddu = w * np.array([[-4 * eta2 / r**3, 2 * eta1 / r**3], [2 * eta1 / r**3, -4 / r**3]])
        return _sqrt_jet(self.eps * math.sqrt(8), u, du, ddu)


class Sl2FamilyPotential(Potential):
    """One-invariant family with ``rho' = sqrt(k^2 eta + c) / eta``; ``eta2`` is ignored.

    The additive constant is fixed by ``rho = 2q - 2 sqrt(c) artanh(sqrt(c)/q)``,
    ``q = sqrt(k^2 eta + c)``, which reduces to ``2k sqrt(eta)`` at ``c = 0``.
    """

    kind = "sl2"

    def __init__(self, k: float, c: float = 0.0):
        if not k > 0:
            raise ParameterError("k must be positive")
        if not c >= 0:
            raise ParameterError("c must be non-negative")
        self.k, self.c = float(k), float(c)

    def derivatives(self, eta: float) -> tuple[float, float, float]:
        """``(rho, rho', rho'')`` at ``eta``."""
        if not eta > 0:
            raise DomainError("eta must be positive")
        k2, c = self.k**2, self.c
        q = math.sqrt(k2 * eta + c)
        rho = 2 * q - (2 * math.sqrt(c) * math.atanh(math.sqrt(c) / q) if c > 0 else 0.0)
        d1 = q / eta
        d2 = k2 / (2 * eta * q) - q / eta**2
        return rho, d1, d2

    def jet(self, eta1, eta2=None):
        rho, d1, d2 = self.derivatives(eta1)
        return PotentialJet(rho, d1, 0.0, d2, 0.0, 0.0)

    def ode_residual(self, eta: float) -> float:
        """``2 eta rho' (rho' + eta rho'') - k^2``."""
        _, d1, d2 = self.derivatives(eta)
        return 2 * eta * d1 * (d1 + eta * d2) - self.k**2


class ProductFamilyPotential(Potential):
    """``rho = F(s) + F(t)`` with ``F' = sqrt(16 k^4 + c/x^2)``, expressed in the invariants.

    ``(s, t)`` are recovered from ``eta1 = 4k^2(s^2+t^2)``, ``eta2 = 8k^2(s^4+t^4)``.
    """

    kind = "family"
    exclusion = 1e-3

    def __init__(self, k: float, c: float = 0.0):
        if not k > 0:
            raise ParameterError("k must be positive")
        if not c >= 0:
            raise ParameterError("c must be non-negative")
        self.k, self.c = float(k), float(c)

    def st_from_eta(self, eta1: float, eta2: float) -> tuple[float, float]:
        k2 = self.k**2
        p, q = eta1 / (4 * k2), eta2 / (8 * k2)
        disc = _radicand(2 * q - p * p, p * p, "2(s^4+t^4) - (s^2+t^2)^2")
        _radicand(p * p - q, p * p, "s^2 t^2")
        root = math.sqrt(disc)
        return math.sqrt((p + root) / 2), math.sqrt(max((p - root) / 2, 0.0))

    def singular_margin(self, eta1, eta2):
        k2 = self.k**2
        # s = t and st = 0, in terms of the invariants
        diag = _margin(eta2 / (4 * k2) - eta1**2 / (16 * k2 * k2), (eta1 / (8 * k2 * k2), 1 / (4 * k2)))
        edge = _margin(eta1**2 / (16 * k2 * k2) - eta2 / (8 * k2), (eta1 / (8 * k2 * k2), 1 / (8 * k2)))
        return np.minimum(diag, edge)

    def _f(self, x):
        k4, c = self.k**4, self.c
        q = math.sqrt(16 * k4 * x * x + c)
        val = q - (math.sqrt(c) * math.atanh(math.sqrt(c) / q) if c > 0 else 0.0)
        d1 = math.sqrt(16 * k4 + c / (x * x))
        d2 = -c / (x**3 * d1)
        return val, d1, d2

    def st_jet(self, s: float, t: float) -> tuple[float, np.ndarray, np.ndarray]:
        """Value, gradient and Hessian in ``(s, t)``."""
        fs, ft = self._f(s), self._f(t)
        return fs[0] + ft[0], np.array([fs[1], ft[1]]), np.diag([fs[2], ft[2]])

    def jet(self, eta1, eta2):
        s, t = self.st_from_eta(eta1, eta2)
        return self.jet_at_st(s, t)

    def jet_at_st(self, s: float, t: float) -> PotentialJet:
        if abs(s - t) < self.exclusion or min(s, t) < self.exclusion:
            raise DomainError(f"(s, t) = ({s:.4g}, {t:.4g}) is too close to s = t or st = 0")
        k2 = self.k**2
        rho, g_st, h_st = self.st_jet(s, t)
        # jac[i, a] = d eta_i / d x_a for x = (s, t)
        jac = np.array([[8 * k2 * s, 8 * k2 * t], [32 * k2 * s**3, 32 * k2 * t**3]])
        g_eta = np.linalg.solve(jac.T, g_st)
        curv = g_eta[0] * np.diag([8 * k2, 8 * k2]) + g_eta[1] * np.diag([96 * k2 * s * s, 96 * k2 * t * t])
        # h_st = jac^T h_eta jac + curv
        h_eta = np.linalg.solve(jac.T, np.linalg.solve(jac.T, h_st - curv).T)
        h_eta = 0.5 * (h_eta + h_eta.T)
        return PotentialJet(rho, g_eta[0], g_eta[1], h_eta[0, 0], h_eta[0, 1], h_eta[1, 1])


def parse_potential(text: str, k: float | None = None) -> Potential:
    """``"theorem"``, ``"g2"``, ``"g2:eps=-1"``, ``"sl2:c=0.5"`` or ``"family:c=0.5"``."""
    text = text.strip().lower()
    name, _, rest = text.partition(":")
    opts = {}
    for item in filter(None, rest.split(",")):
        m = re.fullmatch(r"\s*(\w+)\s*=\s*([-+0-9.eE]+)\s*", item)
        if m is None:
            raise ParameterError(f"cannot parse potential option {item!r}")
        opts[m.group(1)] = float(m.group(2))
    allowed = {"theorem": {"k"}, "g2": {"eps"}, "sl2": {"c", "k"}, "family": {"c", "k"}}
    if name not in allowed:
        raise ParameterError(f"unknown potential {name!r}")
    if set(opts) - allowed[name]:
        raise ParameterError(f"unexpected options {sorted(set(opts) - allowed[name])} for {name}")
    if name == "g2":
        return G2Potential(int(opts.get("eps", 1)))
    k = opts.get("k", k)
    if k is None:
        raise ParameterError(f"potential {name!r} needs k")
    if name == "theorem":
        return TheoremPotential(k)
    cls = Sl2FamilyPotential if name == "sl2" else ProductFamilyPotential
    return cls(k, opts.get("c", 0.0))


def jet_fd_validate(pot: Potential, eta1: float, eta2: float, h: float = 1e-5) -> dict:
    """Compare analytic partials with Richardson-extrapolated central differences.

    First partials come from differences of ``rho``; second partials from
    differences of the analytic first partials.  Steps are ``h * eta_i``, capped
    at ``h`` times the distance to the singular set so that points close to it
    are resolved.
    Errors are relative to ``|analytic| + |rho| / (eta_i eta_j)``.
    """
    eta = np.array([eta1, eta2], dtype=float)
    base = pot.jet(eta1, eta2)

    def differences(frac):
        steps = frac * np.minimum(np.abs(eta), pot.singular_margin(*eta))
        grad, hess = np.zeros(2), np.zeros((2, 2))
        for i in range(2):
            e = np.zeros(2)
            e[i] = steps[i]
            jp, jm = pot.jet(*(eta + e)), pot.jet(*(eta - e))
            grad[i] = (jp.rho - jm.rho) / (2 * steps[i])
            hess[:, i] = (jp.gradient - jm.gradient) / (2 * steps[i])
        return grad, hess

    (g1, h1), (g2, h2) = differences(h), differences(h / 2)
    grad_fd, hess_fd = (4 * g2 - g1) / 3, (4 * h2 - h1) / 3
    errors = {}
    for i, name in enumerate(("rho1", "rho2")):
        scale = abs(base.gradient[i]) + abs(base.rho) / eta[i]
        errors[name] = abs(grad_fd[i] - base.gradient[i]) / scale
    for (i, j), name in zip(((0, 0), (0, 1), (1, 1)), ("rho11", "rho12", "rho22")):
        scale = abs(base.hessian[i, j]) + abs(base.rho) / (eta[i] * eta[j])
        fd = 0.5 * (hess_fd[i, j] + hess_fd[j, i])
        errors[name] = abs(fd - base.hessian[i, j]) / scale
    errors["rho21_asymmetry"] = abs(hess_fd[0, 1] - hess_fd[1, 0]) / (
        abs(base.rho12) + abs(base.rho) / (eta[0] * eta[1]))
    return {"errors": errors, "max_error": max(errors.values())}
