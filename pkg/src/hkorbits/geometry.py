"""Kähler form, metric and the endomorphism J induced by a potential, with residual suites.

Everything is evaluated at a point ``X`` of a nilpotent orbit on tangent vectors
``xi = [A, X]`` stored as complex coordinate rows.  The pairing may be scaled
by a constant (``scale * <., .>``), which is how the one- and two-factor
models with inner product ``k^2 <., .>`` are handled.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .algebra import LieAlgebra
from .orbits import OrbitPoint, TangentVector, eta_invariants
from .potentials import Potential, PotentialJet

FD_STEP = 1e-4


class PointGeometry:
    """Tensors at one point for one potential.

    ``pot`` may be a Potential (evaluated at the scaled invariants of ``X``) or
    an explicit PotentialJet.
    """

    def __init__(self, alg: LieAlgebra, X: np.ndarray, pot: Potential | PotentialJet,
                 scale: float = 1.0):
        self.alg, self.X, self.scale = alg, np.asarray(X, dtype=complex), float(scale)
        br = alg.bracket
        self.sX = alg.sigma(self.X)
        self.Y = br(self.X, self.sX)
        self.Z = br(self.sX, self.Y)            # [sX, [X, sX]]
        self.W = -br(self.X, self.Y)            # [X, [sX, X]]
        self.V = br(self.X, self.Z)             # [X, [sX, [X, sX]]]
        eta1, eta2 = eta_invariants(alg, self.X)
        self.eta = (self.scale * eta1, self.scale * eta2)
        self.jet = pot if isinstance(pot, PotentialJet) else pot.jet(*self.eta)

    def inner(self, a, b):
        return self.scale * self.alg.inner(a, b)

    # ---------------------------------------------------------------- forms
    def phi(self, xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
        """Complex form whose imaginary part is ``omega_I`` and real part ``g``.

        Rows of ``xa`` and ``xb`` are tangent vectors; returns ``phi[a, b]``.
        """
        alg, j = self.alg, self.jet
        xa, xb = np.atleast_2d(xa), np.atleast_2d(xb)
        sb = alg.sigma(xb)
        vb = 2 * j.rho1 * sb - 4 * j.rho2 * (alg.bracket(sb, self.Y)
                                              + alg.bracket(self.sX, alg.bracket(self.X, sb)))
        out = -self.scale * (xa @ self.alg.killing_matrix @ vb.T)  # <xa, vb>
        alpha = self.inner(xa, self.sX)
        beta = self.inner(xa, self.Z)
        gamma = self.inner(sb, self.X)
        delta = self.inner(sb, self.W)
        out = out + 2 * j.rho11 * np.outer(alpha, gamma)
        out = out - 4 * j.rho12 * (np.outer(beta, gamma) + np.outer(alpha, delta))
        out = out + 8 * j.rho22 * np.outer(beta, delta)
        return out

    def omega_I(self, xa, xb) -> np.ndarray:
        return self.phi(xa, xb).imag

    def metric(self, xa, xb) -> np.ndarray:
        return self.phi(xa, xb).real

    def omega_c(self, xa, gens_b) -> np.ndarray:
        """``omega_c(xi_a, xi_b) = -<xi_a, B>`` for generators ``B`` of the second slot."""
        return -self.inner(np.atleast_2d(xa)[:, None, :], np.atleast_2d(gens_b)[None, :, :])

    def J(self, xi: np.ndarray) -> np.ndarray:
        """The endomorphism ``J`` (antilinear), applied row-wise."""
        alg, j, br = self.alg, self.jet, self.alg.bracket
        xi = np.atleast_2d(xi)
        s = alg.sigma(xi)
        x = np.broadcast_to(self.X, xi.shape)
        sx = np.broadcast_to(self.sX, xi.shape)
        x_s = br(x, s)
        out = -2 * j.rho1 * x_s
        out = out + 4 * j.rho2 * (2 * br(x, br(sx, x_s)) - br(x, br(x, br(sx, s))))
        a = self.inner(s, self.X)[:, None]
        w = self.inner(s, self.W)[:, None]
        out = out - 2 * j.rho11 * a * self.Y
        out = out + 4 * j.rho12 * (w * self.Y + a * self.V)
        out = out - 8 * j.rho22 * w * self.V
        return out


# ------------------------------------------------------------ tangent frames
@dataclass
class RealFrame:
    """Real tangent basis ``{xi_k, i xi_k}`` with generators and a projector."""

    vectors: np.ndarray
    gens: np.ndarray
    unit: np.ndarray      # orthonormal (Euclidean) complex basis of the tangent space

    def coordinates(self, v: np.ndarray) -> tuple[np.ndarray, float]:
        """Real coordinates of rows ``v`` and the relative off-tangent residual."""
        v = np.atleast_2d(v)
        c = v @ self.unit.conj().T
        off = v - c @ self.unit
        denom = max(np.linalg.norm(v), 1e-300)
        # unit rows equal the first half of vectors, so complex c maps to (Re c, Im c)
        return np.concatenate([c.real, c.imag], axis=1), float(np.linalg.norm(off) / denom)


def real_frame(point: OrbitPoint) -> RealFrame:
    xi, gens = point.tangent
    return RealFrame(np.concatenate([xi, 1j * xi]), np.concatenate([gens, 1j * gens]), xi)


def _geometry(point: OrbitPoint, pot, scale: float) -> PointGeometry:
    return PointGeometry(point.algebra, point.X, pot, scale)


def _herm_norm(geo: PointGeometry, v: np.ndarray) -> np.ndarray:
    v = np.atleast_2d(v)
    return np.sqrt(np.abs(geo.inner(v, geo.alg.sigma(v)).real))


# ------------------------------------------------------------ spec operations
def omega_c(point: OrbitPoint, xiA: TangentVector, B: np.ndarray, scale: float = 1.0) -> complex:
    """KKS form ``-<xi_A, B>``; cross-checked against ``<X, [A, B]>`` when A is known."""
    if B is None:
        raise ValueError("the second slot must be given by its generator")
    alg = point.algebra
    val = -scale * complex(alg.inner(xiA.value, B))
    if xiA.generator is not None:
        alt = scale * complex(alg.inner(point.X, alg.bracket(xiA.generator, B)))
        if abs(alt - val) > 1e-12 * max(1.0, abs(val)):
            raise ArithmeticError(f"KKS expressions disagree: {val} vs {alt}")
    return val


def omega_I(point: OrbitPoint, jet, xiA, xiB, scale: float = 1.0) -> float:
    return float(_geometry(point, jet, scale).omega_I(xiA, xiB)[0, 0])


def metric_g(point: OrbitPoint, jet, xiA, xiB, scale: float = 1.0) -> float:
    return float(_geometry(point, jet, scale).metric(xiA, xiB)[0, 0])


def J_endo(point: OrbitPoint, jet, xi, scale: float = 1.0) -> np.ndarray:
    return _geometry(point, jet, scale).J(xi)[0]


def gram_matrix(point: OrbitPoint, pot, scale: float = 1.0) -> np.ndarray:
    """``g`` on the real basis ``{xi_k, i xi_k}``."""
    geo, frame = _geometry(point, pot, scale), real_frame(point)
    return geo.metric(frame.vectors, frame.vectors)


def j_squared_residual(point: OrbitPoint, pot, scale: float = 1.0) -> float:
    """``max ||J(J xi) + xi|| / ||xi||`` over the real tangent basis."""
    geo, frame = _geometry(point, pot, scale), real_frame(point)
    v = frame.vectors
    jj = geo.J(geo.J(v))
    return float(np.max(_herm_norm(geo, jj + v) / _herm_norm(geo, v)))


def metric_positivity(point: OrbitPoint, pot, scale: float = 1.0) -> float:
    """Smallest eigenvalue of the real Gram matrix."""
    g = gram_matrix(point, pot, scale)
    asym = np.abs(g - g.T).max() / np.abs(g).max()
    if asym > 1e-10:
        raise ArithmeticError(f"Gram matrix is not symmetric (relative {asym:.2e})")
    return float(np.linalg.eigvalsh(0.5 * (g + g.T)).min())


def triple_check(point: OrbitPoint, pot, scale: float = 1.0) -> dict:
    """Residuals of the quaternionic identities, relative to the size of ``g``.

    ``signed`` holds, for the two identities involving ``omega_c``, the signed
    discrepancy of largest magnitude so that an overall sign flip is visible.
    """
    geo, frame = _geometry(point, pot, scale), real_frame(point)
    e = frame.vectors
    je = geo.J(e)
    g = geo.metric(e, e)
    size = np.abs(g).max()
    ie, jie = 1j * e, geo.J(1j * e)
    om = geo.omega_c(e, frame.gens)
    re_diff = om.real - geo.metric(e, je)
    ij_e = 1j * je
    im_diff = om.imag - geo.metric(e, ij_e)
    out = {
        "anticommutator_residual": float(np.max(_herm_norm(geo, 1j * je + jie) / _herm_norm(geo, e))),
        "metric_I_invariance": float(np.abs(geo.metric(ie, ie) - g).max() / size),
        "metric_J_invariance": float(np.abs(geo.metric(je, je) - g).max() / size),
        "omegaJ_vs_ReOmega_c": float(np.abs(re_diff).max() / size),
        "omegaK_vs_ImOmega_c": float(np.abs(im_diff).max() / size),
    }
    _, off = frame.coordinates(je)
    out["J_tangency"] = off
    out["signed"] = {
        "omegaJ_vs_ReOmega_c": float(re_diff.flat[np.abs(re_diff).argmax()] / size),
        "omegaK_vs_ImOmega_c": float(im_diff.flat[np.abs(im_diff).argmax()] / size),
    }
    return out


# -------------------------------------------------------- finite differences
def _d_rho_along(alg, pot, scale, y, v):
    """``d rho_Y(v)`` from the first-derivative formulas of the invariants."""
    sy = alg.sigma(y)
    e1, e2 = eta_invariants(alg, y)
    jet = pot.jet(scale * e1, scale * e2)
    yy = alg.bracket(y, sy)
    d1 = 2 * scale * alg.inner(v, sy).real
    d2 = -4 * scale * alg.inner(v, alg.bracket(sy, yy)).real
    return jet.rho1 * d1 + jet.rho2 * d2


def _i_d_rho(alg, pot, scale, y, b):
    """``(I d rho)(xi_B)`` at ``Y``, with ``(I d rho)(xi) = -d rho(i xi)``."""
    return -_d_rho_along(alg, pot, scale, y, 1j * alg.bracket(b, y))


def _central(f, alg, a, x, h):
    return (f(alg.adjoint_flow(a, h, x)) - f(alg.adjoint_flow(a, -h, x))) / (2 * h)


def _richardson(deriv, h):
    d1, d2 = deriv(h), deriv(h / 2)
    return (4 * d2 - d1) / 3, abs(d2 - d1)


def fd_dIdrho(point: OrbitPoint, pot: Potential, A, B, scale: float = 1.0,
              h: float = FD_STEP) -> dict:
    """``-1/2 d(I d rho)(xi_A, xi_B)`` by central differences along the adjoint flow.

    Returns the Richardson-extrapolated value, an error estimate, the formula
    value and their discrepancy normalised by ``|xi_A|_g |xi_B|_g``.
    """
    alg, x = point.algebra, point.X

    def value(step):
        fa = _central(lambda y: _i_d_rho(alg, pot, scale, y, B), alg, A, x, step)
        fb = _central(lambda y: _i_d_rho(alg, pot, scale, y, A), alg, B, x, step)
        return fa - fb

    bracket_term = _i_d_rho(alg, pot, scale, x, -alg.bracket(A, B))
    deriv, err = _richardson(value, h)
    fd = -0.5 * (deriv - bracket_term)
    geo = _geometry(point, pot, scale)
    xa, xb = alg.bracket(A, x), alg.bracket(B, x)
    formula = float(geo.omega_I(xa, xb)[0, 0])
    norm = math.sqrt(abs(geo.metric(xa, xa)[0, 0] * geo.metric(xb, xb)[0, 0]))
    diff = abs(fd - formula)
    # a generator in the stabiliser gives xi = 0; report the absolute difference then
    return {"fd": float(fd), "fd_error": float(0.5 * err), "formula": formula,
            "agreement": float(diff / norm if norm > 0 else diff)}


def _omega_at(alg, pot, scale, y, a, b):
    geo = PointGeometry(alg, y, pot, scale)
    w = geo.omega_I(alg.bracket(a, y), alg.bracket(b, y))[0, 0]
    w_t = geo.omega_I(alg.bracket(b, y), alg.bracket(a, y))[0, 0]
    return 0.5 * (w - w_t)


def closedness_residual(point: OrbitPoint, pot: Potential, A, B, C, scale: float = 1.0,
                        h: float = FD_STEP) -> float:
    """``|d omega_I(xi_A, xi_B, xi_C)|`` normalised by the product of Hermitian norms."""
    alg, x = point.algebra, point.X

    def om(a, b):
        return lambda y: _omega_at(alg, pot, scale, y, a, b)

    def deriv(step):
        return (_central(om(B, C), alg, A, x, step) - _central(om(A, C), alg, B, x, step)
                + _central(om(A, B), alg, C, x, step))

    br = alg.bracket
    d, _ = _richardson(deriv, h)
    # [xi_P, xi_Q] = xi_{-[P, Q]}
    corr = (-_omega_at(alg, pot, scale, x, -br(A, B), C) + _omega_at(alg, pot, scale, x, -br(A, C), B)
            - _omega_at(alg, pot, scale, x, -br(B, C), A))
    total = d + corr
    if total == 0.0:
        return 0.0
    geo = _geometry(point, pot, scale)
    norms = _herm_norm(geo, np.array([br(A, x), br(B, x), br(C, x)]))
    return float(abs(total) / np.prod(norms))


# --------------------------------------------------------------- reporting
@dataclass
class Tolerances:
    identity: float = 1e-10
    fd: float = 1e-6
    closedness: float = 1e-5
    min_eigenvalue: float = 0.0


CHECKS = ("j_squared_residual", "min_metric_eigenvalue", "anticommutator_residual",
          "omegaJ_vs_ReOmega_c", "omegaK_vs_ImOmega_c", "metric_I_invariance",
          "metric_J_invariance", "dIdrho_agreement", "closedness_residual")


@dataclass
class GeometryReport:
    """Named residuals at one point with the tolerance and verdict for each."""

    j_squared_residual: float
    min_metric_eigenvalue: float
    anticommutator_residual: float
    omegaJ_vs_ReOmega_c: float
    omegaK_vs_ImOmega_c: float
    metric_I_invariance: float
    metric_J_invariance: float
    dIdrho_agreement: float | None
    closedness_residual: float | None
    tolerances: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    point: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def failures(self) -> list[str]:
        return [k for k, v in self.verdicts.items() if not v]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _verdicts(values: dict, tol: Tolerances) -> tuple[dict, dict]:
    tols, verdicts = {}, {}
    for name in CHECKS:
        v = values[name]
        if v is None:
            continue
        if name == "min_metric_eigenvalue":
            tols[name] = tol.min_eigenvalue
            verdicts[name] = bool(v > tol.min_eigenvalue)
        else:
            t = {"dIdrho_agreement": tol.fd, "closedness_residual": tol.closedness}.get(name, tol.identity)
            tols[name] = t
            verdicts[name] = bool(np.isfinite(v) and v <= t)
    return tols, verdicts


def _random_generators(alg, rng, count):
    return [alg.random_element(rng) for _ in range(count)]


def verify_point(point: OrbitPoint, pot: Potential, scale: float = 1.0,
                 tol: Tolerances | None = None, seed=0, n_pairs: int = 2,
                 n_triples: int = 1, h: float = FD_STEP) -> GeometryReport:
    """Run the full residual suite at ``point``.

    FD checks use ``n_pairs`` random pairs and ``n_triples`` random triples
    (set to 0 to skip them; the corresponding fields are then ``None``).
    """
    tol = tol or Tolerances()
    rng = np.random.default_rng(seed)
    alg = point.algebra
    values = {"j_squared_residual": j_squared_residual(point, pot, scale),
              "min_metric_eigenvalue": metric_positivity(point, pot, scale)}
    triple = triple_check(point, pot, scale)
    values.update({k: triple[k] for k in CHECKS if k in triple})
    extra = {"signed": triple["signed"], "J_tangency": triple["J_tangency"]}
    values["dIdrho_agreement"] = None
    values["closedness_residual"] = None
    if n_pairs:
        fds = [fd_dIdrho(point, pot, *_random_generators(alg, rng, 2), scale=scale, h=h)
               for _ in range(n_pairs)]
        values["dIdrho_agreement"] = max(r["agreement"] for r in fds)
        extra["dIdrho_fd_error"] = max(r["fd_error"] for r in fds)
    if n_triples:
        values["closedness_residual"] = max(
            closedness_residual(point, pot, *_random_generators(alg, rng, 3), scale=scale, h=h)
            for _ in range(n_triples))
    tols, verdicts = _verdicts(values, tol)
    geo_eta = (scale * point.eta1, scale * point.eta2)
    info = {"orbit": str(point.orbit) if point.orbit else None,
            "s": point.params[0] if point.params else None,
            "t": point.params[1] if point.params else None,
            "eta1": geo_eta[0], "eta2": geo_eta[1], "potential": repr(pot)}
    return GeometryReport(**{k: (None if values[k] is None else float(values[k])) for k in CHECKS},
                          tolerances=tols, verdicts=verdicts, point=info, extra=extra)
