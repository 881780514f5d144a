"""The one-factor sl(2) model, the so(4) product model and the G2 reduction in (s, t)."""

from __future__ import annotations

import math

import numpy as np

from .algebra import build_algebra
from .geometry import PointGeometry, real_frame
from .orbits import OrbitPoint, representative, so4_components
from .errors import ParameterError
from .potentials import Potential, Sl2FamilyPotential


# ------------------------------------------------------------------ sl(2)
def sl2_point(t: float) -> OrbitPoint:
    """``X = t e`` in ``sl(2)``."""
    if not t > 0:
        raise ParameterError("t must be positive")
    alg = build_algebra("A:2")
    return OrbitPoint(alg, t * alg.element("E1,2"), params=(0.0, float(t)))


def sl2_triple():
    alg = build_algebra("A:2")
    return alg, alg.element("E1,2"), alg.element("E2,1"), alg.element("H1")


def sl2_explicit_metric(point: OrbitPoint, pot: Sl2FamilyPotential, xa, xb) -> np.ndarray:
    """The closed-form metric of the one-factor model (``rho''`` eliminated)."""
    alg, k2 = point.algebra, pot.k**2
    x, sx = point.X, point.sigma_X
    xa, xb = np.atleast_2d(xa), np.atleast_2d(xb)
    eta = k2 * alg.inner(x, sx).real
    _, d1, _ = pot.derivatives(eta)
    a_sb = -(xa @ alg.killing_matrix @ alg.sigma(xb).T)
    a_sx = alg.inner(xa, sx)
    x_sb = alg.inner(x, alg.sigma(xb))
    xsx = alg.inner(x, sx)
    inside = d1 * (a_sb * xsx - np.outer(a_sx, x_sb)) + k2 / (2 * eta * d1) * np.outer(a_sx, x_sb)
    return (2 * k2**2 / eta) * inside.real


def moment_vector_check(t: float, k: float, c: float) -> dict:
    """Solve ``g(Y, .) = d rho`` at ``X = t e``; return ``lambda`` with ``Y = lambda X``."""
    point = sl2_point(t)
    pot = Sl2FamilyPotential(k, c)
    k2 = pot.k**2
    geo = PointGeometry(point.algebra, point.X, pot, scale=k2)
    frame = real_frame(point)
    e = frame.vectors
    gram = geo.metric(e, e)
    if np.linalg.cond(gram) > 1e12:
        raise ArithmeticError("Gram matrix is singular")
    alg, x, sx = point.algebra, point.X, point.sigma_X
    # d rho(v) = rho' d eta(v) = rho' * 2 k^2 Re<v, sigma X>
    drho = geo.jet.rho1 * 2 * k2 * alg.inner(e, sx).real
    coeffs = np.linalg.solve(gram, drho)
    y = coeffs @ e
    lam = float(alg.inner(y, sx).real / alg.inner(x, sx).real)
    eta = geo.eta[0]
    return {"lambda": lam, "expected": 2 + 2 * c / (k2 * eta), "eta": eta,
            "residual": float(alg.norm(y - lam * x) / alg.norm(x))}


def sl2_J_actions(t: float, pot: Sl2FamilyPotential) -> dict:
    """``J e`` and ``J h`` at ``X = t e`` together with the expected closed forms."""
    alg, e, _, h = sl2_triple()
    point = sl2_point(t)
    geo = PointGeometry(alg, point.X, pot, scale=pot.k**2)
    _, d1, d2 = pot.derivatives(geo.eta[0])
    eta = geo.eta[0]
    je, jh = geo.J(np.array([e, h]))
    return {"Je": je, "Je_expected": 2 * t * (d1 + eta * d2) * h,
            "Jh": jh, "Jh_expected": -4 * t * d1 * e}


# ------------------------------------------------------------------ so(4)
def sl2_summands(point: OrbitPoint):
    """Bases of the two sl(2) pieces ``span{X_pm, sigma X_pm, [X_pm, sigma X_pm]}``."""
    alg = point.algebra
    out = []
    for comp in so4_components(point):
        sc = alg.sigma(comp)
        out.append(np.array([comp, sc, alg.bracket(comp, sc)]))
    return out


def _hermitian_projector(alg, basis):
    gram = alg.inner(basis[:, None, :], alg.sigma(basis)[None, :, :])

    def project(v):
        rhs = alg.inner(v[:, None, :], alg.sigma(basis)[None, :, :])
        return np.linalg.solve(gram.T, rhs.T).T @ basis

    return project


def so4_block_residual(point: OrbitPoint, pot: Potential, scale: float = 1.0) -> dict:
    """Cross-block norm of ``J`` on the embedded regular so(4) orbit.

    For ``A`` in either sl(2) summand, ``J [A, X]`` is projected onto the other
    summand; the result is the largest such norm relative to ``|J [A, X]|``.
    Also reports the commutation residuals of the splitting.
    """
    alg = point.algebra
    plus, minus = sl2_summands(point)
    xp, xm = so4_components(point)
    geo = PointGeometry(alg, point.X, pot, scale)
    worst = 0.0
    for own, other in ((plus, minus), (minus, plus)):
        xi = alg.bracket(own, np.broadcast_to(point.X, own.shape))
        jxi = geo.J(xi)
        cross = _hermitian_projector(alg, other)(jxi)
        ratio = alg.norm(cross) / np.maximum(alg.norm(jxi), 1e-300)
        worst = max(worst, float(ratio.max()))
    comm = max(float(alg.norm(alg.bracket(xp, xm))), float(alg.norm(alg.bracket(xp, alg.sigma(xm)))))
    return {"cross_block": worst, "commutation": comm}


def so4_point(s: float, t: float) -> OrbitPoint:
    """Regular so(4) orbit point ``s e_+ + t e_-`` realised inside so(8)."""
    return representative("D:8:3,1^5", s, t)


# ------------------------------------------------------------------- G2
def g2_st_jet(s: float, t: float, eps: int = 1):
    """Analytic ``(s, t)``-jet of ``rho = eps 8 sqrt(s^2 + 9 t^2)``."""
    r = math.sqrt(s * s + 9 * t * t)
    rho = eps * 8 * r
    rs, rt = eps * 8 * s / r, eps * 72 * t / r
    rss = eps * 72 * t * t / r**3
    rst = -eps * 72 * s * t / r**3
    rtt = eps * 72 * s * s / r**3
    return rho, rs, rt, rss, rst, rtt


def g2_pde_residuals(s: float, t: float, eps: int = 1) -> dict:
    """Residuals of the four equations that ``J^2 = -1`` imposes in ``(s, t)``.

    Each residual is normalised so that it is invariant under
    ``(s, t) -> (lam s, lam t)``.
    """
    _, rs, rt, rss, rst, rtt = g2_st_jet(s, t, eps)
    r1 = rs * (s * rs + t * rt) / (64 * s) - 1
    lhs_a = (s * (2 * s * rs + t * rt) * rss + t * (t * rt + 3 * s * rs) * rst + t * t * rs * rtt
             + 2 * (t * rt + s * rs) * rs)
    ra = (lhs_a - 128 * s) / (128 * s)
    lhs_b = 9 * s * rs * rss + (9 * t * rs + s * rt) * rst + t * rt * rtt + 9 * rs**2 + rt**2
    rb = (lhs_b - 576) / 576
    terms_c = (3 * s * t * (9 * t * rs + s * rt) * rss, -s * t * (s * rt - 3 * t * rs) * rtt,
               (3 * t * (s * s + 9 * t * t) * rs + s * (3 * t * t - s * s) * rt) * rst)
    rhs_c = (s * rt - 9 * t * rs) * (s * rt + 3 * t * rs)
    # the right-hand side vanishes on the solution, so normalise by the term sizes
    rc = (sum(terms_c) - rhs_c) / (sum(abs(v) for v in terms_c) + abs(rhs_c))
    branch_ii = (rt - 9 * t / s * rs) / abs(rt)
    # branch (i) forces rho_t = -2 (s/t) rho_s, and then rho_s^2 = -64
    branch_i = abs(-(rs**2) / 64 - 1)
    return {"r1": abs(r1), "rA": abs(ra), "rB": abs(rb), "rC": abs(rc),
            "branch_ii": abs(branch_ii), "branch_i_witness": branch_i}
