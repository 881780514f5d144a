"""Cohomogeneity-two nilpotent orbits: representatives, invariants, tangent spaces."""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from ._linalg import column_space, numerical_rank
from .algebra import AlgebraSpec, LieAlgebra, build_algebra
from .errors import ParameterError, UnsupportedError

G2_LABEL = "next-to-min"
# calibrated G2 coordinates: s rides on the long highest root, t on a short root
G2_S_ROOT = "E_3a+2b"
G2_T_ROOT = "E_2a+b"


@dataclass(frozen=True)
class OrbitId:
    """A cohomogeneity-two orbit: algebra, Jordan partition (or G2 tag), optional variant."""

    algebra: AlgebraSpec
    label: tuple | str
    variant: str | None = None

    def __post_init__(self):
        _check_admissible(self)

    @classmethod
    def parse(cls, text: str) -> OrbitId:
        """Parse ``"A:5:2,2,1"``, ``"D:8:2,2,2,2:+"``, ``"B:9:3,1^6"`` or ``"G2"``."""
        text = text.strip()
        if text.upper() == "G2":
            return cls(AlgebraSpec("G2"), G2_LABEL)
        parts = text.split(":")
        if len(parts) not in (3, 4):
            raise ParameterError(f"cannot parse orbit id {text!r}")
        spec = AlgebraSpec.parse(":".join(parts[:2]))
        label = parse_partition(parts[2])
        variant = parts[3] if len(parts) == 4 else None
        return cls(spec, label, variant)

    def __str__(self) -> str:
        if self.algebra.family == "G2":
            return "G2"
        text = f"{self.algebra}:{','.join(map(str, self.label))}"
        return text + (f":{self.variant}" if self.variant else "")

    @property
    def kind(self) -> str:
        """``"A"``, ``"C"``, ``"BD2"`` for (2^4 1^*), ``"BD3"`` for (3 1^*), or ``"G2"``."""
        fam = self.algebra.family
        if fam in ("B", "D"):
            return "BD3" if self.label[0] == 3 else "BD2"
        return fam


def parse_partition(text: str) -> tuple[int, ...]:
    """``"2,2,1"`` or ``"2^4,1^2"`` to a weakly decreasing tuple."""
    parts = []
    for tok in text.replace(" ", "").split(","):
        m = re.fullmatch(r"(\d+)(?:\^(\d+))?", tok)
        if m is None:
            raise ParameterError(f"cannot parse partition {text!r}")
        parts += [int(m.group(1))] * int(m.group(2) or 1)
    return tuple(sorted((p for p in parts if p > 0), reverse=True))


def _check_admissible(oid: OrbitId) -> None:
    spec, fam = oid.algebra, oid.algebra.family
    if fam == "G2":
        if oid.label != G2_LABEL or oid.variant is not None:
            raise ParameterError("the only G2 orbit handled is the next-to-minimal one")
        return
    n = spec.defining_size
    label = tuple(oid.label)
    object.__setattr__(oid, "label", label)
    if sum(label) != n:
        raise ParameterError(f"partition {label} does not sum to {n}")
    if fam in ("A", "C"):
        ok = label == (2, 2) + (1,) * (n - 4)
        if fam == "A" and spec.m < 4:
            ok = False
    else:
        ok = label in ((3,) + (1,) * (n - 3), (2,) * 4 + (1,) * (n - 8))
    if not ok:
        raise ParameterError(f"{label} is not a cohomogeneity-two orbit of {spec}")
    very_even = fam == "D" and all(p % 2 == 0 for p in label)
    if very_even and oid.variant not in ("+", "-"):
        raise ParameterError(f"{spec} partition {label} needs a variant '+' or '-'")
    if not very_even and oid.variant is not None:
        raise ParameterError(f"variant {oid.variant!r} only applies to very even partitions")


def desk_orbits() -> list[OrbitId]:
    """Every cohomogeneity-two orbit at the desk sizes sl(4..7), so(7..10), sp(4..8) and G2."""
    ids = [f"A:{m}:2,2" + ",1" * (m - 4) for m in range(4, 8)]
    for m in range(7, 11):
        fam = "B" if m % 2 else "D"
        ids.append(f"{fam}:{m}:3,1^{m - 3}")
        if m == 8:
            ids += ["D:8:2^4:+", "D:8:2^4:-"]
        elif m > 8:
            ids.append(f"{fam}:{m}:2^4,1^{m - 8}")
    ids += [f"C:{n}:2,2" + ",1" * (2 * n - 4) for n in range(2, 5)]
    ids.append("G2")
    return [OrbitId.parse(s) for s in ids]


@dataclass(frozen=True)
class TangentVector:
    """``xi = [A, X]`` with its generator ``A`` when known."""

    value: np.ndarray
    generator: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class OrbitPoint:
    """A point ``X`` of a nilpotent orbit with cached invariants."""

    algebra: LieAlgebra
    X: np.ndarray
    orbit: OrbitId | None = None
    params: tuple[float, float] | None = None
    components: tuple[np.ndarray, np.ndarray] | None = None

    @cached_property
    def sigma_X(self) -> np.ndarray:
        return self.algebra.sigma(self.X)

    @cached_property
    def eta(self) -> tuple[float, float]:
        return eta_invariants(self.algebra, self.X)

    @property
    def eta1(self) -> float:
        return self.eta[0]

    @property
    def eta2(self) -> float:
        return self.eta[1]

    @cached_property
    def tangent(self) -> tuple[np.ndarray, np.ndarray]:
        """``(xi, gens)``: rows ``xi[k] = [gens[k], X]`` spanning the tangent space."""
        return _tangent_arrays(self.algebra, self.X)

    def tangent_basis(self) -> list[TangentVector]:
        xi, gens = self.tangent
        return [TangentVector(v, a) for v, a in zip(xi, gens)]

    @property
    def complex_dimension(self) -> int:
        return self.tangent[0].shape[0]


# ------------------------------------------------------------ representatives
def _set(mat, i, j, v):
    mat[i - 1, j - 1] = v  # 1-indexed, as the matrices are usually written


def _bd_family2(m: int, s: float, t: float) -> np.ndarray:
    """The (3 1^*) family: a 4x4 so(4)-block on a mirror-symmetric index set."""
    c = m // 2
    idx = [c - 2, c - 1, c, c + 1] if m % 2 == 0 else [c - 2, c - 1, c + 1, c + 2]
    block = np.array([[0, s, t, 0], [0, 0, 0, -t], [0, 0, 0, -s], [0, 0, 0, 0]], dtype=complex)
    x = np.zeros((m, m), dtype=complex)
    x[np.ix_(idx, idx)] = block
    return x


def _bd_family1(m: int, s: float, t: float, variant: str | None) -> np.ndarray:
    x = np.zeros((m, m), dtype=complex)
    _set(x, 3, 4, t)
    _set(x, m - 3, m - 2, -t)
    if variant == "-":
        # conjugate the s-part by W (swap e_1 and e_m with signs -1)
        _set(x, m - 1, 1, s)
        _set(x, m, 2, -s)
    else:
        _set(x, 1, 2, s)
        _set(x, m - 1, m, -s)
    return x


def _classical_matrix(oid: OrbitId, s: float, t: float) -> np.ndarray:
    spec = oid.algebra
    n = spec.defining_size
    if oid.kind == "A":
        x = np.zeros((n, n), dtype=complex)
        x[0, 1], x[2, 3] = s, t
        return x
    if oid.kind == "C":
        x = np.zeros((n, n), dtype=complex)
        half = spec.m
        x[0, half], x[1, half + 1] = s, t
        return x
    if oid.kind == "BD3":
        return _bd_family2(n, s, t)
    return _bd_family1(n, s, t, oid.variant)


def _check_so_matrix(x: np.ndarray) -> None:
    b = np.fliplr(np.eye(x.shape[0]))
    if np.any(x.T @ b + b @ x):
        raise AssertionError("representative violates A^t B + B A = 0")


def representative(oid: OrbitId | str, s: float, t: float) -> OrbitPoint:
    """The explicit two-parameter representative ``X_{s,t}`` of an orbit.

    ``t = 0`` gives a point of the minimal orbit.  For G2 the coordinates are
    calibrated so that ``eta1 = 8 (s^2 + 3 t^2)``; there ``s = 0`` is allowed.
    """
    if isinstance(oid, str):
        oid = OrbitId.parse(oid)
    s, t = float(s), float(t)
    alg = build_algebra(oid.algebra)
    if oid.kind == "G2":
        if s < 0 or t < 0 or s == t == 0:
            raise ParameterError("G2 representative needs s, t >= 0, not both zero")
        x = s * alg.element(G2_S_ROOT) + t * alg.element(G2_T_ROOT)
        return OrbitPoint(alg, x, oid, (s, t))
    if not (s > 0 and t >= 0):
        raise ParameterError("representative needs s > 0 and t >= 0")

    mat = _classical_matrix(oid, s, t)
    plus = _classical_matrix(oid, s, 0.0)
    minus = mat - plus
    if oid.algebra.family in ("B", "D"):
        _check_so_matrix(mat)
    x = alg.from_matrix(mat)
    if not np.allclose(alg.to_matrix(x), mat, rtol=0, atol=1e-14 * max(s, t)):
        raise AssertionError("representative is not in the algebra")
    point = OrbitPoint(alg, x, oid, (s, t), (alg.from_matrix(plus), alg.from_matrix(minus)))
    # below ~1e-8 relative size the t-part is invisible to the rank test
    if t > 1e-8 * s and jordan_type(alg, x) != oid.label:
        raise AssertionError(f"representative of {oid} has Jordan type {jordan_type(alg, x)}")
    return point


# ---------------------------------------------------------------- invariants
def jordan_type(alg: LieAlgebra, x: np.ndarray) -> tuple[int, ...]:
    """Jordan partition of a nilpotent element in the defining representation."""
    if alg.spec is not None and not alg.spec.is_classical:
        raise UnsupportedError("Jordan types are computed for classical algebras only")
    mat = alg.to_matrix(x)
    n = mat.shape[0]
    scale = np.abs(mat).max()
    if scale == 0:
        return (1,) * n
    ranks = [n]
    power = np.eye(n)
    for _ in range(n):
        power = power @ (mat / scale)
        ranks.append(numerical_rank(power) if np.abs(power).max() > 1e-12 else 0)
        if ranks[-1] == 0:
            break
    if ranks[-1] != 0:
        raise ParameterError("element is not nilpotent")
    # number of blocks of size >= k is rank(X^{k-1}) - rank(X^k)
    at_least = [ranks[k - 1] - ranks[k] for k in range(1, len(ranks))]
    parts = []
    for k, cnt in enumerate(at_least, start=1):
        nxt = at_least[k] if k < len(at_least) else 0
        parts += [k] * (cnt - nxt)
    return tuple(sorted(parts, reverse=True))


def eta_invariants(alg: LieAlgebra, x: np.ndarray) -> tuple[float, float]:
    """``eta1 = <X, sigma X>`` and ``eta2 = -<Y, Y>`` with ``Y = [X, sigma X]``."""
    sx = alg.sigma(x)
    y = alg.bracket(x, sx)
    return float(alg.inner(x, sx).real), float(-alg.inner(y, y).real)


def _tangent_arrays(alg: LieAlgebra, x: np.ndarray):
    # columns of -ad X are the images [b_j, X]
    m = -alg.ad_matrix(x)
    if not np.any(m):
        return np.zeros((0, alg.dim), complex), np.zeros((0, alg.dim), complex)
    r, u, sv, vh = column_space(m)
    gens = vh.conj() / sv[:, None]
    return u.T.copy(), gens


def tangent_basis(alg: LieAlgebra, x: np.ndarray) -> list[TangentVector]:
    """Basis of ``[g^C, X]``, each vector carrying a generator."""
    xi, gens = _tangent_arrays(alg, x)
    return [TangentVector(v, a) for v, a in zip(xi, gens)]


def cohomogeneity(alg: LieAlgebra, x: np.ndarray) -> int:
    """``dim_R O - dim_R (G-orbit through X)``."""
    orbit_real_dim = 2 * (alg.dim - alg.centralizer_dimension(x, "complex"))
    g_orbit_dim = alg.dim - alg.centralizer_dimension(x, "real-compact")
    return orbit_real_dim - g_orbit_dim


def so4_components(point: OrbitPoint) -> tuple[np.ndarray, np.ndarray]:
    """The split ``X = X_+ + X_-`` into the two commuting sl(2) pieces."""
    if point.components is None:
        raise UnsupportedError("point does not carry an so(4) splitting")
    return point.components


def measure_k2(oid: OrbitId | str) -> float:
    """Embedding constant ``k^2 = <e_+, sigma e_+> / 4``."""
    if isinstance(oid, str):
        oid = OrbitId.parse(oid)
    if oid.kind == "G2":
        raise UnsupportedError("G2 has no so(4) subalgebra of this kind")
    point = representative(oid, 1.0, 0.0)
    e_plus = so4_components(point)[0]
    alg = point.algebra
    return float(alg.inner(e_plus, alg.sigma(e_plus)).real) / 4.0


def k2_closed_form(oid: OrbitId | str) -> float:
    """Closed-form ``k^2`` per family (m the matrix size, or n for sp(2n))."""
    if isinstance(oid, str):
        oid = OrbitId.parse(oid)
    spec = oid.algebra
    if spec.family == "A":
        return spec.m / 2
    if spec.family in ("B", "D"):
        return (spec.m - 2) / 2
    if spec.family == "C":
        return (spec.m + 1) / 2
    raise UnsupportedError("no k^2 for G2")


def random_orbit_point(point: OrbitPoint, seed=None, scale: float = 1.0) -> OrbitPoint:
    """Move ``point`` by ``Ad(exp a)`` for a pseudo-random compact ``a``."""
    alg = point.algebra
    rng = np.random.default_rng(seed)
    a = alg.random_compact(rng, scale)
    g = alg.group_element(a)

    def move(v):
        return alg.conjugate(g, v)

    comps = None if point.components is None else tuple(move(c) for c in point.components)
    # the cached properties are per instance, so a fresh dataclass starts clean
    return replace(point, X=move(point.X), components=comps)
