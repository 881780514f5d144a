"""Complex simple Lie algebras with exact structure constants.

Every algebra is carried by a basis of exact (integer or rational) matrices in
a faithful representation.  Structure constants, the Killing matrix and the
compact real structure are stored as integers over a common denominator;
numerical work happens in complex double precision on coordinate vectors.

Conventions
-----------
* ``so(m)`` preserves the anti-diagonal form ``B`` (``A^t B + B A = 0``).
* ``sp(2n)`` preserves ``J = [[0, I], [-I, 0]]``.
* For the classical families ``sigma(X) = -conj(X)^t``.
* ``G2`` is generated inside ``gl(7)`` from Chevalley generators; its basis is
  a Chevalley basis with ``sigma(E_r) = -F_r`` and ``sigma(H) = -H``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.linalg import expm, qr

from ._linalg import numerical_rank, realify
from .errors import ParameterError

FAMILIES = ("A", "B", "C", "D", "G2")


@dataclass(frozen=True)
class AlgebraSpec:
    """Family and matrix-size parameter of a simple Lie algebra.

    ``m`` is the matrix size for A (``sl(m)``) and B/D (``so(m)``), and half the
    matrix size for C (``sp(2m)``).  It is ignored for G2.
    """

    family: str
    m: int | None = None

    def __post_init__(self):
        fam = self.family.upper()
        object.__setattr__(self, "family", fam)
        if fam not in FAMILIES:
            raise ParameterError(f"unknown family {self.family!r}")
        if fam == "G2":
            object.__setattr__(self, "m", None)
            return
        m = self.m
        if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
            raise ParameterError(f"family {fam} needs an integer size, got {m!r}")
        if fam == "A" and m < 2:
            raise ParameterError("sl(m) needs m >= 2")
        if fam == "B" and (m < 5 or m % 2 == 0):
            raise ParameterError("type B needs odd m >= 5")
        if fam == "D" and (m < 6 or m % 2 == 1):
            raise ParameterError("type D needs even m >= 6")
        if fam == "C" and m < 2:
            raise ParameterError("sp(2m) needs m >= 2")

    def __str__(self) -> str:
        return "G2" if self.family == "G2" else f"{self.family}:{self.m}"

    @classmethod
    def parse(cls, text: str) -> AlgebraSpec:
        """Parse ``"A:5"``, ``"D:8"`` or ``"G2"``."""
        text = text.strip()
        if text.upper() == "G2":
            return cls("G2")
        match = re.fullmatch(r"([ABCDabcd]):(\d+)", text)
        if match is None:
            raise ParameterError(f"cannot parse algebra spec {text!r}")
        return cls(match.group(1), int(match.group(2)))

    @property
    def is_classical(self) -> bool:
        return self.family != "G2"

    @property
    def defining_size(self) -> int:
        if self.family == "C":
            return 2 * self.m
        if self.family == "G2":
            return 7
        return self.m


class LieAlgebra:
    """A complex Lie algebra given by an exact matrix basis.

    Elements are complex coordinate vectors of length ``dim`` (or stacks of
    them along leading axes).  Instances are immutable once built.

    Parameters
    ----------
    name : str
    labels : sequence of str
    basis : ndarray, shape (dim, n, n)
        Integer-valued basis matrices (exact values; stored as float64).
    pivots : ndarray of int, shape (dim,)
        Flat indices into ``n*n`` entries used to read off coordinates.
    coord_num, coord_den : ndarray of int, int
        ``coords(M) = coord_num @ M.ravel()[pivots] / coord_den``.
    sc_num, sc_den : ndarray of int, int
        Structure constants ``c[i, j, k] = sc_num[i, j, k] / sc_den``.
    sigma_matrix : ndarray of int, shape (dim, dim)
        ``sigma(x) = sigma_matrix @ conj(x)``.
    spec : AlgebraSpec, optional
    """

    def __init__(self, name, labels, basis, pivots, coord_num, coord_den, sc_num, sc_den,
                 sigma_matrix, spec=None):
        self.name = name
        self.spec = spec
        self.labels = tuple(labels)
        self.dim = len(self.labels)
        self.basis = _frozen(np.asarray(basis, dtype=float))
        self.n = self.basis.shape[1]
        self.pivots = _frozen(np.asarray(pivots, dtype=np.intp))
        self.coord_num = _frozen(np.asarray(coord_num, dtype=np.int64))
        self.coord_den = int(coord_den)
        self.sc_num = _frozen(np.asarray(sc_num, dtype=np.int64))
        self.sc_den = int(sc_den)
        self.sigma_matrix = _frozen(np.asarray(sigma_matrix, dtype=np.int64))

        # Killing matrix numerators over sc_den**2: K_ij = tr(ad_i ad_j).
        c = self.sc_num.astype(float)
        _check_exact_range(c, self.dim)
        k_num = np.einsum("ikl,jlk->ij", c, c)
        self.killing_num = _frozen(np.rint(k_num).astype(np.int64))
        self.killing_den = self.sc_den**2

        self.structure_constants = _frozen(c / self.sc_den)
        self.killing_matrix = _frozen(self.killing_num / self.killing_den)
        self._coord_map = self.coord_num / self.coord_den
        self._sigma = self.sigma_matrix.astype(float)
        self._basis_flat = self.basis.reshape(self.dim, -1)
        self._compact_basis = self._build_compact_basis()

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name}, dim={self.dim})"

    # ------------------------------------------------------------------ views
    def index(self, label: str) -> int:
        return self.labels.index(label)

    def element(self, label: str) -> np.ndarray:
        """Basis element as a complex coordinate vector."""
        x = np.zeros(self.dim, dtype=complex)
        x[self.index(label)] = 1.0
        return x

    def to_matrix(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        return np.tensordot(x, self.basis, axes=([-1], [0]))

    def from_matrix(self, m: np.ndarray) -> np.ndarray:
        m = np.asarray(m)
        flat = m.reshape(m.shape[:-2] + (self.n * self.n,))
        return flat[..., self.pivots] @ self._coord_map.T

    def coords_exact(self, m) -> list[Fraction]:
        """Exact coordinates of an integer or rational matrix."""
        flat = [Fraction(v) for v in np.asarray(m, dtype=object).ravel()]
        picked = [flat[p] for p in self.pivots]
        return [sum((int(a) * b for a, b in zip(row, picked)), Fraction(0)) / self.coord_den
                for row in self.coord_num]

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x)
        if x.shape[-1] != self.dim:
            raise ValueError(f"element has length {x.shape[-1]}, algebra dimension is {self.dim}")
        return x

    # ------------------------------------------------------------ operations
    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Lie bracket via the matrix commutator (exactly antisymmetric in floats)."""
        mx, my = self.to_matrix(x), self.to_matrix(y)
        return self.from_matrix(mx @ my - my @ mx)

    def bracket_sc(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Lie bracket evaluated from the structure constants."""
        x, y = self._check(x), self._check(y)
        return np.einsum("...i,...j,ijk->...k", x, y, self.structure_constants)

    def killing(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Killing form ``tr(ad x ad y)`` (complex bilinear)."""
        x, y = self._check(x), self._check(y)
        return np.einsum("...i,ij,...j->...", x, self.killing_matrix, y)

    def inner(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """The negative of the Killing form."""
        return -self.killing(x, y)

    def sigma(self, x: np.ndarray) -> np.ndarray:
        """Compact real structure (antilinear involution)."""
        x = self._check(x)
        return np.conj(x) @ self._sigma.T

    def norm(self, x: np.ndarray) -> np.ndarray:
        """Hermitian norm ``sqrt(<x, sigma x>)``."""
        return np.sqrt(np.abs(self.inner(x, self.sigma(x))))

    def ad_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``ad x`` on coordinates: ``ad_matrix(x) @ y == [x, y]``."""
        x = self._check(x)
        return np.einsum("i,ijk->kj", x, self.structure_constants)

    def adjoint_flow(self, a: np.ndarray, t: float, x: np.ndarray) -> np.ndarray:
        """``Ad(exp(t a)) x`` computed by conjugating with a matrix exponential."""
        ma = self.to_matrix(a)
        g, ginv = expm(t * ma), expm(-t * ma)
        return self.from_matrix(g @ self.to_matrix(x) @ ginv)

    def group_element(self, a: np.ndarray, t: float = 1.0) -> np.ndarray:
        return expm(t * self.to_matrix(a))

    def conjugate(self, g: np.ndarray, x: np.ndarray) -> np.ndarray:
        """``Ad(g) x`` for a group matrix ``g``."""
        return self.from_matrix(g @ self.to_matrix(x) @ np.linalg.inv(g))

    def centralizer_dimension(self, x: np.ndarray, field: str = "complex") -> int:
        """Kernel dimension of ``a -> [a, x]`` over ``g^C`` or the compact form ``g``."""
        ad = self.ad_matrix(x)
        if field == "complex":
            return self.dim - numerical_rank(ad)
        if field == "real-compact":
            cb = self._compact_basis
            images = cb @ ad.T
            return cb.shape[0] - numerical_rank(realify(images))
        raise ParameterError(f"unknown field {field!r}")

    @property
    def compact_basis(self) -> np.ndarray:
        """Real basis (as complex coordinate rows) of the compact form ``{sigma x = x}``."""
        return self._compact_basis

    def _build_compact_basis(self) -> np.ndarray:
        eye = np.eye(self.dim, dtype=complex)
        s = self.sigma(eye)
        cands = np.concatenate([eye + s, 1j * (eye - s)])
        u, sv, vh = np.linalg.svd(realify(cands), full_matrices=False)
        r = int(np.count_nonzero(sv > 1e-9 * sv[0]))
        real_rows = vh[:r]
        return real_rows[:, : self.dim] + 1j * real_rows[:, self.dim:]

    def random_compact(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        coeffs = rng.standard_normal(self._compact_basis.shape[0])
        a = coeffs @ self._compact_basis
        return scale * a / self.norm(a)

    def random_element(self, rng: np.random.Generator) -> np.ndarray:
        z = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return z / self.norm(z)

    # --------------------------------------------------------- exact checks
    def jacobi_residual_exact(self) -> int:
        """Max |[b_i,[b_j,b_k]] + cyclic| over basis triples, in units of 1/sc_den**2."""
        c = self.sc_num.astype(float)
        # a[j, k, i, m] = sum_l c[j, k, l] c[i, l, m]: component m of [b_i, [b_j, b_k]]
        a = np.tensordot(c, c, axes=([2], [1]))
        t = np.einsum("jkim->ijkm", a)
        jac = t + np.einsum("jkim->ijkm", t) + np.einsum("kijm->ijkm", t)
        return int(np.abs(jac).max())

    def killing_invariance_residual_exact(self) -> int:
        """Max |K([b_i,b_j],b_k) + K(b_j,[b_i,b_k])|, in units of 1/sc_den**3."""
        t = np.tensordot(self.sc_num.astype(float), self.killing_num.astype(float), axes=([2], [0]))
        return int(np.abs(t + t.transpose(0, 2, 1)).max())

    def antisymmetry_residual_exact(self) -> int:
        return int(np.abs(self.sc_num + self.sc_num.transpose(1, 0, 2)).max())

    def sigma_involution_residual_exact(self) -> int:
        s = self.sigma_matrix
        return int(np.abs(s @ s - np.eye(self.dim, dtype=np.int64)).max())

    def sigma_automorphism_residual_exact(self) -> int:
        """Max |sigma[b_i,b_j] - [sigma b_i, sigma b_j]| (sigma has real integer matrix)."""
        s = self.sigma_matrix.astype(float)
        c = self.sc_num.astype(float)
        lhs = np.tensordot(c, s, axes=([2], [1]))
        # rhs[i, j, k] = sum_ab s[a, i] s[b, j] c[a, b, k]
        u = np.tensordot(s, c, axes=([0], [0]))
        rhs = np.tensordot(u, s, axes=([1], [0])).transpose(0, 2, 1)
        return int(np.abs(lhs - rhs).max())

    def hermitian_form_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of ``(x, y) -> -K(x, sigma y)``."""
        h = -(self.killing_matrix @ self._sigma)
        return float(np.linalg.eigvalsh(0.5 * (h + h.conj().T)).min())


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _check_exact_range(c: np.ndarray, dim: int) -> None:
    # Products of structure constants are summed in float64; keep them exact.
    bound = float(np.abs(c).max()) ** 2 * dim * dim * 4
    if bound >= 2.0**52:
        raise ParameterError("structure constants too large for exact float64 accumulation")


# ---------------------------------------------------------------- builders
def _unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=np.int64)
    m[i, j] = 1
    return m


def _assemble(name, spec, labels, basis, pivots, coord_num, coord_den=1, sigma_images=None,
              sigma_matrix=None):
    """Finish an algebra from integer basis matrices and a rational coordinate map."""
    basis = np.asarray(basis, dtype=np.int64)
    dim, n, _ = basis.shape
    pivots = np.asarray(pivots)
    coord_num = np.asarray(coord_num, dtype=np.int64)

    def scaled_coords(flat):
        return flat[..., pivots] @ coord_num.T

    eye = scaled_coords(basis.reshape(dim, -1))
    if not np.array_equal(eye, coord_den * np.eye(dim, dtype=np.int64)):
        raise AssertionError(f"{name}: coordinate map does not invert the basis")
    prod = np.einsum("aij,bjk->abik", basis, basis)
    comm = prod - prod.transpose(1, 0, 2, 3)
    raw = scaled_coords(comm.reshape(dim, dim, -1))
    sc_den = coord_den
    if not np.any(raw % coord_den):
        raw, sc_den = raw // coord_den, 1
    # brackets must lie in the span: re-expand and compare exactly
    if not np.array_equal(np.einsum("abl,ljk->abjk", raw, basis), sc_den * comm):
        raise AssertionError(f"{name}: basis is not closed under the bracket")
    if sigma_matrix is None:
        images = scaled_coords(sigma_images.reshape(dim, -1))
        if np.any(images % coord_den):
            raise AssertionError(f"{name}: sigma is not integral in this basis")
        sigma_matrix = (images // coord_den).T
    return LieAlgebra(name, labels, basis, pivots, coord_num, coord_den, raw, sc_den,
                      sigma_matrix, spec)


def sl_algebra(m: int, spec: AlgebraSpec | None = None) -> LieAlgebra:
    """``sl(m)``: ``E_ij`` (i != j) then ``H_i = E_ii - E_{i+1,i+1}``."""
    basis, labels, pivots = [], [], []
    for i in range(m):
        for j in range(m):
            if i != j:
                basis.append(_unit(m, i, j))
                labels.append(f"E{i + 1},{j + 1}")
                pivots.append(i * m + j)
    n_off = len(basis)
    for i in range(m - 1):
        basis.append(_unit(m, i, i) - _unit(m, i + 1, i + 1))
        labels.append(f"H{i + 1}")
        pivots.append(i * m + i)
    dim = len(basis)
    coord_num = np.eye(dim, dtype=np.int64)
    # H-coefficients are partial sums of the diagonal
    coord_num[n_off:, n_off:] = np.tril(np.ones((m - 1, m - 1), dtype=np.int64))
    basis = np.array(basis)
    return _assemble(f"sl({m})", spec, labels, basis, pivots, coord_num,
                     sigma_images=-basis.transpose(0, 2, 1))


def so_algebra(m: int, spec: AlgebraSpec | None = None) -> LieAlgebra:
    """``so(m)`` for the anti-diagonal form: ``E_ij - E_{j'i'}`` with ``i + j < m - 1``."""
    basis, labels, pivots = [], [], []
    for i in range(m):
        for j in range(m):
            if i + j < m - 1:
                jp, ip = m - 1 - j, m - 1 - i
                basis.append(_unit(m, i, j) - _unit(m, jp, ip))
                labels.append(f"E{i + 1},{j + 1}-E{jp + 1},{ip + 1}")
                pivots.append(i * m + j)
    basis = np.array(basis)
    return _assemble(f"so({m})", spec, labels, basis, pivots, np.eye(len(basis), dtype=np.int64),
                     sigma_images=-basis.transpose(0, 2, 1))


def sp_algebra(n: int, spec: AlgebraSpec | None = None) -> LieAlgebra:
    """``sp(2n)`` preserving ``[[0, I], [-I, 0]]``: blocks ``[[a, b], [c, -a^t]]``."""
    size = 2 * n
    basis, labels, pivots = [], [], []
    for i in range(n):
        for j in range(n):
            basis.append(_unit(size, i, j) - _unit(size, n + j, n + i))
            labels.append(f"A{i + 1},{j + 1}")
            pivots.append(i * size + j)
    for i in range(n):
        for j in range(i, n):
            b = _unit(size, i, n + j)
            if i != j:
                b = b + _unit(size, j, n + i)
            basis.append(b)
            labels.append(f"B{i + 1},{j + 1}")
            pivots.append(i * size + n + j)
    for i in range(n):
        for j in range(i, n):
            c = _unit(size, n + i, j)
            if i != j:
                c = c + _unit(size, n + j, i)
            basis.append(c)
            labels.append(f"C{i + 1},{j + 1}")
            pivots.append((n + i) * size + j)
    basis = np.array(basis)
    return _assemble(f"sp({size})", spec, labels, basis, pivots, np.eye(len(basis), dtype=np.int64),
                     sigma_images=-basis.transpose(0, 2, 1))


# G2 positive roots in the simple-root basis (alpha short, beta long), with the
# recipe generating a Chevalley root vector: (simple generator, previous root,
# divisor).  The divisors are the Chevalley constants p + 1.
G2_POSITIVE_ROOTS = {
    "a": (1, 0),
    "b": (0, 1),
    "a+b": (1, 1),
    "2a+b": (2, 1),
    "3a+b": (3, 1),
    "3a+2b": (3, 2),
}
_G2_RECIPE = (("a+b", "a", "b", 1), ("2a+b", "a", "a+b", 2), ("3a+b", "a", "2a+b", 3),
              ("3a+2b", "b", "3a+b", 1))
G2_SHORT_ROOTS = ("a", "a+b", "2a+b")
G2_LONG_ROOTS = ("b", "3a+b", "3a+2b")


def _g2_generators():
    def u(i, j, v=1):
        m = np.zeros((7, 7), dtype=object)
        m[:, :] = Fraction(0)
        m[i, j] = Fraction(v)
        return m

    # weights of the 7-dim module: 2a+b, a+b, a, 0, -a, -a-b, -2a-b
    ea = u(0, 1) + u(2, 3) + u(3, 4, 2) + u(5, 6)
    fa = u(1, 0) + u(3, 2, 2) + u(4, 3) + u(6, 5)
    eb = u(1, 2) + u(4, 5)
    fb = u(2, 1) + u(5, 4)
    return ea, fa, eb, fb


def _fraction_inverse(rows):
    n = len(rows)
    m = [[Fraction(v) for v in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for c in range(n):
        p = next(i for i in range(c, n) if m[i][c] != 0)
        m[c], m[p] = m[p], m[c]
        piv = m[c][c]
        m[c] = [a / piv for a in m[c]]
        for i in range(n):
            if i != c and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return [row[n:] for row in m]


def _lcm_den(values) -> int:
    den = 1
    for v in values:
        den = np.lcm(den, Fraction(v).denominator)
    return int(den)


def g2_algebra(spec: AlgebraSpec | None = None) -> LieAlgebra:
    """Exceptional ``G2`` in a Chevalley basis ``H_a, H_b, E_r, F_r``.

    Root vectors are nested brackets of the simple generators divided by the
    Chevalley constants; ``F_r`` is minus the image of ``E_r`` under the
    Chevalley involution, so ``[E_r, F_r] = H_r`` and ``[H_r, E_r] = 2 E_r``.
    """
    ea, fa, eb, fb = _g2_generators()

    def br(x, y):
        return x.dot(y) - y.dot(x)

    e = {"a": ea, "b": eb}
    f = {"a": fa, "b": fb}
    height = {"a": 1, "b": 1}
    for name, gen, prev, div in _G2_RECIPE:
        e[name] = br(e[gen], e[prev]) / div
        height[name] = height[prev] + 1
        # omega(E) = (-1)^height * nested f-bracket and F = -omega(E)
        f[name] = br(f[gen], f[prev]) / div
    for name in e:
        f[name] = f[name] * (-((-1) ** height[name]))

    names = list(G2_POSITIVE_ROOTS)
    mats = [br(ea, fa), br(eb, fb)] + [e[r] for r in names] + [f[r] for r in names]
    labels = ["H_a", "H_b"] + [f"E_{r}" for r in names] + [f"F_{r}" for r in names]
    if _lcm_den(v for m in mats for v in m.ravel()) != 1:
        raise AssertionError("G2 basis matrices are expected to be integral")
    basis = np.array([[[int(v) for v in row] for row in m] for m in mats], dtype=np.int64)
    dim = len(mats)

    # independent matrix entries, then an exact inverse on them
    flat = basis.reshape(dim, -1).T
    _, _, perm = qr(flat.T.astype(float), pivoting=True)
    pivots = np.sort(perm[:dim])
    inv = _fraction_inverse(flat[pivots].tolist())
    den = _lcm_den(v for row in inv for v in row)
    coord_num = np.array([[int(v * den) for v in row] for row in inv], dtype=np.int64)

    sigma = np.zeros((dim, dim), dtype=np.int64)
    sigma[0, 0] = sigma[1, 1] = -1
    k = len(names)
    for i in range(k):
        sigma[2 + k + i, 2 + i] = -1
        sigma[2 + i, 2 + k + i] = -1
    return _assemble("g2", spec, labels, basis, pivots, coord_num, den, sigma_matrix=sigma)


def build_algebra(spec: AlgebraSpec | str) -> LieAlgebra:
    """Construct the algebra named by ``spec`` (an AlgebraSpec or a string like ``"B:9"``)."""
    if isinstance(spec, str):
        spec = AlgebraSpec.parse(spec)
    return _build_cached(spec)


_CACHE: dict[AlgebraSpec, LieAlgebra] = {}


def _build_cached(spec: AlgebraSpec) -> LieAlgebra:
    alg = _CACHE.get(spec)
    if alg is None:
        if spec.family == "A":
            alg = sl_algebra(spec.m, spec)
        elif spec.family in ("B", "D"):
            alg = so_algebra(spec.m, spec)
        elif spec.family == "C":
            alg = sp_algebra(spec.m, spec)
        else:
            alg = g2_algebra(spec)
        _CACHE[spec] = alg
    return alg


def trace_form_factor(spec: AlgebraSpec) -> int:
    """``c`` with ``Killing(x, y) = c * tr(xy)`` in the defining representation."""
    if spec.family == "A":
        return 2 * spec.m
    if spec.family in ("B", "D"):
        return spec.m - 2
    if spec.family == "C":
        return 2 * spec.m + 2
    raise ParameterError("no trace-form identity for G2 in this realization")
