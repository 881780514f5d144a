from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkorbits.algebra import (AlgebraSpec, G2_LONG_ROOTS, G2_POSITIVE_ROOTS, G2_SHORT_ROOTS,
                              build_algebra, trace_form_factor)
from hkorbits.errors import ParameterError

SMALL = ["A:2", "A:3", "A:5", "B:5", "B:7", "D:6", "D:8", "C:2", "C:3", "G2"]
ALL_DESK = ([f"A:{m}" for m in range(2, 9)] + ["B:5", "B:7", "B:9", "D:6", "D:8", "D:10"]
            + [f"C:{n}" for n in range(2, 5)] + ["G2"])


def _ad_oracle(alg, x):
    """ad x built column by column from matrix commutators, independent of the structure constants."""
    mx = alg.to_matrix(x)
    cols = [alg.from_matrix(mx @ b - b @ mx) for b in alg.basis]
    return np.array(cols).T


@pytest.mark.parametrize("spec,dim", [("A:3", 8), ("B:9", 36), ("D:8", 28), ("C:3", 21), ("G2", 14)])
def test_dimensions(spec, dim):
    assert build_algebra(spec).dim == dim


def test_g2_has_six_positive_roots():
    alg = build_algebra("G2")
    assert len(G2_POSITIVE_ROOTS) == 6
    assert sum(lab.startswith("E_") for lab in alg.labels) == 6
    assert set(G2_SHORT_ROOTS) | set(G2_LONG_ROOTS) == set(G2_POSITIVE_ROOTS)


@pytest.mark.parametrize("text", ["A:1", "B:6", "B:3", "D:7", "C:1", "E:6", "A", "A:x"])
def test_invalid_specs(text):
    with pytest.raises(ParameterError):
        build_algebra(text)


def test_spec_roundtrip():
    for text in ALL_DESK:
        assert str(AlgebraSpec.parse(text)) == text


@pytest.mark.parametrize("spec", ALL_DESK)
def test_exact_invariants(spec):
    alg = build_algebra(spec)
    assert alg.jacobi_residual_exact() == 0
    assert alg.killing_invariance_residual_exact() == 0
    assert alg.antisymmetry_residual_exact() == 0
    assert alg.sigma_involution_residual_exact() == 0
    assert alg.sigma_automorphism_residual_exact() == 0
    assert np.array_equal(alg.killing_num, alg.killing_num.T)
    assert alg.hermitian_form_min_eigenvalue() > 0


def test_sl2_triple():
    alg = build_algebra("A:2")
    e, f, h = alg.element("E1,2"), alg.element("E2,1"), alg.element("H1")
    assert np.allclose(alg.bracket(e, f), h)
    assert np.allclose(alg.bracket(h, e), 2 * e)
    assert np.allclose(alg.bracket(h, f), -2 * f)
    assert np.allclose(alg.bracket(e, e), 0)
    assert np.allclose(alg.sigma(e), -f)
    assert np.isclose(alg.inner(e, alg.sigma(e)), 4)
    ih = 1j * h
    assert np.allclose(alg.sigma(ih), ih)
    eig = np.sort(np.linalg.eigvals(alg.ad_matrix(h)).real)
    assert np.allclose(eig, [-2, 0, 2])


def test_g2_root_triples():
    alg = build_algebra("G2")
    for r in G2_POSITIVE_ROOTS:
        e, f = alg.element(f"E_{r}"), alg.element(f"F_{r}")
        h = alg.bracket(e, f)
        assert np.allclose(alg.bracket(h, e), 2 * e)
        assert np.allclose(alg.sigma(e), -f)
    for lab in ("H_a", "H_b"):
        assert np.allclose(alg.sigma(alg.element(lab)), -alg.element(lab))


@pytest.mark.parametrize("root,expected", [("3a+2b", 8), ("b", 8), ("a", 24), ("2a+b", 24)])
def test_g2_killing_from_ad_eigenvalues(root, expected):
    # K(E, F) = K(H, H) / 2 and K(H, H) is the sum of squared ad(H) eigenvalues
    alg = build_algebra("G2")
    e, f = alg.element(f"E_{root}"), alg.element(f"F_{root}")
    h = alg.bracket(e, f)
    eig = np.linalg.eigvals(_ad_oracle(alg, h))
    assert np.isclose(np.sum(eig**2).real / 2, expected)
    assert np.isclose(alg.killing(e, f), expected)


@pytest.mark.parametrize("spec", [s for s in SMALL if s != "G2"] + ["A:8", "B:9", "C:4", "D:10"])
def test_killing_trace_identity(spec):
    alg = build_algebra(spec)
    c = trace_form_factor(alg.spec)
    rng = np.random.default_rng(7)
    for _ in range(20):
        x, y = alg.random_element(rng), alg.random_element(rng)
        tr = np.trace(alg.to_matrix(x) @ alg.to_matrix(y))
        assert abs(alg.killing(x, y) - c * tr) <= 1e-10 * max(1.0, abs(c * tr))


def test_killing_sl_example():
    for m in range(2, 7):
        alg = build_algebra(f"A:{m}")
        x = alg.element("E1,2") + alg.element("E2,1")
        assert np.isclose(alg.killing(x, x), 2 * m * 2)


@pytest.mark.parametrize("spec", SMALL)
def test_killing_matches_ad_oracle(spec):
    alg = build_algebra(spec)
    ads = [_ad_oracle(alg, b) for b in np.eye(alg.dim)]
    k = np.array([[np.trace(a @ b) for b in ads] for a in ads])
    assert np.allclose(k, alg.killing_matrix, atol=1e-10)


@pytest.mark.parametrize("spec", SMALL)
def test_bracket_agrees_with_structure_constants(spec):
    alg = build_algebra(spec)
    rng = np.random.default_rng(1)
    x, y = alg.random_element(rng), alg.random_element(rng)
    assert np.allclose(alg.bracket(x, y), alg.bracket_sc(x, y), atol=1e-12)
    assert np.allclose(alg.ad_matrix(x) @ y, alg.bracket(x, y), atol=1e-12)
    assert np.allclose(_ad_oracle(alg, x), alg.ad_matrix(x), atol=1e-12)


@pytest.mark.parametrize("spec", ["A:4", "B:5", "D:6", "C:3"])
def test_classical_sigma_is_minus_adjoint(spec):
    alg = build_algebra(spec)
    x = alg.random_element(np.random.default_rng(3))
    assert np.allclose(alg.to_matrix(alg.sigma(x)), -alg.to_matrix(x).conj().T)


def test_so_uses_antidiagonal_form():
    alg = build_algebra("B:7")
    b = np.fliplr(np.eye(7))
    x = alg.to_matrix(alg.random_element(np.random.default_rng(0)))
    assert np.allclose(x.T @ b + b @ x, 0)


def test_dimension_mismatch():
    alg = build_algebra("A:3")
    with pytest.raises(ValueError):
        alg.bracket(np.zeros(8), np.zeros(3))


@pytest.mark.parametrize("spec", ["A:3", "C:2", "G2"])
def test_adjoint_flow(spec):
    alg = build_algebra(spec)
    rng = np.random.default_rng(11)
    a, x, y = (alg.random_element(rng) for _ in range(3))
    assert np.allclose(alg.adjoint_flow(a, 0.0, x), x)
    fx, fy = alg.adjoint_flow(a, 0.3, x), alg.adjoint_flow(a, 0.3, y)
    assert abs(alg.inner(fx, fy) - alg.inner(x, y)) <= 1e-12 * max(1, abs(alg.inner(x, y)))
    lhs = alg.adjoint_flow(a, 0.3, alg.bracket(x, y))
    assert np.max(np.abs(lhs - alg.bracket(fx, fy))) <= 1e-10
    errs = []
    for h in (1e-2, 5e-3):
        d = (alg.adjoint_flow(a, h, x) - alg.adjoint_flow(a, -h, x)) / (2 * h)
        errs.append(np.max(np.abs(d - alg.bracket(a, x))))
    # second order: halving h divides the error by about four
    assert errs[1] < errs[0] / 3
    h = 1e-4
    d = (alg.adjoint_flow(a, h, x) - alg.adjoint_flow(a, -h, x)) / (2 * h)
    assert np.max(np.abs(d - alg.bracket(a, x))) <= 1e-6


def test_centralizer_dimensions():
    alg = build_algebra("A:2")
    assert alg.centralizer_dimension(np.zeros(3)) == 3
    assert alg.centralizer_dimension(alg.element("E1,2")) == 1
    assert alg.centralizer_dimension(alg.element("E1,2"), "real-compact") == 0
    for m in (3, 4, 5):
        big = build_algebra(f"A:{m}")
        regular = sum(big.element(f"E{i},{i + 1}") for i in range(1, m))
        assert big.centralizer_dimension(regular) == m - 1
    with pytest.raises(ParameterError):
        alg.centralizer_dimension(np.zeros(3), "quaternionic")


def test_compact_basis_is_sigma_fixed():
    for spec in ("A:3", "G2"):
        alg = build_algebra(spec)
        cb = alg.compact_basis
        assert cb.shape[0] == alg.dim
        assert np.allclose(alg.sigma(cb), cb)


@settings(max_examples=30, deadline=None)
@given(spec=st.sampled_from(SMALL), seed=st.integers(0, 2**32 - 1),
       a=st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False))
def test_bracket_and_form_properties(spec, seed, a):
    alg = build_algebra(spec)
    rng = np.random.default_rng(seed)
    x, y, z = (alg.random_element(rng) for _ in range(3))
    assert np.allclose(alg.bracket(x, y), -alg.bracket(y, x), atol=1e-12)
    assert np.allclose(alg.bracket(a * x + z, y), a * alg.bracket(x, y) + alg.bracket(z, y), atol=1e-10)
    jac = (alg.bracket(x, alg.bracket(y, z)) + alg.bracket(y, alg.bracket(z, x))
           + alg.bracket(z, alg.bracket(x, y)))
    assert np.max(np.abs(jac)) <= 1e-12
    assert np.isclose(alg.inner(x, y), alg.inner(y, x), atol=1e-12)
    assert abs(alg.inner(alg.bracket(x, y), z) + alg.inner(y, alg.bracket(x, z))) <= 1e-11
    assert np.allclose(alg.sigma(a * x), np.conj(a) * alg.sigma(x))
    assert np.allclose(alg.sigma(alg.sigma(x)), x)
    hxx = alg.inner(x, alg.sigma(x))
    assert abs(hxx.imag) <= 1e-12 and hxx.real > 0
    hxy, hyx = alg.inner(x, alg.sigma(y)), alg.inner(y, alg.sigma(x))
    assert np.isclose(hxy, np.conj(hyx), atol=1e-12)
