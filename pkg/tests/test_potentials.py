from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from hkorbits.errors import DomainError, ParameterError
from hkorbits.potentials import (G2Potential, ProductFamilyPotential, Sl2FamilyPotential,
                                 TheoremPotential, jet_fd_validate, parse_potential)


def classical_eta(k, s, t):
    k2 = k * k
    return 4 * k2 * (s * s + t * t), 8 * k2 * (s**4 + t**4)


def g2_eta(s, t):
    return 8 * (s * s + 3 * t * t), 16 * (s**4 + 6 * s * s * t * t + 3 * t**4)


@pytest.mark.parametrize("k2", [1.5, 2.0, 3.5, 4.0])
def test_theorem_potential_is_linear_in_st(k2):
    # on the classical slice the potential is 4 k^2 (s + t)
    k = math.sqrt(k2)
    pot = TheoremPotential(k)
    for s, t in [(1, 0.5), (0.3, 2), (1.7, 1.1)]:
        assert math.isclose(pot.value(*classical_eta(k, s, t)), 4 * k2 * (s + t), rel_tol=1e-12)


def test_g2_potential_in_st():
    for eps in (1, -1):
        pot = G2Potential(eps)
        for s, t in [(1, 1), (0.3, 2), (2, 0.4), (0, 1)]:
            want = eps * 8 * math.sqrt(s * s + 9 * t * t)
            assert math.isclose(pot.value(*g2_eta(s, t)), want, rel_tol=1e-12)


def test_family_at_zero_matches_theorem():
    k = math.sqrt(2.5)
    fam, thm = ProductFamilyPotential(k, 0.0), TheoremPotential(k)
    for s, t in [(1, 0.5), (0.4, 1.9)]:
        a, b = fam.jet(*classical_eta(k, s, t)), thm.jet(*classical_eta(k, s, t))
        assert np.allclose(list(a.as_dict().values()), list(b.as_dict().values()), rtol=1e-9, atol=1e-12)


def test_sl2_family_reduces_at_zero():
    pot = Sl2FamilyPotential(1.3, 0.0)
    for eta in (0.5, 2, 9):
        assert math.isclose(pot.derivatives(eta)[0], 2 * 1.3 * math.sqrt(eta))


@pytest.mark.parametrize("k,c", [(0.5, 0), (1, 0.3), (2, 1), (1.5, 5)])
def test_sl2_ode(k, c):
    pot = Sl2FamilyPotential(k, c)
    for eta in (0.1, 1, 10, 100):
        assert abs(pot.ode_residual(eta)) <= 1e-12 * max(1, k * k)
        # rho' = sqrt(k^2 eta + c) / eta, and rho'' from a difference of rho'
        _, d1, d2 = pot.derivatives(eta)
        assert math.isclose(d1, math.sqrt(k * k * eta + c) / eta)
        h = 1e-5 * eta
        fd = (pot.derivatives(eta + h)[1] - pot.derivatives(eta - h)[1]) / (2 * h)
        assert math.isclose(fd, d2, rel_tol=1e-7)
        fd0 = (pot.derivatives(eta + h)[0] - pot.derivatives(eta - h)[0]) / (2 * h)
        assert math.isclose(fd0, d1, rel_tol=1e-7)


def test_product_family_st_roundtrip():
    k = math.sqrt(3.0)
    pot = ProductFamilyPotential(k, 0.3)
    for s, t in [(1, 0.5), (0.3, 2), (1.7, 1.1)]:
        s2, t2 = pot.st_from_eta(*classical_eta(k, s, t))
        assert math.isclose(s2, max(s, t), rel_tol=1e-12)
        assert math.isclose(t2, min(s, t), rel_tol=1e-10)


def _fd_cases():
    k = math.sqrt(2.0)
    yield TheoremPotential(k), classical_eta(k, 1.0, 0.4)
    yield TheoremPotential(k), classical_eta(k, 0.3, 1.9)
    yield G2Potential(1), g2_eta(1.0, 0.7)
    yield G2Potential(-1), g2_eta(0.4, 1.3)
    yield ProductFamilyPotential(k, 1.0), classical_eta(k, 1.2, 0.5)
    yield Sl2FamilyPotential(k, 0.3), (2.0, 0.0)


@pytest.mark.parametrize("pot,eta", list(_fd_cases()), ids=repr)
def test_jet_matches_finite_differences(pot, eta):
    res = jet_fd_validate(pot, *eta) if eta[1] else None
    if res is None:
        # eta2 is irrelevant here; vary eta1 only
        j = pot.jet(eta[0])
        h = 1e-4 * eta[0]
        assert math.isclose((pot.jet(eta[0] + h).rho - pot.jet(eta[0] - h).rho) / (2 * h), j.rho1,
                            rel_tol=1e-7)
        return
    assert res["max_error"] <= 1e-6, res


def test_domain_errors():
    pot = TheoremPotential(math.sqrt(2.0))
    boundary = classical_eta(math.sqrt(2.0), 1.0, 0.0)
    assert math.isfinite(pot.value(*boundary))
    with pytest.raises(DomainError):
        pot.jet(*boundary)
    with pytest.raises(DomainError):
        pot.jet(-1.0, 1.0)
    with pytest.raises(DomainError):
        pot.value(10.0, 100.0)
    with pytest.raises(DomainError):
        G2Potential().jet(*g2_eta(1.0, 0.0))
    fam = ProductFamilyPotential(1.0, 1.0)
    with pytest.raises(DomainError):
        fam.jet(*classical_eta(1.0, 1.0, 1.0 + 1e-5))
    with pytest.raises(DomainError):
        Sl2FamilyPotential(1.0).derivatives(0.0)


def test_parameter_errors():
    for bad in (lambda: TheoremPotential(0), lambda: G2Potential(2),
                lambda: Sl2FamilyPotential(1, -1), lambda: ProductFamilyPotential(-1, 0)):
        with pytest.raises(ParameterError):
            bad()


def test_parse_potential():
    assert isinstance(parse_potential("theorem", 2.0), TheoremPotential)
    assert parse_potential("g2:eps=-1").eps == -1
    p = parse_potential("family:c=0.5", 1.5)
    assert isinstance(p, ProductFamilyPotential) and p.c == 0.5 and p.k == 1.5
    p = parse_potential("sl2:c=1,k=3")
    assert isinstance(p, Sl2FamilyPotential) and p.k == 3
    for bad in ("nope", "theorem", "g2:c=1", "family:c=abc"):
        with pytest.raises(ParameterError):
            parse_potential(bad)


@settings(max_examples=40, deadline=None)
@given(k2=st.sampled_from([1.5, 2.0, 2.5, 3.0, 4.0]), s=st.floats(0.2, 3.0), t=st.floats(0.2, 3.0),
       kind=st.sampled_from(["theorem", "family0", "family1"]))
def test_classical_jets_fd(k2, s, t, kind):
    assume(abs(s - t) > 0.05 * max(s, t))
    k = math.sqrt(k2)
    pot = {"theorem": TheoremPotential(k), "family0": ProductFamilyPotential(k, 0.0),
           "family1": ProductFamilyPotential(k, 1.0)}[kind]
    eta = classical_eta(k, s, t)
    jet = pot.jet(*eta)
    assert np.allclose(jet.hessian, jet.hessian.T)
    assert jet_fd_validate(pot, *eta)["max_error"] <= 1e-5


@settings(max_examples=30, deadline=None)
@given(s=st.floats(0.0, 3.0), t=st.floats(0.2, 3.0), eps=st.sampled_from([1, -1]))
def test_g2_jet_fd(s, t, eps):
    pot = G2Potential(eps)
    assert jet_fd_validate(pot, *g2_eta(s, t))["max_error"] <= 1e-5


def test_worked_values():
    k = math.sqrt(2.5)
    assert math.isclose(TheoremPotential(k).value(20, 40), 20)
    assert math.isclose(G2Potential().value(24, 48), 24)
    assert math.isclose(G2Potential().value(*g2_eta(1, 1)), 8 * math.sqrt(10))
    assert g2_eta(1, 1) == (32, 160)
    # minimal-orbit boundary eta2 = eta1^2 / 2 (k = 1)
    assert math.isclose(TheoremPotential(1.0).value(6.0, 18.0), 2 * math.sqrt(6.0))
    for pot in (TheoremPotential(1.7), G2Potential()):
        e1, e2, lam = 30.0, 100.0, 1.8
        assert math.isclose(pot.value(lam**2 * e1, lam**4 * e2), lam * pot.value(e1, e2))
    assert jet_fd_validate(TheoremPotential(1.0), 10, 40)["max_error"] <= 1e-6
    assert jet_fd_validate(G2Potential(), 24, 48)["max_error"] <= 1e-6


def test_sl2_worked_values():
    k = 1.9
    assert math.isclose(Sl2FamilyPotential(k, 0).derivatives(4)[1], k / 2)
    for c in (0.0, 0.7):
        pot = Sl2FamilyPotential(k, c)
        for t in (0.3, 1.1):
            # X = t e has eta = 4 k^2 t^2, so d rho / dt = rho' * 8 k^2 t
            d_dt = pot.derivatives(4 * k * k * t * t)[1] * 8 * k * k * t
            assert math.isclose(d_dt, math.sqrt(16 * k**4 + 4 * c / (t * t)))


def test_product_family_symmetric_and_reduces():
    k = math.sqrt(3.5)
    pot = ProductFamilyPotential(k, 0.8)
    a, b = pot.jet_at_st(1.3, 0.4), pot.jet_at_st(0.4, 1.3)
    assert np.allclose(list(a.as_dict().values()), list(b.as_dict().values()), rtol=1e-12)
    rng = np.random.default_rng(17)
    fam, thm = ProductFamilyPotential(k, 0.0), TheoremPotential(k)
    for _ in range(100):
        s, t = rng.uniform(0.05, 3.0, size=2)
        if abs(s - t) < 0.01:
            continue
        ja, jb = fam.jet(*classical_eta(k, s, t)), thm.jet(*classical_eta(k, s, t))
        for x, y in zip(ja.as_dict().values(), jb.as_dict().values()):
            assert abs(x - y) <= 1e-10 * max(1.0, abs(y))
