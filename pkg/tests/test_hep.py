import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy.optimize import linear_sum_assignment

from honeycomb_edge.errors import DomainError, ExceptionalQuasimomentum, RootOnCircle, Unsolvable
from honeycomb_edge.flatband import Sublattice, edge_polynomial
from honeycomb_edge.hep import (M_derivative, M_profile, alpha_pair, count_hep, count_p, count_q,
                                p_minus_params, p_plus_params, profile_inverse, rho_critical,
                                roots_analytic, roots_numeric)
from honeycomb_edge.lattice import canonicalize, neighbor_offsets, raw_offsets

from conftest import configs, regular_k

KAPPAS = [j / 10 for j in range(1, 10)]


def match_distance(a, b):
    if len(a) != len(b):
        return math.inf
    if len(a) == 0:
        return 0.0
    cost = np.abs(np.asarray(a)[:, None] - np.asarray(b)[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def test_alpha_pair_examples():
    a1, a2 = alpha_pair(1, 1)
    assert abs(a1 - 2 * math.pi / 3) < 1e-14 and abs(a2 + 2 * math.pi / 3) < 1e-14
    a1, a2 = alpha_pair(0.4, 0.6)
    assert abs(a1 - math.pi) < 1e-7 and abs(a2 + math.pi) < 1e-7
    a1, a2 = alpha_pair(0.9, 0.8)
    assert abs(1 + 0.9 * np.exp(1j * a1) + 0.8 * np.exp(1j * a2)) < 1e-12
    with pytest.raises(Unsolvable):
        alpha_pair(0.2, 0.3)
    with pytest.raises(Unsolvable):
        alpha_pair(3.0, 1.0)


@given(st.floats(0.05, 2.0), st.floats(0.05, 2.0))
def test_alpha_pair_closes_triangle(r1, r2):
    assume(abs(r1 - r2) <= 1 and r1 + r2 >= 1)
    a1, a2 = alpha_pair(r1, r2)
    assert 0 <= a1 <= math.pi and -math.pi <= a2 <= 0
    assert abs(1 + r1 * np.exp(1j * a1) + r2 * np.exp(1j * a2)) < 1e-7


def test_rho_critical_values():
    assert abs(rho_critical(0.5) - (3 - math.sqrt(5)) / 2) < 1e-14
    assert abs(rho_critical(1 - 1e-9) - 0.5) < 1e-8
    with pytest.raises(DomainError):
        rho_critical(1.0)


@given(st.floats(0.001, 0.999))
def test_rho_critical_defining_equation(kappa):
    rc = rho_critical(kappa)
    assert abs(rc ** kappa + rc - 1) < 1e-13


@pytest.mark.parametrize("kappa", KAPPAS)
def test_profile_endpoints(kappa):
    rc = rho_critical(kappa)
    assert abs(M_profile(kappa, rc) - math.pi * (1 + kappa)) < 1e-12
    assert abs(M_profile(kappa, 1.0) - 2 * math.pi / 3 * (1 + kappa)) < 1e-12


def test_profile_half():
    assert abs(M_profile(0.5, rho_critical(0.5)) - 1.5 * math.pi) < 1e-12
    assert abs(M_profile(0.5, 1.0) - math.pi) < 1e-12
    with pytest.raises(DomainError):
        M_profile(0.5, 0.1)


@pytest.mark.parametrize("kappa", KAPPAS)
def test_profile_monotone_and_derivative(kappa):
    rc = rho_critical(kappa)
    rhos = np.linspace(rc, 1, 1002)[1:-1]
    vals = np.array([M_profile(kappa, r) for r in rhos])
    assert np.all(np.diff(vals) < 0)
    for r in rhos:
        d = M_derivative(kappa, r)
        assert d < 0
        # central difference with a step well inside (rc, 1)
        h = 1e-5 * min(r - rc, 1 - r, 0.01)
        fd = (M_profile(kappa, r + h) - M_profile(kappa, r - h)) / (2 * h)
        assert abs(fd - d) <= 1e-6 * abs(d)


@pytest.mark.parametrize("kappa", [0.25, 0.5, 0.8])
def test_profile_inverse_roundtrip(kappa):
    rc = rho_critical(kappa)
    for r in np.linspace(rc, 1, 23):
        t = M_profile(kappa, r)
        assert abs(profile_inverse(kappa, t) - r) < 1e-9


def test_counts_3_1():
    off = neighbor_offsets(canonicalize(3, 1))
    p = p_plus_params(off)
    assert (p.gamma1, p.gamma2) == (3, 4)
    assert roots_analytic(p, math.pi).count == 3
    assert roots_analytic(p, 0.1).count == 2
    assert count_p(off, math.pi, -1) == 3 and count_q(off, math.pi, -1) == 1
    assert count_p(off, 0.1, -1) == 2 and count_q(off, 0.1, -1) == 2
    for k in (math.pi, 0.1):
        assert roots_numeric(p.coeffs(k)).count == count_p(off, k, -1)
        assert roots_numeric(p_minus_params(off).coeffs(k)).count == count_q(off, k, -1)


def test_numeric_residuals_3_1():
    p = p_plus_params(neighbor_offsets(canonicalize(3, 1)))
    dr = roots_numeric(p.coeffs(math.pi))
    z = np.concatenate([dr.inside, dr.outside])
    assert len(z) == 4
    assert np.abs(p(z, math.pi)).max() < 1e-12


def test_root_on_circle():
    with pytest.raises(RootOnCircle):
        roots_numeric([-1, 0, 1])


def test_exceptional_rejected():
    off = neighbor_offsets(canonicalize(6, 1))
    with pytest.raises(ExceptionalQuasimomentum):
        count_p(off, 2 * math.pi / 3, -1)
    with pytest.raises(ExceptionalQuasimomentum):
        roots_analytic(p_plus_params(off), 2 * math.pi / 3)


@given(configs(), regular_k())
def test_analytic_matches_numeric(cfg, k):
    off = neighbor_offsets(cfg)
    for p in (p_plus_params(off), p_minus_params(off)):
        an = roots_analytic(p, k)
        nu = roots_numeric(p.coeffs(k), check_simple=True)
        assert match_distance(an.inside, nu.inside) < 1e-9
        assert nu.min_separation > 1e-8
        assert count_hep(p, k) == nu.count


@given(configs(), regular_k())
def test_conjugation_symmetry(cfg, k):
    off = neighbor_offsets(cfg)
    plus = roots_numeric(p_plus_params(off).coeffs(k))
    minus = roots_numeric(p_minus_params(off).coeffs(k))
    zp = np.concatenate([plus.inside, plus.outside])
    zm = np.concatenate([minus.inside, minus.outside])
    assert match_distance(1 / np.conj(zp), zm) < 1e-9 * max(1.0, np.abs(zm).max())
    assert plus.count + minus.count == off.width


@given(configs(), regular_k(), st.integers(-2, 2))
def test_gauge_rotates_roots(cfg, k, j):
    g = cfg.with_gauge(j)
    for sub in Sublattice:
        z0 = roots_numeric(edge_polynomial(raw_offsets(cfg), k, sub)).inside
        zj = roots_numeric(edge_polynomial(raw_offsets(g), k, sub)).inside
        assert match_distance(np.exp(1j * j * k) * z0, zj) < 1e-9
