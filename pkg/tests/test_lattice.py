import math

import pytest
from hypothesis import given, strategies as st

from honeycomb_edge.errors import (ClassicalZigzagUnsupported, IncompatibleTermination,
                                   InvalidEdge, NotCoprime)
from honeycomb_edge.lattice import (CLASSICAL_ZIGZAG_PAIRS, Balance, Kind, Termination, canonicalize,
                                    classify, neighbor_offsets, raw_offsets, split_mod3,
                                    transverse_vector)

from conftest import configs, edges


def test_canonical_3_1():
    cfg = canonicalize(3, 1)
    assert (cfg.a21, cfg.a22) == (2, 1)
    assert (cfg.k1, cfg.s1, cfg.k2, cfg.s2) == (0, -1, 1, -1)
    off = neighbor_offsets(cfg)
    assert off.n == (-2, 1, 2)
    assert off.m == (2, 0, -1)


@pytest.mark.parametrize("edge, n, m", [
    ((6, 1), (-4, 2, 3), (4, -1, -2)),
    ((8, 1), (-6, 2, 3), None),
    ((4, 1), (-3, 1, 2), None),
])
def test_known_offsets(edge, n, m):
    off = neighbor_offsets(canonicalize(*edge))
    assert off.n == n
    if m is not None:
        assert off.m == m


def test_large_edge_widths():
    assert neighbor_offsets(canonicalize(25, 1)).width == 26
    off = neighbor_offsets(canonicalize(21, 34))
    assert off.n == (-25, -4, 30)
    assert off.width == 55


def test_armchair_1_1():
    cfg = canonicalize(1, 1)
    cls = classify(cfg)
    assert cfg.s2 == 0
    assert cls.kind is Kind.ARMCHAIR
    assert cls.balance is Balance.BALANCED
    assert cls.db_minus_da == 0
    assert cfg.n_a_min == cfg.n_b_min == 0


def test_6_1_zigzag_balanced():
    cls = classify(canonicalize(6, 1, Termination.BALANCED))
    assert cls.kind is Kind.ZIGZAG and cls.balance is Balance.BALANCED


def test_classical_1_minus_1():
    cfg = canonicalize(1, -1)
    cls = classify(cfg)
    assert cfg.s2 == -1
    assert cls.kind is Kind.CLASSICAL_ZIGZAG
    assert abs(abs(cls.db_minus_da) - (math.sqrt(3) / 2) / 3) < 1e-15
    with pytest.raises(ClassicalZigzagUnsupported):
        neighbor_offsets(cfg)


def test_input_errors():
    with pytest.raises(NotCoprime):
        canonicalize(2, 4)
    with pytest.raises(NotCoprime):
        canonicalize(0, 0)
    with pytest.raises(IncompatibleTermination):
        canonicalize(4, 1, "unbalanced")
    # (6,1) has s2 = -1, so only the A row can be the frontier
    with pytest.raises(IncompatibleTermination):
        canonicalize(6, 1, Termination.UNBALANCED_B_FRONTIER)
    assert issubclass(NotCoprime, InvalidEdge)


def test_unbalanced_alias():
    assert canonicalize(6, 1, "unbalanced") == canonicalize(6, 1, "unbalanced-a")
    assert canonicalize(8, 1, "unbalanced") == canonicalize(8, 1, "unbalanced-b")


def test_vertical_edges():
    for a12 in (1, -1):
        a21, a22 = transverse_vector(0, a12)
        assert a22 == 0 and 0 * a22 - a12 * a21 == 1


@given(st.integers(-1000, 1000))
def test_split_mod3(x):
    q, s = split_mod3(x)
    assert s in (-1, 0, 1) and x == 3 * q + s


@given(configs(bound=40))
def test_unimodular_and_offsets(cfg):
    assert cfg.a11 * cfg.a22 - cfg.a12 * cfg.a21 == 1
    if cfg.a11 != 0:
        assert 0 <= cfg.a21 < abs(cfg.a11)
    off = neighbor_offsets(cfg)
    n1, n2, n3 = off.n
    assert n1 < n2 < n3
    assert n1 < 0 < n3
    assert sum(off.n) == -cfg.s2
    assert off.det in (-1, 1)
    assert cfg.n_a_min + n1 <= cfg.n_b_min
    assert cfg.n_b_min - n3 <= cfg.n_a_min
    assert cfg.n_a_min == 0 and cfg.n_a_min - cfg.n_b_min in (0, cfg.s2)


@given(configs(), st.integers(-3, 3))
def test_gauge_keeps_classification(cfg, j):
    g = cfg.with_gauge(j)
    assert g.a11 * g.a22 - g.a12 * g.a21 == 1
    assert classify(g) == classify(cfg)
    assert sorted(raw_offsets(g).n) == sorted(raw_offsets(cfg).n)


@given(edges())
def test_kind_matches_s2(edge):
    cfg = canonicalize(*edge)
    kind = classify(cfg).kind
    assert (kind is Kind.ARMCHAIR) == (cfg.s2 == 0)
    assert cfg.s2 == split_mod3(edge[0] - edge[1])[1]


def test_classical_pairs_have_coinciding_offsets():
    for pair in CLASSICAL_ZIGZAG_PAIRS:
        off = raw_offsets(canonicalize(*pair))
        assert len(set(off.n)) < 3
