import math

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings, strategies as st

from honeycomb_edge.lattice import CLASSICAL_ZIGZAG_PAIRS, canonicalize, neighbor_offsets

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

TWO_PI = 2 * math.pi
EXCEPTIONAL = (0.0, TWO_PI / 3, 2 * TWO_PI / 3, TWO_PI)


def valid_pair(a11, a12):
    if (a11, a12) == (0, 0) or math.gcd(a11, a12) != 1:
        return False
    return (a11, a12) not in CLASSICAL_ZIGZAG_PAIRS


def random_edges(n, bound=12, seed=0):
    """``n`` distinct non-classical coprime edges with entries in ``[-bound, bound]``."""
    rng = np.random.default_rng(seed)
    out = []
    seen = set()
    while len(out) < n:
        a11, a12 = (int(x) for x in rng.integers(-bound, bound + 1, size=2))
        if valid_pair(a11, a12) and (a11, a12) not in seen:
            seen.add((a11, a12))
            out.append((a11, a12))
    return out


def random_ks(n, rng, gap=1e-3):
    """``n`` quasimomenta in ``[0, 2pi]`` at least ``gap`` from every exceptional value."""
    ks = []
    while len(ks) < n:
        k = float(rng.uniform(0, TWO_PI))
        if min(abs(k - x) for x in EXCEPTIONAL) > gap:
            ks.append(k)
    return ks


@st.composite
def edges(draw, bound=12):
    a11 = draw(st.integers(-bound, bound))
    a12 = draw(st.integers(-bound, bound))
    assume(valid_pair(a11, a12))
    return a11, a12


@st.composite
def configs(draw, bound=12):
    """Canonical configurations with either termination the edge admits."""
    a11, a12 = draw(edges(bound))
    cfg = canonicalize(a11, a12, "balanced")
    if cfg.s2 != 0 and draw(st.booleans()):
        cfg = canonicalize(a11, a12, "unbalanced")
    return cfg


def regular_k():
    return st.floats(0.0, TWO_PI).filter(lambda k: min(abs(k - x) for x in EXCEPTIONAL) > 1e-3)


@pytest.fixture(scope="session")
def edge_6_1():
    cfg = canonicalize(6, 1, "balanced")
    return cfg, neighbor_offsets(cfg)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
