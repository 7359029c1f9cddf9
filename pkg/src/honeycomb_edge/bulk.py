"""Essential spectrum of the edge Hamiltonian at fixed parallel quasimomentum.

At quasimomentum ``k`` the essential spectrum is swept out by
``E = +-|h(kperp, k)|`` as ``kperp`` runs over a period, where ``h`` is the
Bloch symbol built from the hopping offsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .lattice import EdgeConfig, NeighborOffsets, raw_offsets

TWO_PI = 2.0 * math.pi
GAP_TOL = 1e-9


@dataclass(frozen=True)
class SpectrumSlice:
    k: float
    band_min: float
    band_max: float

    @property
    def gapped(self) -> bool:
        return self.band_min > GAP_TOL

    def contains(self, energy, margin: float = 0.0):
        """True where ``|E|`` lies inside the bands widened by ``margin``."""
        a = np.abs(np.asarray(energy))
        return (a >= self.band_min - margin) & (a <= self.band_max + margin)


@dataclass(frozen=True)
class GapClosing:
    k: float
    kperp: float


def bloch_symbol(off: NeighborOffsets, k, kperp):
    """``h(kperp, k) = sum_nu exp(i k m_nu) exp(i kperp n_nu)`` (broadcasts)."""
    k = np.asarray(k, dtype=float)
    kperp = np.asarray(kperp, dtype=float)
    h = 0.0
    for m, n in zip(off.m, off.n):
        h = h + np.exp(1j * (k * m + kperp * n))
    return h


def _golden(f, a: float, b: float, c: float) -> tuple[float, float]:
    """Golden-section minimum of ``f`` bracketed by ``a < b < c``."""
    try:
        res = minimize_scalar(f, bracket=(a, b, c), method="golden", options={"xtol": 1e-12})
    except ValueError:
        # flat sample triple, not a strict bracket: keep the sampled point
        return b, float(f(b))
    if res.fun > f(b):
        return b, float(f(b))
    return float(res.x), float(res.fun)


def essential_slice(off: NeighborOffsets, k: float, n_kperp: int = 64) -> SpectrumSlice:
    """Band edges ``min``/``max`` of ``|h(., k)|``.

    ``|h|^2`` is sampled on ``max(n_kperp, 64*(n3 - n1))`` points and every
    sampled local extremum that could beat the sampled optimum is refined by
    golden-section search.  The square is used because it is smooth with a
    bounded second derivative, unlike ``|h|`` near a small minimum.
    """
    width = max(off.n) - min(off.n)
    n = max(int(n_kperp), 64 * width, 64)
    dk = TWO_PI / n
    grid = np.arange(n) * dk
    vals = np.abs(bloch_symbol(off, k, grid)) ** 2
    # |f''| <= 2 (S1^2 + 3 S2) for f = |h|^2, so a sample within dk/2 of an
    # extremum is off by at most dk^2/8 times that
    s1 = sum(abs(x) for x in off.n)
    s2 = sum(x * x for x in off.n)
    slack = dk * dk / 8 * 2 * (s1 * s1 + 3 * s2) + 1e-15

    f = lambda x: abs(complex(bloch_symbol(off, k, x))) ** 2
    left, right = np.roll(vals, 1), np.roll(vals, -1)

    lo = float(vals.min())
    for i in np.flatnonzero((vals <= left) & (vals <= right) & (vals <= lo + slack)):
        lo = min(lo, _golden(f, grid[i] - dk, grid[i], grid[i] + dk)[1])
    hi = float(vals.max())
    g = lambda x: -f(x)
    for i in np.flatnonzero((vals >= left) & (vals >= right) & (vals >= hi - slack)):
        hi = max(hi, -_golden(g, grid[i] - dk, grid[i], grid[i] + dk)[1])
    return SpectrumSlice(float(k), math.sqrt(max(lo, 0.0)), min(math.sqrt(hi), 3.0))


def gap_closing_quasimomenta(cfg: EdgeConfig) -> list[GapClosing]:
    """Points ``(k, kperp)`` in ``[0, 2pi]`` where ``h`` vanishes.

    Armchair-type edges close the gap at ``k = 0`` (and ``2pi``) with two
    ``kperp`` values; zigzag-type edges at ``2pi/3`` and ``4pi/3``.
    """
    off = raw_offsets(cfg)
    b1 = off.m[1] - off.m[0]
    b2 = off.m[2] - off.m[0]
    g1 = off.n[1] - off.n[0]
    g2 = off.n[2] - off.n[0]
    d = b1 * g2 - b2 * g1
    out = []
    for sigma in (1, -1):
        k = (TWO_PI / 3 * sigma * (g1 + g2) * d) % TWO_PI
        kp = (-TWO_PI / 3 * sigma * (b1 + b2) * d) % TWO_PI
        k = _snap(k)
        kp = _snap(kp)
        out.append(GapClosing(k, kp))
        if k == 0.0:
            out.append(GapClosing(TWO_PI, kp))
    return sorted(out, key=lambda g: (g.k, g.kperp))


def _snap(x: float) -> float:
    # exact multiples of 2pi/3 come out of the modulo with rounding noise
    j = round(x / (TWO_PI / 3))
    y = j * TWO_PI / 3
    if abs(x - y) < 1e-9:
        return 0.0 if j % 3 == 0 else y
    return x


def wedge_slope(cfg: EdgeConfig) -> float:
    """Opening rate of the essential spectrum at a band crossing."""
    return math.sqrt(3) / 2 / math.sqrt(cfg.edge_length_sq)


def measured_wedge_slope(off: NeighborOffsets, k_hat: float, offsets=(0.01, 0.02, 0.03, 0.04, 0.05)) -> float:
    """Least-squares slope of the lower band edge ``band_min(k_hat + x)`` vs ``|x|``.

    Both sides of the crossing are used; points outside ``[0, 2pi]`` are skipped.
    """
    xs, ys = [], []
    for x in offsets:
        for sgn in (1, -1):
            k = k_hat + sgn * x
            if 0 <= k <= TWO_PI:
                xs.append(x)
                ys.append(essential_slice(off, k).band_min)
    xs, ys = np.array(xs), np.array(ys)
    return float(xs @ ys / (xs @ xs))


def locate_gap_closings(off: NeighborOffsets, n_k: int = 720) -> list[float]:
    """Numerically locate the ``k`` in ``[0, 2pi]`` where ``band_min`` vanishes.

    Independent of the closed-form crossing formula: scan ``band_min`` on a
    ``k`` grid, then refine each sampled local minimum below a generous
    threshold by golden-section search.
    """
    ks = np.linspace(0, TWO_PI, n_k + 1)
    bm = np.array([essential_slice(off, k).band_min for k in ks])
    dk = ks[1] - ks[0]
    out = []
    f = lambda k: essential_slice(off, min(max(k, 0.0), TWO_PI)).band_min
    for i in range(len(ks)):
        lft = bm[i - 1] if i > 0 else np.inf
        rgt = bm[i + 1] if i < n_k else np.inf
        if bm[i] <= lft and bm[i] <= rgt and bm[i] < 3 * dk:
            if i == 0 or i == n_k:
                if bm[i] < GAP_TOL:
                    out.append(float(ks[i]))
                continue
            x, fx = _golden(f, ks[i - 1], ks[i], ks[i + 1])
            if fx < 1e-7:
                out.append(x)
    return out
