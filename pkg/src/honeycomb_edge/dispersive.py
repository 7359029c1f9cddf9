"""Edge states at general energy via the boundary-condition determinant.

For ``E`` off the essential spectrum, bulk solutions ``z^n xi`` solve
``det(P_k(z) - E) = 0``, a polynomial of degree ``2(n3 - n1)`` with exactly
half of its roots in the unit disc.  Decaying combinations must vanish on
the rows cut away by the termination; the determinant ``Delta(k, E)`` of
that square system vanishes exactly at edge-state energies.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.optimize import linear_sum_assignment, minimize_scalar

from .bulk import essential_slice
from .errors import (CircleHitsEssentialSpectrum, InEssentialSpectrum, MultipleRoot,
                     NotCertified, PhaseStepTooLarge, RootOnCircle, ZeroEigenvector)
from .hep import CIRCLE_TOL, SIMPLE_TOL
from .lattice import EdgeConfig, NeighborOffsets

TWO_PI = 2.0 * math.pi
ESS_MARGIN = 1e-6
PAIRING_TOL = 1e-9


@dataclass
class ModeBasis:
    k: float
    energy: complex
    roots: np.ndarray          # inside roots first, then outside
    vectors: np.ndarray        # shape (2w, 2); row j pairs with roots[j]
    width: int
    fallback_used: bool = False
    pairing_defect: float = math.nan  # real E only: mismatch of z <-> 1/conj(z)

    @property
    def inside(self) -> np.ndarray:
        return self.roots[: self.width]

    @property
    def inside_vectors(self) -> np.ndarray:
        return self.vectors[: self.width]


@dataclass
class DeltaGrid:
    k_values: np.ndarray
    e_values: np.ndarray
    log_abs_delta: np.ndarray  # natural log, NaN where masked or failed
    ess_mask: np.ndarray
    failures: int = 0


@dataclass
class WindingResult:
    k0: float
    e0: complex
    radius: float
    samples: int
    winding: int
    min_abs_delta: float


@dataclass
class Locus:
    cells: np.ndarray          # (N, 2) integer (k index, E index)
    k_values: np.ndarray = field(repr=False)
    e_values: np.ndarray = field(repr=False)

    @property
    def e_range(self) -> tuple[float, float]:
        e = self.e_values[self.cells[:, 1]]
        return float(e.min()), float(e.max())

    @property
    def k_range(self) -> tuple[float, float]:
        k = self.k_values[self.cells[:, 0]]
        return float(k.min()), float(k.max())


def _shifted_polys(off: NeighborOffsets, k):
    """Coefficient rows of ``e^{-ikm1} z^{-n1} P_plus`` and ``e^{ikm3} z^{n3} P_minus``."""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    w = off.width
    a = np.zeros((len(k), w + 1), dtype=complex)
    b = np.zeros((len(k), w + 1), dtype=complex)
    for m, n in zip(off.m, off.n):
        a[:, n - off.n[0]] += np.exp(1j * k * (m - off.m[0]))
        b[:, off.n[2] - n] += np.exp(1j * k * (off.m[2] - m))
    return a, b


def q_coefficients(off: NeighborOffsets, k: float, energy) -> np.ndarray:
    """Increasing-power coefficients of ``q_k(z, E)`` for each energy (rows)."""
    energy = np.atleast_1d(np.asarray(energy, dtype=complex))
    a, b = _shifted_polys(off, k)
    base = np.convolve(a[0], b[0])
    w = off.width
    out = np.tile(base, (len(energy), 1))
    out[:, w] -= np.exp(1j * k * (off.m[2] - off.m[0])) * energy ** 2
    return out


def p_pm(off: NeighborOffsets, k: float, z):
    """``(P_plus(z), P_minus(z))`` evaluated elementwise."""
    z = np.asarray(z, dtype=complex)
    pp = sum(np.exp(1j * k * m) * z ** n for m, n in zip(off.m, off.n))
    pm = sum(np.exp(-1j * k * m) * z ** (-n) for m, n in zip(off.m, off.n))
    return pp, pm


def _batched_roots(coeffs: np.ndarray) -> np.ndarray:
    """Roots of each row polynomial: batched companion eigenvalues + 3 Newton steps."""
    nb, deg1 = coeffs.shape
    deg = deg1 - 1
    comp = np.zeros((nb, deg, deg), dtype=complex)
    comp[:, np.arange(1, deg), np.arange(deg - 1)] = 1.0
    comp[:, :, -1] = -coeffs[:, :-1] / coeffs[:, -1:]
    z = np.linalg.eigvals(comp)
    rev = coeffs[:, ::-1]
    drev = rev[:, :-1] * np.arange(deg, 0, -1)
    for _ in range(3):
        f = _horner(rev, z)
        fp = _horner(drev, z)
        step = np.where(fp != 0, f / np.where(fp != 0, fp, 1), 0)
        znew = z - step
        better = np.abs(_horner(rev, znew)) < np.abs(f)
        z = np.where(better, znew, z)
    return z


def _horner(rev: np.ndarray, z: np.ndarray) -> np.ndarray:
    out = np.broadcast_to(rev[:, :1], z.shape).astype(complex)
    for j in range(1, rev.shape[1]):
        out = out * z + rev[:, j:j + 1]
    return out


def _split(z: np.ndarray, w: int):
    """Sort roots by modulus; return ordered roots and the circle gap."""
    order = np.argsort(np.abs(z), axis=-1)
    zs = np.take_along_axis(z, order, axis=-1)
    mod = np.abs(zs)
    # exactly w roots must lie strictly inside
    gap = np.minimum(1 - mod[..., w - 1], mod[..., w] - 1)
    return zs, gap


def _eigvecs(off, k, z, energy):
    pp, pm = p_pm(off, k, z)
    xa = pp + energy
    xb = pm + energy
    return xa, xb, pp


def mode_basis(off: NeighborOffsets, k: float, energy: complex, check_spectrum: bool = True) -> ModeBasis:
    """Bulk modes ``z^n xi`` at ``(k, E)``, disc roots first."""
    energy = complex(energy)
    if check_spectrum and abs(energy.imag) < ESS_MARGIN:
        sl = essential_slice(off, k)
        if sl.contains(energy.real, ESS_MARGIN):
            raise InEssentialSpectrum(f"E={energy} lies in the essential spectrum at k={k}")
    w = off.width
    z = _batched_roots(q_coefficients(off, k, energy))[0]
    zs, gap = _split(z, w)
    if gap < CIRCLE_TOL:
        raise RootOnCircle(f"modes do not split at (k, E)=({k}, {energy})")
    d = np.abs(zs[:, None] - zs[None, :])
    np.fill_diagonal(d, np.inf)
    if d.min() < SIMPLE_TOL:
        raise MultipleRoot(f"repeated mode root at (k, E)=({k}, {energy})")
    xa, xb, pp = _eigvecs(off, k, zs, energy)
    fallback = False
    small = np.hypot(np.abs(xa), np.abs(xb)) < 1e-12 * (1 + np.abs(pp))
    if small.any():
        # alternative null vector (P_plus, E), still analytic in E
        xa = np.where(small, pp, xa)
        xb = np.where(small, energy, xb)
        fallback = True
        if (np.hypot(np.abs(xa), np.abs(xb)) == 0).any():
            raise ZeroEigenvector(f"null vector vanishes at (k, E)=({k}, {energy})")
    pairing = math.nan
    if energy.imag == 0.0:
        pairing = _pairing_defect(zs[:w], zs[w:])
    return ModeBasis(float(k), energy, zs, np.stack([xa, xb], axis=1), w, fallback, pairing)


def _pairing_defect(inside: np.ndarray, outside: np.ndarray) -> float:
    """Largest distance in the optimal matching of ``inside`` with ``1/conj(outside)``."""
    mirror = 1.0 / np.conj(outside)
    cost = np.abs(inside[:, None] - mirror[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max()) if len(r) else 0.0


def boundary_rows(cfg: EdgeConfig, off: NeighborOffsets) -> tuple[np.ndarray, np.ndarray]:
    """Row indices ``n`` of the A-constraints and of the B-constraints."""
    rows_a = np.arange(cfg.n_b_min - off.n[2], cfg.n_a_min)
    rows_b = np.arange(cfg.n_a_min + off.n[0], cfg.n_b_min)
    return rows_a, rows_b


def boundary_matrix(cfg: EdgeConfig, off: NeighborOffsets, basis: ModeBasis) -> np.ndarray:
    rows_a, rows_b = boundary_rows(cfg, off)
    z = basis.inside
    xi = basis.inside_vectors
    top = z[None, :] ** rows_a[:, None] * xi[None, :, 0]
    bot = z[None, :] ** rows_b[:, None] * xi[None, :, 1]
    return np.vstack([top, bot])


def delta(cfg: EdgeConfig, off: NeighborOffsets, k: float, energy: complex, check_spectrum: bool = True) -> complex:
    """``Delta(k, E) = det M(k, E)`` (LU with partial pivoting)."""
    basis = mode_basis(off, k, energy, check_spectrum)
    return complex(np.linalg.det(boundary_matrix(cfg, off, basis)))


def _row_log_delta(cfg, off, k, energies, rows_a, rows_b):
    """Vectorised ``log|Delta|`` along one k row; NaN where the modes fail to split."""
    w = off.width
    out = np.full(len(energies), np.nan)
    if len(energies) == 0:
        return out, 0
    z = _batched_roots(q_coefficients(off, k, energies))
    zs, gap = _split(z, w)
    ok = gap >= CIRCLE_TOL
    zin = zs[:, :w]
    xa, xb, pp = _eigvecs(off, k, zin, energies[:, None])
    small = np.hypot(np.abs(xa), np.abs(xb)) < 1e-12 * (1 + np.abs(pp))
    xa = np.where(small, pp, xa)
    xb = np.where(small, np.broadcast_to(energies[:, None], xb.shape), xb)
    top = zin[:, None, :] ** rows_a[None, :, None] * xa[:, None, :]
    bot = zin[:, None, :] ** rows_b[None, :, None] * xb[:, None, :]
    mat = np.concatenate([top, bot], axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        _, logdet = np.linalg.slogdet(mat)
    out[ok] = logdet[ok]
    return out, int((~ok).sum())


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("HONEYCOMB_THREADS", "1")))
    except ValueError:
        return 1


def energy_grid(n_e: int, e_lim: float) -> np.ndarray:
    # written so that the grid is exactly symmetric and hits E = 0 when n_e is even
    return e_lim * (2 * np.arange(n_e + 1) - n_e) / n_e


def k_grid(n_k: int) -> np.ndarray:
    return np.arange(n_k + 1) * (TWO_PI / n_k)


def scan(cfg: EdgeConfig, off: NeighborOffsets, n_k: int = 1000, n_e: int = 1000, e_lim: float = 0.4) -> DeltaGrid:
    """``log|Delta|`` on the ``(k, E)`` grid, NaN inside the essential spectrum."""
    if n_k < 2 or n_e < 2 or not e_lim > 0:
        raise ValueError("need n_k, n_e >= 2 and e_lim > 0")
    ks = k_grid(n_k)
    es = energy_grid(n_e, e_lim)
    rows_a, rows_b = boundary_rows(cfg, off)

    def row(i):
        sl = essential_slice(off, ks[i])
        mask = sl.contains(es, ESS_MARGIN)
        vals = np.full(len(es), np.nan)
        sub, fails = _row_log_delta(cfg, off, ks[i], es[~mask].astype(complex), rows_a, rows_b)
        vals[~mask] = sub
        return mask, vals, fails

    nw = _workers()
    if nw > 1:
        with ThreadPoolExecutor(nw) as ex:
            results = list(ex.map(row, range(len(ks))))
    else:
        results = [row(i) for i in range(len(ks))]
    mask = np.array([r[0] for r in results])
    vals = np.array([r[1] for r in results])
    fails = sum(r[2] for r in results)
    return DeltaGrid(ks, es, vals, mask, fails)


DEEP_ZERO = 1e-8
DIP_DEPTH = 1.0


def deep_zeros(grid: DeltaGrid, rel: float = DEEP_ZERO) -> np.ndarray:
    """Cells where ``|Delta| < rel * median|Delta|``: zeros exact to rounding.

    Flat bands show up this way since the grid line ``E = 0`` sits on them.
    """
    vals = grid.log_abs_delta
    finite = np.isfinite(vals)
    if not finite.any():
        return np.zeros(vals.shape, dtype=bool)
    scale = np.median(vals[finite])
    with np.errstate(invalid="ignore"):
        return ~np.isnan(vals) & (vals < scale + math.log(rel))


def dip_cells(grid: DeltaGrid, depth: float = DIP_DEPTH) -> np.ndarray:
    """Cells on a curve of zeros passing between grid points.

    A simple zero at distance ``d <= h/2`` from a grid point (spacing ``h``)
    makes that point a local minimum of ``log|Delta|`` along the line, at
    least ``log 3`` below the mean of the points two steps away.  Smooth
    minima of ``|Delta|`` without a zero fall short of that.  Both the ``E``
    and ``k`` directions are checked so that steep curves are caught too.
    """
    v = grid.log_abs_delta
    out = np.zeros(v.shape, dtype=bool)
    for ax in (0, 1):
        pad = [(2, 2) if a == ax else (0, 0) for a in (0, 1)]
        p = np.pad(v, pad, constant_values=np.nan)
        near = lambda s: np.take(p, np.arange(2 + s, 2 + s + v.shape[ax]), axis=ax)
        with np.errstate(invalid="ignore"):
            out |= ((v <= near(-1)) & (v <= near(1))
                    & (v < 0.5 * (near(-2) + near(2)) - depth))
    return out


def low_delta_loci(grid: DeltaGrid, method: str = "dip", percentile: float = 1.0,
                   drop: float = 2.0, depth: float = DIP_DEPTH) -> list[Locus]:
    """Connected (8-neighbour) regions of small ``|Delta|``.

    ``method="dip"`` marks deep zeros plus local dips (see :func:`dip_cells`);
    ``method="percentile"`` marks cells with
    ``log|Delta| < percentile(log|Delta|) - drop``.
    """
    vals = grid.log_abs_delta
    finite = np.isfinite(vals)
    if method == "dip":
        below = deep_zeros(grid) | dip_cells(grid, depth)
    elif method == "percentile":
        if not finite.any():
            return []
        thr = np.percentile(vals[finite], percentile) - drop
        below = finite & (vals < thr)
    else:
        raise ValueError(f"unknown locus method {method!r}")
    labels, n = ndimage.label(below, structure=np.ones((3, 3), dtype=int))
    return [Locus(np.argwhere(labels == i), grid.k_values, grid.e_values) for i in range(1, n + 1)]


def _check_disc(off, k0, e0, radius):
    # the disc meets the real axis in [Re E0 - r', Re E0 + r']
    if abs(e0.imag) >= radius:
        return
    half = math.sqrt(radius * radius - e0.imag ** 2)
    sl = essential_slice(off, k0)
    lo, hi = e0.real - half, e0.real + half
    for sgn in (1, -1):
        b_lo, b_hi = sgn * sl.band_min, sgn * sl.band_max
        b_lo, b_hi = min(b_lo, b_hi), max(b_lo, b_hi)
        if lo <= b_hi + ESS_MARGIN and hi >= b_lo - ESS_MARGIN:
            raise CircleHitsEssentialSpectrum(
                f"disc |E - {e0}| <= {radius} meets the essential spectrum at k={k0}")


def winding(cfg: EdgeConfig, off: NeighborOffsets, k0: float, e0: complex, radius: float = 0.01,
            samples: int = 50) -> WindingResult:
    """Winding number of ``E -> Delta(k0, E)`` around a circle.

    Disc roots are matched sample to sample so that the column order of the
    boundary matrix, hence the sign of ``Delta``, varies continuously.
    """
    if radius <= 0 or samples < 16:
        raise ValueError("need radius > 0 and at least 16 samples")
    e0 = complex(e0)
    _check_disc(off, k0, e0, radius)
    rows_a, rows_b = boundary_rows(cfg, off)
    w = off.width
    energies = e0 + radius * np.exp(2j * np.pi * np.arange(samples + 1) / samples)
    z = _batched_roots(q_coefficients(off, k0, energies))
    zs, gap = _split(z, w)
    if (gap < CIRCLE_TOL).any():
        raise RootOnCircle("modes fail to split on the winding circle")
    zin = zs[:, :w].copy()
    for j in range(1, samples + 1):
        cost = np.abs(zin[j - 1][:, None] - zin[j][None, :])
        _, col = linear_sum_assignment(cost)
        zin[j] = zin[j][col]
    xa, xb, _ = _eigvecs(off, k0, zin, energies[:, None])
    top = zin[:, None, :] ** rows_a[None, :, None] * xa[:, None, :]
    bot = zin[:, None, :] ** rows_b[None, :, None] * xb[:, None, :]
    dets = np.linalg.det(np.concatenate([top, bot], axis=1))
    steps = np.angle(dets[1:] / dets[:-1])
    if np.abs(steps).max() >= np.pi / 2:
        raise PhaseStepTooLarge(f"phase step {np.abs(steps).max():.3f} rad; use more samples")
    total = steps.sum() / TWO_PI
    return WindingResult(float(k0), e0, float(radius), int(samples), int(round(total)),
                         float(np.abs(dets).min()))


def refine_zero(cfg: EdgeConfig, off: NeighborOffsets, k0: float, e_guess: float,
                radius: float = 0.01, samples: int = 64) -> float:
    """Real edge-state energy near ``e_guess``, certified by a unit winding number."""
    wr = None
    while samples <= 1024:
        try:
            wr = winding(cfg, off, k0, e_guess, radius, samples)
            break
        except PhaseStepTooLarge:
            samples *= 2
    if wr is None or wr.winding != 1:
        raise NotCertified(f"winding around E={e_guess} is {None if wr is None else wr.winding}, not 1")
    f = lambda e: abs(delta(cfg, off, k0, complex(e), check_spectrum=False))
    xs = e_guess + radius * np.linspace(-0.999, 0.999, 41)
    vals = np.array([f(x) for x in xs])
    i = int(np.clip(np.argmin(vals), 1, len(xs) - 2))
    a, b, c = xs[i - 1], xs[i], xs[i + 1]
    try:
        res = minimize_scalar(f, bracket=(a, b, c), method="golden", options={"xtol": 1e-12})
        x = float(res.x)
    except ValueError:
        x = float(b)
    if abs(x - e_guess) > radius:
        raise NotCertified("minimiser left the certified disc")
    return x
