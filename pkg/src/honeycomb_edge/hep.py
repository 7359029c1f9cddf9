"""Honeycomb edge polynomials ``1 + e^{i b1 k} z^g1 + e^{i b2 k} z^g2``.

Two independent routes to the roots inside the unit disc:

* :func:`roots_analytic` parametrises ``z = rho^(1/g2) e^{i theta}`` and
  inverts the monotone profile :func:`M_profile` by bisection;
* :func:`roots_numeric` takes eigenvalues of the companion matrix.

The zero-energy edge states are built from the disc roots of ``p_plus``
(B-site states) or ``p_minus`` (A-site states).
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import (DomainError, ExceptionalQuasimomentum, InvalidEdge, MultipleRoot,
                     RootOnCircle, Unsolvable)
from .lattice import NeighborOffsets

TWO_PI = 2.0 * math.pi
CIRCLE_TOL = 1e-8
EXCEPTIONAL_TOL = 1e-6
SIMPLE_TOL = 1e-8


@dataclass(frozen=True)
class HepParams:
    beta1: int
    beta2: int
    gamma1: int
    gamma2: int

    def __post_init__(self):
        if not 0 < self.gamma1 < self.gamma2:
            raise InvalidEdge(f"need 0 < gamma1 < gamma2, got {self.gamma1}, {self.gamma2}")
        if self.det not in (-1, 1):
            raise InvalidEdge(f"det[beta gamma] = {self.det}, expected +-1")

    @property
    def kappa(self) -> float:
        return self.gamma1 / self.gamma2

    @property
    def det(self) -> int:
        return self.beta1 * self.gamma2 - self.beta2 * self.gamma1

    def coeffs(self, k: float) -> np.ndarray:
        """Coefficients in increasing powers of z."""
        c = np.zeros(self.gamma2 + 1, dtype=complex)
        c[0] = 1.0
        c[self.gamma1] = np.exp(1j * self.beta1 * k)
        c[self.gamma2] = np.exp(1j * self.beta2 * k)
        return c

    def __call__(self, z, k: float):
        z = np.asarray(z, dtype=complex)
        return (1.0 + np.exp(1j * self.beta1 * k) * z ** self.gamma1
                + np.exp(1j * self.beta2 * k) * z ** self.gamma2)


def p_plus_params(off: NeighborOffsets) -> HepParams:
    b1, b2 = off.beta
    g1, g2 = off.gamma
    return HepParams(b1, b2, g1, g2)


def p_minus_params(off: NeighborOffsets) -> HepParams:
    m, n = off.m, off.n
    return HepParams(m[2] - m[1], m[2] - m[0], n[2] - n[1], n[2] - n[0])


@dataclass
class DiscRoots:
    inside: np.ndarray
    outside: np.ndarray
    min_circle_distance: float = field(default=math.inf)
    min_separation: float = field(default=math.inf)

    @property
    def count(self) -> int:
        return len(self.inside)


def _bisect(f, lo: float, hi: float, tol: float) -> float:
    """Root of a function with a sign change on ``[lo, hi]``."""
    flo = f(lo)
    if flo == 0.0:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


FLAT_TOL = 4 * sys.float_info.epsilon


def _angle(a: float, b: float, c: float) -> float:
    """Angle opposite side ``c`` of the triangle with sides ``a, b, c``.

    Kahan's formula; accurate for needle-like triangles where the law of
    cosines loses half the digits.
    """
    if a < b:
        a, b = b, a
    if b >= c:
        mu = c - (a - b)
    else:
        mu = b - (a - c)
    num = ((a - b) + c) * mu
    den = (a + (b + c)) * ((a - c) + b)
    if num <= 0.0:
        return 0.0
    if den <= 0.0:
        return math.pi
    return 2.0 * math.atan(math.sqrt(num / den))


def alpha_pair(rho1: float, rho2: float) -> tuple[float, float]:
    """Angles with ``1 + rho1 e^{i a1} + rho2 e^{i a2} = 0``, ``a1 >= 0 >= a2``."""
    if abs(rho1 - rho2) > 1 + 1e-15 or rho1 + rho2 < 1 - 1e-15 or rho1 <= 0 or rho2 <= 0:
        raise Unsolvable(f"no triangle with sides 1, {rho1}, {rho2}")
    if rho1 + rho2 - 1 <= FLAT_TOL:
        # flat triangle: inputs are only known to rounding, snap to the limit
        return math.pi, -math.pi
    # a1 = pi - (angle between the sides 1 and rho1), a2 likewise with rho2
    return math.pi - _angle(1.0, rho1, rho2), -(math.pi - _angle(1.0, rho2, rho1))


def rho_critical(kappa: float) -> float:
    """Unique ``rho`` in (0, 1) with ``rho**kappa + rho = 1``."""
    if not 0 < kappa < 1:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa}")
    return _bisect(lambda r: r ** kappa + r - 1.0, 0.0, 1.0, 1e-15)


def M_profile(kappa: float, rho: float) -> float:
    rc = rho_critical(kappa)
    if not rc - 1e-14 <= rho <= 1 + 1e-14:
        raise DomainError(f"rho={rho} outside [{rc}, 1]")
    return _M(kappa, min(max(rho, rc), 1.0))


def _M(kappa: float, rho: float) -> float:
    a1, a2 = alpha_pair(rho ** kappa, rho)
    return a1 - kappa * a2


def M_derivative(kappa: float, rho: float) -> float:
    """Closed-form derivative of the profile on the open interval (rho_c, 1)."""
    r2k = rho ** (2 * kappa)
    r = 2 * (1 + rho * rho) * r2k - r2k * r2k - (1 - rho * rho) ** 2
    if r <= 0:
        raise DomainError(f"derivative undefined at rho={rho}")
    bracket = kappa * ((1 - kappa) * r2k - 1) + (kappa - 1) * rho * rho
    return 2.0 / rho / math.sqrt(r) * bracket


def profile_inverse(kappa: float, t: float) -> float:
    """``rho`` in ``[rho_c, 1]`` with ``M(rho) = t`` (``M`` is decreasing)."""
    rc = rho_critical(kappa)
    lo_t, hi_t = 2 * math.pi / 3 * (1 + kappa), math.pi * (1 + kappa)
    if not lo_t - 1e-12 <= t <= hi_t + 1e-12:
        raise DomainError(f"t={t} outside profile range [{lo_t}, {hi_t}]")
    f = lambda r: _M(kappa, r) - t
    if f(rc) <= 0.0:
        return rc
    if f(1.0) >= 0.0:
        return 1.0
    return _bisect(f, rc, 1.0, 1e-15)


def exceptional_values(s2: int) -> tuple[float, ...]:
    if s2 == 0:
        return (0.0, TWO_PI)
    return (TWO_PI / 3, 2 * TWO_PI / 3)


def check_regular(k: float, s2: int) -> None:
    for kx in exceptional_values(s2):
        if abs(k - kx) < EXCEPTIONAL_TOL:
            raise ExceptionalQuasimomentum(f"k={k} is within {EXCEPTIONAL_TOL} of {kx}")


def in_inner(k: float) -> bool:
    """``k`` in the open interval (2pi/3, 4pi/3)."""
    return TWO_PI / 3 < k < 2 * TWO_PI / 3


def roots_analytic(p: HepParams, k: float) -> DiscRoots:
    """Roots in the open unit disc from the profile parametrisation.

    ``k`` is any real quasimomentum; it is rejected when close to a value
    where a root sits on the unit circle.
    """
    kappa = p.kappa
    g2, d = p.gamma2, p.det
    lo_t, hi_t = 2 * math.pi / 3 * (1 + kappa), math.pi * (1 + kappa)
    _reject_circle_k(p, k)
    out = []
    for sigma in (1, -1):
        base = d * sigma * k
        l_lo = math.ceil((g2 * lo_t - base) / TWO_PI - 1e-12)
        l_hi = math.floor((g2 * hi_t - base) / TWO_PI + 1e-12)
        for ell in range(l_lo, l_hi + 1):
            t = (base + TWO_PI * ell) / g2
            if not lo_t < t <= hi_t + 1e-12:
                continue
            if sigma == -1 and abs(t - hi_t) < 1e-12:
                # both signs give the same root at the critical radius
                continue
            if t >= hi_t - 1e-15:
                # critical radius: the triangle is flat and acos loses half the digits
                rho, a2 = rho_critical(kappa), -math.pi
            else:
                rho = profile_inverse(kappa, t)
                _, a2 = alpha_pair(rho ** kappa, rho)
            theta = (sigma * a2 - p.beta2 * (k + TWO_PI * d * sigma * ell)) / g2
            out.append(rho ** (1.0 / g2) * np.exp(1j * (theta % TWO_PI)))
    inside = np.array(sorted(out, key=lambda z: (np.angle(z) % TWO_PI, abs(z))), dtype=complex)
    dist = float(np.min(1 - np.abs(inside))) if len(inside) else math.inf
    return DiscRoots(inside, np.empty(0, dtype=complex), dist, _min_separation(inside))


def _reject_circle_k(p: HepParams, k: float) -> None:
    # a root on |z| = 1 needs t at the lower endpoint M(1) of the profile range
    lo_t = 2 * math.pi / 3 * (1 + p.kappa)
    for sigma in (1, -1):
        x = (p.gamma2 * lo_t - p.det * sigma * k) / TWO_PI
        if abs(x - round(x)) * TWO_PI < EXCEPTIONAL_TOL:
            raise ExceptionalQuasimomentum(f"k={k} puts a root on the unit circle")


def _min_separation(z: np.ndarray) -> float:
    if len(z) < 2:
        return math.inf
    d = np.abs(z[:, None] - z[None, :])
    d[np.diag_indices(len(z))] = np.inf
    return float(d.min())


def companion(coeffs) -> np.ndarray:
    """Companion matrix of ``sum c[j] z^j`` (increasing powers)."""
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    mat = np.zeros((n, n), dtype=complex)
    mat[1:, :-1] = np.eye(n - 1)
    mat[:, -1] = -c[:-1] / c[-1]
    return mat


def polish(coeffs, z: np.ndarray, steps: int = 3) -> np.ndarray:
    """Newton steps on all roots at once; a step is kept only if it helps."""
    c = np.asarray(coeffs, dtype=complex)[::-1]
    dc = np.polyder(c)
    z = np.array(z, dtype=complex)
    for _ in range(steps):
        f = np.polyval(c, z)
        fp = np.polyval(dc, z)
        ok = fp != 0
        znew = z.copy()
        znew[ok] = z[ok] - f[ok] / fp[ok]
        better = np.abs(np.polyval(c, znew)) < np.abs(f)
        z = np.where(better, znew, z)
    return z


def residual_scale(coeffs, z) -> np.ndarray:
    """``sum |c_j| |z|^j``: the natural size of a polynomial value at ``z``."""
    c = np.abs(np.asarray(coeffs, dtype=complex))[::-1]
    return np.polyval(c, np.abs(z))


def roots_numeric(coeffs, circle_tol: float = CIRCLE_TOL, check_simple: bool = False) -> DiscRoots:
    """All roots of ``sum c[j] z^j`` split by the unit circle."""
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    if len(c) == 0 or c[-1] == 0:
        raise DomainError("leading coefficient vanishes")
    if len(c) == 1:
        z = np.empty(0, dtype=complex)
    else:
        z = polish(c, np.linalg.eigvals(companion(c)))
    mod = np.abs(z)
    dist = float(np.min(np.abs(mod - 1))) if len(z) else math.inf
    if dist < circle_tol:
        raise RootOnCircle(f"root at distance {dist:.3g} from the unit circle")
    sep = _min_separation(z)
    if check_simple and sep < SIMPLE_TOL:
        raise MultipleRoot(f"roots {sep:.3g} apart")
    inside = z[mod < 1]
    outside = z[mod > 1]
    order = np.lexsort((np.abs(inside), np.angle(inside) % TWO_PI))
    return DiscRoots(inside[order], outside, dist, sep)


def count_p(off: NeighborOffsets, k: float, s2: int) -> int:
    """Number of disc roots of ``p_plus`` from the closed-form count."""
    check_regular(k, s2)
    return -off.n[0] - s2 * int(in_inner(k))


def count_q(off: NeighborOffsets, k: float, s2: int) -> int:
    """Number of disc roots of ``p_minus`` from the closed-form count."""
    check_regular(k, s2)
    return off.n[2] + s2 * int(in_inner(k))


def count_hep(p: HepParams, k: float) -> int:
    """Disc-root count of a general edge polynomial from ``gamma1 + gamma2``."""
    kk = k % TWO_PI
    khat, shat = divmod(p.gamma1 + p.gamma2 + 1, 3)
    shat -= 1
    return khat + shat * int(in_inner(kk))
