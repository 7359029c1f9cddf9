"""Zero-energy (flat band) edge states.

At ``E = 0`` the A- and B-sublattice equations decouple.  B-site states are
built from the disc roots of ``p_plus`` and A-site states from those of
``p_minus``; with ``r`` disc roots and ``r - 1`` boundary constraints the
solution space is one-dimensional whenever it is nonzero.

Three equivalent expressions for the amplitudes are provided (composition
sum, Fourier integral, partial fractions) together with a closed-form norm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from . import hamiltonian
from .errors import ExceptionalQuasimomentum, IllConditioned, NoState, OutOfBand
from .hep import EXCEPTIONAL_TOL, exceptional_values, in_inner, roots_numeric
from .lattice import EdgeClass, EdgeConfig, NeighborOffsets, raw_offsets

TRUNCATION = 1e-16
MIN_QUADRATURE = 4096
SLOW_DECAY = 1 - 1e-4
MAX_LENGTH = 1 << 22


class Sublattice(enum.Enum):
    A = "A"
    B = "B"


class KInterval(enum.Enum):
    INNER = "inner"      # (2pi/3, 4pi/3)
    OUTER = "outer"      # [0, 2pi] minus [2pi/3, 4pi/3]
    EMPTY = "empty"


class Formula(enum.Enum):
    CONVOLUTION = "convolution"
    FOURIER = "fourier"
    PARTIAL_FRACTIONS = "partial-fractions"


@dataclass(frozen=True)
class FlatBandVerdict:
    exists: bool
    sublattice: Sublattice | None
    interval: KInterval
    dimension: int


@dataclass
class FlatBandState:
    base_index: int
    amplitudes: np.ndarray
    sublattice: Sublattice
    k: float
    norm: float
    roots: np.ndarray
    formula: Formula
    slow_decay: bool = False

    @property
    def as_pair(self):
        """``(psi_a, psi_b)`` sublattice vectors for :mod:`hamiltonian`."""
        vec = (self.base_index, self.amplitudes)
        if self.sublattice is Sublattice.A:
            return vec, hamiltonian.EMPTY
        return hamiltonian.EMPTY, vec


def is_exceptional(k: float, s2: int) -> bool:
    return any(abs(k - kx) < EXCEPTIONAL_TOL for kx in exceptional_values(s2))


def flat_band_interval(cfg: EdgeConfig) -> tuple[Sublattice | None, KInterval]:
    d = cfg.n_a_min - cfg.n_b_min
    if cfg.s2 == 0:
        return None, KInterval.EMPTY
    # the dimension count d - s2*1_I (B sites) or s2*1_I - d (A sites) is 0 or 1
    if d == 0:
        return (Sublattice.B if cfg.s2 == -1 else Sublattice.A), KInterval.INNER
    return (Sublattice.A if cfg.s2 == -1 else Sublattice.B), KInterval.OUTER


def verdict(cls: EdgeClass | None, cfg: EdgeConfig, k: float) -> FlatBandVerdict:
    """Existence, sublattice and dimension of zero-energy states at ``k``."""
    sub, interval = flat_band_interval(cfg)
    if is_exceptional(k, cfg.s2):
        return FlatBandVerdict(False, None, interval, 0)
    x = cfg.s2 * int(in_inner(k))
    d = cfg.n_a_min - cfg.n_b_min
    if x < d:
        return FlatBandVerdict(True, Sublattice.B, interval, d - x)
    if x > d:
        return FlatBandVerdict(True, Sublattice.A, interval, x - d)
    return FlatBandVerdict(False, None, interval, 0)


def edge_polynomial(off: NeighborOffsets, k: float, sublattice: Sublattice) -> np.ndarray:
    """Coefficients (increasing powers) of ``p_plus`` (B) or ``p_minus`` (A).

    Coinciding transverse offsets are merged, so this also covers the
    classical zigzag edges.
    """
    n1, n3 = off.n[0], off.n[2]
    c = np.zeros(n3 - n1 + 1, dtype=complex)
    for m, n in zip(off.m, off.n):
        if sublattice is Sublattice.B:
            c[n - n1] += np.exp(1j * k * (m - off.m[0]))
        else:
            c[n3 - n] += np.exp(1j * k * (off.m[2] - m))
    return c


def _nbase(cfg: EdgeConfig, off: NeighborOffsets, sub: Sublattice) -> int:
    if sub is Sublattice.B:
        return cfg.n_a_min + off.n[0]
    return cfg.n_b_min - off.n[2]


def disc_roots(off: NeighborOffsets, k: float, sub: Sublattice) -> np.ndarray:
    c = np.trim_zeros(edge_polynomial(off, k, sub), "b")
    return roots_numeric(c).inside


def convolution_amplitudes(roots, length: int) -> np.ndarray:
    """Composition-sum amplitudes: product of the geometric series of each root."""
    r = len(roots)
    seq = np.zeros(length + r, dtype=complex)
    seq[r - 1] = 1.0
    for z in roots:
        seq = lfilter([1.0], [1.0, -z], seq)
    return seq[:length]


def fourier_amplitudes(roots, length: int) -> np.ndarray:
    """Periodic trapezoid rule for the contour-integral representation."""
    n = MIN_QUADRATURE
    while n < 2 * (length + 1):
        n *= 2
    w = np.exp(2j * np.pi * np.arange(n) / n)
    f = np.ones(n, dtype=complex)
    for z in roots:
        f /= w - z
    # psi(j) = (1/n) sum_s w_s^(j+1) f_s, i.e. ifft(f)[j + 1]
    vals = np.fft.ifft(f)
    return vals[1:length + 1]


def partial_fraction_amplitudes(roots, length: int) -> np.ndarray:
    r = len(roots)
    roots = np.asarray(roots, dtype=complex)
    if r > 1:
        gaps = np.abs(roots[:, None] - roots[None, :])[~np.eye(r, dtype=bool)]
        if gaps.min() < 1e-10:
            raise IllConditioned(f"roots only {gaps.min():.3g} apart")
    j = np.arange(length)
    out = np.zeros(length, dtype=complex)
    for a in range(r):
        denom = np.prod([roots[a] - roots[b] for b in range(r) if b != a])
        out += roots[a] ** j / denom
    return out


def closed_form_norm_sq(roots) -> float:
    """Squared l2 norm of the convolution-normalised state, by residues."""
    z = np.asarray(roots, dtype=complex)
    r = len(z)
    total = 0.0 + 0.0j
    for a in range(r):
        term = z[a] ** (r - 1) / (1 - abs(z[a]) ** 2)
        for b in range(r):
            if b != a:
                term /= (z[a] - z[b]) * (1 - np.conj(z[b]) * z[a])
        total += term
    return float(total.real)


def _length(roots) -> int:
    """A length past which every amplitude is below ``TRUNCATION`` of the peak.

    The partial-fraction form gives ``|psi(i)| <= sum_j |c_j| |z_j|^i`` and the
    peak is at least ``psi(r - 1) = 1``, so the bound fixes the length at once.
    Nearly coincident roots make ``c_j`` useless; then the length is doubled
    until the computed tail is small enough.
    """
    z = np.asarray(roots, dtype=complex)
    r = len(z)
    rho = np.abs(z)
    if r == 0 or rho.max() == 0.0:
        return max(r, 1)
    gaps = np.abs(z[:, None] - z[None, :]) + np.eye(r)
    if gaps.min() > 1e-6 and rho.min() > 0.0:
        c = 1.0 / np.prod(gaps, axis=1)
        n = np.log(TRUNCATION / (r * c)) / np.log(rho)
        return int(min(MAX_LENGTH, max(np.ceil(n.max()), 0) + r + 8))
    n = max(64, 2 * r)
    while True:
        amp = np.abs(convolution_amplitudes(z, n))
        if amp[-max(8, r):].max() < TRUNCATION * amp.max() or n >= MAX_LENGTH:
            return n
        n = min(2 * n, MAX_LENGTH)


def _trim(amps: np.ndarray) -> np.ndarray:
    mag = np.abs(amps)
    return amps[:int(np.flatnonzero(mag >= TRUNCATION * mag.max()).max()) + 1]


def _amplitudes(roots, length, formula):
    if formula is Formula.CONVOLUTION:
        return convolution_amplitudes(roots, length), formula
    if formula is Formula.FOURIER:
        return fourier_amplitudes(roots, length), formula
    try:
        return partial_fraction_amplitudes(roots, length), formula
    except IllConditioned:
        return convolution_amplitudes(roots, length), Formula.CONVOLUTION


def build_state(cfg: EdgeConfig, off: NeighborOffsets | None, k: float,
                formula: Formula | str = Formula.CONVOLUTION) -> FlatBandState:
    """Zero-energy edge state at ``k``.

    Amplitudes start at the base row and are not normalised: the first
    ``r - 1`` vanish and the next equals 1.  ``norm`` is the closed-form l2
    norm of that sequence.
    """
    formula = Formula(formula)
    if off is None:
        off = raw_offsets(cfg)
    v = verdict(None, cfg, k)
    if not v.exists:
        if is_exceptional(k, cfg.s2):
            raise ExceptionalQuasimomentum(f"no zero-energy state at exceptional k={k}")
        raise NoState(f"no zero-energy edge state at k={k}")
    sub = v.sublattice
    roots = disc_roots(off, k, sub)
    amps, used = _amplitudes(roots, _length(roots), formula)
    amps = _trim(amps)
    rho = float(np.max(np.abs(roots))) if len(roots) else 0.0
    return FlatBandState(_nbase(cfg, off, sub), amps, sub, float(k),
                         math.sqrt(closed_form_norm_sq(roots)), roots, used,
                         slow_decay=rho > SLOW_DECAY)


def classical_zigzag_state(cfg: EdgeConfig, k: float) -> FlatBandState:
    """Single-root state of a classical zigzag edge.

    In the canonical basis the edge ``(1, 0)`` with balanced termination gives
    ``psi^A(n) = (-(1 + e^{ik}))^n`` for ``n >= 0``, which collapses to a
    delta at ``k = pi``.
    """
    if not cfg.is_classical_zigzag:
        raise ValueError(f"({cfg.a11}, {cfg.a12}) is not a classical zigzag edge")
    v = verdict(None, cfg, k)
    if not v.exists:
        raise OutOfBand(f"k={k} is outside the flat band of this edge")
    off = raw_offsets(cfg)
    c = np.trim_zeros(edge_polynomial(off, k, v.sublattice), "b")
    # linear polynomial c0 + c1 z: one root, no companion matrix needed
    z = np.array([-c[0] / c[1]])
    if abs(z[0]) < 1e-15:
        z[0] = 0.0
    amps = _trim(convolution_amplitudes(z, _length(z)))
    return FlatBandState(_nbase(cfg, off, v.sublattice), amps, v.sublattice, float(k),
                         math.sqrt(closed_form_norm_sq(z)), z, Formula.CONVOLUTION,
                         slow_decay=abs(z[0]) > SLOW_DECAY)


def state_residual(cfg: EdgeConfig, state: FlatBandState, off: NeighborOffsets | None = None) -> float:
    """``||H(k) psi|| / ||psi||`` for a constructed zero-energy state."""
    if off is None:
        off = raw_offsets(cfg)
    psi_a, psi_b = state.as_pair
    return hamiltonian.relative_residual(cfg, off, state.k, 0.0, psi_a, psi_b)
