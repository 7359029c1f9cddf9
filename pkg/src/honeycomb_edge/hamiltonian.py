"""Action of the edge Hamiltonian at fixed quasimomentum on finite vectors.

A sublattice vector is a pair ``(start, values)`` meaning
``psi(start + i) = values[i]`` and zero elsewhere.
"""

from __future__ import annotations

import numpy as np

from .lattice import EdgeConfig, NeighborOffsets

EMPTY = (0, np.zeros(0, dtype=complex))


def _shift_add(out, out_start, vec, vec_start, coef, shift):
    # out(n) += coef * vec(n + shift)
    lo = vec_start - shift - out_start
    out[lo:lo + len(vec)] += coef * vec


def apply(cfg: EdgeConfig, off: NeighborOffsets, k: float, psi_a=EMPTY, psi_b=EMPTY):
    """Return ``(H psi)^A`` and ``(H psi)^B`` as sublattice vectors.

    ``(H psi)^A(n) = sum e^{i k m} psi^B(n + n_nu)`` for ``n >= n_a_min`` and
    ``(H psi)^B(n) = sum e^{-i k m} psi^A(n - n_nu)`` for ``n >= n_b_min``;
    both vanish below the termination row.
    """
    a0, av = psi_a[0], np.asarray(psi_a[1], dtype=complex)
    b0, bv = psi_b[0], np.asarray(psi_b[1], dtype=complex)
    lo_n, hi_n = min(off.n), max(off.n)

    ha0 = b0 - hi_n
    ha = np.zeros(len(bv) + hi_n - lo_n, dtype=complex)
    for m, n in zip(off.m, off.n):
        _shift_add(ha, ha0, bv, b0, np.exp(1j * k * m), n)
    hb0 = a0 + lo_n
    hb = np.zeros(len(av) + hi_n - lo_n, dtype=complex)
    for m, n in zip(off.m, off.n):
        _shift_add(hb, hb0, av, a0, np.exp(-1j * k * m), -n)

    if ha0 < cfg.n_a_min:
        cut = min(cfg.n_a_min - ha0, len(ha))
        ha, ha0 = ha[cut:], ha0 + cut
    if hb0 < cfg.n_b_min:
        cut = min(cfg.n_b_min - hb0, len(hb))
        hb, hb0 = hb[cut:], hb0 + cut
    return (ha0, ha), (hb0, hb)


def boundary_violation(cfg: EdgeConfig, psi_a=EMPTY, psi_b=EMPTY) -> float:
    """Norm of the part of ``psi`` sitting below the termination rows."""
    a0, av = psi_a
    b0, bv = psi_b
    va = np.asarray(av)[: max(0, cfg.n_a_min - a0)]
    vb = np.asarray(bv)[: max(0, cfg.n_b_min - b0)]
    return float(np.sqrt(np.sum(np.abs(va) ** 2) + np.sum(np.abs(vb) ** 2)))


def relative_residual(cfg, off, k, energy, psi_a=EMPTY, psi_b=EMPTY) -> float:
    """``||(H - E) psi|| / ||psi||`` including the boundary rows."""
    (ha0, ha), (hb0, hb) = apply(cfg, off, k, psi_a, psi_b)
    ra = _sub(ha0, ha, psi_a, energy)
    rb = _sub(hb0, hb, psi_b, energy)
    num = np.sqrt(np.sum(np.abs(ra) ** 2) + np.sum(np.abs(rb) ** 2)
                  + boundary_violation(cfg, psi_a, psi_b) ** 2)
    den = np.sqrt(np.sum(np.abs(psi_a[1]) ** 2) + np.sum(np.abs(psi_b[1]) ** 2))
    return float(num / den)


def _sub(h0, h, psi, energy):
    p0, pv = psi[0], np.asarray(psi[1], dtype=complex)
    if len(pv) == 0 or energy == 0:
        return h
    start = min(h0, p0)
    end = max(h0 + len(h), p0 + len(pv))
    out = np.zeros(end - start, dtype=complex)
    out[h0 - start:h0 - start + len(h)] += h
    out[p0 - start:p0 - start + len(pv)] -= energy * pv
    return out
