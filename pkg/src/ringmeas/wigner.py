"""Discrete-momentum Wigner transform on the ring.

    W[A](q, p_j) = (1/L) sum_{k,l} exp(2 pi i q (k-l)/L) D((k+l)/2 - j) A_kl,
    D(eta) = sin(pi eta)/(pi eta).

Tables hold the momentum columns ``|j| <= K`` on a uniform grid of ``nq``
points in ``(-L/2, L/2]``. Every integrand met here is a trigonometric
polynomial with frequency below ``nq``, so grid sums are exact integrals.

For odd ``k - l`` the kernel is evaluated at half-integers and its tail in
``j`` decays only like ``1/j``. The tables therefore also carry the summed
contribution of all columns ``j < -K`` and ``j > K`` in closed form (digamma
series), which keeps the momentum sums exact rather than truncated.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma, polygamma

from ringmeas.exceptions import GridError, NotInImageError, ZeroProbabilityError
from ringmeas.model import ApparatusSpec

log = logging.getLogger(__name__)

INVERSE_TOL = 1e-8
COND_LIMIT = 1e10


def delta_kernel(eta) -> np.ndarray:
    """``sin(pi eta)/(pi eta)``, exact on integers and half-integers."""
    eta = np.asarray(eta, dtype=float)
    out = np.atleast_1d(np.sinc(eta)).astype(float)
    twice = np.atleast_1d(2 * eta)
    r = np.rint(twice)
    exact = np.abs(twice - r) < 1e-12
    integer = exact & (r % 2 == 0)
    out[integer] = (r[integer] == 0).astype(float)
    half = exact & (r % 2 != 0)
    n = (r[half] - 1) / 2
    out[half] = (-1.0) ** n / (math.pi * (n + 0.5))
    return out.reshape(eta.shape)


def _sin_pi(c):
    """``sin(pi c)``, exactly zero on integers and exactly +-1 on half-integers."""
    c = np.asarray(c, dtype=float)
    out = np.sin(math.pi * c)
    r = np.rint(2 * c)
    exact = np.abs(2 * c - r) < 1e-12
    out = np.where(exact & (r % 2 == 0), 0.0, out)
    half = exact & (r % 2 != 0)
    return np.where(half, np.where(((r - 1) / 2) % 2 == 0, 1.0, -1.0), out)


def _alternating_tail(c):
    """``sum_{t>=0} (-1)^t / (c + t)`` for ``c > 0``."""
    return 0.5 * (digamma((c + 1) / 2) - digamma(c / 2))


def kernel_tails(h, J: int):
    """Sums of ``D(h - j)`` over ``j > J`` and over ``j < -J`` (needs ``|h| < J + 1``)."""
    h = np.asarray(h, dtype=float)
    c_hi = J + 1 - h
    c_lo = J + 1 + h
    hi = _sin_pi(c_hi) / math.pi * _alternating_tail(c_hi)
    lo = _sin_pi(c_lo) / math.pi * _alternating_tail(c_lo)
    return lo, hi


def _pair_series(c, c2):
    """``sum_{t>=0} 1/((c+t)(c2+t))``."""
    same = np.abs(c - c2) < 1e-12
    diff = np.where(same, 1.0, c2 - c)
    return np.where(same, polygamma(1, c), (digamma(c2) - digamma(c)) / diff)


def kernel_pair_tails(h, h2, J: int):
    """``sum_{|j| > J} D(h - j) D(h2 - j)`` for broadcast ``h``, ``h2``."""
    total = 0.0
    for sign in (-1.0, 1.0):
        c = J + 1 + sign * np.asarray(h, dtype=float)
        c2 = J + 1 + sign * np.asarray(h2, dtype=float)
        total = total + _sin_pi(c) * _sin_pi(c2) / math.pi ** 2 * _pair_series(c, c2)
    return total


@dataclass(frozen=True)
class WignerTable:
    L: float
    hbar: float
    K: int
    nq: int
    values: np.ndarray
    # summed contribution of columns j < -K and j > K per grid point; None if unknown
    tail_lo: np.ndarray | None = None
    tail_hi: np.ndarray | None = None

    @property
    def q(self) -> np.ndarray:
        return -self.L / 2 + self.L * np.arange(1, self.nq + 1) / self.nq

    @property
    def js(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    @property
    def momenta(self) -> np.ndarray:
        return 2 * math.pi * self.hbar * self.js / self.L

    def integrate_q(self) -> np.ndarray:
        """``int w(q, p_j) dq`` per column, exact on the grid."""
        return self.L / self.nq * self.values.sum(axis=0)

    def sum_p(self) -> np.ndarray:
        """``sum_j w(q, p_j)`` over all integers ``j`` at every grid point."""
        if self.tail_lo is None or self.tail_hi is None:
            raise ValueError("table has no tail information; the full momentum sum is unknown")
        return self.values.sum(axis=1) + self.tail_lo + self.tail_hi

    def scaled(self, col_factor, lo_factor, hi_factor) -> "WignerTable":
        lo = None if self.tail_lo is None else self.tail_lo * lo_factor
        hi = None if self.tail_hi is None else self.tail_hi * hi_factor
        return WignerTable(self.L, self.hbar, self.K, self.nq,
                           self.values * np.asarray(col_factor)[None, :], lo, hi)


def _check_grid(K: int, nq: int):
    if nq < 4 * K + 2:
        raise GridError(f"q-grid needs at least 4K+2 = {4 * K + 2} points, got {nq}")


def _as_lattice_operator(A, app: ApparatusSpec) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.shape != (app.dim, app.dim):
        raise ValueError(
            f"operator must live on the lattice |k| <= {app.K} ({app.dim}x{app.dim}), got {A.shape}")
    return A


def wigner(A, app: ApparatusSpec, nq: int | None = None) -> WignerTable:
    """Wigner table of an apparatus operator given in the momentum basis."""
    A = _as_lattice_operator(A, app)
    K, L = app.K, app.L
    nq = 4 * K + 2 if nq is None else nq
    _check_grid(K, nq)
    ks = app.ks
    q = -L / 2 + L * np.arange(1, nq + 1) / nq
    E = np.exp(2j * math.pi * np.outer(q, ks) / L)
    h = (ks[:, None] + ks[None, :]) / 2
    D = delta_kernel(h[:, :, None] - ks[None, None, :])
    values = np.einsum("qk,ql,klj->qj", E, E.conj(), D * A[:, :, None], optimize=True) / L
    lo, hi = kernel_tails(h, K)
    tail_lo = np.einsum("qk,ql,kl->q", E, E.conj(), lo * A, optimize=True) / L
    tail_hi = np.einsum("qk,ql,kl->q", E, E.conj(), hi * A, optimize=True) / L
    return WignerTable(L, app.hbar, K, nq, values, tail_lo, tail_hi)


def coordinate_diagonal(A, app: ApparatusSpec, q) -> np.ndarray:
    """``<q|A|q>`` on the given points."""
    A = _as_lattice_operator(A, app)
    E = np.exp(2j * math.pi * np.outer(np.asarray(q), app.ks) / app.L)
    return np.einsum("qk,kl,ql->q", E, A, E.conj()) / app.L


def _fourier_columns(values, L, nq, ds):
    q = -L / 2 + L * np.arange(1, nq + 1) / nq
    ph = np.exp(-2j * math.pi * np.outer(ds, q) / L)
    return L / nq * (ph @ values)


def odd_difference_systems(K: int):
    """Kernel matrices for each odd ``d = k - l``: rows ``j`` in the window, then the two tails."""
    systems = {}
    js = np.arange(-K, K + 1)
    for d in range(-2 * K + 1, 2 * K, 2):
        ls = np.arange(max(-K, -K - d), min(K, K - d) + 1)
        h = ls + d / 2
        M = delta_kernel(h[None, :] - js[:, None])
        lo, hi = kernel_tails(h, K)
        systems[d] = (ls, np.vstack([M, lo[None, :], hi[None, :]]))
    return systems


def odd_difference_conditioning(K: int) -> dict:
    """Condition number of each odd-difference inversion system."""
    return {d: float(np.linalg.cond(M)) for d, (_, M) in odd_difference_systems(K).items()}


def wigner_inverse(t: WignerTable, app: ApparatusSpec | None = None, tol: float = INVERSE_TOL,
                   cond_limit: float = COND_LIMIT) -> np.ndarray:
    """Momentum-basis operator whose table reproduces ``t``.

    Each ``k - l = d`` diagonal is recovered from the ``d``-th Fourier
    coefficient in ``q``. Even ``d`` reads off a Kronecker delta; odd ``d``
    solves the half-integer kernel system by least squares.
    """
    K, L, nq = t.K, t.L, t.nq
    _check_grid(K, nq)
    ds = np.arange(-2 * K, 2 * K + 1)
    F = _fourier_columns(t.values, L, nq, ds)
    have_tails = t.tail_lo is not None and t.tail_hi is not None
    if have_tails:
        F_lo = _fourier_columns(t.tail_lo[:, None], L, nq, ds)[:, 0]
        F_hi = _fourier_columns(t.tail_hi[:, None], L, nq, ds)[:, 0]
    A = np.zeros((2 * K + 1, 2 * K + 1), dtype=complex)
    odd = odd_difference_systems(K)
    for di, d in enumerate(ds):
        if d % 2 == 0:
            for l in range(max(-K, -K - d), min(K, K - d) + 1):
                A[l + d + K, l + K] = F[di, l + d // 2 + K]
            continue
        ls, M = odd[d]
        rhs = F[di]
        if have_tails:
            rhs = np.concatenate([rhs, [F_lo[di], F_hi[di]]])
        else:
            M = M[:-2]
        cond = float(np.linalg.cond(M))
        if cond > cond_limit:
            raise NotInImageError(f"odd difference d={d}: kernel system ill-conditioned (cond {cond:.3e})")
        log.debug("odd difference d=%d condition %.3e", d, cond)
        x, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        A[ls + d + K, ls + K] = x
    if app is None:
        app = ApparatusSpec(m=0, w0=[1.0], K=K, L=L, hbar=t.hbar)
    back = wigner(A, app, nq)
    residual = float(np.max(np.abs(back.values - t.values)))
    if have_tails:
        residual = max(residual, float(np.max(np.abs(back.tail_lo - t.tail_lo))),
                       float(np.max(np.abs(back.tail_hi - t.tail_hi))))
    if residual > tol:
        raise NotInImageError(f"table is not in the image of the transform (residual {residual:.3e})")
    return A


def star(A, B, app: ApparatusSpec, nq: int | None = None) -> np.ndarray:
    """``L W^-1(W[A] W[B])`` with the product taken column by column on the window."""
    tA, tB = wigner(A, app, nq), wigner(B, app, nq)
    prod = WignerTable(app.L, app.hbar, app.K, tA.nq, app.L * tA.values * tB.values)
    return wigner_inverse(prod, app)


def trace_pairing(G, rho, app: ApparatusSpec, nq: int | None = None) -> complex:
    """``L sum_j int W[G] W[rho] dq`` over all integer ``j``.

    The window part is an exact grid sum; the columns beyond the window are
    added through closed-form kernel-product series.
    """
    G = _as_lattice_operator(G, app)
    rho = _as_lattice_operator(rho, app)
    tG, tR = wigner(G, app, nq), wigner(rho, app, nq)
    window = app.L * app.L / tG.nq * np.sum(tG.values * tR.values)
    K = app.K
    tail = 0.0
    for d in range(-2 * K + 1, 2 * K, 2):
        l1 = np.arange(max(-K, -K - d), min(K, K - d) + 1)
        l2 = np.arange(max(-K, -K + d), min(K, K + d) + 1)
        g = G[l1 + d + K, l1 + K]
        r = rho[l2 - d + K, l2 + K]
        S = kernel_pair_tails((l1 + d / 2)[:, None], (l2 - d / 2)[None, :], K)
        tail = tail + g @ S @ r
    return complex(window + tail)


def classical_collapse(t: WignerTable, part, l: int):
    """Condition the table on the pointer outcome ``l``.

    Returns the posterior table and the outcome probability ``w'_l``.
    """
    if part.K != t.K:
        raise ValueError("partition and table use different lattice windows")
    theta = part.theta(l)
    weight = float(np.real(np.sum(t.integrate_q() * theta)))
    if weight <= 0.0:
        raise ZeroProbabilityError(f"outcome {l} has probability {weight:.3e}")
    lo = 1.0 if l == 0 else 0.0
    hi = 1.0 if l == part.n_outcomes - 1 else 0.0
    return t.scaled(theta / weight, lo / weight, hi / weight), weight


def write_csv(t: WignerTable, fh) -> None:
    """CSV columns ``q, j, p_j, value`` (one row per grid point and column)."""
    if np.max(np.abs(t.values.imag)) > 1e-10:
        raise ValueError("table is not real; export needs a Hermitian operator")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["q", "j", "p_j", "value"])
    for qi, qv in enumerate(t.q):
        for ji, (j, p) in enumerate(zip(t.js, t.momenta)):
            w.writerow([repr(float(qv)), int(j), repr(float(p)), repr(float(t.values[qi, ji].real))])
