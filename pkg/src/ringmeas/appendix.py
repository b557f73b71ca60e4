"""Sawtooth coordinate on the ring and the commutator it produces with momentum.

On ``(-L/2, L/2]`` the coordinate is ``q(x) = x`` up to the jump point ``c``
and ``x - L`` beyond it, so it ranges over ``(c - L, c]``. Matrix elements
are taken between the momentum eigenfunctions ``L^-1/2 exp(2 pi i k x / L)``.
Everything goes through ``[p, q]_kl = (p_k - p_l) q_kl``; the delta term of
the coordinate-space commutator is never discretized.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

from ringmeas.model import ApparatusSpec, moments
from ringmeas.qcore import hermiticity_defect, max_norm

QUAD_PANELS = 10_000
QUAD_ORDER = 5


@dataclass(frozen=True)
class SawtoothCoordinate:
    c: float
    matrix: np.ndarray
    power: int = 1


def _check_c(app: ApparatusSpec, c: float):
    if not 0 < c <= app.L / 2:
        raise ValueError(f"jump location c must lie in (0, L/2] = (0, {app.L / 2}], got {c}")


def _antiderivative(p: int, beta, x):
    ex = np.exp(1j * beta * x)
    if p == 0:
        return ex / (1j * beta)
    if p == 1:
        return ex * (x / (1j * beta) + 1 / beta ** 2)
    if p == 2:
        return ex * (x ** 2 / (1j * beta) + 2 * x / beta ** 2 + 2j / beta ** 3)
    raise ValueError("only powers 0, 1, 2 are supported")


def _moments_by_difference(app: ApparatusSpec, c: float, power: int) -> np.ndarray:
    """``(1/L) int_{c-L}^{c} x^power exp(-2 pi i d x / L) dx`` for ``d = -2K..2K``."""
    L = app.L
    ds = np.arange(-2 * app.K, 2 * app.K + 1)
    out = np.empty(ds.size, dtype=complex)
    zero = ds == 0
    out[zero] = (c ** (power + 1) - (c - L) ** (power + 1)) / (power + 1)
    beta = -2 * math.pi * ds[~zero] / L
    out[~zero] = _antiderivative(power, beta, c) - _antiderivative(power, beta, c - L)
    return out / L


def _quadrature_by_difference(app: ApparatusSpec, c: float, power: int) -> np.ndarray:
    L = app.L
    ds = np.arange(-2 * app.K, 2 * app.K + 1)
    t, wt = np.polynomial.legendre.leggauss(QUAD_ORDER)
    total = np.zeros(ds.size, dtype=complex)
    pieces = [(-L / 2, c, 0.0), (c, L / 2, L)]
    lengths = [c + L / 2, L / 2 - c]
    for (a, b, jump), length in zip(pieces, lengths):
        if length <= 0:
            continue
        panels = max(1, int(round(QUAD_PANELS * length / L)))
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        w = (half[:, None] * wt[None, :]).ravel()
        f = (x - jump) ** power
        total += np.exp(-2j * math.pi * np.outer(ds, x) / L) @ (w * f)
    return total / L


def sawtooth_matrix(app: ApparatusSpec, c: float | None = None, method: str = "analytic",
                    power: int = 1) -> SawtoothCoordinate:
    """Momentum-basis matrix of ``q(x)**power`` on ``|k|, |l| <= K``.

    ``method`` is ``"analytic"`` (closed-form integrals) or ``"quadrature"``
    (composite Gauss-Legendre split at the jump).
    """
    c = app.L / 2 if c is None else c
    _check_c(app, c)
    if method == "analytic":
        by_d = _moments_by_difference(app, c, power)
    elif method == "quadrature":
        by_d = _quadrature_by_difference(app, c, power)
    else:
        raise ValueError(f"unknown method {method!r}")
    K = app.K
    # entry (k, l) depends on d = k - l only; by_d[d + 2K]
    col = by_d[2 * K:]          # d = 0..2K  -> first column (k - l = k + K)
    row = by_d[2 * K::-1]       # d = 0..-2K -> first row
    M = toeplitz(col[: 2 * K + 1], row[: 2 * K + 1])
    return SawtoothCoordinate(c=c, matrix=M, power=power)


def commutator_pq(sc: SawtoothCoordinate, app: ApparatusSpec) -> np.ndarray:
    """``[p, q]_kl = (p_k - p_l) q_kl``."""
    p = app.momenta()
    return (p[:, None] - p[None, :]) * sc.matrix


def limiting_commutator(app: ApparatusSpec) -> np.ndarray:
    """``-i hbar delta_kl + i hbar (-1)^(k-l)``, the jump-at-the-edge commutator."""
    ks = app.ks
    sign = np.where((ks[:, None] - ks[None, :]) % 2 == 0, 1.0, -1.0)
    return -1j * app.hbar * np.eye(app.dim) + 1j * app.hbar * sign


def mean_commutator(rho_a, sc: SawtoothCoordinate, app: ApparatusSpec) -> float:
    """``<i [p, q]>``; real for Hermitian ``rho_a``."""
    return float(np.real(1j * np.trace(np.asarray(rho_a) @ commutator_pq(sc, app))))


@dataclass(frozen=True)
class RobertsonReport:
    lhs: float
    rhs: float
    satisfied: bool
    var_q: float
    var_p: float
    # coordinate-distribution variance L^2/12, only for momentum-diagonal states
    var_q_uniform: float | None = None


def robertson_check(rho_a, sc: SawtoothCoordinate, app: ApparatusSpec,
                    tol: float = 1e-10) -> RobertsonReport:
    """``4 <dq^2> <dp^2> >= (i <[q, p]>)^2`` with central moments."""
    rho = np.asarray(rho_a, dtype=complex)
    q2 = sawtooth_matrix(app, sc.c, power=2).matrix
    p = app.momenta()
    mean_q = np.trace(rho @ sc.matrix).real
    var_q = float(np.trace(rho @ q2).real - mean_q ** 2)
    prob = np.real(np.diag(rho))
    mean_p = float(np.sum(prob * p))
    var_p = float(np.sum(prob * p ** 2) - mean_p ** 2)
    lhs = 4 * var_q * var_p
    # i<[q, p]> = -i<[p, q]>; mean shifts do not change the commutator
    rhs = mean_commutator(rho, sc, app) ** 2
    uniform = None
    if max_norm(rho - np.diag(np.diag(rho))) == 0.0:
        uniform = app.L ** 2 / 12
        # momentum-diagonal states see the uniform coordinate distribution
        assert abs(var_q - uniform) <= 1e-10 * max(1.0, uniform), (var_q, uniform)
    return RobertsonReport(lhs, rhs, bool(lhs >= rhs - tol), var_q, var_p, uniform)


def heisenberg_violation_demo(app: ApparatusSpec, c: float | None = None) -> dict:
    """``sigma_q sigma_p = 0`` below ``hbar/2`` for the sharp momentum state, with the
    commutator inequality still satisfied because ``<i[p, q]> = 0``."""
    if app.m != 0:
        raise ValueError(f"the violation demo needs m = 0, got m = {app.m}")
    sc = sawtooth_matrix(app, c)
    mo = moments(app)
    product = math.sqrt(mo.product)
    rob = robertson_check(app.rho(), sc, app)
    return {
        "sigma_q_sigma_p": product,
        "hbar_over_2": app.hbar / 2,
        "naive_bound_violated": bool(product < app.hbar / 2),
        "mean_commutator": mean_commutator(app.rho(), sc, app),
        "robertson_lhs": rob.lhs,
        "robertson_rhs": rob.rhs,
        "robertson_satisfied": rob.satisfied,
    }


def commutator_rows(sc: SawtoothCoordinate, app: ApparatusSpec) -> list:
    C = commutator_pq(sc, app)
    return [
        {"c": float(sc.c), "k": int(k), "l": int(l),
         "commutator_re": float(C[a, b].real), "commutator_im": float(C[a, b].imag)}
        for a, k in enumerate(app.ks) for b, l in enumerate(app.ks)
    ]


def jump_dependence(app: ApparatusSpec, cs) -> list:
    """Max deviation of ``[p, q]`` from its edge-jump limit for each jump location."""
    target = limiting_commutator(app)
    return [{"c": float(c), "max_deviation": max_norm(commutator_pq(sawtooth_matrix(app, c), app) - target)}
            for c in cs]


def sawtooth_hermiticity(sc: SawtoothCoordinate) -> float:
    return hermiticity_defect(sc.matrix)
