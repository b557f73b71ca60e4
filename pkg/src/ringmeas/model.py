"""Object, apparatus and coupling specifications.

The apparatus lives on a ring of length ``L``; its momentum takes the values
``p_k = 2*pi*hbar*k/L``. Everything is truncated to the window ``|k| <= K``,
and the specs refuse configurations whose shifted momentum support would
leave that window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ringmeas.qcore import DEFAULT_TOL, hermiticity_defect, max_norm, projector

INTEGER_TOL = 1e-9


@dataclass(frozen=True)
class ObjectSpec:
    """Measured observable ``X = sum_j x_j E_j`` and coupling operator ``B = sum_j n_j a E_j``."""

    x: tuple
    n: tuple
    a: float
    E: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "n", tuple(self.n))
        object.__setattr__(self, "E", tuple(np.asarray(P, dtype=complex) for P in self.E))
        if not (len(self.x) == len(self.n) == len(self.E)):
            raise ValueError("x, n and E must have the same length")
        if not self.E:
            raise ValueError("at least one outcome is required")

    @classmethod
    def from_basis(cls, x, n, a=1.0, ranks=None, basis=None) -> "ObjectSpec":
        """Projectors onto consecutive blocks of ``basis`` columns.

        ``ranks[j]`` columns go to outcome ``j``; the default basis is the
        computational one and the default ranks are all 1.
        """
        ranks = [1] * len(x) if ranks is None else list(ranks)
        d = sum(ranks)
        U = np.eye(d, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
        if U.shape != (d, d):
            raise ValueError(f"basis must be {d}x{d}, got {U.shape}")
        E, start = [], 0
        for r in ranks:
            E.append(projector(U[:, start:start + r]))
            start += r
        return cls(x=x, n=n, a=a, E=E)

    @property
    def d(self) -> int:
        return self.E[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.E)

    def X(self) -> np.ndarray:
        return sum(xj * Ej for xj, Ej in zip(self.x, self.E))

    def B(self) -> np.ndarray:
        return sum(nj * self.a * Ej for nj, Ej in zip(self.n, self.E))


@dataclass(frozen=True)
class ApparatusSpec:
    """Momentum-diagonal apparatus state with weights ``w0[k + m]`` for ``|k| <= m``."""

    m: int
    w0: np.ndarray
    K: int
    L: float = 2 * math.pi
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "w0", np.asarray(self.w0, dtype=float))

    @classmethod
    def uniform(cls, m: int, K: int, L: float = 2 * math.pi, hbar: float = 1.0):
        return cls(m=m, w0=np.full(2 * m + 1, 1.0 / (2 * m + 1)), K=K, L=L, hbar=hbar)

    @property
    def dim(self) -> int:
        return 2 * self.K + 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(-self.K, self.K + 1)

    def index(self, k: int) -> int:
        if abs(k) > self.K:
            raise IndexError(f"momentum index {k} outside lattice |k| <= {self.K}")
        return int(k) + self.K

    def weight(self, k):
        """``w0_k`` for any integer ``k`` (zero outside ``|k| <= m``)."""
        k = np.asarray(k)
        inside = np.abs(k) <= self.m
        idx = np.where(inside, k + self.m, 0)
        out = np.where(inside, self.w0[idx], 0.0)
        return out if out.ndim else float(out)

    def momenta(self) -> np.ndarray:
        return 2 * math.pi * self.hbar * self.ks / self.L

    def rho(self) -> np.ndarray:
        """``rho_A`` as a diagonal matrix on the lattice window."""
        return np.diag(self.weight(self.ks)).astype(complex)

    def with_weights(self, m: int, w0) -> "ApparatusSpec":
        return ApparatusSpec(m=m, w0=w0, K=self.K, L=self.L, hbar=self.hbar)


@dataclass(frozen=True)
class CouplingSpec:
    """Kick strengths: ``H_int = -B (gamma q + lambda) delta(t)``."""

    gamma: float
    lam: float = 0.0

    @classmethod
    def from_shift(cls, obj: ObjectSpec, app: ApparatusSpec, N: int | None = None,
                   chi: float = 0.0) -> "CouplingSpec":
        """Coupling giving momentum shift multiplier ``N`` (default ``2m+1``) and phase ``chi``."""
        N = 2 * app.m + 1 if N is None else N
        gamma = 2 * math.pi * app.hbar * N / (obj.a * app.L)
        return cls(gamma=gamma, lam=chi * app.hbar / obj.a)

    def shift(self, obj: ObjectSpec, app: ApparatusSpec) -> float:
        """Raw shift multiplier ``gamma a L / (2 pi hbar)``; must be an integer."""
        return self.gamma * obj.a * app.L / (2 * math.pi * app.hbar)

    def chi(self, obj: ObjectSpec, app: ApparatusSpec) -> float:
        return obj.a * self.lam / app.hbar


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    N: int | None = None
    chi: float | None = None
    min_K: int | None = None

    @property
    def ok(self) -> bool:
        return not self.errors

    def as_dict(self) -> dict:
        return {"ok": self.ok, "errors": list(self.errors), "N": self.N,
                "chi": self.chi, "min_K": self.min_K}


def is_integer(v: float) -> bool:
    return abs(v - round(v)) <= INTEGER_TOL * max(1.0, abs(v))


def support_bound(app: ApparatusSpec, obj: ObjectSpec, N: int) -> int:
    """Smallest ``K`` keeping every shifted support ``k + N n_j`` on the lattice."""
    return app.m + abs(N) * max(abs(int(nj)) for nj in obj.n)


def _check_object(obj: ObjectSpec, tol: float, errors: list):
    n = obj.n
    if any(not is_integer(float(v)) for v in n):
        errors.append(f"object.n: coupling multipliers must be integers, got {list(n)}")
    if any(n[i + 1] <= n[i] for i in range(len(n) - 1)):
        errors.append(f"object.n: multipliers must strictly increase, got {list(n)}")
    if len(set(obj.x)) != len(obj.x):
        errors.append(f"object.x: eigenvalues must be distinct, got {list(obj.x)}")
    if not obj.a > 0:
        errors.append(f"object.a: scale must be positive, got {obj.a}")
    d = obj.d
    if any(P.shape != (d, d) for P in obj.E):
        errors.append("object.E: projectors must share one square shape")
        return
    for j, P in enumerate(obj.E):
        if hermiticity_defect(P) > tol or max_norm(P @ P - P) > tol:
            errors.append(f"object.E[{j}]: not a Hermitian idempotent projector")
    for i in range(len(obj.E)):
        for j in range(i + 1, len(obj.E)):
            if max_norm(obj.E[i] @ obj.E[j]) > tol:
                errors.append(f"object.E[{i}], E[{j}]: projectors are not orthogonal")
    if max_norm(sum(obj.E) - np.eye(d)) > tol:
        errors.append("object.E: projectors do not resolve the identity")


def _check_apparatus(app: ApparatusSpec, tol: float, errors: list):
    if not (app.L > 0 and app.hbar > 0):
        errors.append(f"apparatus: L and hbar must be positive, got L={app.L}, hbar={app.hbar}")
    if app.m < 0 or int(app.m) != app.m:
        errors.append(f"apparatus.m: cutoff must be a non-negative integer, got {app.m}")
        return
    if app.w0.shape != (2 * app.m + 1,):
        errors.append(f"apparatus.w0: need {2 * app.m + 1} weights for m={app.m}, got {app.w0.size}")
        return
    if np.any(app.w0 < -tol):
        errors.append("apparatus.w0: weights must be non-negative")
    total = float(np.sum(app.w0))
    if abs(total - 1.0) > tol:
        errors.append(f"apparatus.w0: weights must sum to 1 (normalization), got {total:.12g}")
    if app.K < app.m:
        errors.append(f"apparatus.K: lattice bound {app.K} smaller than cutoff m={app.m}")


def validate(obj: ObjectSpec, app: ApparatusSpec, cpl: CouplingSpec,
             standard_shift: bool = True, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check every modelling assumption; never raises on bad input.

    With ``standard_shift`` the shift multiplier must equal ``2m+1``.
    """
    report = ValidationReport()
    errors = report.errors
    _check_object(obj, tol, errors)
    _check_apparatus(app, tol, errors)
    raw = cpl.shift(obj, app)
    if not is_integer(raw):
        errors.append(
            f"coupling: integer-shift condition violated, gamma*a*L/(2*pi*hbar) = {raw:.12g}")
        return report
    N = int(round(raw))
    report.N = N
    report.chi = cpl.chi(obj, app)
    if standard_shift and N != 2 * app.m + 1:
        errors.append(f"coupling: shift multiplier N={N} differs from 2m+1={2 * app.m + 1}")
    if all(is_integer(float(v)) for v in obj.n):
        report.min_K = support_bound(app, obj, N)
        if app.K < report.min_K:
            errors.append(
                f"apparatus.K: support bound violated, need K >= m + |N|*max|n_j| = "
                f"{report.min_K}, got K={app.K}")
    return report


def momentum_value(app: ApparatusSpec, k: int) -> float:
    if abs(k) > app.K:
        raise IndexError(f"momentum index {k} outside lattice |k| <= {app.K}")
    return 2 * math.pi * app.hbar * k / app.L


def coordinate_kernel(app: ApparatusSpec, q1: float, q2: float) -> complex:
    """Coordinate matrix element ``<q1|rho_A|q2>`` of the momentum-diagonal state."""
    ks = np.arange(-app.m, app.m + 1)
    return complex(np.sum(np.exp(2j * math.pi * (q1 - q2) * ks / app.L) * app.w0) / app.L)


def is_symmetric(app: ApparatusSpec, tol: float = DEFAULT_TOL) -> bool:
    return bool(np.allclose(app.w0, app.w0[::-1], atol=tol, rtol=0))


class Moments(NamedTuple):
    sigma_q2: float
    sigma_p2: float
    product: float
    # closed form through the positive-k sum; None unless w0 is symmetric
    product_symmetric: float | None


def moments(app: ApparatusSpec) -> Moments:
    sigma_q2 = app.L ** 2 / 12
    ks = np.arange(-app.m, app.m + 1)
    p = 2 * math.pi * app.hbar * ks / app.L
    sigma_p2 = float(np.sum(p ** 2 * app.w0))
    closed = None
    if is_symmetric(app):
        pos = np.arange(1, app.m + 1)
        closed = float(2 / 3 * math.pi ** 2 * app.hbar ** 2 * np.sum(pos ** 2 * app.w0[app.m + 1:]))
    return Moments(sigma_q2, sigma_p2, sigma_q2 * sigma_p2, closed)


class Quasiclassicality(NamedTuple):
    ratio: float
    quasi_classical: bool


def quasiclassicality(app: ApparatusSpec, threshold: float = 10.0) -> Quasiclassicality:
    """``sigma_q sigma_p / hbar`` and whether it exceeds ``threshold``."""
    if not is_symmetric(app):
        raise ValueError("quasiclassicality needs symmetric weights w0_{-k} = w0_k")
    mo = moments(app)
    ratio = math.sqrt(mo.product) / app.hbar
    return Quasiclassicality(ratio, ratio > threshold)
