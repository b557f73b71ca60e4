"""Post-kick joint state of object and apparatus.

The joint state is kept in the apparatus momentum representation as a sparse
map ``(r, s) -> <p_r|rho|p_s>``, each value a ``d_S x d_S`` object block.
Absent keys are exact zeros.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ringmeas.exceptions import GridError, ParityError, SupportError, ValidationError
from ringmeas.model import ApparatusSpec, CouplingSpec, ObjectSpec, validate
from ringmeas.qcore import max_norm

# blocks whose entries all fall below this are dropped as structural zeros
ZERO_BLOCK_TOL = 1e-14

SCHEMA_VERSION = 1


@dataclass
class JointState:
    obj: ObjectSpec
    app: ApparatusSpec
    blocks: dict
    rho_s: np.ndarray | None = None
    N: int | None = None
    chi: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def d(self) -> int:
        return self.obj.d

    def block(self, r: int, s: int) -> np.ndarray:
        B = self.blocks.get((r, s))
        return np.zeros((self.d, self.d), dtype=complex) if B is None else B

    def trace(self) -> complex:
        return sum(np.trace(B) for (r, s), B in self.blocks.items() if r == s)

    def conditional_blocks(self) -> np.ndarray:
        """Diagonal blocks ``<p_r|rho|p_r>`` stacked over the lattice window."""
        out = np.zeros((self.app.dim, self.d, self.d), dtype=complex)
        for (r, s), B in self.blocks.items():
            if r == s:
                out[r + self.app.K] = B
        return out

    def object_marginal(self) -> np.ndarray:
        return self.conditional_blocks().sum(axis=0)

    def to_dense(self) -> np.ndarray:
        """Dense matrix on ``H_S (x) H_A`` with the object factor outer."""
        n, K = self.app.dim, self.app.K
        out = np.zeros((self.d, n, self.d, n), dtype=complex)
        for (r, s), B in self.blocks.items():
            out[:, r + K, :, s + K] = B
        return out.reshape(self.d * n, self.d * n)

    @classmethod
    def from_dense(cls, M, obj, app, tol=ZERO_BLOCK_TOL, **kw) -> "JointState":
        n, K, d = app.dim, app.K, obj.d
        T = np.asarray(M, dtype=complex).reshape(d, n, d, n)
        blocks = {}
        for ri in range(n):
            for si in range(n):
                B = T[:, ri, :, si]
                if max_norm(B) > tol:
                    blocks[(ri - K, si - K)] = B.copy()
        return cls(obj=obj, app=app, blocks=blocks, **kw)

    def replace_blocks(self, blocks: dict) -> "JointState":
        return JointState(self.obj, self.app, blocks, self.rho_s, self.N, self.chi, dict(self.meta))

    def hermiticity_defect(self) -> float:
        keys = set(self.blocks) | {(s, r) for r, s in self.blocks}
        return max((max_norm(self.block(r, s) - self.block(s, r).conj().T) for r, s in keys),
                   default=0.0)

    def distance(self, other: "JointState") -> float:
        """Entrywise max-norm distance over the union of stored blocks."""
        keys = set(self.blocks) | set(other.blocks)
        return max((max_norm(self.block(*k) - other.block(*k)) for k in keys), default=0.0)

    def to_json(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "d_s": self.d,
            "K": self.app.K,
            "blocks": [
                {"r": int(r), "s": int(s), "block": matrix_to_json(B)}
                for (r, s), B in sorted(self.blocks.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict, obj, app) -> "JointState":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        if data["d_s"] != obj.d or data["K"] != app.K:
            raise ValueError("serialized state does not match the given specs")
        blocks = {(e["r"], e["s"]): matrix_from_json(e["block"]) for e in data["blocks"]}
        return cls(obj=obj, app=app, blocks=blocks)


def matrix_to_json(M) -> list:
    """Complex matrix as rows of ``[re, im]`` pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M)]


def matrix_from_json(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def _checked_shift(obj, app, cpl, standard_shift=False):
    report = validate(obj, app, cpl, standard_shift=standard_shift)
    if not report.ok:
        support = [e for e in report.errors if "support bound" in e]
        if support and len(support) == len(report.errors):
            raise SupportError(support[0])
        raise ValidationError(report)
    return report.N, report.chi


def _pair_terms(rho_s, obj):
    """``E_i rho_S E_j`` for every ordered outcome pair."""
    rho_s = np.asarray(rho_s, dtype=complex)
    if rho_s.shape != (obj.d, obj.d):
        raise ValueError(f"rho_S must be {obj.d}x{obj.d}, got {rho_s.shape}")
    J = obj.n_outcomes
    return rho_s, [[obj.E[i] @ rho_s @ obj.E[j] for j in range(J)] for i in range(J)]


def kick(rho_s, obj: ObjectSpec, app: ApparatusSpec, cpl: CouplingSpec) -> JointState:
    """Exact joint state right after the delta kick.

    ``<p_r|rho|p_s> = sum_ij E_i rho_S E_j exp(i (n_i - n_j) chi) w0[r - N n_i]``
    restricted to ``r - s = N (n_i - n_j)``.
    """
    N, chi = _checked_shift(obj, app, cpl)
    rho_s, terms = _pair_terms(rho_s, obj)
    n = [int(v) for v in obj.n]
    ks = np.arange(-app.m, app.m + 1)
    blocks: dict = {}
    for i, ni in enumerate(n):
        for j, nj in enumerate(n):
            T = terms[i][j]
            if max_norm(T) == 0.0:
                continue
            phase = np.exp(1j * (ni - nj) * chi)
            for k, w in zip(ks, app.w0):
                if w == 0.0:
                    continue
                r = int(k) + N * ni
                s = r - N * (ni - nj)
                # row-side and column-side weight indices coincide on the support
                assert app.weight(s - N * nj) == w
                if abs(r) > app.K or abs(s) > app.K:
                    raise SupportError(f"shifted support index ({r}, {s}) outside |k| <= {app.K}")
                key = (r, s)
                if key in blocks:
                    blocks[key] = blocks[key] + T * (phase * w)
                else:
                    blocks[key] = T * (phase * w)
    blocks = {k: B for k, B in blocks.items() if max_norm(B) > ZERO_BLOCK_TOL}
    return JointState(obj, app, blocks, rho_s=rho_s, N=N, chi=chi)


def qgrid(L: float, nq: int) -> np.ndarray:
    """``nq`` uniform points on ``(-L/2, L/2]``."""
    return -L / 2 + L * np.arange(1, nq + 1) / nq


def kick_oracle_grid(rho_s, obj: ObjectSpec, app: ApparatusSpec, cpl: CouplingSpec,
                     nq: int | None = None) -> JointState:
    """Kick computed independently on a uniform coordinate grid.

    The apparatus state is moved to the grid with the discrete plane-wave
    transform, multiplied by ``exp(i b_i (gamma q + lambda)/hbar)`` on the left
    and its conjugate for ``b_j`` on the right, and transformed back.
    """
    N, _ = _checked_shift(obj, app, cpl)
    K = app.K
    nq = 4 * K + 2 if nq is None else nq
    if nq <= 4 * K + 1:
        raise GridError(f"need more than 4K+1 = {4 * K + 1} grid points, got {nq}")
    rho_s, terms = _pair_terms(rho_s, obj)
    q = qgrid(app.L, nq)
    V = np.exp(2j * math.pi * np.outer(q, app.ks) / app.L) / math.sqrt(nq)
    rho_q = V @ app.rho() @ V.conj().T
    b = [float(v) * obj.a for v in obj.n]
    phases = [np.exp(1j * bi * (cpl.gamma * q + cpl.lam) / app.hbar) for bi in b]
    d, n = obj.d, app.dim
    dense = np.zeros((d, n, d, n), dtype=complex)
    for i in range(obj.n_outcomes):
        for j in range(obj.n_outcomes):
            A_q = phases[i][:, None] * rho_q * phases[j].conj()[None, :]
            A_p = V.conj().T @ A_q @ V
            dense += np.einsum("ab,rs->arbs", terms[i][j], A_p)
    return JointState.from_dense(dense.reshape(d * n, d * n), obj, app, tol=1e-13,
                                 rho_s=rho_s, N=N, chi=cpl.chi(obj, app))


def wigner_joint(state: JointState, q) -> np.ndarray:
    """Object-block-valued Wigner table ``W[q_index, j + K] -> d x d`` of a kicked state.

    Closed form available when every ``n_i + n_j`` is even: cross terms
    oscillate as ``exp(2 pi i N (n_i - n_j) q / L)`` and carry the apparatus
    weights shifted by ``N (n_i + n_j) / 2``.
    """
    obj, app = state.obj, state.app
    n = [int(v) for v in obj.n]
    if any((ni + nj) % 2 for ni in n for nj in n):
        raise ParityError(f"joint Wigner closed form needs all n_i + n_j even (parity), got n={n}")
    if state.rho_s is None or state.N is None:
        raise ValueError("wigner_joint needs a state produced by kick()")
    _, terms = _pair_terms(state.rho_s, obj)
    q = np.asarray(q, dtype=float)
    N, chi, L = state.N, state.chi, app.L
    out = np.zeros((q.size, app.dim, obj.d, obj.d), dtype=complex)
    for i, ni in enumerate(n):
        for j, nj in enumerate(n):
            osc = np.exp(1j * (ni - nj) * chi) * np.exp(2j * math.pi * N * (ni - nj) * q / L)
            shift = N * (ni + nj) // 2
            w = app.weight(app.ks - shift) / L
            out += osc[:, None, None, None] * w[None, :, None, None] * terms[i][j][None, None]
    return out
