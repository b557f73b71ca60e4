"""Three ways of making the pointer readout classical-like.

1. average the kicked state over a uniformly random phase ``chi``;
2. keep only expectations of ``D (x) g(p)``, i.e. work with ``R(p_k)``;
3. couple a second apparatus copy ``C`` and trace it out.

Each route yields the same a posteriori object state ``E_l rho_S E_l / w_l``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ringmeas.dynamics import ZERO_BLOCK_TOL, JointState, kick
from ringmeas.exceptions import SupportError, ValidationError, ZeroProbabilityError
from ringmeas.measurement import (
    PointerPartition,
    consistency_defect,
    correlation_XY,
    outcome_probabilities,
    selective_collapse,
)
from ringmeas.model import ApparatusSpec, CouplingSpec, ObjectSpec, is_integer, validate
from ringmeas.qcore import max_norm


def _prune(blocks: dict) -> dict:
    return {k: B for k, B in blocks.items() if max_norm(B) > ZERO_BLOCK_TOL}


def _pinch(B, E):
    return sum(P @ B @ P for P in E)


def chi_average_exact(state: JointState) -> JointState:
    """Exact mean over ``chi``: cross terms ``E_i . E_j`` with ``i != j`` average to zero."""
    E = state.obj.E
    out = state.replace_blocks(_prune({k: _pinch(B, E) for k, B in state.blocks.items()}))
    out.chi = None
    return out


def chi_average_mc(rho_s, obj: ObjectSpec, app: ApparatusSpec, gamma: float, n: int,
                   seed) -> JointState:
    """Empirical mean of ``n`` kicks with ``chi`` drawn uniformly from ``(-pi, pi]``.

    The kick is linear in the phase factors, so the mean is assembled from one
    ``chi = 0`` kick split into its ``E_i . E_j`` components, each weighted by
    the sample mean of ``exp(i (n_i - n_j) chi)``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    chis = -rng.uniform(-math.pi, math.pi, size=n)
    base = kick(rho_s, obj, app, CouplingSpec(gamma=gamma, lam=0.0))
    nn = np.array([int(v) for v in obj.n])
    diffs = nn[:, None] - nn[None, :]
    factors = np.exp(1j * diffs[:, :, None] * chis[None, None, :]).mean(axis=2)
    E = obj.E
    blocks = {}
    for key, B in base.blocks.items():
        acc = np.zeros_like(B)
        for i in range(len(E)):
            for j in range(len(E)):
                acc += factors[i, j] * (E[i] @ B @ E[j])
        blocks[key] = acc
    out = base.replace_blocks(_prune(blocks))
    out.chi = None
    out.meta["chi_samples"] = chis
    return out


def rms_block_error(a: JointState, b: JointState) -> float:
    """Root mean square entry difference over the union of stored blocks."""
    keys = set(a.blocks) | set(b.blocks)
    if not keys:
        return 0.0
    sq = sum(float(np.sum(np.abs(a.block(*k) - b.block(*k)) ** 2)) for k in keys)
    return math.sqrt(sq / (len(keys) * a.d * a.d))


def subalgebra_expectation(R, D, g, app: ApparatusSpec | None = None) -> complex:
    """``sum_k Tr_S[R(p_k) D] g(p_k)``.

    ``g`` is an array over the lattice window, or a callable of momentum
    (then ``app`` supplies the momenta).
    """
    R = np.asarray(R)
    if callable(g):
        if app is None:
            raise ValueError("a callable g needs the apparatus spec for momenta")
        g = np.array([g(p) for p in app.momenta()])
    g = np.broadcast_to(np.asarray(g), (R.shape[0],))
    tr = np.einsum("kab,ba->k", R, np.asarray(D, dtype=complex))
    return complex(np.sum(tr * g))


def classical_collapse_R(R, part: PointerPartition, l: int):
    """Conditional ``R(p_k) theta_l(p_k) / w'_l`` and the outcome weight ``w'_l``."""
    R = np.asarray(R)
    theta = part.theta(l)
    weight = float(np.real(np.einsum("kaa,k->", R, theta)))
    if weight <= 0.0:
        raise ZeroProbabilityError(f"outcome {l} has probability {weight:.3e}")
    return R * theta[:, None, None] / weight, weight


@dataclass
class TripleState:
    """Object blocks keyed by ``((r, s), (u, v))``: momentum pairs of apparatus A and copy C."""

    obj: ObjectSpec
    appA: ApparatusSpec
    appC: ApparatusSpec
    blocks: dict
    rho_s: np.ndarray | None = None
    N: int | None = None

    @property
    def d(self) -> int:
        return self.obj.d

    def trace(self) -> complex:
        return sum(np.trace(B) for ((r, s), (u, v)), B in self.blocks.items() if r == s and u == v)

    def block(self, ab, uv):
        B = self.blocks.get((ab, uv))
        return np.zeros((self.d, self.d), dtype=complex) if B is None else B

    def hermiticity_defect(self) -> float:
        keys = set(self.blocks) | {((s, r), (v, u)) for (r, s), (u, v) in self.blocks}
        return max((max_norm(self.block(*k) - self.block((k[0][1], k[0][0]), (k[1][1], k[1][0])).conj().T)
                    for k in keys), default=0.0)

    def to_dense(self) -> np.ndarray:
        """Dense matrix on ``H_S (x) H_A (x) H_C``."""
        d, nA, nC = self.d, self.appA.dim, self.appC.dim
        KA, KC = self.appA.K, self.appC.K
        out = np.zeros((d, nA, nC, d, nA, nC), dtype=complex)
        for ((r, s), (u, v)), B in self.blocks.items():
            out[:, r + KA, u + KC, :, s + KA, v + KC] = B
        n = d * nA * nC
        return out.reshape(n, n)


def two_apparatus_kick(rho_s, obj: ObjectSpec, appA: ApparatusSpec, appC: ApparatusSpec,
                       gamma: float) -> TripleState:
    """Kick ``-gamma B (q_A + q_C) delta(t)`` on a product of two momentum-diagonal apparatus states."""
    if (appA.L, appA.hbar) != (appC.L, appC.hbar):
        raise ValueError("the second apparatus must share L and hbar with the first")
    for app in (appA, appC):
        report = validate(obj, app, CouplingSpec(gamma=gamma), standard_shift=False)
        if not report.ok:
            support = [e for e in report.errors if "support bound" in e]
            if support and len(support) == len(report.errors):
                raise SupportError(support[0])
            raise ValidationError(report)
    raw = gamma * obj.a * appA.L / (2 * math.pi * appA.hbar)
    assert is_integer(raw)
    N = int(round(raw))
    rho_s = np.asarray(rho_s, dtype=complex)
    n = [int(v) for v in obj.n]
    E = obj.E
    kA = np.arange(-appA.m, appA.m + 1)
    kC = np.arange(-appC.m, appC.m + 1)
    blocks: dict = {}
    for i, ni in enumerate(n):
        for j, nj in enumerate(n):
            T = E[i] @ rho_s @ E[j]
            if max_norm(T) == 0.0:
                continue
            for ka, wa in zip(kA, appA.w0):
                if wa == 0.0:
                    continue
                r, s = int(ka) + N * ni, int(ka) + N * nj
                for kc, wc in zip(kC, appC.w0):
                    if wc == 0.0:
                        continue
                    u, v = int(kc) + N * ni, int(kc) + N * nj
                    key = ((r, s), (u, v))
                    blocks[key] = blocks.get(key, 0) + T * (wa * wc)
    return TripleState(obj, appA, appC, _prune(blocks), rho_s=rho_s, N=N)


def trace_out_C(t: TripleState) -> JointState:
    """Partial trace over the second apparatus: sum of blocks with ``u == v``."""
    blocks: dict = {}
    for ((r, s), (u, v)), B in t.blocks.items():
        if u == v:
            blocks[(r, s)] = blocks.get((r, s), 0) + B
    return JointState(t.obj, t.appA, _prune(blocks), rho_s=t.rho_s, N=t.N)


def product_posterior(state: JointState, l: int, weight: float) -> JointState:
    """``(E_l rho_S E_l / w) (x) diag(w0[k - N n_l])`` as a joint state."""
    if state.rho_s is None or state.N is None:
        raise ValueError("state does not carry rho_S and the shift multiplier")
    S = state.obj.E[l] @ state.rho_s @ state.obj.E[l] / weight
    shift = state.N * int(state.obj.n[l])
    app = state.app
    blocks = {(int(k), int(k)): S * app.weight(k - shift) for k in app.ks if app.weight(k - shift) != 0.0}
    return state.replace_blocks(_prune(blocks))


def posterior_product_check(state: JointState, part: PointerPartition, l: int) -> float:
    """Distance between the collapsed joint state and the product of its expected factors."""
    rec = selective_collapse(state, part, l)
    return rec.posterior.distance(product_posterior(state, l, rec.probability))


def expected_posterior_object(rho_s, obj: ObjectSpec, l: int) -> np.ndarray:
    E = obj.E[l]
    w = float(np.trace(E @ rho_s).real)
    if w <= 0.0:
        raise ZeroProbabilityError(f"outcome {l} has probability {w:.3e}")
    return E @ rho_s @ E / w


def route_posteriors(rho_s, obj: ObjectSpec, app: ApparatusSpec, cpl: CouplingSpec,
                     part: PointerPartition, l: int, mc_state: JointState | None = None) -> dict:
    """Posterior object state for outcome ``l`` along every route."""
    state = kick(rho_s, obj, app, cpl)
    out = {
        "chi_exact": selective_collapse(chi_average_exact(state), part, l).posterior_object,
        "subalgebra": classical_collapse_R(state.conditional_blocks(), part, l)[0].sum(axis=0),
        "two_apparatus": selective_collapse(
            trace_out_C(two_apparatus_kick(rho_s, obj, app, app, cpl.gamma)), part, l).posterior_object,
    }
    if mc_state is not None:
        out["chi_mc"] = selective_collapse(mc_state, part, l).posterior_object
    return out


def compare_routes(rho_s, obj: ObjectSpec, app: ApparatusSpec, cpl: CouplingSpec,
                   part: PointerPartition, mc_state: JointState | None = None) -> dict:
    """Everything needed to judge the routes against each other and the projection rule."""
    state = kick(rho_s, obj, app, cpl)
    averaged = chi_average_exact(state)
    traced = trace_out_C(two_apparatus_kick(rho_s, obj, app, app, cpl.gamma))
    probs = outcome_probabilities(state, part)
    outcomes = []
    for l in range(part.n_outcomes):
        entry = {"outcome": l, "probability": float(probs[l])}
        if probs[l] <= 0.0:
            outcomes.append(entry)
            continue
        expected = expected_posterior_object(rho_s, obj, l)
        routes = route_posteriors(rho_s, obj, app, cpl, part, l, mc_state)
        entry["object_probability"] = float(np.trace(obj.E[l] @ rho_s).real)
        # pointer weight and object weight are computed independently; they must coincide
        assert abs(entry["object_probability"] - entry["probability"]) <= 1e-10, entry
        entry["expected_posterior"] = expected
        entry["routes"] = routes
        entry["projection_defects"] = {k: max_norm(v - expected) for k, v in routes.items()}
        entry["posterior_product_defects"] = {
            "chi_exact": posterior_product_check(averaged, part, l),
            "two_apparatus": posterior_product_check(traced, part, l),
        }
        names = sorted(k for k in routes if k != "chi_mc")
        entry["pairwise_residual"] = max(
            (max_norm(routes[a] - routes[b]) for a in names for b in names if a < b), default=0.0)
        outcomes.append(entry)
    return {
        "state": state,
        "averaged": averaged,
        "traced": traced,
        "probabilities": probs,
        "outcomes": outcomes,
        "route_equivalence": averaged.distance(traced),
        "consistency_defect": {
            "kicked": consistency_defect(state, part),
            "chi_exact": consistency_defect(averaged, part),
            "two_apparatus": consistency_defect(traced, part),
        },
        "correlation_XY": correlation_XY(state, part),
    }
