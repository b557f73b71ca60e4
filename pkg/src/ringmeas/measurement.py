"""Pointer partition, pointer observable and selective collapse of the joint state."""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from ringmeas.dynamics import JointState, matrix_to_json
from ringmeas.exceptions import ZeroProbabilityError
from ringmeas.model import ApparatusSpec, CouplingSpec, ObjectSpec, is_integer
from ringmeas.qcore import max_norm

LABELINGS = ("central-momentum", "range-number", "object-eigenvalue")


@dataclass(frozen=True)
class PointerPartition:
    """Enlarged momentum ranges ``(s_{j-1}, s_j]`` covering every integer index.

    The first range is unbounded below and the last unbounded above.
    ``ranges`` holds the supports ``[N n_j - m, N n_j + m]`` when the
    partition was built from a model, else ``None``.
    """

    K: int
    boundaries: tuple
    ranges: tuple | None = None
    centers: tuple | None = None

    def __post_init__(self):
        b = tuple(int(v) for v in self.boundaries)
        if any(b[i + 1] <= b[i] for i in range(len(b) - 1)):
            raise ValueError(f"boundaries must strictly increase, got {b}")
        object.__setattr__(self, "boundaries", b)

    @property
    def n_outcomes(self) -> int:
        return len(self.boundaries) + 1

    def outcome_of(self, k: int) -> int:
        return bisect.bisect_left(self.boundaries, k)

    def outcomes(self) -> np.ndarray:
        """Outcome label of every lattice index ``-K..K``."""
        return np.searchsorted(self.boundaries, np.arange(-self.K, self.K + 1), side="left")

    def theta(self, l: int) -> np.ndarray:
        """Indicator of the enlarged range ``l`` on the lattice window."""
        return (self.outcomes() == l).astype(float)

    def enlarged(self, l: int):
        """``(lo, hi)`` with ``lo < k <= hi``; ``None`` marks an unbounded side."""
        lo = self.boundaries[l - 1] if l > 0 else None
        hi = self.boundaries[l] if l < len(self.boundaries) else None
        return lo, hi


def build_partition(obj: ObjectSpec, app: ApparatusSpec, cpl: CouplingSpec | None = None
                    ) -> PointerPartition:
    """Supports ``S_j`` and enlarged ranges split at ``floor(N (n_j + n_{j+1}) / 2)``.

    ``N`` comes from ``cpl`` when given, else ``2m+1``.
    """
    if cpl is None:
        N = 2 * app.m + 1
    else:
        raw = cpl.shift(obj, app)
        if not is_integer(raw):
            raise ValueError(f"non-integer shift multiplier {raw:.12g}")
        N = int(round(raw))
    n = [int(v) for v in obj.n]
    m = app.m
    ranges = tuple((N * nj - m, N * nj + m) for nj in n)
    for j in range(len(n) - 1):
        if ranges[j][1] >= ranges[j + 1][0]:
            raise ValueError(f"supports S_{j} and S_{j + 1} overlap: {ranges[j]}, {ranges[j + 1]}")
    bounds = tuple((N * (n[j] + n[j + 1])) // 2 for j in range(len(n) - 1))
    for j, s in enumerate(bounds):
        assert ranges[j][1] <= s < ranges[j + 1][0], (j, s, ranges)
    return PointerPartition(K=app.K, boundaries=bounds, ranges=ranges,
                            centers=tuple(N * nj for nj in n))


def pointer_labels(part: PointerPartition, labeling: str, obj: ObjectSpec | None = None,
                   app: ApparatusSpec | None = None) -> np.ndarray:
    if labeling == "range-number":
        return np.arange(part.n_outcomes, dtype=float)
    if labeling == "object-eigenvalue":
        if obj is None:
            raise ValueError("object-eigenvalue labeling needs the object spec")
        return np.asarray(obj.x, dtype=float)
    if labeling == "central-momentum":
        if app is None or part.centers is None:
            raise ValueError("central-momentum labeling needs a model-built partition and apparatus")
        return np.array([2 * math.pi * app.hbar * c / app.L for c in part.centers])
    raise ValueError(f"unknown labeling {labeling!r}; choose from {LABELINGS}")


def pointer_observable(part: PointerPartition, labeling: str = "range-number",
                       obj: ObjectSpec | None = None, app: ApparatusSpec | None = None) -> np.ndarray:
    """Diagonal apparatus operator ``Y = sum_j label_j theta_j(p)`` on the window."""
    labels = pointer_labels(part, labeling, obj, app)
    return np.diag(labels[part.outcomes()]).astype(complex)


def conditional_blocks_R(state: JointState) -> np.ndarray:
    """Object operators ``R(p_r) = <p_r|rho|p_r>`` for every lattice index."""
    return state.conditional_blocks()


def outcome_probabilities(state: JointState, part: PointerPartition) -> np.ndarray:
    R = state.conditional_blocks()
    tr = np.real(np.trace(R, axis1=1, axis2=2))
    labels = part.outcomes()
    return np.array([tr[labels == l].sum() for l in range(part.n_outcomes)])


@dataclass
class MeasurementRecord:
    outcome: int
    probability: float
    posterior: JointState
    posterior_object: np.ndarray
    posterior_weights: np.ndarray
    # Tr(E_l rho_S), when the state remembers rho_S
    object_probability: float | None = None

    def to_json(self) -> dict:
        ks = range(-self.posterior.app.K, self.posterior.app.K + 1)
        return {
            "outcome": int(self.outcome),
            "probability": float(self.probability),
            "posterior_object": matrix_to_json(self.posterior_object),
            "posterior_weights": [[int(k), float(w)] for k, w in zip(ks, self.posterior_weights)],
        }


def selective_collapse(state: JointState, part: PointerPartition, l: int) -> MeasurementRecord:
    """Project onto pointer outcome ``l`` with ``I (x) theta_l(p)`` on both sides and renormalize."""
    if not 0 <= l < part.n_outcomes:
        raise ValueError(f"outcome {l} out of range 0..{part.n_outcomes - 1}")
    labels = part.outcomes()
    K = state.app.K
    weight = float(sum(np.trace(B).real for (r, s), B in state.blocks.items()
                       if r == s and labels[r + K] == l))
    if weight <= 0.0:
        raise ZeroProbabilityError(f"outcome {l} has probability {weight:.3e}")
    blocks = {(r, s): B / weight for (r, s), B in state.blocks.items()
              if labels[r + K] == l and labels[s + K] == l}
    post = state.replace_blocks(blocks)
    R = post.conditional_blocks()
    w_obj = None
    if state.rho_s is not None and len(state.obj.E) == part.n_outcomes:
        w_obj = float(np.trace(state.obj.E[l] @ state.rho_s).real)
    return MeasurementRecord(
        outcome=l,
        probability=weight,
        posterior=post,
        posterior_object=R.sum(axis=0),
        posterior_weights=np.real(np.trace(R, axis1=1, axis2=2)),
        object_probability=w_obj,
    )


def nonselective_sum(state: JointState, part: PointerPartition) -> JointState:
    """``sum_l (I x theta_l) rho (I x theta_l)``."""
    labels = part.outcomes()
    K = state.app.K
    return state.replace_blocks({(r, s): B for (r, s), B in state.blocks.items()
                                 if labels[r + K] == labels[s + K]})


def consistency_defect(rho, part: PointerPartition) -> float:
    """Max-norm of ``sum_l P_l rho P_l - rho`` for a joint state or an apparatus matrix."""
    labels = part.outcomes()
    K = part.K
    if isinstance(rho, JointState):
        return max((max_norm(B) for (r, s), B in rho.blocks.items()
                    if labels[r + K] != labels[s + K]), default=0.0)
    A = np.asarray(rho)
    if A.shape != (2 * K + 1, 2 * K + 1):
        raise ValueError(f"apparatus operator must be {2 * K + 1}x{2 * K + 1}, got {A.shape}")
    mask = labels[:, None] != labels[None, :]
    return max_norm(A[mask]) if mask.any() else 0.0


def correlation_XY(state: JointState, part: PointerPartition) -> float:
    """``<(X (x) I - I (x) Y)^2>`` with ``Y`` labelled by the object eigenvalues."""
    labels = pointer_labels(part, "object-eigenvalue", state.obj)
    y = labels[part.outcomes()]
    X = state.obj.X()
    I = np.eye(state.d)
    R = state.conditional_blocks()
    total = 0.0
    for idx, Rk in enumerate(R):
        if not Rk.any():
            continue
        D = X - y[idx] * I
        total += np.trace(Rk @ D @ D).real
    return float(total)


def _rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def sample_outcomes(state: JointState, part: PointerPartition, size: int, rng) -> np.ndarray:
    """``size`` pointer readings drawn from the outcome distribution.

    ``rng`` is a ``numpy.random.Generator`` or an integer seed.
    """
    p = np.clip(outcome_probabilities(state, part), 0.0, None)
    return _rng(rng).choice(part.n_outcomes, size=size, p=p / p.sum())


def sample_outcome(state: JointState, part: PointerPartition, rng) -> int:
    return int(sample_outcomes(state, part, 1, rng)[0])
