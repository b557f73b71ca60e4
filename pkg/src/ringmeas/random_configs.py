"""Random valid model configurations for property checks and experiment scripts."""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from ringmeas.model import ApparatusSpec, CouplingSpec, ObjectSpec, support_bound
from ringmeas.qcore import random_density, random_unitary


class Model(NamedTuple):
    obj: ObjectSpec
    app: ApparatusSpec
    cpl: CouplingSpec
    rho_s: np.ndarray


def random_weights(m: int, rng: np.random.Generator, symmetric: bool = False) -> np.ndarray:
    w = rng.dirichlet(np.ones(2 * m + 1))
    if symmetric:
        w = 0.5 * (w + w[::-1])
    return w


def random_model(rng: np.random.Generator, max_d: int = 4, max_m: int = 3, n_range=(-2, 4),
                 min_outcomes: int = 1, chi: float | None = None, extra_K: int = 2,
                 L: float = 2 * math.pi, hbar: float = 1.0) -> Model:
    """Valid specs with ``d_S <= max_d``, standard shift ``N = 2m+1`` and ``K`` at or just above the support bound."""
    J = int(rng.integers(min_outcomes, max_d + 1))
    ranks = np.ones(J, dtype=int)
    for _ in range(int(rng.integers(0, max_d - J + 1))):
        ranks[rng.integers(J)] += 1
    d = int(ranks.sum())
    n = sorted(rng.choice(np.arange(n_range[0], n_range[1] + 1), size=J, replace=False).tolist())
    x = sorted(rng.choice(np.arange(-20, 21), size=J, replace=False) / 4.0)
    basis = random_unitary(d, rng) if rng.random() < 0.5 else None
    obj = ObjectSpec.from_basis(x, n, a=float(rng.uniform(0.5, 2.0)), ranks=ranks, basis=basis)
    m = int(rng.integers(0, max_m + 1))
    app = ApparatusSpec(m=m, w0=random_weights(m, rng), K=0, L=L, hbar=hbar)
    K = support_bound(app, obj, 2 * m + 1) + int(rng.integers(0, extra_K + 1))
    app = ApparatusSpec(m=m, w0=app.w0, K=K, L=L, hbar=hbar)
    chi = float(rng.uniform(-math.pi, math.pi)) if chi is None else chi
    cpl = CouplingSpec.from_shift(obj, app, chi=chi)
    rho_s = random_density(d, rng, rank=int(rng.integers(1, d + 1)))
    return Model(obj, app, cpl, rho_s)
