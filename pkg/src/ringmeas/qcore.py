"""Dense complex linear algebra shared by the rest of the package.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Validation here
reports defect norms instead of clamping anything.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-10


def as_matrix(M) -> np.ndarray:
    A = np.asarray(M, dtype=complex)
    if A.ndim != 2 or min(A.shape) < 1:
        raise ValueError(f"expected a non-empty 2-d matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def max_norm(M) -> float:
    """Entrywise max norm; the defect norm used throughout."""
    M = np.asarray(M)
    return float(np.max(np.abs(M))) if M.size else 0.0


def hermiticity_defect(M) -> float:
    M = np.asarray(M)
    return max_norm(M - M.conj().T)


def tensor(A, B) -> np.ndarray:
    """Kronecker product, first factor outer."""
    return np.kron(as_matrix(A), as_matrix(B))


def partial_trace(M, dim_a: int, dim_b: int, keep: str = "first") -> np.ndarray:
    """Trace out one factor of a matrix on a ``dim_a * dim_b`` product space.

    ``keep`` is ``"first"`` or ``"second"``.
    """
    M = as_matrix(M)
    n = dim_a * dim_b
    if M.shape != (n, n):
        raise ValueError(f"matrix shape {M.shape} does not match {dim_a}x{dim_b}")
    T = M.reshape(dim_a, dim_b, dim_a, dim_b)
    if keep == "first":
        return np.einsum("ijkj->ik", T)
    if keep == "second":
        return np.einsum("ijik->jk", T)
    raise ValueError(f"keep must be 'first' or 'second', got {keep!r}")


def hermitian_spectrum(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix.

    Raises ``ValueError`` when ``M`` is not Hermitian within ``tol`` or the
    eigendecomposition fails to reconstruct ``M``.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix is not square")
    defect = hermiticity_defect(M)
    if defect > tol:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e} > {tol:.1e})")
    H = 0.5 * (M + M.conj().T)
    vals, vecs = np.linalg.eigh(H)
    residual = max_norm(vecs @ np.diag(vals) @ vecs.conj().T - H)
    if residual > max(tol, 1e-12 * max(1.0, max_norm(H))):
        raise ValueError(f"eigendecomposition residual {residual:.3e} too large")
    return vals


def projector(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of the given orthonormal columns."""
    V = np.asarray(vectors, dtype=complex)
    if V.ndim == 1:
        V = V[:, None]
    return V @ V.conj().T


@dataclass(frozen=True)
class DensityOperator:
    matrix: np.ndarray
    tol: float = DEFAULT_TOL

    def __post_init__(self):
        M = as_matrix(self.matrix)
        if M.shape[0] != M.shape[1]:
            raise ValueError("density operator must be square")
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def defects(self) -> dict:
        """Hermiticity, trace and positivity defects (all zero when valid)."""
        M = self.matrix
        herm = hermiticity_defect(M)
        eig = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
        return {
            "hermiticity": herm,
            "trace": abs(np.trace(M) - 1.0),
            "negativity": max(0.0, -float(eig[0])),
        }

    def is_valid(self) -> bool:
        return all(v <= self.tol for v in self.defects().values())

    def spectrum(self) -> np.ndarray:
        return hermitian_spectrum(self.matrix, self.tol)


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix, full rank unless ``rank`` is given."""
    rank = dim if rank is None else rank
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return rho / np.trace(rho).real


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
