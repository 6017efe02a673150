"""Superoperator construction and steady-state solves.

Density matrices are vectorized row-major (``rho.ravel()``), so that
``vec(A @ X @ B) = kron(A, B.T) @ vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NonUniqueSteadyStateError, NumericalError

# relative size of the smallest singular value below which the kernel
# counts as more than one-dimensional
KERNEL_RTOL = 1e-12


@dataclass(frozen=True)
class Liouvillian:
    """Generator ``d rho/dt = L rho`` as a ``dim**2 x dim**2`` matrix.

    ``matrix`` is a dense ndarray or a scipy sparse matrix.  ``space`` is
    optional metadata (the joint internal x Fock layout for full models).
    """

    matrix: Any
    dim: int
    space: Any = None

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return ``L(x)`` for a ``dim x dim`` operator ``x``."""
        return (self.matrix @ np.asarray(x, dtype=complex).ravel()).reshape(self.dim, self.dim)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)


def spre(a, sparse=False):
    n = a.shape[0]
    if sparse:
        return sp.kron(sp.csr_matrix(a), sp.identity(n, format="csr"), format="csr")
    return np.kron(a, np.eye(n))


def spost(b, sparse=False):
    n = b.shape[0]
    if sparse:
        return sp.kron(sp.identity(n, format="csr"), sp.csr_matrix(b).T, format="csr")
    return np.kron(np.eye(n), b.T)


def sandwich(a, b, sparse=False):
    """Superoperator of ``X -> a X b``."""
    if sparse:
        return sp.kron(sp.csr_matrix(a), sp.csr_matrix(b).T, format="csr")
    return np.kron(a, b.T)


def hamiltonian_super(h, sparse=False):
    """``X -> -i [h, X]``."""
    return -1j * (spre(h, sparse) - spost(h, sparse))


def decay_super(rate, jump, sparse=False):
    """Lindblad dissipator ``rate * (J X J^+ - {J^+ J, X}/2)``."""
    jdj = jump.conj().T @ jump
    return rate * (
        sandwich(jump, jump.conj().T, sparse)
        - 0.5 * spre(jdj, sparse)
        - 0.5 * spost(jdj, sparse)
    )


def lindblad(h, jumps, sparse=False):
    """Liouvillian matrix for Hamiltonian ``h`` and ``(rate, J)`` pairs."""
    out = hamiltonian_super(h, sparse)
    for rate, jump in jumps:
        if rate:
            out = out + decay_super(rate, jump, sparse)
    return out.tocsr() if sparse else out


def _bordered(L: Liouvillian):
    n = L.dim
    tr = np.eye(n).ravel()
    if L.is_sparse:
        col = sp.csr_matrix(tr.reshape(-1, 1))
        return sp.bmat([[L.matrix, col], [col.T, None]], format="csc")
    m = n * n
    b = np.zeros((m + 1, m + 1), dtype=complex)
    b[:m, :m] = L.matrix
    b[:m, m] = tr
    b[m, :m] = tr
    return b


def _smallest_singular_estimate(solve, solve_h, size, iterations=6):
    """Inverse power iteration on ``(B^H B)^-1``; returns ``sigma_min(B)``."""
    rng = np.random.default_rng(12345)
    x = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    x /= np.linalg.norm(x)
    sigma = np.inf
    for _ in range(iterations):
        z = solve_h(solve(x))
        nz = np.linalg.norm(z)
        if not np.isfinite(nz) or nz == 0:
            return 0.0
        sigma = 1.0 / np.sqrt(nz)
        x = z / nz
    return sigma


def kernel_dimension(L: Liouvillian, rtol=KERNEL_RTOL) -> int:
    """Numerical dimension of ker L from the singular values (dense only)."""
    s = la.svdvals(L.dense())
    return int(np.sum(s <= rtol * s[0]))


def solve_steady_state(L: Liouvillian, residual_tol=1e-10) -> np.ndarray:
    """Unique unit-trace ``rho`` with ``L(rho) = 0``.

    The trace condition is appended as a bordered row/column, which keeps
    the system square and nonsingular exactly when the kernel is
    one-dimensional.  Small dense generators are checked by SVD; large ones
    by an inverse-iteration estimate of the smallest singular value of the
    bordered matrix.
    """
    n = L.dim
    m = n * n
    rhs = np.zeros(m + 1, dtype=complex)
    rhs[m] = 1.0
    bordered = _bordered(L)

    if L.is_sparse:
        try:
            lu = spla.splu(bordered)
        except RuntimeError as exc:
            raise NonUniqueSteadyStateError(f"bordered generator is singular: {exc}") from None
        solve = lu.solve
        solve_h = lambda v: lu.solve(v, trans="H")  # noqa: E731
        scale = abs(bordered).sum(axis=1).max()
        sigma = _smallest_singular_estimate(solve, solve_h, m + 1)
        if sigma <= KERNEL_RTOL * scale:
            raise NonUniqueSteadyStateError(
                f"steady state is not unique (smallest singular value {sigma:.2e} "
                f"vs norm {scale:.2e}); a decoupled dark subspace is likely"
            )
        x = solve(rhs)
    else:
        kdim = kernel_dimension(L)
        if kdim != 1:
            raise NonUniqueSteadyStateError(
                f"Liouvillian kernel has dimension {kdim}; "
                "the steady state is not unique (decoupled dark subspace?)"
            )
        x = la.solve(bordered, rhs)

    rho = x[:m].reshape(n, n)
    residual = np.abs(L.matrix @ x[:m]).max()
    if not np.isfinite(residual) or residual > residual_tol:
        raise NumericalError(f"steady-state residual {residual:.3e} exceeds {residual_tol:.1e}")
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def density_diagnostics(rho: np.ndarray) -> dict:
    """Hermiticity, trace and positivity figures of a density matrix."""
    rho = np.asarray(rho)
    scale = np.abs(rho).max()
    herm = np.abs(rho - rho.conj().T).max() / scale if scale else 0.0
    hpart = 0.5 * (rho + rho.conj().T)
    return {
        "hermiticity_error": float(herm),
        "trace_error": float(abs(np.trace(rho) - 1.0)),
        "min_eigenvalue": float(np.linalg.eigvalsh(hpart).min()),
    }
