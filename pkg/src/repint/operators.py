"""Finite-dimensional quantum states, operators and information measures.

Operators are plain complex ``numpy`` arrays. Composite structure is carried
separately as a tuple of subsystem dimensions (``dims``), ordered the same way
as the Kronecker factors, so ``kron(A_0, A_1, ...)`` acts on ``dims[0]``
first. Entropies are in nats and ``k_B = hbar = 1`` throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "DensityMatrixError",
    "HilbertSpace",
    "SUPPORT_CUTOFF",
    "ENTROPY_CUTOFF",
    "anticommutator",
    "basis",
    "commutator",
    "dagger",
    "dephase",
    "density_matrix",
    "destroy",
    "expectation",
    "gibbs_state",
    "hermitian_log",
    "is_hermitian",
    "mutual_information",
    "nonequilibrium_free_energy",
    "partial_trace",
    "permute_subsystems",
    "projector",
    "relative_entropy",
    "sample_hermitian",
    "sample_state",
    "sigma_x",
    "sigma_y",
    "sigma_z",
    "tensor_product",
    "trace_distance",
    "unitary_from",
    "von_neumann_entropy",
]

#: Eigenvalues below this are outside the support of a state.
SUPPORT_CUTOFF = 1e-12
#: Eigenvalues below this contribute nothing to ``-p ln p``.
ENTROPY_CUTOFF = 1e-14


class DensityMatrixError(ValueError):
    """Raised when a matrix cannot be a density matrix within tolerance."""


@dataclass(frozen=True)
class HilbertSpace:
    """Labelled tensor-product space.

    Parameters
    ----------
    dims:
        Dimension of each factor.
    labels:
        Optional names (``"S"``, ``"U"``, ``"R"``...). Defaults to
        ``"0", "1", ...``.
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError(f"dimensions must be positive, got {self.dims}")
        labels = tuple(self.labels) or tuple(str(i) for i in range(len(dims)))
        if len(labels) != len(dims):
            raise ValueError("one label per factor is required")
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate labels {labels}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def index(self, key: int | str) -> int:
        if isinstance(key, str):
            try:
                return self.labels.index(key)
            except ValueError:
                raise KeyError(f"no factor labelled {key!r} in {self.labels}") from None
        if not 0 <= key < len(self.dims):
            raise KeyError(f"factor index {key} out of range")
        return int(key)

    def indices(self, keys: int | str | Iterable[int | str]) -> tuple[int, ...]:
        if isinstance(keys, (int, str, np.integer)):
            keys = [keys]
        return tuple(sorted({self.index(k) for k in keys}))

    def subspace(self, keys) -> "HilbertSpace":
        idx = self.indices(keys)
        return HilbertSpace(tuple(self.dims[i] for i in idx), tuple(self.labels[i] for i in idx))


def _as_dims(dims) -> tuple[int, ...]:
    if isinstance(dims, HilbertSpace):
        return dims.dims
    return tuple(int(d) for d in dims)


def _keep_indices(dims, keep) -> tuple[int, ...]:
    if isinstance(dims, HilbertSpace):
        return dims.indices(keep)
    if isinstance(keep, (int, np.integer)):
        keep = [keep]
    idx = tuple(sorted({int(k) for k in keep}))
    if any(not 0 <= k < len(dims) for k in idx):
        raise KeyError(f"keep={keep} out of range for dims={dims}")
    return idx


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def is_hermitian(a: np.ndarray, tol: float = 1e-10) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and np.allclose(a, dagger(a), atol=tol, rtol=0)


def expectation(op: np.ndarray, rho: np.ndarray) -> float:
    """Real part of ``tr(op rho)``."""
    return float(np.real(np.einsum("ij,ji->", op, rho)))


def density_matrix(m, tol: float = 1e-10) -> np.ndarray:
    """Validate ``m`` as a state and return a cleaned copy.

    The input is re-hermitised and renormalised; it is rejected if the
    hermiticity defect, trace defect or most negative eigenvalue exceeds
    ``tol``.

    Raises
    ------
    DensityMatrixError
        If ``m`` is not square, not Hermitian, not unit trace or not positive
        within ``tol``.
    """
    m = np.array(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DensityMatrixError(f"density matrix must be square, got shape {m.shape}")
    herm = np.max(np.abs(m - dagger(m))) if m.size else 0.0
    if herm > tol:
        raise DensityMatrixError(f"not Hermitian (defect {herm:.3e})")
    m = 0.5 * (m + dagger(m))
    tr = np.real(np.trace(m))
    if abs(tr - 1.0) > tol:
        raise DensityMatrixError(f"trace {tr:.12g} differs from 1")
    lam_min = np.linalg.eigvalsh(m)[0]
    if lam_min < -tol:
        raise DensityMatrixError(f"negative eigenvalue {lam_min:.3e}")
    return m / tr


def tensor_product(*ops: np.ndarray) -> np.ndarray:
    """Kronecker product of any number of operators or vectors."""
    if len(ops) == 1 and not isinstance(ops[0], np.ndarray):
        ops = tuple(ops[0])
    if not ops:
        raise ValueError("tensor_product needs at least one factor")
    return reduce(np.kron, ops)


def partial_trace(rho: np.ndarray, dims, keep) -> np.ndarray:
    """Trace out every factor not listed in ``keep``.

    ``keep`` may be a single factor or a collection, given by position or,
    when ``dims`` is a :class:`HilbertSpace`, by label. The kept factors stay
    in their original order.
    """
    idx = _keep_indices(dims, keep)
    dims = _as_dims(dims)
    n = len(dims)
    rho = np.asarray(rho)
    if rho.shape != (int(np.prod(dims)),) * 2:
        raise ValueError(f"operator shape {rho.shape} does not match dims {dims}")
    t = rho.reshape(dims + dims)
    row = list(range(n))
    col = [n + i if i in idx else i for i in range(n)]
    out = [i for i in idx] + [n + i for i in idx]
    d = int(np.prod([dims[i] for i in idx])) if idx else 1
    return np.einsum(t, row + col, out).reshape(d, d)


def _eigh_clean(rho: np.ndarray):
    rho = np.asarray(rho)
    return np.linalg.eigh(0.5 * (rho + dagger(rho)))


def _entropy_from_eigs(p: np.ndarray) -> float:
    p = p[p > ENTROPY_CUTOFF]
    return float(-np.sum(p * np.log(p)))


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-tr rho ln rho`` in nats; eigenvalues below 1e-14 count as zero."""
    return _entropy_from_eigs(np.linalg.eigvalsh(0.5 * (rho + dagger(rho))))


def hermitian_log(a: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    """Matrix logarithm restricted to the support of a positive matrix.

    Directions with eigenvalue below ``cutoff`` are mapped to zero.
    """
    w, v = _eigh_clean(a)
    lw = np.zeros_like(w)
    on = w > cutoff
    lw[on] = np.log(w[on])
    return (v * lw) @ dagger(v)


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Quantum relative entropy ``tr rho (ln rho - ln sigma)``.

    Returns ``inf`` when ``rho`` has weight outside the support of ``sigma``.
    """
    ws, vs = _eigh_clean(sigma)
    off = ws <= SUPPORT_CUTOFF
    if np.any(off):
        ker = vs[:, off]
        leak = np.real(np.trace(dagger(ker) @ rho @ ker))
        if leak > SUPPORT_CUTOFF:
            return float("inf")
    wr = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    log_sigma = (vs[:, ~off] * np.log(ws[~off])) @ dagger(vs[:, ~off])
    val = -_entropy_from_eigs(wr) - expectation(log_sigma, rho)
    # clamp roundoff for identical arguments
    return max(val, 0.0) if val > -1e-12 else val


def mutual_information(rho: np.ndarray, dims, cut) -> float:
    """``S_A + S_B - S_AB`` for the bipartition ``A = cut`` versus the rest."""
    all_idx = tuple(range(len(_as_dims(dims))))
    a = _keep_indices(dims, cut)
    b = tuple(i for i in all_idx if i not in a)
    if not a or not b:
        raise ValueError("both sides of the cut must be non-empty")
    if isinstance(dims, HilbertSpace):
        dims = dims.dims
    rho_a = partial_trace(rho, dims, a)
    rho_b = partial_trace(rho, dims, b)
    val = von_neumann_entropy(rho_a) + von_neumann_entropy(rho_b) - von_neumann_entropy(rho)
    return max(val, 0.0) if val > -1e-12 else val


def gibbs_state(H: np.ndarray, beta: float) -> np.ndarray:
    """``exp(-beta H) / Z`` computed with an extremal-eigenvalue shift.

    ``beta = inf`` gives the normalised ground-space projector and
    ``beta = -inf`` the normalised top-space projector.
    """
    if not is_hermitian(H):
        raise ValueError("Hamiltonian must be Hermitian")
    w, v = _eigh_clean(H)
    if np.isinf(beta):
        target = w[0] if beta > 0 else w[-1]
        p = (np.abs(w - target) <= 1e-12 * max(1.0, np.max(np.abs(w)))).astype(float)
    else:
        ref = w[0] if beta >= 0 else w[-1]
        p = np.exp(-beta * (w - ref))
    p /= p.sum()
    return (v * p) @ dagger(v)


def nonequilibrium_free_energy(rho: np.ndarray, H: np.ndarray, T: float) -> float:
    """``tr(H rho) - T S(rho)``."""
    return expectation(H, rho) - T * von_neumann_entropy(rho)


def unitary_from(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H`` via its eigendecomposition."""
    if not is_hermitian(H):
        raise ValueError("Hamiltonian must be Hermitian")
    w, v = _eigh_clean(H)
    return (v * np.exp(-1j * w * t)) @ dagger(v)


def sample_state(seed, dim: int, rank: int | None = None) -> np.ndarray:
    """Random state ``G G^dag / tr`` from a complex Ginibre matrix of given rank."""
    rank = dim if rank is None else int(rank)
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ dagger(g)
    return rho / np.real(np.trace(rho))


def sample_hermitian(seed, dim: int, scale: float = 1.0) -> np.ndarray:
    """Hermitian matrix with Gaussian entries, normalised to spectral norm ``scale``."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    h = (g + g.conj().T) / 2
    return scale * h / np.linalg.norm(h, 2)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``||rho - sigma||_1 / 2``."""
    d = rho - sigma
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + dagger(d))))))


def dephase(rho: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Remove coherences of ``rho`` in the eigenbasis returned by ``eigh(H)``."""
    _, v = _eigh_clean(H)
    diag = np.real(np.einsum("ji,jk,ki->i", v.conj(), rho, v))
    return (v * diag) @ dagger(v)


# --- standard operators -----------------------------------------------------

def sigma_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=complex)


def sigma_y() -> np.ndarray:
    return np.array([[0, -1j], [1j, 0]], dtype=complex)


def sigma_z() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=complex)


def destroy(n_levels: int) -> np.ndarray:
    """Bosonic annihilation operator on Fock states ``0..n_levels-1``."""
    return np.diag(np.sqrt(np.arange(1, n_levels)), 1).astype(complex)


def basis(dim: int, k: int) -> np.ndarray:
    e = np.zeros(dim, dtype=complex)
    e[k] = 1.0
    return e


def projector(dim: int, k: int | Sequence[int]) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    for i in np.atleast_1d(k):
        p[i, i] = 1.0
    return p


def permute_subsystems(rho: np.ndarray, dims, order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors; factor ``order[k]`` of the input becomes factor ``k``."""
    dims = _as_dims(dims)
    n = len(dims)
    order = list(order)
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} factors")
    t = np.asarray(rho).reshape(dims + dims)
    t = t.transpose(order + [n + k for k in order])
    d = int(np.prod(dims))
    return t.reshape(d, d)
