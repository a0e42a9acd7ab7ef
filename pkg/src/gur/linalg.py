"""Dense complex linear algebra on tensor-product Hilbert spaces.

Matrices are plain ``numpy`` arrays of ``complex128``.  Subsystem 0 is the
most significant tensor index, so ``tensor(a, b)`` is ``numpy.kron(a, b)``.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

DEFAULT_TOL = 1e-9

SeedLike = int | np.random.Generator | None


def as_rng(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(seed)


def dist(a: np.ndarray, b: np.ndarray) -> float:
    """Max-norm of ``a - b``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return float("inf")
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b)))


def close(a: np.ndarray, b: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    return dist(a, b) < tol


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(a, b)


def tensor_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def _check_dims(m: np.ndarray, dims: Sequence[int]) -> None:
    total = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (total, total):
        raise ValueError(f"matrix of shape {m.shape} does not act on dims {list(dims)}")


def partial_trace(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    The kept subsystems stay in their original (ascending) order.
    """
    dims = [int(d) for d in dims]
    m = np.asarray(m, dtype=complex)
    _check_dims(m, dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"subsystem index out of range in {keep}")
    drop = [i for i in range(n) if i not in keep]
    t = m.reshape(dims + dims)
    perm = keep + drop + [n + i for i in keep] + [n + i for i in drop]
    t = t.transpose(perm)
    dk = int(np.prod([dims[i] for i in keep]))
    dd = int(np.prod([dims[i] for i in drop]))
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def permute_subsystems(m: np.ndarray, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``i`` of the result is factor ``perm[i]`` of ``m``."""
    dims = [int(d) for d in dims]
    _check_dims(m, dims)
    n = len(dims)
    t = np.asarray(m).reshape(dims + dims)
    t = t.transpose(list(perm) + [n + p for p in perm])
    total = int(np.prod(dims))
    return t.reshape(total, total)


def embed_local(op: np.ndarray, dims: Sequence[int], target: int) -> np.ndarray:
    """``op`` on subsystem ``target`` tensored with identities elsewhere."""
    dims = [int(d) for d in dims]
    if not 0 <= target < len(dims):
        raise ValueError(f"target {target} out of range for dims {dims}")
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[target], dims[target]):
        raise ValueError(f"operator of shape {op.shape} does not fit subsystem of dimension {dims[target]}")
    before = int(np.prod(dims[:target]))
    after = int(np.prod(dims[target + 1:]))
    return np.kron(np.kron(np.eye(before), op), np.eye(after))


def place(op: np.ndarray, rest: np.ndarray, dims: Sequence[int], target: int) -> np.ndarray:
    """Build ``op`` on subsystem ``target`` tensored with ``rest`` on all the others.

    ``rest`` acts on the remaining subsystems in their original order.
    """
    dims = [int(d) for d in dims]
    others = [i for i in range(len(dims)) if i != target]
    joint = np.kron(op, rest)
    order = [target] + others
    inverse = [order.index(i) for i in range(len(dims))]
    return permute_subsystems(joint, [dims[i] for i in order], inverse)


def haar_unitary(dim: int, seed: SeedLike = None) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = as_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_density(dim: int, rank: int | None = None, seed: SeedLike = None) -> np.ndarray:
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError("rank must satisfy 1 <= rank <= dim")
    rng = as_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_projector(dim: int, rank: int, seed: SeedLike = None) -> np.ndarray:
    if not 1 <= rank <= dim:
        raise ValueError("rank must satisfy 1 <= rank <= dim")
    u = haar_unitary(dim, seed)[:, :rank]
    return u @ u.conj().T


def random_composition(total: int, parts: int, seed: SeedLike = None) -> list[int]:
    """Uniform random composition of ``total`` into ``parts`` positive integers."""
    if not 1 <= parts <= total:
        raise ValueError("need 1 <= parts <= total")
    rng = as_rng(seed)
    cuts = sorted(rng.choice(np.arange(1, total), size=parts - 1, replace=False).tolist())
    bounds = [0] + cuts + [total]
    return [bounds[i + 1] - bounds[i] for i in range(parts)]


def random_observable(dim: int, num_outcomes: int, seed: SeedLike = None) -> list[np.ndarray]:
    """Mutually orthogonal projectors summing to the identity, with random ranks."""
    if not 1 <= num_outcomes <= dim:
        raise ValueError("need 1 <= num_outcomes <= dim")
    rng = as_rng(seed)
    ranks = random_composition(dim, num_outcomes, rng)
    u = haar_unitary(dim, rng)
    out = []
    start = 0
    for r in ranks:
        cols = u[:, start:start + r]
        out.append(cols @ cols.conj().T)
        start += r
    return out


def is_hermitian(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and dist(m, m.conj().T) <= tol


def min_eigenvalue(m: np.ndarray) -> float:
    m = np.asarray(m, dtype=complex)
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def is_psd(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    if not is_hermitian(m, tol):
        return False
    return min_eigenvalue(m) >= -tol


def is_projector(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    return is_hermitian(m, tol) and dist(m @ m, m) <= tol


def is_unitary(m: np.ndarray, tol: float = DEFAULT_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return dist(m @ m.conj().T, np.eye(m.shape[0])) <= tol


def shift_operator(dim: int) -> np.ndarray:
    """Cyclic shift ``|i> -> |i+1 mod dim>``; Pauli X for ``dim == 2``."""
    return np.roll(np.eye(dim, dtype=complex), 1, axis=0)


def choi_matrix(channel: Callable[[np.ndarray], np.ndarray], dim: int) -> np.ndarray:
    """``sum_ij |i><j| (x) channel(|i><j|)``; PSD iff ``channel`` is completely positive."""
    blocks = []
    for i in range(dim):
        for j in range(dim):
            e = np.zeros((dim, dim), dtype=complex)
            e[i, j] = 1.0
            blocks.append(np.kron(e, np.asarray(channel(e), dtype=complex)))
    return np.sum(blocks, axis=0)
