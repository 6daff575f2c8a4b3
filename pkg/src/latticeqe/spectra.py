"""Analytic eigenpairs of the box adjacency matrices and degeneracy counting.

With zero boundary conditions the adjacency matrix of ``[[1, N]]^d`` is
diagonalized by the product sine basis

    s^(k)(x) = (2/(N+1))^(d/2) * prod_l sin(k_l pi x_l / (N+1)),

with eigenvalue ``sum_l 2 cos(k_l pi / (N+1))``. With wraparound boundary
conditions the eigenbasis consists of Bloch exponentials
``N^(-d/2) exp(2 pi i <k, x> / N)`` with eigenvalue
``sum_l 2 cos(2 pi k_l / N)``. This module provides both bases, matrix-free
adjacency application, tolerance-based degeneracy classes, and the exact
enumeration of frequency pairs (k, m) that share an eigenvalue while their
signed combination hits a prescribed frequency theta.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeBox, Wavefunction, cube

__all__ = [
    "default_deg_tol",
    "dirichlet_eigenvalue",
    "dirichlet_eigenpair",
    "periodic_eigenvalue",
    "periodic_eigenpair",
    "dirichlet_eigenvalues",
    "periodic_eigenvalues",
    "sine_matrix",
    "bloch_matrix",
    "SpectralData",
    "sine_basis",
    "bloch_basis",
    "apply_adjacency",
    "adjacency_matrix",
    "degeneracy_classes",
    "lemma_c1_count",
    "lemma_c1_counts",
]


def default_deg_tol(d: int) -> float:
    # Analytic eigenvalues cluster far tighter than genuine gaps at desk
    # scales; 2d is the spectral radius.
    return 1e-9 * 2 * d


def _check_dirichlet_freq(N: int, d: int, k):
    k = tuple(int(c) for c in k)
    if len(k) != d or not all(1 <= c <= N for c in k):
        raise IndexError(f"frequency {k} outside [[1,{N}]]^{d}")
    return k


def dirichlet_eigenvalue(N: int, d: int, k) -> float:
    k = _check_dirichlet_freq(N, d, k)
    return float(sum(2.0 * np.cos(c * np.pi / (N + 1)) for c in k))


def dirichlet_eigenpair(N: int, d: int, k):
    """Analytic eigenvalue and normalized sine vector for frequency k."""
    k = _check_dirichlet_freq(N, d, k)
    x = np.arange(1, N + 1)
    factor = np.sqrt(2.0 / (N + 1))
    vec = np.array([1.0])
    for c in k:
        vec = np.multiply.outer(vec, factor * np.sin(c * np.pi * x / (N + 1)))
    return dirichlet_eigenvalue(N, d, k), Wavefunction(cube(N, d), vec.reshape(-1))


def periodic_eigenvalue(N: int, d: int, k) -> float:
    k = tuple(int(c) for c in k)
    if len(k) != d or not all(0 <= c <= N - 1 for c in k):
        raise IndexError(f"frequency {k} outside [[0,{N - 1}]]^{d}")
    return float(sum(2.0 * np.cos(2.0 * np.pi * c / N) for c in k))


def periodic_eigenpair(N: int, d: int, k):
    """Eigenvalue and normalized Bloch vector for frequency k."""
    lam = periodic_eigenvalue(N, d, k)
    k = tuple(int(c) for c in k)
    x = np.arange(1, N + 1)
    vec = np.array([1.0 + 0.0j])
    for c in k:
        vec = np.multiply.outer(vec, np.exp(2j * np.pi * c * x / N) / np.sqrt(N))
    return lam, Wavefunction(cube(N, d), vec.reshape(-1))


def _product_frequencies(rng: range, d: int) -> list[tuple[int, ...]]:
    return list(itertools.product(rng, repeat=d))


def sine_matrix(N: int, d: int):
    """Sine eigenvectors of the zero-boundary cube, in frequency order.

    Returns ``(S, freqs, eigs)`` where column j of S is the sine vector for
    ``freqs[j]`` and ``eigs[j]`` its eigenvalue. Frequencies are in row-major
    order (not sorted by eigenvalue).
    """
    x = np.arange(1, N + 1)
    S1 = np.sqrt(2.0 / (N + 1)) * np.sin(np.outer(x, x) * np.pi / (N + 1))
    S = S1
    for _ in range(d - 1):
        S = np.kron(S, S1)
    lam1 = 2.0 * np.cos(x * np.pi / (N + 1))
    eigs = lam1
    for _ in range(d - 1):
        eigs = np.add.outer(eigs, lam1).reshape(-1)
    return S, _product_frequencies(range(1, N + 1), d), eigs


def bloch_matrix(N: int, d: int):
    """Bloch eigenvectors of the wraparound cube, in frequency order."""
    x = np.arange(1, N + 1)
    k = np.arange(0, N)
    B1 = np.exp(2j * np.pi * np.outer(x, k) / N) / np.sqrt(N)
    B = B1
    for _ in range(d - 1):
        B = np.kron(B, B1)
    lam1 = 2.0 * np.cos(2.0 * np.pi * k / N)
    eigs = lam1
    for _ in range(d - 1):
        eigs = np.add.outer(eigs, lam1).reshape(-1)
    return B, _product_frequencies(range(0, N), d), eigs


def dirichlet_eigenvalues(N: int, d: int) -> np.ndarray:
    """All eigenvalues of the zero-boundary cube, ascending."""
    lam1 = 2.0 * np.cos(np.arange(1, N + 1) * np.pi / (N + 1))
    eigs = lam1
    for _ in range(d - 1):
        eigs = np.add.outer(eigs, lam1).reshape(-1)
    return np.sort(eigs)


def periodic_eigenvalues(N: int, d: int) -> np.ndarray:
    """All eigenvalues of the wraparound cube, ascending."""
    lam1 = 2.0 * np.cos(2.0 * np.pi * np.arange(0, N) / N)
    eigs = lam1
    for _ in range(d - 1):
        eigs = np.add.outer(eigs, lam1).reshape(-1)
    return np.sort(eigs)


@dataclass(eq=False)
class SpectralData:
    """Eigenvalues (ascending), orthonormal eigenvectors, degeneracy classes.

    ``vectors[:, j]`` is the eigenvector for ``eigenvalues[j]``; ``classes``
    partitions column indices into maximal groups whose eigenvalue spread
    stays within the detection tolerance. ``freqs`` carries the analytic
    frequency multi-indices when the basis has them.
    """

    box: LatticeBox
    eigenvalues: np.ndarray
    vectors: np.ndarray
    classes: list[list[int]]
    freqs: list[tuple[int, ...]] | None = None

    @property
    def n(self) -> int:
        return self.vectors.shape[1]


def _sorted_spectral_data(box, eigs, vectors, freqs, tol) -> SpectralData:
    order = np.argsort(eigs, kind="stable")
    eigs = np.asarray(eigs)[order]
    vectors = vectors[:, order]
    freqs = [freqs[i] for i in order] if freqs is not None else None
    classes = degeneracy_classes(eigs, tol)
    return SpectralData(box, eigs, vectors, classes, freqs)


def sine_basis(N: int, d: int, tol: float | None = None) -> SpectralData:
    """Full sine eigenbasis of the zero-boundary cube, eigenvalues ascending."""
    S, freqs, eigs = sine_matrix(N, d)
    tol = default_deg_tol(d) if tol is None else tol
    return _sorted_spectral_data(cube(N, d), eigs, S, freqs, tol)


def bloch_basis(N: int, d: int, tol: float | None = None) -> SpectralData:
    """Full Bloch eigenbasis of the wraparound cube, eigenvalues ascending."""
    B, freqs, eigs = bloch_matrix(N, d)
    tol = default_deg_tol(d) if tol is None else tol
    return _sorted_spectral_data(cube(N, d), eigs, B, freqs, tol)


def apply_adjacency(psi: Wavefunction, mode: str = "dirichlet") -> Wavefunction:
    """Matrix-free nearest-neighbor sum, cost linear in the box volume."""
    g = psi.grid()
    out = np.zeros_like(g)
    for axis, s in enumerate(psi.box.sides):
        if mode == "periodic":
            out = out + np.roll(g, 1, axis=axis) + np.roll(g, -1, axis=axis)
        elif mode == "dirichlet":
            lo = [slice(None)] * psi.box.d
            hi = [slice(None)] * psi.box.d
            lo[axis] = slice(0, s - 1)
            hi[axis] = slice(1, s)
            out[tuple(lo)] += g[tuple(hi)]
            out[tuple(hi)] += g[tuple(lo)]
        else:
            raise ValueError(f"unknown boundary mode {mode!r}")
    return Wavefunction.from_grid(psi.box, out)


def adjacency_matrix(box: LatticeBox, mode: str = "dirichlet") -> np.ndarray:
    """Dense adjacency matrix of a box (materialized only where needed)."""
    if mode not in ("dirichlet", "periodic"):
        raise ValueError(f"unknown boundary mode {mode!r}")
    vol = box.volume
    A = np.zeros((vol, vol))
    idx = np.arange(vol)
    stride = 1
    for axis in range(box.d - 1, -1, -1):
        s = box.sides[axis]
        coord = (idx // stride) % s
        fwd = coord < s - 1
        i, j = idx[fwd], idx[fwd] + stride
        A[i, j] += 1.0
        A[j, i] += 1.0
        if mode == "periodic":
            edge = coord == s - 1
            i, j = idx[edge], idx[edge] - (s - 1) * stride
            A[i, j] += 1.0
            A[j, i] += 1.0
        stride *= s
    return A


def degeneracy_classes(eigenvalues, tol: float) -> list[list[int]]:
    """Partition ascending eigenvalues into maximal near-degenerate groups.

    Consecutive values within ``tol`` share a class; the gap between
    adjacent classes exceeds ``tol``.
    """
    vals = np.asarray(eigenvalues, dtype=float)
    if vals.size == 0:
        return []
    if np.any(np.diff(vals) < -1e-15):
        raise ValueError("eigenvalues must be sorted ascending")
    classes = [[0]]
    for i in range(1, vals.size):
        if vals[i] - vals[classes[-1][-1]] <= tol:
            classes[-1].append(i)
        else:
            classes.append([i])
    return classes


def _check_signs(eps, d: int):
    eps = tuple(int(c) for c in eps)
    if len(eps) != d or not all(c in (1, -1) for c in eps):
        raise ValueError(f"sign vector {eps} not in {{1,-1}}^{d}")
    return eps


def _theta_to_int(N: int, d: int, theta):
    theta = tuple(float(c) for c in theta)
    if len(theta) != d:
        raise ValueError(f"theta {theta} has wrong dimension")
    t = []
    for c in theta:
        ti = round(c * (N + 1))
        if abs(c * (N + 1) - ti) > 1e-9 or abs(ti) > 2 * N:
            raise ValueError(f"theta {theta} not of the form t/(N+1) with |t| <= 2N")
        t.append(int(ti))
    return tuple(t)


def lemma_c1_count(N: int, d: int, theta, eps, eps_prime, tol: float | None = None) -> int:
    """Count pairs (k, m) with equal eigenvalues and (k.eps + m.eps')/(N+1) = theta.

    For fixed sign vectors the offset constraint determines k from m, so the
    enumeration walks m over the cube and solves for k, an O(N^d) pass.
    The count never exceeds ``2 N^(d-1)`` for nonzero theta.
    """
    eps = _check_signs(eps, d)
    epp = _check_signs(eps_prime, d)
    t = _theta_to_int(N, d, theta)
    if all(c == 0 for c in t):
        raise ValueError("theta = 0 is excluded (zero-frequency diagonal branch)")
    tol = default_deg_tol(d) if tol is None else tol

    m = np.indices((N,) * d).reshape(d, -1) + 1
    k = np.empty_like(m)
    for l in range(d):
        k[l] = eps[l] * t[l] - eps[l] * epp[l] * m[l]
    valid = np.all((k >= 1) & (k <= N), axis=0)
    table = 2.0 * np.cos(np.arange(0, N + 1) * np.pi / (N + 1))
    lam_m = table[m].sum(axis=0)
    lam_k = table[np.where(valid, k, 0)].sum(axis=0)
    return int(np.count_nonzero(valid & (np.abs(lam_k - lam_m) <= tol)))


def lemma_c1_counts(N: int, d: int, tol: float | None = None) -> dict:
    """Exhaustive pair counts for every nonzero theta and sign combination.

    Walks all ordered frequency pairs (k, m) inside each degeneracy class
    (exactly the pairs with equal eigenvalues at the working tolerance) and
    bins them by ``t = k.eps + m.eps'`` for every sign choice, which covers
    every admissible nonzero theta in one sweep. Returns a mapping
    ``(t, eps, eps') -> count``; absent keys have count zero.
    """
    tol = default_deg_tol(d) if tol is None else tol
    _, freqs, eigs = sine_matrix(N, d)
    order = np.argsort(eigs, kind="stable")
    classes = degeneracy_classes(eigs[order], tol)
    sign_vectors = list(itertools.product((1, -1), repeat=d))
    counts: dict = {}
    for cls in classes:
        members = [freqs[order[i]] for i in cls]
        for k in members:
            for m in members:
                for eps in sign_vectors:
                    for epp in sign_vectors:
                        t = tuple(k[l] * eps[l] + m[l] * epp[l] for l in range(d))
                        if all(c == 0 for c in t):
                            continue
                        key = (t, eps, epp)
                        counts[key] = counts.get(key, 0) + 1
    return counts
