"""Embedding of zero-boundary eigenfunctions into wraparound boxes.

A function on the box with sides ``n_l`` extends to the doubled box with
sides ``2 n_l + 2`` by three conditions: it equals ``2^(-d/2)`` times the
source on the original block, vanishes on every hyperplane where some
coordinate is divisible by ``n_l + 1``, and is antisymmetric under the
reflection of each coordinate. The extension exists, is unique, preserves
norms and inner products, and sends adjacency eigenfunctions to eigenfunctions
of the wraparound adjacency with the same eigenvalue.
"""

from __future__ import annotations

import numpy as np

from .lattice import LatticeBox, Observable, UnsupportedPeriodError, Wavefunction, shift_set
from .spectra import SpectralData, apply_adjacency, bloch_basis, default_deg_tol

__all__ = [
    "reflect",
    "embedding_target",
    "embed",
    "embed_by_reflections",
    "embed_block",
    "extend_observable",
    "verify_correspondence",
    "verify_correspondence_family",
    "complete_to_periodic_basis",
]


def reflect(x, l: int, box: LatticeBox) -> tuple[int, ...]:
    """Reflection of coordinate l (1-based): x_l maps to side - x_l.

    Defined on boxes whose l-th side is even (the doubled form 2n+2); the
    map is taken modulo the side so x_l = side is a fixed point, making the
    reflection an involution on the whole box.
    """
    if not 1 <= l <= box.d:
        raise ValueError(f"coordinate index {l} outside 1..{box.d}")
    side = box.sides[l - 1]
    if side % 2 != 0:
        raise ValueError(f"reflection needs an even side, got {side} on coordinate {l}")
    if not box.contains(x):
        raise IndexError(f"site {tuple(x)} outside box with sides {box.sides}")
    out = list(int(c) for c in x)
    r = (side - out[l - 1]) % side
    out[l - 1] = r if r != 0 else side
    return tuple(out)


def embedding_target(box: LatticeBox) -> LatticeBox:
    """The doubled box with sides 2 n_l + 2."""
    return LatticeBox(tuple(2 * s + 2 for s in box.sides))


def _axis_maps(n: int):
    # For target coordinate v in [[1, 2n+2]]: source index (0-based) and sign.
    side = 2 * n + 2
    idx = np.zeros(side, dtype=int)
    sgn = np.zeros(side)
    for v in range(1, side + 1):
        if v % (n + 1) == 0:
            continue
        if v <= n:
            idx[v - 1] = v - 1
            sgn[v - 1] = 1.0
        else:
            idx[v - 1] = (side - v) - 1
            sgn[v - 1] = -1.0
    return idx, sgn


def embed(psi: Wavefunction) -> Wavefunction:
    """Antisymmetric norm-preserving extension to the doubled box."""
    g = psi.grid()
    idxs, sgns = zip(*(_axis_maps(n) for n in psi.box.sides))
    gathered = g[np.ix_(*idxs)]
    sign = sgns[0]
    for s in sgns[1:]:
        sign = np.multiply.outer(sign, s)
    out = 2.0 ** (-psi.box.d / 2.0) * sign * gathered
    return Wavefunction.from_grid(embedding_target(psi.box), out)


def embed_by_reflections(psi: Wavefunction) -> Wavefunction:
    """Same extension built by sweeping reflections axis by axis.

    Copies the scaled source block, zeroes the divisible hyperplanes, then
    propagates with a sign flip across each coordinate reflection in turn.
    Agrees exactly with :func:`embed`; kept as an independent construction
    of the uniquely determined extension.
    """
    target = embedding_target(psi.box)
    dtype = complex if np.iscomplexobj(psi.values) else float
    out = np.zeros(target.sides, dtype=dtype)
    src_block = tuple(slice(0, n) for n in psi.box.sides)
    out[src_block] = 2.0 ** (-psi.box.d / 2.0) * psi.grid()
    for axis, n in enumerate(psi.box.sides):
        lower = [slice(None)] * target.d
        upper = [slice(None)] * target.d
        lower[axis] = slice(0, n)
        upper[axis] = slice(n + 1, 2 * n + 1)
        out[tuple(upper)] = -np.flip(out[tuple(lower)], axis=axis)
    return Wavefunction.from_grid(target, out)


def embed_block(psi: Wavefunction, q, N: int) -> Wavefunction:
    """Extension for a block with per-coordinate periods q_l (sides q_l N).

    The eigenfunction correspondence requires every period to be 1 or 2;
    longer periods are refused.
    """
    q = tuple(int(c) for c in q)
    if any(c not in (1, 2) for c in q):
        raise UnsupportedPeriodError(f"periods {q} unsupported: every q_l must be 1 or 2")
    expected = tuple(c * N for c in q)
    if psi.box.sides != expected:
        raise ValueError(f"wavefunction sides {psi.box.sides} do not match q*N = {expected}")
    return embed(psi)


def extend_observable(a: Observable, target: LatticeBox | None = None) -> Observable:
    """Zero extension of an observable to the doubled box.

    Keeps every entry K(x, y) with both sites in the source block and sets
    everything else to zero, so that uniform averages rescale by the volume
    ratio and quadratic forms match those of embedded wavefunctions up to
    the factor 2^d.
    """
    if target is None:
        target = embedding_target(a.box)
    if target.d != a.box.d or any(t < s for t, s in zip(target.sides, a.box.sides)):
        raise ValueError(f"target sides {target.sides} do not contain source {a.box.sides}")
    offsets = {}
    src_block = tuple(slice(0, n) for n in a.box.sides)
    for z, vals in a.offsets.items():
        out = np.zeros(target.sides, dtype=vals.dtype)
        src = vals.reshape(a.box.sides).copy()
        # keep only pairs with x+z still inside the source block
        src[~shift_set(a.box, z).mask.reshape(a.box.sides)] = 0
        out[src_block] = src
        offsets[z] = out.reshape(-1)
    return Observable(target, offsets)


def verify_correspondence(psi: Wavefunction, lam: float, norm_tol: float = 1e-8) -> float:
    """Eigen-residual of the embedded function under the wraparound adjacency.

    The input must be a normalized eigenfunction for eigenvalue lam; returns
    ||A_periodic (embed psi) - lam * embed psi||.
    """
    if abs(psi.norm() - 1.0) > norm_tol:
        raise ValueError(f"input not normalized: ||psi|| = {psi.norm()}")
    image = embed(psi)
    residual = apply_adjacency(image, "periodic").values - lam * image.values
    return float(np.linalg.norm(residual))


def verify_correspondence_family(basis: SpectralData):
    """Batch certification of an embedded orthonormal eigenfamily.

    Embeds every basis column, returning ``(max_residual, gram_error)`` where
    the Gram error is the max-norm deviation of the embedded family's Gram
    matrix from the identity.
    """
    images = []
    residuals = []
    for j in range(basis.n):
        psi = Wavefunction(basis.box, basis.vectors[:, j])
        image = embed(psi)
        res = apply_adjacency(image, "periodic").values - basis.eigenvalues[j] * image.values
        residuals.append(np.linalg.norm(res))
        images.append(image.values)
    E = np.column_stack(images)
    gram = E.conj().T @ E
    gram_error = float(np.max(np.abs(gram - np.eye(basis.n))))
    return float(max(residuals)), gram_error


def complete_to_periodic_basis(
    embedded: np.ndarray,
    eigenvalues,
    N: int,
    d: int,
    tol: float | None = None,
) -> SpectralData:
    """Extend an embedded eigenfamily to a full wraparound eigenbasis.

    Works classwise on the Bloch spectrum of the doubled cube: within each
    degeneracy class the Bloch vectors spanning the eigenspace are projected
    onto the orthogonal complement of the embedded members and
    re-orthonormalized, so the returned basis contains the embedded family
    and diagonalizes the wraparound adjacency.
    """
    tol = default_deg_tol(d) if tol is None else tol
    match_tol = max(tol, 1e-8)
    side = 2 * N + 2
    bloch = bloch_basis(side, d)
    embedded = np.asarray(embedded, dtype=complex)
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    assigned = np.full(eigenvalues.size, -1, dtype=int)
    columns, out_eigs = [], []
    for ci, cls in enumerate(bloch.classes):
        rep = float(np.mean(bloch.eigenvalues[cls]))
        sel = np.where(np.abs(eigenvalues - rep) <= match_tol)[0]
        assigned[sel] = ci
        E = embedded[:, sel]
        B = bloch.vectors[:, cls]
        need = len(cls) - E.shape[1]
        if need < 0:
            raise ValueError(f"class at eigenvalue {rep} too small for embedded family")
        if E.shape[1]:
            B = B - E @ (E.conj().T @ B)
        if need > 0:
            U, s, _ = np.linalg.svd(B, full_matrices=False)
            if s[need - 1] < 1e-6:
                raise ValueError(f"rank collapse completing class at eigenvalue {rep}")
            comp = U[:, :need]
        else:
            comp = np.zeros((B.shape[0], 0), dtype=complex)
        block = np.column_stack([E, comp]) if E.shape[1] else comp
        columns.append(block)
        out_eigs.extend([rep] * block.shape[1])
    if np.any(assigned < 0):
        bad = np.where(assigned < 0)[0]
        raise ValueError(f"embedded eigenvalues {eigenvalues[bad]} match no wraparound class")
    vectors = np.column_stack(columns)
    eigs = np.array(out_eigs)
    classes = []
    start = 0
    for cls in bloch.classes:
        classes.append(list(range(start, start + len(cls))))
        start += len(cls)
    return SpectralData(bloch.box, eigs, vectors, classes)
