"""Truncated periodic Schrödinger operators on lattice blocks.

An operator here is nearest-neighbor hopping on the block
``prod_l [[1, q_l N]]`` plus a diagonal potential that repeats the values on
the fundamental block ``prod_l [[1, q_l]]``. The staggered two-periodic
potential with a large gap M produces two spectral bands whose eigenfunctions
concentrate on alternating sublattices, the standard obstruction to
equidistribution; observables that are constant on period blocks remain
well-behaved, which the partial equidistribution experiment measures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .lattice import LatticeBox, Observable, UnsupportedPeriodError
from .spectra import SpectralData, adjacency_matrix, default_deg_tol, degeneracy_classes
from .time_average import centered, quantum_variance

__all__ = [
    "PeriodicPotential",
    "load_potential",
    "lattice_block",
    "TruncatedOperator",
    "build_operator",
    "EigenSolveResult",
    "eigensolve_symmetric",
    "eigenbasis",
    "counterexample_potential",
    "MassProfile",
    "counterexample_mass_profile",
    "LcViolationError",
    "lc_deviation",
    "PartialQeResult",
    "partial_qe_experiment",
]


@dataclass(frozen=True, eq=False)
class PeriodicPotential:
    """Potential values on the fundamental block, repeated over the lattice."""

    q: tuple[int, ...]
    values: np.ndarray  # shape q, row-major

    def __post_init__(self):
        q = tuple(int(c) for c in self.q)
        if any(c < 1 for c in q):
            raise ValueError(f"periods must be positive, got {q}")
        vals = np.asarray(self.values, dtype=float).reshape(q)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "values", vals)

    @property
    def d(self) -> int:
        return len(self.q)

    @classmethod
    def from_dict(cls, data: dict) -> "PeriodicPotential":
        q = tuple(int(c) for c in data["q"])
        if int(data.get("d", len(q))) != len(q):
            raise ValueError("field d inconsistent with length of q")
        return cls(q, np.asarray(data["values"], dtype=float).reshape(q))

    def to_dict(self) -> dict:
        return {"d": self.d, "q": list(self.q), "values": [float(v) for v in self.values.reshape(-1)]}

    def on_box(self, box: LatticeBox) -> np.ndarray:
        """Periodic extension evaluated at every site of a box, flat."""
        if box.d != self.d:
            raise ValueError("box dimension does not match potential")
        grids = np.indices(box.sides)  # 0-based coordinates
        idx = tuple((grids[l] % self.q[l]) for l in range(self.d))
        return self.values[idx].reshape(-1)


def load_potential(path) -> PeriodicPotential:
    """Read a potential from JSON with fields d, q, values (row-major)."""
    with open(path, "r", encoding="utf-8") as fh:
        return PeriodicPotential.from_dict(json.load(fh))


def lattice_block(q, N: int) -> LatticeBox:
    """The block with sides q_l * N."""
    return LatticeBox(tuple(int(c) * N for c in q))


@dataclass(eq=False)
class TruncatedOperator:
    """Dense symmetric matrix of a truncated Schrödinger operator."""

    box: LatticeBox
    mode: str
    potential: PeriodicPotential
    matrix: np.ndarray


def build_operator(potential: PeriodicPotential, N: int, mode: str = "dirichlet") -> TruncatedOperator:
    """Adjacency of the block plus the periodic diagonal potential."""
    if N < 1:
        raise ValueError("N must be at least 1")
    box = lattice_block(potential.q, N)
    H = adjacency_matrix(box, mode)
    H[np.diag_indices_from(H)] += potential.on_box(box)
    return TruncatedOperator(box, mode, potential, H)


@dataclass(eq=False)
class EigenSolveResult:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    residual: float
    gram_error: float


def eigensolve_symmetric(H: np.ndarray, sym_tol: float = 1e-10) -> EigenSolveResult:
    """Full spectral decomposition of a real symmetric matrix.

    Orthogonal reduction to tridiagonal form followed by implicitly shifted
    iteration, via LAPACK. Eigenvalues come back ascending; each eigenvector
    is normalized with its first significant component positive so repeated
    runs are bitwise reproducible.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.T)) > sym_tol * scale:
        raise ValueError("matrix is not symmetric")
    try:
        eigs, vecs = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigensolver did not converge: {exc}") from exc
    for j in range(vecs.shape[1]):
        col = vecs[:, j]
        lead = np.argmax(np.abs(col) > 1e-12 * np.max(np.abs(col)))
        if col[lead] < 0:
            vecs[:, j] = -col
    residual = float(np.max(np.linalg.norm(H @ vecs - vecs * eigs, axis=0))) if H.size else 0.0
    gram_error = float(np.max(np.abs(vecs.T @ vecs - np.eye(H.shape[0]))))
    return EigenSolveResult(eigs, vecs, residual, gram_error)


def eigenbasis(op: TruncatedOperator, tol: float | None = None) -> SpectralData:
    """Numeric eigenbasis of a truncated operator with degeneracy classes."""
    result = eigensolve_symmetric(op.matrix)
    tol = default_deg_tol(op.box.d) if tol is None else tol
    classes = degeneracy_classes(result.eigenvalues, tol)
    return SpectralData(op.box, result.eigenvalues, result.vectors, classes)


def counterexample_potential(M: float) -> PeriodicPotential:
    """Two-periodic staggered potential: 0 on odd sites, M on even sites."""
    return PeriodicPotential((2,), np.array([0.0, float(M)]))


@dataclass(eq=False)
class MassProfile:
    """Band counts and sublattice masses for the staggered potential."""

    M: float
    N: int
    eigenvalues: np.ndarray
    low_band_count: int
    high_band_count: int
    even_masses: np.ndarray  # per eigenfunction, ascending eigenvalue order
    mass_bound: float

    @property
    def bands_complete(self) -> bool:
        total = self.eigenvalues.size
        return self.low_band_count == total // 2 and self.high_band_count == total // 2

    @property
    def max_low_even_mass(self) -> float:
        return float(np.max(self.even_masses[: self.low_band_count]))

    @property
    def max_high_odd_mass(self) -> float:
        return float(np.max(1.0 - self.even_masses[self.eigenvalues.size - self.high_band_count :]))

    @property
    def bound_holds(self) -> bool:
        return self.max_low_even_mass <= self.mass_bound and self.max_high_odd_mass <= self.mass_bound


def counterexample_mass_profile(M: float, N: int) -> MassProfile:
    """Diagonalize the staggered operator and profile sublattice masses.

    With M > 4 the spectrum splits into N eigenvalues in [-2, 2] and N in
    [M-2, M+2]; every low-band eigenfunction carries at most 4/(M-2)^2 of
    its mass on even sites, and high-band eigenfunctions at most that much
    on odd sites.
    """
    if M <= 4:
        raise ValueError("need M > 4: the two spectral bands must not overlap")
    op = build_operator(counterexample_potential(M), N, "dirichlet")
    result = eigensolve_symmetric(op.matrix)
    x = np.arange(1, op.box.volume + 1)
    even = x % 2 == 0
    even_masses = np.sum(result.vectors[even, :] ** 2, axis=0)
    low = int(np.count_nonzero((result.eigenvalues >= -2 - 1e-9) & (result.eigenvalues <= 2 + 1e-9)))
    high = int(
        np.count_nonzero((result.eigenvalues >= M - 2 - 1e-9) & (result.eigenvalues <= M + 2 + 1e-9))
    )
    return MassProfile(
        M=float(M),
        N=N,
        eigenvalues=result.eigenvalues,
        low_band_count=low,
        high_band_count=high,
        even_masses=even_masses,
        mass_bound=4.0 / (M - 2) ** 2,
    )


class LcViolationError(ValueError):
    """Observable breaks the block-orbit sum condition."""


def lc_deviation(a: Observable, q) -> float:
    """Worst spread of block-orbit sums across fundamental-block positions.

    For each position x in the fundamental block, sums the diagonal over the
    orbit x + (n_1 q_1, ..., n_d q_d); a compliant observable gives the same
    sum at every position.
    """
    q = tuple(int(c) for c in q)
    diag = a.require_diagonal().reshape(a.box.sides)
    if any(s % c != 0 for s, c in zip(a.box.sides, q)):
        raise ValueError(f"box sides {a.box.sides} are not multiples of periods {q}")
    d = a.box.d
    blocked = diag
    for l in range(d):
        s = a.box.sides[l]
        blocked = blocked.reshape(blocked.shape[: 2 * l] + (s // q[l], q[l]) + blocked.shape[2 * l + 1 :])
    # axes now alternate (orbit_1, pos_1, orbit_2, pos_2, ...)
    sums = blocked.sum(axis=tuple(range(0, 2 * d, 2))).reshape(-1)
    return float(np.max(np.abs(sums[:, None] - sums[None, :])))


@dataclass(eq=False)
class PartialQeResult:
    N: int
    q: tuple[int, ...]
    variance: float
    lc_deviation: float
    lc_checked: bool


def partial_qe_experiment(
    potential: PeriodicPotential,
    N: int,
    a: Observable,
    enforce_lc: bool = True,
    exploratory: bool = False,
    lc_tol: float = 1e-12,
) -> PartialQeResult:
    """Quantum variance of a centered observable over the numeric eigenbasis.

    The observable must have sup-norm at most 1 and satisfy the block-orbit
    sum condition; violations raise :class:`LcViolationError` with the
    measured deviation unless ``enforce_lc`` is off (useful to exhibit the
    failure mode). Periods above 2 are admitted only in exploratory mode,
    where nothing is asserted about the outcome.
    """
    q = potential.q
    if any(c not in (1, 2) for c in q) and not exploratory:
        raise UnsupportedPeriodError(
            f"periods {q} exceed 2; pass exploratory=True to scan anyway (no guarantees)"
        )
    op = build_operator(potential, N, "dirichlet")
    if a.box != op.box:
        raise ValueError(f"observable box {a.box.sides} does not match block {op.box.sides}")
    if a.sup_norm > 1.0 + 1e-12:
        raise ValueError(f"observable sup-norm {a.sup_norm} exceeds 1")
    deviation = lc_deviation(a, q)
    scale = max(1.0, float(np.max(np.abs(a.diag())))) * op.box.volume
    checked = deviation <= lc_tol * scale
    if enforce_lc and not checked:
        raise LcViolationError(
            f"block-orbit sums differ by {deviation:.3e} (tolerance {lc_tol * scale:.3e}); "
            "rerun with enforce_lc=False to measure the failing observable"
        )
    basis = eigenbasis(op)
    variance = quantum_variance(basis, centered(a))
    return PartialQeResult(N=N, q=q, variance=variance, lc_deviation=deviation, lc_checked=checked)
