"""Eigenfunction correlators and the one-dimensional universality scan.

For a finite-range kernel K and a function psi, the reference value

    <K>_psi = sum_z sum_{x in L_z} K(x, x+z) / #L_z * <psi, rho_z psi>

is compared against the raw quadratic form <psi, K psi>; the wraparound
variant averages by the box volume and uses the wrapping translation. In one
dimension the shift overlaps of the sine eigenfunctions admit a universal
description through the spherical function

    Phi_lam(n) = cos(n arccos(lam / 2)),

realized operator-wise by Chebyshev-type matrices T_n (value 1/2 at distance
n from the diagonal) satisfying T_{n+1} = A T_n - T_{n-1}; away from the
boundary the box recursion reproduces the full-line pattern exactly, which
pins the overlap error down to O(1/N).
"""

from __future__ import annotations

import numpy as np

from .lattice import BoxMismatchError, Observable, Wavefunction, cube, shift_set, translate
from .spectra import adjacency_matrix, sine_matrix

__all__ = [
    "spherical",
    "chebyshev_operator",
    "infinite_chebyshev",
    "correlator",
    "averaged_kernel",
    "sine_shift_overlaps",
    "wucha_error_scan",
]


def spherical(lam: float, n: int) -> float:
    """Spherical function of the line at spectral parameter lam, order n.

    Evaluated by the three-term recursion (rather than arccos) to stay exact
    against the operator recursion near the spectral edges.
    """
    if abs(lam) > 2.0:
        raise ValueError(f"spectral parameter {lam} outside [-2, 2]")
    if n < 0:
        raise ValueError("order must be nonnegative")
    prev, cur = 1.0, lam / 2.0
    if n == 0:
        return prev
    for _ in range(n - 1):
        prev, cur = cur, lam * cur - prev
    return float(cur)


def chebyshev_operator(n: int, N: int) -> np.ndarray:
    """The matrix Phi_A(n) on [[1, N]] built by the operator recursion."""
    if not 0 <= n <= N - 1:
        raise ValueError(f"order {n} outside [[0, {N - 1}]]")
    A = adjacency_matrix(cube(N, 1), "dirichlet")
    prev = np.eye(N)
    if n == 0:
        return prev
    cur = A / 2.0
    for _ in range(n - 1):
        prev, cur = cur, A @ cur - prev
    return cur


def infinite_chebyshev(n: int, N: int) -> np.ndarray:
    """Restriction to [[1, N]] of the full-line pattern: 1/2 at distance n."""
    if n == 0:
        return np.eye(N)
    x = np.arange(N)
    return np.where(np.abs(x[:, None] - x[None, :]) == n, 0.5, 0.0)


def correlator(K: Observable, psi: Wavefunction, mode: str = "dirichlet") -> complex:
    """Reference expectation of a finite-range kernel against shift overlaps."""
    if K.box != psi.box:
        raise BoxMismatchError("kernel and wavefunction live on different boxes")
    if mode not in ("dirichlet", "periodic"):
        raise ValueError(f"unknown mode {mode!r}")
    total = 0.0 + 0.0j
    for z, vals in K.offsets.items():
        count = shift_set(K.box, z).count
        if count == 0:
            continue
        weight = vals.sum()
        overlap = psi.inner(translate(psi, z, mode))
        if mode == "dirichlet":
            total += weight / count * overlap
        else:
            total += weight * overlap
    if mode == "periodic":
        total /= K.box.volume
    return complex(total)


def averaged_kernel(K: Observable) -> Observable:
    """Replace each diagonal offset of K by its average over L_z.

    Per-offset sums are preserved, so correlators of the averaged kernel
    agree with those of the original.
    """
    offsets = {}
    for z, vals in K.offsets.items():
        mask = shift_set(K.box, z).mask
        count = int(np.count_nonzero(mask))
        out = np.zeros_like(vals)
        if count:
            out[mask] = vals.sum() / count
        offsets[z] = out
    return Observable(K.box, offsets)


def sine_shift_overlaps(N: int, z: int) -> np.ndarray:
    """Overlaps <s_j, rho_z s_j> for every frequency j on [[1, N]]."""
    S = sine_matrix(N, 1)[0]
    z = abs(int(z))
    if z >= N:
        return np.zeros(N)
    if z == 0:
        return np.ones(N)
    return np.sum(S[: N - z] * S[z:], axis=0)


def wucha_error_scan(n_values, R: int) -> list[dict]:
    """Worst-frequency gap between shift overlaps and the spherical values.

    For each box size and each |z| <= R, reports
    max_j |<s_j, rho_z s_j> - Phi_{lam_j}(|z|)| together with its product
    with N; the product stays bounded along the scan while the error itself
    decays like 1/N.
    """
    n_values = [int(N) for N in n_values]
    if not n_values:
        raise ValueError("need at least one box size")
    if R > min(n_values) - 1:
        raise ValueError(f"offset range {R} too large for smallest box {min(n_values)}")
    rows = []
    for N in n_values:
        lam = 2.0 * np.cos(np.arange(1, N + 1) * np.pi / (N + 1))
        for z in range(0, R + 1):
            overlaps = sine_shift_overlaps(N, z)
            sph = np.array([spherical(l, z) for l in lam])
            err = float(np.max(np.abs(overlaps - sph)))
            rows.append({"N": N, "z": z, "max_err": err, "err_times_N": err * N})
    return rows
