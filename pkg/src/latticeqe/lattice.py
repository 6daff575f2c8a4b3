"""Finite boxes of the integer lattice and the objects living on them.

A box is a product of 1-based integer ranges ``[[1, side_l]]``. Sites are
addressed by multi-index or by a row-major linear index with coordinate 1
slowest. Wavefunctions are square-summable functions on a box; observables
are diagonal functions or finite-range kernels stored sparsely by offset.
Translations come in a zero-boundary flavor (``rho``, values shifted past
the boundary are dropped) and a wraparound flavor (``tau``, coordinates wrap
modulo the sides).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BoxMismatchError",
    "UnsupportedPeriodError",
    "LatticeBox",
    "cube",
    "Wavefunction",
    "Observable",
    "ShiftSet",
    "shift_set",
    "translate",
    "averages",
]


class BoxMismatchError(ValueError):
    """Operands are attached to different boxes."""


class UnsupportedPeriodError(ValueError):
    """Period structure outside the supported range."""


@dataclass(frozen=True)
class LatticeBox:
    """The box ``prod_l [[1, sides[l]]]`` with 1-based coordinates."""

    sides: tuple[int, ...]

    def __post_init__(self):
        sides = tuple(int(s) for s in self.sides)
        if len(sides) < 1:
            raise ValueError("a box needs at least one dimension")
        if any(s < 1 for s in sides):
            raise ValueError(f"box sides must be positive, got {sides}")
        object.__setattr__(self, "sides", sides)

    @property
    def d(self) -> int:
        return len(self.sides)

    @property
    def volume(self) -> int:
        out = 1
        for s in self.sides:
            out *= s
        return out

    def contains(self, x) -> bool:
        return len(x) == self.d and all(1 <= xl <= s for xl, s in zip(x, self.sides))

    def linearize(self, x) -> int:
        """Row-major linear index of a site, coordinate 1 slowest."""
        if not self.contains(x):
            raise IndexError(f"site {tuple(x)} outside box with sides {self.sides}")
        i = 0
        for xl, s in zip(x, self.sides):
            i = i * s + (int(xl) - 1)
        return i

    def delinearize(self, i: int) -> tuple[int, ...]:
        """Inverse of :meth:`linearize`."""
        if not 0 <= i < self.volume:
            raise IndexError(f"linear index {i} outside volume {self.volume}")
        coords = []
        for s in reversed(self.sides):
            coords.append(i % s + 1)
            i //= s
        return tuple(reversed(coords))

    def sites(self):
        """Iterate all sites in linear-index order."""
        return itertools.product(*(range(1, s + 1) for s in self.sides))


def cube(N: int, d: int) -> LatticeBox:
    """The cube ``[[1, N]]^d``."""
    return LatticeBox((N,) * d)


def _check_same_box(a: LatticeBox, b: LatticeBox):
    if a != b:
        raise BoxMismatchError(f"boxes differ: sides {a.sides} vs {b.sides}")


@dataclass(frozen=True, eq=False)
class Wavefunction:
    """A complex-valued function on a box, stored flat in linear-index order.

    Treat instances as immutable; all operations return new objects.
    """

    box: LatticeBox
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype.kind not in "fc":
            vals = vals.astype(float)
        vals = vals.reshape(-1)
        if vals.size != self.box.volume:
            raise ValueError(
                f"expected {self.box.volume} values for box {self.box.sides}, got {vals.size}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("wavefunction values must be finite")
        object.__setattr__(self, "values", vals)

    def grid(self) -> np.ndarray:
        return self.values.reshape(self.box.sides)

    @classmethod
    def from_grid(cls, box: LatticeBox, grid) -> "Wavefunction":
        return cls(box, np.asarray(grid).reshape(-1))

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def inner(self, other: "Wavefunction"):
        """Inner product, antilinear in the first argument."""
        _check_same_box(self.box, other.box)
        return np.vdot(self.values, other.values)


_ZERO = (0,)


@dataclass(eq=False)
class Observable:
    """A diagonal observable or finite-range kernel on a box.

    Entries are stored per offset ``z``: ``offsets[z][i]`` holds ``K(x, x+z)``
    for the site ``x`` with linear index ``i``. Entries at sites where
    ``x + z`` leaves the box must vanish.
    """

    box: LatticeBox
    offsets: dict[tuple[int, ...], np.ndarray]

    def __post_init__(self):
        clean = {}
        for z, vals in self.offsets.items():
            z = tuple(int(c) for c in z)
            if len(z) != self.box.d:
                raise ValueError(f"offset {z} has wrong dimension for box {self.box.sides}")
            vals = np.asarray(vals)
            if vals.dtype.kind not in "fc":
                vals = vals.astype(float)
            vals = vals.reshape(-1)
            if vals.size != self.box.volume:
                raise ValueError(f"offset {z}: expected {self.box.volume} entries")
            outside = ~shift_set(self.box, z).mask
            if np.any(vals[outside] != 0):
                raise ValueError(f"offset {z}: nonzero entries at sites where x+z leaves the box")
            clean[z] = vals
        self.offsets = clean

    @classmethod
    def diagonal(cls, box: LatticeBox, values) -> "Observable":
        return cls(box, {(0,) * box.d: np.asarray(values).reshape(-1)})

    @classmethod
    def kernel(cls, box: LatticeBox, offsets: dict) -> "Observable":
        return cls(box, offsets)

    @property
    def kind(self) -> str:
        zero = (0,) * self.box.d
        return "diagonal" if all(z == zero for z in self.offsets) else "kernel"

    @property
    def range(self) -> int:
        if not self.offsets:
            return 0
        return max(sum(abs(c) for c in z) for z in self.offsets)

    @property
    def sup_norm(self) -> float:
        if not self.offsets:
            return 0.0
        return float(max(np.max(np.abs(v)) for v in self.offsets.values()))

    def diag(self) -> np.ndarray:
        zero = (0,) * self.box.d
        if zero in self.offsets:
            return self.offsets[zero]
        return np.zeros(self.box.volume)

    def require_diagonal(self) -> np.ndarray:
        if self.kind != "diagonal":
            raise ValueError("operation requires a diagonal observable")
        return self.diag()

    def to_matrix(self) -> np.ndarray:
        """Dense matrix ``M[i, j] = K(x_i, x_j)``."""
        vol = self.box.volume
        dtype = complex if any(v.dtype.kind == "c" for v in self.offsets.values()) else float
        M = np.zeros((vol, vol), dtype=dtype)
        for z, vals in self.offsets.items():
            for i, x in enumerate(self.box.sites()):
                if vals[i] != 0:
                    y = tuple(xl + zl for xl, zl in zip(x, z))
                    M[i, self.box.linearize(y)] = vals[i]
        return M


@dataclass(frozen=True, eq=False)
class ShiftSet:
    """The set ``L_z`` of sites x with x+z still inside the box."""

    box: LatticeBox
    z: tuple[int, ...]
    mask: np.ndarray  # flat boolean, linear-index order

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.mask))


def shift_set(box: LatticeBox, z) -> ShiftSet:
    z = tuple(int(c) for c in z)
    if len(z) != box.d:
        raise ValueError(f"offset {z} has wrong dimension for box {box.sides}")
    axis_masks = []
    for zl, s in zip(z, box.sides):
        x = np.arange(1, s + 1)
        axis_masks.append((x + zl >= 1) & (x + zl <= s))
    mask = axis_masks[0]
    for am in axis_masks[1:]:
        mask = np.multiply.outer(mask, am)
    return ShiftSet(box, z, mask.reshape(-1))


def translate(psi: Wavefunction, z, mode: str = "dirichlet") -> Wavefunction:
    """Shift a wavefunction by z.

    ``dirichlet`` drops values carried past the boundary (the operator
    ``rho_z``: output(x) = psi(x+z) when x+z is in the box, else 0).
    ``periodic`` wraps coordinates modulo the sides (the operator ``tau_z``).
    """
    z = tuple(int(c) for c in z)
    if len(z) != psi.box.d:
        raise ValueError(f"offset {z} has wrong dimension for box {psi.box.sides}")
    g = psi.grid()
    if mode == "periodic":
        out = g
        for axis, zl in enumerate(z):
            if zl % psi.box.sides[axis] != 0:
                out = np.roll(out, -zl, axis=axis)
        return Wavefunction.from_grid(psi.box, out)
    if mode != "dirichlet":
        raise ValueError(f"unknown translation mode {mode!r}")
    out = np.zeros_like(g)
    dst, src = [], []
    for zl, s in zip(z, psi.box.sides):
        lo, hi = max(0, -zl), min(s, s - zl)
        if lo >= hi:
            return Wavefunction.from_grid(psi.box, out)
        dst.append(slice(lo, hi))
        src.append(slice(lo + zl, hi + zl))
    out[tuple(dst)] = g[tuple(src)]
    return Wavefunction.from_grid(psi.box, out)


def averages(a: Observable, psi: Wavefunction):
    """Uniform average of a diagonal observable and its quadratic form.

    Returns ``(<a>, <psi, a psi>)`` with ``<a>`` the site average of the
    diagonal and the quadratic form ``sum_x a(x,x) |psi(x)|^2``.
    """
    _check_same_box(a.box, psi.box)
    diag = a.require_diagonal()
    uniform = diag.mean()
    quad = np.sum(diag * np.abs(psi.values) ** 2)
    return uniform, quad
