"""Uniform tensor grids on the box [-L, L]^N with homogeneous Dirichlet data.

Only interior nodes are stored. Nodes are ordered lexicographically in
(x1, ..., xN), i.e. the last axis varies fastest (C order), and a field is a
plain 1-D float array aligned with that order.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "GridSpec",
    "Grid",
    "build_grid",
    "check_field",
    "integrate",
    "lp_norm",
    "write_field_csv",
    "read_field_csv",
]


@dataclass(frozen=True)
class GridSpec:
    dimension: int
    half_width: float
    nodes_per_axis: int

    def __post_init__(self):
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if int(self.nodes_per_axis) != self.nodes_per_axis or self.nodes_per_axis < 3:
            raise ValueError(f"nodes_per_axis must be an integer >= 3, got {self.nodes_per_axis}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.nodes_per_axis + 1)


@dataclass(frozen=True, eq=False)
class Grid:
    """Interior nodes of a uniform grid; immutable."""

    spec: GridSpec
    axis: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.spec.dimension

    @property
    def m(self) -> int:
        return self.spec.nodes_per_axis

    @property
    def h(self) -> float:
        return self.spec.h

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.m,) * self.dim

    @property
    def size(self) -> int:
        return self.m**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @cached_property
    def coords(self) -> np.ndarray:
        """(size, N) array of node coordinates in lexicographic order."""
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        out = np.stack([c.ravel() for c in mesh], axis=1)
        out.setflags(write=False)
        return out

    def reshape(self, u: np.ndarray) -> np.ndarray:
        return np.asarray(u).reshape(self.shape)

    def reflection_index(self, axis: int) -> np.ndarray:
        """Permutation mapping node i to its mirror image under x_axis -> -x_axis."""
        idx = np.arange(self.size).reshape(self.shape)
        return np.flip(idx, axis=axis).ravel()


def build_grid(spec: GridSpec) -> Grid:
    m, L, h = spec.nodes_per_axis, spec.half_width, spec.h
    # node i sits at -L + (i+1) h; the symmetric form keeps mirrored nodes exact negatives
    i = np.arange(m)
    axis = h * (i - (m - 1) / 2.0)
    axis.setflags(write=False)
    return Grid(spec=spec, axis=axis)


def check_field(grid: Grid, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.shape[0] != grid.size:
        raise ValueError(f"field of shape {u.shape} does not match grid with {grid.size} nodes")
    return u


def integrate(grid: Grid, u) -> float:
    """Nodal rectangle rule h^N * sum(u)."""
    u = check_field(grid, u)
    return float(grid.cell_volume * np.sum(u))


def lp_norm(grid: Grid, u, exponent=2.0) -> float:
    u = check_field(grid, u)
    if exponent == np.inf or exponent == "inf":
        return float(np.max(np.abs(u))) if u.size else 0.0
    exponent = float(exponent)
    if not exponent >= 1:
        raise ValueError(f"exponent must be >= 1 or inf, got {exponent}")
    a = np.abs(u)
    if exponent == 2.0:
        return math.sqrt(integrate(grid, a * a))
    # rescale by the max to avoid under/overflow for large exponents
    top = a.max()
    if top == 0:
        return 0.0
    return float(top * integrate(grid, (a / top) ** exponent) ** (1.0 / exponent))


def write_field_csv(path, grid: Grid, u, comment: str | None = None) -> None:
    """Write a field as CSV with header ``x1,...,xN,u``, one row per node."""
    u = check_field(grid, u)
    header = [f"x{i + 1}" for i in range(grid.dim)] + ["u"]
    with open(path, "w", newline="", encoding="ascii") as fh:
        if comment is not None:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for x, val in zip(grid.coords, u):
            w.writerow([repr(float(c)) for c in x] + [repr(float(val))])


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Return (coords, values) from a file written by :func:`write_field_csv`."""
    with open(path, encoding="ascii") as fh:
        rows = [line for line in fh if not line.startswith("#")]
    data = list(csv.reader(rows))
    header, body = data[0], data[1:]
    if header[-1] != "u" or any(h != f"x{i + 1}" for i, h in enumerate(header[:-1])):
        raise ValueError(f"unexpected field CSV header {header}")
    arr = np.array(body, dtype=float).reshape(len(body), len(header))
    return arr[:, :-1], arr[:, -1]
