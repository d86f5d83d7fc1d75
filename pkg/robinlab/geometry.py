"""
Geometry – domains, grids and exact geometric constants
=========================================================
Four parametric domains are supported, each with closed-form volume,
perimeter and boundary distance:

  Interval(a, b)        1D segment; the "perimeter" is the counting measure
                        on the two endpoints
  Ball(n, R)            n-ball, discretised along the radius s ∈ [0, R]
  Shell(n, r, R)        spherical shell, radius s ∈ [r, R]
  Rectangle(w, h)       [0, w] × [0, h] tensor grid

Grids carry vertex quadrature weights built by splitting the exact measure of
every cell equally between its vertices.  On the interval and the rectangle
this is the trapezoid rule; on radial grids each cell uses the exact shell
measure |S^{n-1}| (s_{i+1}^n − s_i^n)/n, so the weights sum to |Ω| exactly.

Grids also carry the one-sided gradient operators (sparse matrices, one per
gradient component) and their cell weights.  Radial and interval cells are
segments; each rectangle square is split into two P1 triangles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import ClassVar, Union

import numpy as np
from scipy import sparse

from robinlab.errors import CurvatureUndefinedError, GeometryError, ValidationError

__all__ = [
    "Interval",
    "Ball",
    "Shell",
    "Rectangle",
    "Domain",
    "Grid",
    "ScalarField",
    "sphere_area",
    "volume",
    "perimeter",
    "perimeter_volume_ratio",
    "max_mean_curvature",
    "make_grid",
    "distance_field",
    "grid_to_rows",
]


def _check_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0.0:
        raise GeometryError(f"{name} must be a positive finite length, got {value!r}")


def _check_dimension(n: int) -> None:
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
        raise GeometryError(f"dimension n must be an integer ≥ 2 (use Interval for 1D), got {n!r}")


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    kind: ClassVar[str] = "interval"

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise GeometryError(f"Interval needs a < b, got a={self.a!r}, b={self.b!r}")

    @property
    def dim(self) -> int:
        return 1

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Ball:
    n: int
    R: float
    kind: ClassVar[str] = "ball"

    def __post_init__(self):
        _check_dimension(self.n)
        _check_positive("R", self.R)

    @property
    def dim(self) -> int:
        return self.n

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": int(self.n), "R": self.R}


@dataclass(frozen=True)
class Shell:
    n: int
    r: float
    R: float
    kind: ClassVar[str] = "shell"

    def __post_init__(self):
        _check_dimension(self.n)
        _check_positive("r", self.r)
        _check_positive("R", self.R)
        if not self.r < self.R:
            raise GeometryError(f"Shell needs 0 < r < R, got r={self.r!r}, R={self.R!r}")

    @property
    def dim(self) -> int:
        return self.n

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": int(self.n), "r": self.r, "R": self.R}


@dataclass(frozen=True)
class Rectangle:
    w: float
    h: float
    kind: ClassVar[str] = "rectangle"

    def __post_init__(self):
        _check_positive("w", self.w)
        _check_positive("h", self.h)

    @property
    def dim(self) -> int:
        return 2

    def to_dict(self) -> dict:
        return {"kind": self.kind, "w": self.w, "h": self.h}


Domain = Union[Interval, Ball, Shell, Rectangle]
RADIAL_DOMAINS = (Interval, Ball, Shell)


def sphere_area(n: int) -> float:
    """|S^{n-1}| = 2 π^{n/2} / Γ(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def volume(domain: Domain) -> float:
    if isinstance(domain, Interval):
        return domain.b - domain.a
    if isinstance(domain, Ball):
        return sphere_area(domain.n) * domain.R ** domain.n / domain.n
    if isinstance(domain, Shell):
        return sphere_area(domain.n) * (domain.R ** domain.n - domain.r ** domain.n) / domain.n
    if isinstance(domain, Rectangle):
        return domain.w * domain.h
    raise GeometryError(f"unsupported domain {domain!r}")


def perimeter(domain: Domain) -> float:
    if isinstance(domain, Interval):
        return 2.0
    if isinstance(domain, Ball):
        return sphere_area(domain.n) * domain.R ** (domain.n - 1)
    if isinstance(domain, Shell):
        return sphere_area(domain.n) * (domain.R ** (domain.n - 1) + domain.r ** (domain.n - 1))
    if isinstance(domain, Rectangle):
        return 2.0 * (domain.w + domain.h)
    raise GeometryError(f"unsupported domain {domain!r}")


def perimeter_volume_ratio(domain: Domain) -> float:
    """P(Ω)/|Ω|; multiplied by −β^p this is the quotient of the constant field."""
    return perimeter(domain) / volume(domain)


def max_mean_curvature(domain: Domain) -> float:
    """
    Maximum mean curvature of ∂Ω with respect to the outward normal.

    The inner sphere of a shell curves away from the domain, so its mean
    curvature is −1/r and the maximum is attained on the outer sphere.
    """
    if isinstance(domain, Ball):
        return 1.0 / domain.R
    if isinstance(domain, Shell):
        return max(1.0 / domain.R, -1.0 / domain.r)
    raise CurvatureUndefinedError(
        f"curvature undefined for {domain.kind}: only ball and shell boundaries are smooth"
    )


# ---------------------------------------------------------------------------
# Grid and fields
# ---------------------------------------------------------------------------

def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.ascontiguousarray(array)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Grid:
    """
    Structured discretisation of a Domain.

    points            (N, d) coordinates; d = 1 for interval and radial grids
                      (the radial coordinate s), d = 2 for rectangles
    spacing           largest step h
    steps             step per axis
    shape             node layout, (N,) or (nx+1, ny+1)
    is_boundary       role tag per point
    normals           boundary index → outward unit normals (two at corners)
    volume_weights    vertex weights for ∫_Ω
    boundary_weights  vertex weights for ∮_∂Ω (zero at interior points)
    gradient_ops      one sparse (cells × N) operator per gradient component
    cell_weights      measure of every gradient cell
    """

    domain: Domain
    points: np.ndarray
    spacing: float
    steps: tuple[float, ...]
    shape: tuple[int, ...]
    is_boundary: np.ndarray
    normals: dict[int, tuple[tuple[float, ...], ...]]
    volume_weights: np.ndarray
    boundary_weights: np.ndarray
    gradient_ops: tuple[sparse.csr_matrix, ...] = field(repr=False)
    cell_weights: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    @property
    def boundary_indices(self) -> np.ndarray:
        return np.flatnonzero(self.is_boundary)

    @property
    def interior_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.is_boundary)

    def same_as(self, other: "Grid") -> bool:
        if other is self:
            return True
        return (
            self.domain == other.domain
            and self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True, eq=False)
class ScalarField:
    """One real value per grid point."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ValidationError(
                f"field has {values.size} values but the grid has {self.grid.size} points"
            )
        object.__setattr__(self, "values", _frozen(values))

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    def sup_normalized(self) -> "ScalarField":
        top = float(np.max(np.abs(self.values)))
        if top == 0.0:
            raise ValidationError("cannot sup-normalise the zero field")
        return ScalarField(self.grid, self.values / top)

    def is_positive(self) -> bool:
        return bool(np.all(self.values > 0.0))


def _vertex_weights(cell_measure: np.ndarray) -> np.ndarray:
    weights = np.zeros(cell_measure.size + 1)
    weights[:-1] += 0.5 * cell_measure
    weights[1:] += 0.5 * cell_measure
    return weights


def _radial_grid(domain: Domain, resolution: int) -> Grid:
    if isinstance(domain, Interval):
        lo, hi, n = domain.a, domain.b, 1
    elif isinstance(domain, Ball):
        lo, hi, n = 0.0, domain.R, domain.n
    else:
        lo, hi, n = domain.r, domain.R, domain.n

    s = np.linspace(lo, hi, resolution + 1)
    h = (hi - lo) / resolution
    if n == 1:
        cells = np.diff(s)
    else:
        cells = sphere_area(n) * np.diff(s ** n) / n

    size = s.size
    is_boundary = np.zeros(size, dtype=bool)
    boundary_weights = np.zeros(size)
    normals: dict[int, tuple[tuple[float, ...], ...]] = {}

    def tag(index: int, weight: float, normal: float) -> None:
        is_boundary[index] = True
        boundary_weights[index] = weight
        normals[index] = ((normal,),)

    if isinstance(domain, Interval):
        tag(0, 1.0, -1.0)
        tag(size - 1, 1.0, 1.0)
    elif isinstance(domain, Ball):
        tag(size - 1, sphere_area(n) * domain.R ** (n - 1), 1.0)
    else:
        tag(0, sphere_area(n) * domain.r ** (n - 1), -1.0)
        tag(size - 1, sphere_area(n) * domain.R ** (n - 1), 1.0)

    diff = sparse.diags([-1.0 / h, 1.0 / h], [0, 1], shape=(resolution, size), format="csr")

    return Grid(
        domain=domain,
        points=_frozen(s.reshape(-1, 1)),
        spacing=h,
        steps=(h,),
        shape=(size,),
        is_boundary=_frozen(is_boundary),
        normals=normals,
        volume_weights=_frozen(_vertex_weights(cells)),
        boundary_weights=_frozen(boundary_weights),
        gradient_ops=(diff,),
        cell_weights=_frozen(cells),
    )


def _rectangle_grid(domain: Rectangle, resolution: int) -> Grid:
    nx = ny = resolution
    hx, hy = domain.w / nx, domain.h / ny
    x = np.linspace(0.0, domain.w, nx + 1)
    y = np.linspace(0.0, domain.h, ny + 1)
    X, Y = np.meshgrid(x, y, indexing="ij")
    points = np.column_stack([X.ravel(), Y.ravel()])

    wx = _vertex_weights(np.full(nx, hx))
    wy = _vertex_weights(np.full(ny, hy))
    volume_weights = np.outer(wx, wy).ravel()

    I, J = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="ij")
    I, J = I.ravel(), J.ravel()
    left, right, bottom, top = I == 0, I == nx, J == 0, J == ny
    is_boundary = left | right | bottom | top

    boundary_weights = np.zeros(points.shape[0])
    boundary_weights[bottom] += wx[I[bottom]]
    boundary_weights[top] += wx[I[top]]
    boundary_weights[left] += wy[J[left]]
    boundary_weights[right] += wy[J[right]]

    normals: dict[int, tuple[tuple[float, ...], ...]] = {}
    for index in np.flatnonzero(is_boundary):
        found = []
        if left[index]:
            found.append((-1.0, 0.0))
        if right[index]:
            found.append((1.0, 0.0))
        if bottom[index]:
            found.append((0.0, -1.0))
        if top[index]:
            found.append((0.0, 1.0))
        normals[int(index)] = tuple(found)

    # two P1 triangles per square: lower-left (00, 10, 01) and upper-right (11, 01, 10)
    si, sj = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    si, sj = si.ravel(), sj.ravel()
    n00 = si * (ny + 1) + sj
    n10 = (si + 1) * (ny + 1) + sj
    n01 = si * (ny + 1) + sj + 1
    n11 = (si + 1) * (ny + 1) + sj + 1
    squares = si.size
    rows_a = np.arange(squares)
    rows_b = rows_a + squares

    def operator(pairs: list[tuple[np.ndarray, np.ndarray, np.ndarray]], step: float) -> sparse.csr_matrix:
        rows, cols, data = [], [], []
        for row, plus, minus in pairs:
            rows += [row, row]
            cols += [plus, minus]
            data += [np.full(row.size, 1.0 / step), np.full(row.size, -1.0 / step)]
        return sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(2 * squares, points.shape[0]),
        ).tocsr()

    dx = operator([(rows_a, n10, n00), (rows_b, n11, n01)], hx)
    dy = operator([(rows_a, n01, n00), (rows_b, n11, n10)], hy)

    return Grid(
        domain=domain,
        points=_frozen(points),
        spacing=max(hx, hy),
        steps=(hx, hy),
        shape=(nx + 1, ny + 1),
        is_boundary=_frozen(is_boundary),
        normals=normals,
        volume_weights=_frozen(volume_weights),
        boundary_weights=_frozen(boundary_weights),
        gradient_ops=(dx, dy),
        cell_weights=_frozen(np.full(2 * squares, 0.5 * hx * hy)),
    )


def make_grid(domain: Domain, resolution: int) -> Grid:
    """Uniform grid with ``resolution`` cells per axis (radial grids: along s)."""
    if isinstance(resolution, bool) or not isinstance(resolution, (int, np.integer)) or resolution < 4:
        raise ValidationError(f"resolution must be an integer ≥ 4, got {resolution!r}")
    if isinstance(domain, RADIAL_DOMAINS):
        return _radial_grid(domain, int(resolution))
    if isinstance(domain, Rectangle):
        return _rectangle_grid(domain, int(resolution))
    raise GeometryError(f"unsupported domain {domain!r}")


def distance_field(grid: Grid) -> ScalarField:
    """Exact distance to ∂Ω, zero at boundary-tagged points."""
    domain = grid.domain
    if isinstance(domain, Rectangle):
        x, y = grid.points[:, 0], grid.points[:, 1]
        d = np.minimum.reduce([x, domain.w - x, y, domain.h - y])
    else:
        s = grid.points[:, 0]
        if isinstance(domain, Interval):
            d = np.minimum(s - domain.a, domain.b - s)
        elif isinstance(domain, Ball):
            d = domain.R - s
        else:
            d = np.minimum(s - domain.r, domain.R - s)
    d = np.maximum(d, 0.0)
    d[grid.is_boundary] = 0.0
    return ScalarField(grid, d)


def grid_to_rows(grid: Grid) -> tuple[list[str], list[list]]:
    """CSV header and rows: index, coords..., role, weight, boundary weight, normals."""
    coord_names = ["s"] if grid.dim == 1 else ["x", "y"]
    max_normals = max((len(v) for v in grid.normals.values()), default=1)
    header = ["index", *coord_names, "role", "weight", "boundary_weight"]
    for k in range(max_normals):
        suffix = "" if k == 0 else str(k + 1)
        header += [f"normal{suffix}_{c}" for c in coord_names]

    rows = []
    for i in range(grid.size):
        row = [i, *grid.points[i].tolist()]
        row += ["boundary" if grid.is_boundary[i] else "interior"]
        row += [float(grid.volume_weights[i]), float(grid.boundary_weights[i])]
        normals = grid.normals.get(i, ())
        for k in range(max_normals):
            if k < len(normals):
                row += list(normals[k])
            else:
                row += [""] * grid.dim
        rows.append(row)
    return header, rows
