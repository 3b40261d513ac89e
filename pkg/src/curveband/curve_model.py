"""Band-limited level-set curves.

A curve is the zero level set of a trigonometric polynomial

    psi(x) = sum_k c_k exp(j 2 pi k.x),   x in [0,1)^2,

with coefficients c_k supported on a small centered rectangle of integer
frequencies. This module holds the coefficient-grid representation and the
geometric plumbing around it: evaluation, products (curve unions),
rasterization of the zero set on a periodic grid, and arc-length sampling of
the rasterized curve.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import convolve2d

from .errors import ContractViolation, NoSamplesAvailable

DEFAULT_GRID_RES = 512

# Values exactly 0 on the sampling grid are nudged onto the negative side so
# every sign change falls strictly inside a grid edge.
_ZERO_NUDGE = -1e-300


@dataclass(frozen=True)
class FrequencySupport:
    """Centered rectangular set of integer frequency pairs.

    Axis d runs over {-floor(kd/2), ..., floor((kd-1)/2)}. Enumeration is
    row-major (first axis slowest); every coefficient array in the library
    follows this order.
    """

    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 < 1 or self.k2 < 1:
            raise ContractViolation("support sizes must be positive")

    def __len__(self):
        return self.k1 * self.k2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.k1, self.k2)

    @property
    def degree(self) -> int:
        return self.k1 + self.k2

    def axis_range(self, axis: int) -> tuple[int, int]:
        """Inclusive (lo, hi) frequency bounds along `axis` (0 or 1)."""
        k = (self.k1, self.k2)[axis]
        return -(k // 2), (k - 1) // 2

    def indices(self) -> np.ndarray:
        """All frequency pairs, shape (k1*k2, 2), enumeration order."""
        lo1, hi1 = self.axis_range(0)
        lo2, hi2 = self.axis_range(1)
        a, b = np.meshgrid(np.arange(lo1, hi1 + 1), np.arange(lo2, hi2 + 1),
                           indexing="ij")
        return np.stack([a.ravel(), b.ravel()], axis=1)

    def index_of(self, k: tuple[int, int]) -> int:
        """Position of frequency pair `k` in enumeration order."""
        lo1, _ = self.axis_range(0)
        lo2, _ = self.axis_range(1)
        if not self.contains(k):
            raise ContractViolation(f"frequency {k} outside support {self.shape}")
        return (k[0] - lo1) * self.k2 + (k[1] - lo2)

    def contains(self, k: tuple[int, int]) -> bool:
        lo1, hi1 = self.axis_range(0)
        lo2, hi2 = self.axis_range(1)
        return lo1 <= k[0] <= hi1 and lo2 <= k[1] <= hi2

    def fits_inside(self, other: "FrequencySupport") -> bool:
        """Componentwise: does every shift-0 placement of self lie in other?"""
        return self.k1 <= other.k1 and self.k2 <= other.k2


@dataclass
class TrigPolynomial:
    """Trigonometric polynomial given by coefficients on a FrequencySupport.

    `coeffs` is complex, length k1*k2, in support enumeration order. When
    `hermitian` is set, c[-k] = conj(c[k]) holds and the polynomial is
    real-valued on [0,1)^2.
    """

    support: FrequencySupport
    coeffs: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex).reshape(-1)
        if c.size != len(self.support):
            raise ContractViolation(
                f"expected {len(self.support)} coefficients, got {c.size}")
        if not np.all(np.isfinite(c.view(float))):
            raise ContractViolation("coefficients must be finite")
        self.coeffs = c

    def coeff_grid(self) -> np.ndarray:
        """Coefficients as a (k1, k2) grid."""
        return self.coeffs.reshape(self.support.shape)

    def hermitian_defect(self) -> float:
        """max |c[-k] - conj(c[k])|; inf if the grid is not symmetric."""
        if self.support.k1 % 2 == 0 or self.support.k2 % 2 == 0:
            return np.inf
        g = self.coeff_grid()
        return float(np.abs(g[::-1, ::-1] - np.conj(g)).max())

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def shifted_dc(self, offset: float) -> "TrigPolynomial":
        """Copy with `offset` added to the zero-frequency coefficient."""
        c = self.coeffs.copy()
        c[self.support.index_of((0, 0))] += offset
        return TrigPolynomial(self.support, c, hermitian=self.hermitian)


@dataclass
class PointSet:
    """N points in dimension `dim`, one column per point."""

    dim: int
    points: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 2 or p.shape[0] != self.dim:
            raise ContractViolation(
                f"points must have shape ({self.dim}, N), got {p.shape}")
        if p.size and not np.all(np.isfinite(p)):
            raise ContractViolation("point coordinates must be finite")
        self.points = p

    @property
    def n_points(self) -> int:
        return self.points.shape[1]

    @classmethod
    def empty(cls, dim: int = 2) -> "PointSet":
        return cls(dim, np.zeros((dim, 0)))


@dataclass
class PolylineComponent:
    vertices: np.ndarray  # (M, 2), coordinates in [0,1)^2
    closed: bool = True


@dataclass
class Polyline:
    """Ordered vertex lists approximating a curve in the periodic unit square.

    Segments that cross the domain seam are stored with wrapped coordinates;
    geometric helpers use minimum-image deltas.
    """

    components: list[PolylineComponent] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.components

    def num_vertices(self) -> int:
        return sum(c.vertices.shape[0] for c in self.components)

    def vertex_array(self) -> np.ndarray:
        """All vertices stacked, shape (total, 2)."""
        if self.is_empty:
            return np.zeros((0, 2))
        return np.concatenate([c.vertices for c in self.components], axis=0)

    def segment_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(starts, deltas, lengths) over all segments of all components.

        Deltas are minimum-image, so seam-crossing segments keep their true
        (short) length.
        """
        starts, deltas = [], []
        for comp in self.components:
            v = comp.vertices
            if v.shape[0] < 2:
                continue
            nxt = np.roll(v, -1, axis=0) if comp.closed else v[1:]
            cur = v if comp.closed else v[:-1]
            d = wrap_delta(nxt - cur)
            starts.append(cur)
            deltas.append(d)
        if not starts:
            return np.zeros((0, 2)), np.zeros((0, 2)), np.zeros(0)
        s = np.concatenate(starts, axis=0)
        d = np.concatenate(deltas, axis=0)
        return s, d, np.linalg.norm(d, axis=1)

    def total_length(self) -> float:
        return float(self.segment_arrays()[2].sum())

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(x1_min, x1_max, x2_min, x2_max) over all vertices."""
        v = self.vertex_array()
        if v.shape[0] == 0:
            raise ContractViolation("bounding box of an empty polyline")
        return (float(v[:, 0].min()), float(v[:, 0].max()),
                float(v[:, 1].min()), float(v[:, 1].max()))


def wrap_delta(d: np.ndarray) -> np.ndarray:
    """Map coordinate differences to the minimum-image representative in
    (-1/2, 1/2]."""
    return (d + 0.5) % 1.0 - 0.5


# ---------------------------------------------------------------------------
# evaluation and products


def evaluate(poly: TrigPolynomial, pts: PointSet) -> np.ndarray:
    """Evaluate psi at each point; returns a complex array of length N."""
    if pts.dim != 2:
        raise ContractViolation(f"curve evaluation needs dim 2, got {pts.dim}")
    k = poly.support.indices()              # (|support|, 2)
    phase = k @ pts.points                  # (|support|, N)
    return poly.coeffs @ np.exp(2j * np.pi * phase)


def evaluate_on_grid(poly: TrigPolynomial, grid_res) -> np.ndarray:
    """Evaluate psi on the uniform periodic grid x = (i/n1, j/n2).

    `grid_res` is an int (square grid) or an (n1, n2) pair. Uses the
    separable structure, so large grids stay cheap.
    """
    n1, n2 = (grid_res, grid_res) if np.isscalar(grid_res) else grid_res
    lo1, hi1 = poly.support.axis_range(0)
    lo2, hi2 = poly.support.axis_range(1)
    e1 = np.exp(2j * np.pi * np.outer(np.arange(n1) / n1, np.arange(lo1, hi1 + 1)))
    e2 = np.exp(2j * np.pi * np.outer(np.arange(n2) / n2, np.arange(lo2, hi2 + 1)))
    return e1 @ poly.coeff_grid() @ e2.T


def multiply(a: TrigPolynomial, b: TrigPolynomial) -> TrigPolynomial:
    """Pointwise product of two polynomials via coefficient convolution.

    The product support is (k1a+k1b-1, k2a+k2b-1). Two even sizes along the
    same axis are rejected: their centered index ranges sum to a range that
    is not centered, so the result could not be represented on a
    FrequencySupport without shifting the spectrum.
    """
    if a.norm() == 0.0 or b.norm() == 0.0:
        raise ContractViolation("multiply requires nonzero polynomials")
    for axis in (0, 1):
        ka = (a.support.k1, a.support.k2)[axis]
        kb = (b.support.k1, b.support.k2)[axis]
        if ka % 2 == 0 and kb % 2 == 0:
            raise ContractViolation(
                "product of two even-sized supports along an axis is not centered")
    grid = convolve2d(a.coeff_grid(), b.coeff_grid(), mode="full")
    support = FrequencySupport(a.support.k1 + b.support.k1 - 1,
                               a.support.k2 + b.support.k2 - 1)
    return TrigPolynomial(support, grid.ravel(),
                          hermitian=a.hermitian and b.hermitian)


def random_curve(support: FrequencySupport, seed) -> TrigPolynomial:
    """Random real-valued polynomial: i.i.d. complex normal coefficients on
    the half-grid, conjugate-mirrored, real at k=0, unit l2 norm.

    Requires odd support sizes (the centered grid must be symmetric).
    A non-empty zero set is not guaranteed; callers retry with a new seed.
    """
    if support.k1 % 2 == 0 or support.k2 % 2 == 0:
        raise ContractViolation("random_curve requires odd support sizes")
    rng = np.random.default_rng(seed)
    grid = np.zeros(support.shape, dtype=complex)
    c1 = support.k1 // 2
    c2 = support.k2 // 2
    for k in support.indices():
        a, b = int(k[0]), int(k[1])
        if a == 0 and b == 0:
            grid[c1, c2] = rng.standard_normal()
        elif a > 0 or (a == 0 and b > 0):
            z = rng.standard_normal() + 1j * rng.standard_normal()
            grid[c1 + a, c2 + b] = z
            grid[c1 - a, c2 - b] = np.conj(z)
    coeffs = grid.ravel()
    return TrigPolynomial(support, coeffs / np.linalg.norm(coeffs),
                          hermitian=True)


# ---------------------------------------------------------------------------
# zero-set rasterization (marching squares on the periodic grid)


def extract_zero_level_set(poly: TrigPolynomial,
                           grid_res: int = DEFAULT_GRID_RES) -> Polyline:
    """Marching-squares contour of Re(psi) on a periodic grid over [0,1)^2.

    Vertices are linear interpolations along grid-cell edges, so each
    satisfies |psi| up to the grid-cell variation of psi. An empty level
    set yields an empty Polyline.
    """
    if grid_res < 16:
        raise ContractViolation("grid_res must be at least 16")
    if not poly.hermitian:
        raise ContractViolation("level-set extraction needs a hermitian "
                                "(real-valued) polynomial")
    values = evaluate_on_grid(poly, grid_res).real
    return contour_periodic_grid(values)


def contour_periodic_grid(values: np.ndarray) -> Polyline:
    """Zero contour of a real scalar field sampled on a periodic grid.

    Grid point (i, j) sits at coordinates (i/n1, j/n2). All components are
    closed loops on the torus.
    """
    v = np.where(values == 0.0, _ZERO_NUDGE, values)
    n1, n2 = v.shape
    pos = v > 0
    b00 = pos
    b10 = np.roll(pos, -1, axis=0)
    b01 = np.roll(pos, -1, axis=1)
    b11 = np.roll(b10, -1, axis=1)
    case = (b00.astype(np.int8) + 2 * b10 + 4 * b11 + 8 * b01)
    active = np.argwhere((case != 0) & (case != 15))
    if active.size == 0:
        return Polyline([])

    # Edge keys: ('a0', i, j) runs from grid point (i,j) towards axis 0,
    # ('a1', i, j) towards axis 1. Indices are taken mod the grid shape.
    adjacency: dict[tuple, list] = {}

    def link(e, f):
        adjacency.setdefault(e, []).append(f)
        adjacency.setdefault(f, []).append(e)

    for i, j in active:
        i = int(i)
        j = int(j)
        ip = (i + 1) % n1
        jp = (j + 1) % n2
        sa, sb, sc, sd = pos[i, j], pos[ip, j], pos[ip, jp], pos[i, jp]
        e_ab = ("a0", i, j)
        e_dc = ("a0", i, jp)
        e_ad = ("a1", i, j)
        e_bc = ("a1", ip, j)
        crossed = []
        if sa != sb:
            crossed.append(e_ab)
        if sb != sc:
            crossed.append(e_bc)
        if sd != sc:
            crossed.append(e_dc)
        if sa != sd:
            crossed.append(e_ad)
        if len(crossed) == 2:
            link(crossed[0], crossed[1])
        elif len(crossed) == 4:
            # Saddle cell; split by the sign of the cell-center average.
            center = 0.25 * (v[i, j] + v[ip, j] + v[ip, jp] + v[i, jp])
            if (center > 0) == sa:
                link(e_ab, e_bc)
                link(e_ad, e_dc)
            else:
                link(e_ab, e_ad)
                link(e_bc, e_dc)

    def edge_position(e):
        kind, i, j = e
        if kind == "a0":
            v0, v1 = v[i, j], v[(i + 1) % n1, j]
            t = v0 / (v0 - v1)
            return np.array([((i + t) / n1) % 1.0, j / n2])
        v0, v1 = v[i, j], v[i, (j + 1) % n2]
        t = v0 / (v0 - v1)
        return np.array([i / n1, ((j + t) / n2) % 1.0])

    components = []
    visited = set()
    for start in adjacency:
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        prev, cur = None, start
        closed = True
        while True:
            nbrs = adjacency[cur]
            if len(nbrs) != 2:
                closed = False  # defensive; should not happen on a torus
                break
            nxt = nbrs[1] if nbrs[0] == prev else nbrs[0]
            if nxt == start:
                break
            loop.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        verts = np.array([edge_position(e) for e in loop])
        keep = np.ones(len(verts), dtype=bool)
        if len(verts) > 1:
            same = np.all(verts == np.roll(verts, 1, axis=0), axis=1)
            keep &= ~same
        verts = verts[keep]
        if verts.shape[0] >= 2:
            components.append(PolylineComponent(verts, closed=closed))
    return Polyline(components)


# ---------------------------------------------------------------------------
# sampling points from a rasterized curve


def sample_curve(curve: Polyline, n: int, seed=None,
                 region: tuple[float, float, float, float] | None = None
                 ) -> PointSet:
    """Draw `n` points on the polyline, uniformly with respect to arc length.

    With `region` = (x1_min, x1_max, x2_min, x2_max), sampling is restricted
    to segments whose midpoints lie in the rectangle (segment-level
    granularity; segments are one grid cell long, so the boundary fuzz is
    below the rasterization scale).
    """
    if n == 0:
        return PointSet.empty(2)
    if curve.is_empty:
        raise ContractViolation("cannot sample from an empty curve")
    starts, deltas, lengths = curve.segment_arrays()
    if region is not None:
        mid = (starts + 0.5 * deltas) % 1.0
        x1min, x1max, x2min, x2max = region
        keep = ((mid[:, 0] >= x1min) & (mid[:, 0] <= x1max)
                & (mid[:, 1] >= x2min) & (mid[:, 1] <= x2max))
        starts, deltas, lengths = starts[keep], deltas[keep], lengths[keep]
    nonzero = lengths > 0
    starts, deltas, lengths = starts[nonzero], deltas[nonzero], lengths[nonzero]
    if lengths.size == 0:
        raise NoSamplesAvailable("no curve available in the requested region")
    cum = np.cumsum(lengths)
    rng = np.random.default_rng(seed)
    u = rng.uniform(0.0, cum[-1], size=n)
    idx = np.searchsorted(cum, u, side="right")
    idx = np.minimum(idx, len(lengths) - 1)
    offset = u - (cum[idx] - lengths[idx])
    frac = offset / lengths[idx]
    pts = (starts[idx] + frac[:, None] * deltas[idx]) % 1.0
    return PointSet(2, pts.T)
