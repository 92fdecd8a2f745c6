"""
Banded (stencil) storage for discrete differential operators on 1D and 2D grids.

A band is keyed by its offset tuple ``k`` (one entry per axis) and holds one
coefficient per grid row, shaped like the grid. Row ``i`` of the operator
applied to ``f`` is ``sum_k band[k][i] * f[i + k]`` over offsets whose target
``i + k`` lies on the grid; entries pointing off the grid are stored as zero.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, Mapping, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from config.logger import setup_logger
from core.field import Field
from core.grid import Grid
from utils.errors import GridMismatchError, InvalidInputError, MarginExceedsGridError

logger = setup_logger(__name__)

Offset = Tuple[int, ...]


def _shift_slices(shape: Tuple[int, ...], offset: Offset) -> Tuple[tuple, tuple]:
    """Row slices with an on-grid target, and the matching target slices."""
    rows, cols = [], []
    for n, k in zip(shape, offset):
        lo, hi = max(0, -k), min(n, n - k)
        rows.append(slice(lo, hi))
        cols.append(slice(lo + k, hi + k))
    return tuple(rows), tuple(cols)


def _off_grid_mask(shape: Tuple[int, ...], offset: Offset) -> np.ndarray:
    mask = np.ones(shape, dtype=bool)
    rows, _ = _shift_slices(shape, offset)
    mask[rows] = False
    return mask


@dataclass(frozen=True, eq=False)
class BandedOperator:
    """
    Discrete linear operator in stencil form.

    Attributes:
        grid: Grid the operator acts on.
        bands: Mapping offset tuple -> coefficient array shaped like the grid.
        interior_margin: Rows closer than this to any boundary are non-interior.
        name: Label used in logs and reports.
    """

    __array_ufunc__ = None

    grid: Grid
    bands: Mapping[Offset, np.ndarray]
    interior_margin: int = 0
    name: str = ""

    def __post_init__(self):
        shape = self.grid.shape
        clean: Dict[Offset, np.ndarray] = {}
        for offset, band in self.bands.items():
            offset = tuple(int(k) for k in offset)
            if len(offset) != self.grid.ndim:
                raise InvalidInputError(
                    f"Offset {offset} does not match a {self.grid.ndim}D grid."
                )
            coef = np.array(np.broadcast_to(band, shape), dtype=float)
            coef[_off_grid_mask(shape, offset)] = 0.0
            coef.setflags(write=False)
            clean[offset] = coef
        object.__setattr__(self, "bands", dict(sorted(clean.items())))

        if self.interior_margin < self.bandwidth:
            raise InvalidInputError(
                f"interior_margin {self.interior_margin} is smaller than "
                f"bandwidth {self.bandwidth}."
            )

    @property
    def bandwidth(self) -> int:
        return max((max(abs(k) for k in offset) for offset in self.bands), default=0)

    def items(self) -> Iterator[Tuple[Offset, np.ndarray]]:
        return iter(self.bands.items())

    def scale_rows(self, coef: Union[float, np.ndarray], name: str = "") -> "BandedOperator":
        """Left-multiplies by a diagonal coefficient (per row), e.g. a function of y."""
        coef = np.broadcast_to(np.asarray(coef, dtype=float), self.grid.shape)
        return BandedOperator(
            self.grid,
            {k: coef * band for k, band in self.items()},
            self.interior_margin,
            name or self.name,
        )

    def __add__(self, other: "BandedOperator") -> "BandedOperator":
        _require_same_grid(self.grid, other.grid)
        bands = dict(self.bands)
        for offset, band in other.items():
            bands[offset] = bands[offset] + band if offset in bands else band
        return BandedOperator(
            self.grid, bands, max(self.interior_margin, other.interior_margin)
        )

    def __rmul__(self, scalar: float) -> "BandedOperator":
        return self.scale_rows(float(scalar))

    def __neg__(self) -> "BandedOperator":
        return self.scale_rows(-1.0)

    def __sub__(self, other: "BandedOperator") -> "BandedOperator":
        return self + (-other)

    def __matmul__(self, other: "BandedOperator") -> "BandedOperator":
        return compose(self, other)

    def to_sparse(self) -> sp.csr_matrix:
        """Assembles the operator as an N x N CSR matrix over the flattened grid."""
        shape = self.grid.shape
        index = np.arange(int(np.prod(shape))).reshape(shape)
        rows, cols, data = [], [], []
        for offset, band in self.items():
            row_sl, col_sl = _shift_slices(shape, offset)
            rows.append(index[row_sl].ravel())
            cols.append(index[col_sl].ravel())
            data.append(band[row_sl].ravel())
        size = index.size
        if not data:
            return sp.csr_matrix((size, size))
        return sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(size, size),
        ).tocsr()


def _require_same_grid(a: Grid, b: Grid) -> None:
    if a != b:
        logger.error("Grid mismatch: %s vs %s", a, b)
        raise GridMismatchError(f"Operands live on different grids: {a} vs {b}.")


def identity(grid: Grid) -> BandedOperator:
    return BandedOperator(grid, {(0,) * grid.ndim: np.ones(grid.shape)}, 0, "I")


def zero(grid: Grid) -> BandedOperator:
    return BandedOperator(grid, {}, 0, "0")


def apply(op: BandedOperator, f: Field) -> Field:
    """
    Banded matrix-vector product.

    Boundary rows are computed with whatever one-sided stencil the operator
    stores there; callers restrict assertions to interior rows.

    Args:
        op: The operator.
        f: Field on the operator's grid.

    Returns:
        Field: op applied to f.
    """
    _require_same_grid(op.grid, f.grid)
    shape = op.grid.shape
    values = f.as_array()
    out = np.zeros(shape)
    for offset, band in op.items():
        rows, cols = _shift_slices(shape, offset)
        out[rows] += band[rows] * values[cols]
    return Field(op.grid, out)


def compose(
    left: BandedOperator, right: BandedOperator, *, right_outer: bool = False
) -> BandedOperator:
    """
    Operator product left∘right.

    Contributions to each target band are accumulated in lexicographic order
    of (left offset, right offset), or of (right offset, left offset) when
    ``right_outer`` is set. The commutator uses this to add identical terms in
    identical order on both sides, so commuting interior stencils cancel
    bit-exactly.
    """
    _require_same_grid(left.grid, right.grid)
    shape = left.grid.shape
    pairs = [(k1, k2) for k1 in left.bands for k2 in right.bands]
    if right_outer:
        pairs.sort(key=lambda pair: (pair[1], pair[0]))

    bands: Dict[Offset, np.ndarray] = {}
    for k1, k2 in pairs:
        target = tuple(a + b for a, b in zip(k1, k2))
        rows, cols = _shift_slices(shape, k1)
        term = np.zeros(shape)
        term[rows] = left.bands[k1][rows] * right.bands[k2][cols]
        bands[target] = bands[target] + term if target in bands else term

    return BandedOperator(
        left.grid,
        bands,
        left.interior_margin + right.interior_margin,
        f"{left.name}∘{right.name}",
    )


def commutator(a: BandedOperator, b: BandedOperator) -> BandedOperator:
    """
    [a, b] = a∘b - b∘a, with bandwidth <= bandwidth(a) + bandwidth(b) and
    interior margin equal to the sum of the margins.
    """
    ab = compose(a, b)
    ba = compose(b, a, right_outer=True)
    bands = dict(ab.bands)
    for offset, band in ba.items():
        bands[offset] = bands[offset] - band if offset in bands else -band
    return BandedOperator(
        a.grid,
        bands,
        a.interior_margin + b.interior_margin,
        f"[{a.name}, {b.name}]",
    )


def interior_slices(shape: Tuple[int, ...], margin: int) -> tuple:
    """Slices selecting rows at distance >= margin from every boundary."""
    if margin < 0 or any(2 * margin >= n for n in shape):
        logger.error("Margin %d leaves no interior rows on grid shape %s", margin, shape)
        raise MarginExceedsGridError(
            f"Margin {margin} leaves no interior rows on a grid of shape {shape}."
        )
    return tuple(slice(margin, n - margin) for n in shape)


def interior_norm(
    obj: Union[BandedOperator, Field], margin: Optional[int] = None
) -> float:
    """
    Max-abs value (fields) or max-abs row sum (operators) over interior rows.

    Args:
        obj: A Field or a BandedOperator.
        margin: Distance from every boundary; defaults to the operator's
            interior_margin (0 for fields).

    Returns:
        float: The interior norm.
    """
    if margin is None:
        margin = obj.interior_margin if isinstance(obj, BandedOperator) else 0
    interior = interior_slices(obj.grid.shape, margin)

    if isinstance(obj, Field):
        return float(np.max(np.abs(obj.as_array()[interior])))

    row_sums = np.zeros(obj.grid.shape)
    for _, band in obj.items():
        row_sums += np.abs(band)
    return float(np.max(row_sums[interior]))
