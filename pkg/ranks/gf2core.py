"""
Bit-packed vectors and matrices over F2.

A row is one machine word: coordinate j lives in bit j. Every matrix the
engine builds has at most 64 columns, so rank needs no multi-word logic.
The batch kernel at the bottom ranks many matrices at once with numpy and
is what the exhaustive enumerator calls.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import WidthExceeded

MAX_COLS = 64


@dataclass(frozen=True)
class GF2Vector:
    width: int
    bits: int = 0

    def __post_init__(self):
        if self.width > MAX_COLS:
            raise WidthExceeded(self.width, MAX_COLS)
        if self.width < 1:
            raise ValueError(f"vector width must be >= 1, got {self.width}")
        if self.bits < 0 or self.bits >> self.width:
            raise ValueError(
                f"bits {self.bits:#x} do not fit in width {self.width}"
            )

    @classmethod
    def from_list(cls, entries):
        bits = 0
        for j, entry in enumerate(entries):
            if entry & 1:
                bits |= 1 << j
        return cls(len(entries), bits)

    def to_list(self):
        return [(self.bits >> j) & 1 for j in range(self.width)]

    def __getitem__(self, j):
        return (self.bits >> j) & 1


@dataclass(frozen=True)
class GF2Matrix:
    """Ordered rows sharing one width. An empty row list has rank 0."""

    rows: tuple
    cols: int

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if self.cols > MAX_COLS:
            raise WidthExceeded(self.cols, MAX_COLS)
        if self.cols < 1:
            raise ValueError(f"matrix width must be >= 1, got {self.cols}")
        for row in self.rows:
            if row.width != self.cols:
                raise ValueError(
                    f"row width {row.width} does not match matrix width {self.cols}"
                )

    @classmethod
    def from_words(cls, words, cols):
        return cls(tuple(GF2Vector(cols, w) for w in words), cols)

    @classmethod
    def from_lists(cls, entries, cols=None):
        if cols is None:
            if not entries:
                raise ValueError("cols is required for a matrix with no rows")
            cols = len(entries[0])
        return cls(tuple(GF2Vector.from_list(row) for row in entries), cols)

    @classmethod
    def zeros(cls, n_rows, cols):
        return cls.from_words([0] * n_rows, cols)

    @property
    def words(self):
        return [row.bits for row in self.rows]

    @property
    def n_rows(self):
        return len(self.rows)

    def to_lists(self):
        return [row.to_list() for row in self.rows]

    def entry(self, i, j):
        return self.rows[i][j]

    def __str__(self):
        return "\n".join(
            " ".join(str(bit) for bit in row.to_list()) for row in self.rows
        )


def _reduce_into_basis(words):
    """Forward elimination keyed by the lowest set bit of each pivot row."""
    pivots = {}
    for word in words:
        while word:
            low = word & -word
            pivot = pivots.get(low)
            if pivot is None:
                pivots[low] = word
                break
            word ^= pivot
    return pivots


def rank(m):
    """
    Rank of a matrix over F2.

    Args:
        m: GF2Matrix (left unchanged)

    Returns:
        int: dimension of the row space
    """
    return len(_reduce_into_basis(m.words))


def echelonize(m):
    """
    Row-echelon form of a matrix.

    Pivot rows are ordered by increasing pivot column (lowest set bit), so
    every entry below a pivot is zero. Zero rows pad the result to the
    input's row count.

    Args:
        m: GF2Matrix

    Returns:
        tuple: (GF2Matrix in echelon form, rank)
    """
    pivots = _reduce_into_basis(m.words)
    basis = [pivots[low] for low in sorted(pivots)]
    padded = basis + [0] * (m.n_rows - len(basis))
    return GF2Matrix.from_words(padded, m.cols), len(basis)


def transpose(m):
    if not m.n_rows:
        raise ValueError("cannot transpose a matrix with no rows")
    if m.n_rows > MAX_COLS:
        raise WidthExceeded(m.n_rows, MAX_COLS)
    words = []
    for j in range(m.cols):
        word = 0
        for i, row in enumerate(m.rows):
            word |= ((row.bits >> j) & 1) << i
        words.append(word)
    return GF2Matrix.from_words(words, m.n_rows)


def rank_by_entries(entries):
    """
    Textbook Gauss-Jordan elimination on a list-of-lists 0/1 matrix.

    Independent of the bit-packed kernel; tests use it as the reference.
    """
    a = [[x & 1 for x in row] for row in entries]
    if not a:
        return 0
    n_rows, n_cols = len(a), len(a[0])
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if a[i][c]), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        for i in range(n_rows):
            if i != r and a[i][c]:
                a[i] = [x ^ y for x, y in zip(a[i], a[r])]
        r += 1
        if r == n_rows:
            break
    return r


def batch_rank(rows, cols):
    """
    Ranks of a batch of matrices sharing one row count.

    Column by column: the first row holding the column's bit is the pivot;
    it is XORed into every row holding that bit (itself included, which
    zeroes it). Each column that finds a pivot adds one to the rank.

    Args:
        rows: uint64 array of shape (n_rows, batch); rows[r, b] is row r of
            matrix b
        cols: number of columns (<= 64)

    Returns:
        numpy.ndarray: int64 ranks of shape (batch,)
    """
    work = np.array(rows, dtype=np.uint64, copy=True)
    n_rows, batch = work.shape
    ranks = np.zeros(batch, dtype=np.int64)
    if n_rows == 0 or batch == 0:
        return ranks
    columns = np.arange(batch)
    zero = np.uint64(0)
    for c in range(cols):
        bit = np.uint64(1 << c)
        hit = (work & bit) != zero
        found = hit.any(axis=0)
        if not found.any():
            continue
        pivot = work[hit.argmax(axis=0), columns]
        work ^= np.where(hit, pivot[np.newaxis, :], zero)
        ranks += found
    return ranks
