"""
Tests for bit-packed F2 linear algebra

Property tests compare the bit-packed rank with textbook elimination on
lists and check the invariants rank must keep (transpose, row operations,
echelon form).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranks.exceptions import WidthExceeded
from ranks.gf2core import (
    GF2Matrix,
    GF2Vector,
    batch_rank,
    echelonize,
    rank,
    rank_by_entries,
    transpose,
)


@st.composite
def matrices(draw, max_rows=10, max_cols=12):
    n_rows = draw(st.integers(min_value=1, max_value=max_rows))
    cols = draw(st.integers(min_value=1, max_value=max_cols))
    words = draw(
        st.lists(
            st.integers(min_value=0, max_value=(1 << cols) - 1),
            min_size=n_rows,
            max_size=n_rows,
        )
    )
    return GF2Matrix.from_words(words, cols)


@pytest.mark.unit
class TestGF2Vector:
    """Test vector construction and bounds"""

    def test_from_list_round_trip(self):
        """Test that coordinate j is bit j"""
        v = GF2Vector.from_list([1, 0, 1, 1])
        assert v.bits == 0b1101
        assert v.to_list() == [1, 0, 1, 1]
        assert v[0] == 1 and v[1] == 0

    def test_bits_must_fit_width(self):
        """Test that bits beyond the width are rejected"""
        with pytest.raises(ValueError):
            GF2Vector(3, 0b1000)

    def test_width_limit(self):
        """Test that more than 64 columns raises WidthExceeded"""
        with pytest.raises(WidthExceeded):
            GF2Vector(65, 0)


@pytest.mark.unit
class TestRank:
    """Test rank on hand-checked matrices"""

    def test_identity(self):
        """Test the 3x3 identity has full rank"""
        m = GF2Matrix.from_lists([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
        assert rank(m) == 3

    def test_dependent_rows(self):
        """Test that row3 = row1 + row2 drops the rank"""
        m = GF2Matrix.from_lists([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
        assert rank(m) == 2

    def test_zero_matrix(self):
        """Test the zero matrix has rank 0"""
        assert rank(GF2Matrix.zeros(4, 5)) == 0

    def test_empty_row_list(self):
        """Test a matrix with no rows has rank 0"""
        assert rank(GF2Matrix((), 3)) == 0

    def test_input_unchanged(self):
        """Test rank leaves the matrix untouched"""
        m = GF2Matrix.from_lists([[1, 1], [1, 1]])
        before = m.words
        rank(m)
        assert m.words == before

    def test_64_columns(self):
        """Test the full machine-word width"""
        m = GF2Matrix.from_words([1 << 63, (1 << 63) | 1, 1], 64)
        assert rank(m) == 2

    @given(matrices())
    @settings(max_examples=200)
    def test_matches_textbook_elimination(self, m):
        """Test bit-packed rank equals Gauss-Jordan on lists"""
        assert rank(m) == rank_by_entries(m.to_lists())

    @given(matrices())
    def test_transpose_invariance(self, m):
        """Test rank(M) == rank(M^T)"""
        assert rank(transpose(m)) == rank(m)

    @given(matrices(), st.data())
    def test_row_operations_preserve_rank(self, m, data):
        """Test adding one row to another and swapping rows keep the rank"""
        words = m.words
        a = data.draw(st.integers(min_value=0, max_value=len(words) - 1))
        b = data.draw(st.integers(min_value=0, max_value=len(words) - 1))
        if a != b:
            words[a] ^= words[b]
        words[0], words[-1] = words[-1], words[0]
        assert rank(GF2Matrix.from_words(words, m.cols)) == rank(m)


@pytest.mark.unit
class TestEchelonize:
    """Test echelon form"""

    @given(matrices())
    def test_echelon_shape(self, m):
        """Test pivots strictly increase and zero rows trail"""
        e, r = echelonize(m)
        assert r == rank(m)
        assert e.n_rows == m.n_rows
        pivots = [w & -w for w in e.words[:r]]
        assert all(p != 0 for p in pivots)
        assert pivots == sorted(pivots) and len(set(pivots)) == r
        assert all(w == 0 for w in e.words[r:])
        for n, pivot in enumerate(pivots):
            assert all(not (w & pivot) for w in e.words[n + 1:])

    @given(matrices())
    def test_row_space_preserved(self, m):
        """Test echelon rows span the same space as the input rows"""
        e, r = echelonize(m)
        assert rank(GF2Matrix.from_words(e.words + m.words, m.cols)) == r
        assert rank(GF2Matrix.from_words(e.words[:r], m.cols)) == r


@pytest.mark.unit
class TestBatchRank:
    """Test the numpy batch kernel against the scalar rank"""

    @given(
        st.integers(min_value=1, max_value=6),
        st.integers(min_value=1, max_value=8),
        st.lists(st.integers(min_value=0, max_value=2**48 - 1), min_size=1, max_size=20),
    )
    def test_matches_scalar_rank(self, n_rows, cols, seeds):
        """Test each column of the batch ranks like the scalar kernel"""
        mask = (1 << cols) - 1
        batch = [[(seed >> (r * cols)) & mask for r in range(n_rows)] for seed in seeds]
        rows = np.array(batch, dtype=np.uint64).T
        ranks = batch_rank(rows, cols)
        expected = [rank(GF2Matrix.from_words(words, cols)) for words in batch]
        assert ranks.tolist() == expected

    def test_empty_batch(self):
        """Test an empty batch returns no ranks"""
        ranks = batch_rank(np.zeros((3, 0), dtype=np.uint64), 4)
        assert ranks.size == 0
