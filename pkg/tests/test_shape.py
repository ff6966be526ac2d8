"""
Tests for shape parsing, parameter layout and realization
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ranks.exceptions import ShapeError, WidthExceeded
from ranks.gf2core import rank
from ranks.shape import (
    ParamAssignment,
    canonical_string,
    free,
    instantiate_template,
    parse_shape,
    persymmetric,
    realize,
    realize_batch,
    row_words,
    shape_from_sml,
)


@pytest.mark.unit
class TestParseShape:
    """Test the shape grammar"""

    def test_single_block(self):
        """Test [5]x5"""
        shape = parse_shape("[5]x5")
        assert shape.cols == 5
        assert shape.blocks == (persymmetric(5),)
        assert shape.free_param_count == 9

    def test_sums_and_free_blocks(self):
        """Test that a+b is one persymmetric block and (r) is free"""
        shape = parse_shape("[2;2+3;(1)]x4")
        assert shape.blocks == (persymmetric(2), persymmetric(5), free(1))
        assert shape.free_param_count == 5 + 8 + 4
        assert shape.total_rows == 8
        assert shape.max_rank == 4

    def test_whitespace_and_separators(self):
        """Test spaces, X and the multiplication sign"""
        assert canonical_string(parse_shape(" [ 2 ; 2 ] X 4 ")) == "[2;2]x4"
        assert canonical_string(parse_shape("[2;2]×4")) == "[2;2]x4"

    def test_canonical_collapses_sums(self):
        """Test canonical text of a summed block"""
        assert canonical_string(parse_shape("[2;2+3;2+3+4]x6")) == "[2;5;9]x6"

    @pytest.mark.parametrize(
        "text", ["[]x4", "[2;2]", "2;2x4", "[2;;2]x4", "[a]x3", "[0]x3", "[2]x0", "[(0)]x2"]
    )
    def test_malformed(self, text):
        """Test malformed or degenerate shapes raise ShapeError"""
        with pytest.raises(ShapeError):
            parse_shape(text)

    def test_width_limit(self):
        """Test k > 64 raises WidthExceeded"""
        with pytest.raises(WidthExceeded):
            parse_shape("[2]x65")

    def test_width_limit_is_a_shape_error(self):
        """Test callers catching ShapeError also catch WidthExceeded"""
        with pytest.raises(ShapeError):
            parse_shape("[1]x100")

    @given(
        st.lists(
            st.tuples(st.booleans(), st.integers(min_value=1, max_value=9)),
            min_size=1,
            max_size=5,
        ),
        st.integers(min_value=1, max_value=64),
    )
    def test_canonical_round_trip(self, blocks, cols):
        """Test parse(canonical(shape)) == shape"""
        specs = tuple(free(r) if is_free else persymmetric(r) for is_free, r in blocks)
        text = "[" + ";".join(b.label() for b in specs) + f"]x{cols}"
        shape = parse_shape(text)
        assert canonical_string(shape) == text
        assert parse_shape(canonical_string(shape)) == shape


@pytest.mark.unit
class TestShapeHelpers:
    """Test derived shapes"""

    def test_shape_from_sml(self):
        """Test [s; s+m; s+m+l] construction"""
        assert canonical_string(shape_from_sml(3, 0, 2, 7)) == "[3;3;5]x7"
        assert canonical_string(shape_from_sml(2, 3, 4, 6)) == "[2;5;9]x6"

    def test_shape_from_sml_rejects_negative(self):
        """Test invalid triples"""
        with pytest.raises(ShapeError):
            shape_from_sml(0, 1, 1, 4)

    def test_with_free_rows(self):
        """Test appending a free block"""
        shape = parse_shape("[2]x4").with_free_rows(2)
        assert canonical_string(shape) == "[2;(2)]x4"
        assert parse_shape("[2]x4").with_free_rows(0) == parse_shape("[2]x4")

    def test_split_trailing_free(self):
        """Test separating the trailing free block"""
        base, t = parse_shape("[2;2;(4)]x4").split_trailing_free()
        assert canonical_string(base) == "[2;2]x4" and t == 4
        base, t = parse_shape("[(3)]x4").split_trailing_free()
        assert base is None and t == 3
        base, t = parse_shape("[2;2]x4").split_trailing_free()
        assert canonical_string(base) == "[2;2]x4" and t == 0

    def test_instantiate_template(self):
        """Test k, l and repetition in templates"""
        assert canonical_string(instantiate_template("[2;2+3;2+3+l]xk", 6, 4)) == "[2;5;9]x6"
        assert canonical_string(instantiate_template("[l]xk", 3, 5)) == "[5]x3"
        assert canonical_string(instantiate_template("[1^l]x1", None, 3)) == "[1;1;1]x1"

    def test_template_needs_l(self):
        """Test a missing parameter raises ShapeError"""
        with pytest.raises(ShapeError):
            instantiate_template("[3;3;3+l]xk", 4)


@pytest.mark.unit
class TestRealize:
    """Test parameter assignments and realized matrices"""

    def test_persymmetric_structure(self):
        """Test entry(i, j) depends only on i + j"""
        shape = parse_shape("[4]x5")
        p = ParamAssignment.from_bit_list(shape, [1, 0, 1, 1, 0, 0, 1, 1])
        entries = realize(p).to_lists()
        for i in range(4):
            for j in range(5):
                assert entries[i][j] == [1, 0, 1, 1, 0, 0, 1, 1][i + j]

    def test_free_block_row_major(self):
        """Test free block entries in row-major order"""
        shape = parse_shape("[(2)]x3")
        p = ParamAssignment.from_bit_list(shape, [1, 1, 0, 0, 0, 1])
        assert realize(p).to_lists() == [[1, 1, 0], [0, 0, 1]]

    def test_blocks_stack_in_order(self):
        """Test that the second block uses the parameters after the first"""
        shape = parse_shape("[1;(1)]x2")
        p = ParamAssignment.from_bit_list(shape, [0, 1, 1, 0])
        assert realize(p).to_lists() == [[0, 1], [1, 0]]

    def test_assignment_size_checked(self):
        """Test the bit count must match the shape"""
        with pytest.raises(ValueError):
            ParamAssignment.from_bit_list(parse_shape("[2]x2"), [1, 0])
        with pytest.raises(ValueError):
            ParamAssignment(parse_shape("[2]x2"), 1 << 3)

    def test_batch_matches_scalar(self):
        """Test realize_batch against row_words for every [2;(1)]x3 state"""
        shape = parse_shape("[2;(1)]x3")
        states = np.arange(shape.state_count, dtype=np.uint64)
        batch = realize_batch(shape, states)
        for s in range(shape.state_count):
            assert batch[:, s].tolist() == row_words(shape, s)

    def test_zero_assignment_has_rank_zero(self):
        """Test the all-zero assignment realizes the zero matrix"""
        shape = parse_shape("[3;3]x4")
        assert rank(realize(ParamAssignment(shape, 0))) == 0


def realized_set(shape):
    """Every realized matrix of a shape as sorted unique row-word columns."""
    states = np.arange(shape.state_count, dtype=np.uint64)
    return np.unique(realize_batch(shape, states).T, axis=0)


@pytest.mark.unit
class TestRealizeCoverage:
    """Test realization is a bijection onto the shape's matrices"""

    @pytest.mark.parametrize(
        "text",
        ["[1;1;1]x1", "[(2)]x3", "[4]x5", "[2;2+3]x4", "[2;(2)]x4", "[3;1;(1)]x4", "[5;5]x4"],
    )
    def test_injective(self, text):
        """Test distinct assignments give distinct matrices"""
        shape = parse_shape(text)
        assert shape.free_param_count <= 16
        assert len(realized_set(shape)) == shape.state_count

    @pytest.mark.parametrize(
        "persym,free_rows",
        [
            ("[2;1]x4", "[2;(1)]x4"),
            ("[3;1;1]x3", "[3;(2)]x3"),
            ("[1;1;1]x2", "[(3)]x2"),
            ("[5;1]x5", "[5;(1)]x5"),
        ],
    )
    def test_one_row_block_is_a_free_row(self, persym, free_rows):
        """Test one-row persymmetric blocks realize the same matrices as free rows"""
        a, b = parse_shape(persym), parse_shape(free_rows)
        assert a.free_param_count == b.free_param_count
        assert np.array_equal(realized_set(a), realized_set(b))
