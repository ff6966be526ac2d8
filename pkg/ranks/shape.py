"""
Stacked persymmetric shapes: parsing, parameter layout and realization.

Shape text follows ``[block;block;...]xk`` where a block is a row count,
a sum ``a+b`` of row counts (persymmetric, rows = a+b) or ``(r)`` (a free
block of r rows). Parameters are laid out block by block: a persymmetric
block with r rows owns r+k-1 anti-diagonal parameters in index order, a
free block owns r*k entries in row-major order. Parameter j of a block sits
at bit ``offset + j`` of the assignment integer.
"""

import re
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from .exceptions import ShapeError, WidthExceeded
from .gf2core import MAX_COLS, GF2Matrix

_SHAPE_RE = re.compile(r"^\[(?P<blocks>[^\]]*)\][xX×](?P<cols>\d+)$")
_FREE_RE = re.compile(r"^\((?P<rows>\d+)\)$")
_SUM_RE = re.compile(r"^\d+(\+\d+)*$")


class BlockKind(Enum):
    PERSYMMETRIC = "persymmetric"
    FREE = "free"


@dataclass(frozen=True)
class BlockSpec:
    kind: BlockKind
    rows: int

    def __post_init__(self):
        if self.rows < 1:
            raise ShapeError(f"block rows must be >= 1, got {self.rows}")

    @property
    def is_free(self):
        return self.kind is BlockKind.FREE

    def param_count(self, cols):
        if self.is_free:
            return self.rows * cols
        return self.rows + cols - 1

    def label(self):
        return f"({self.rows})" if self.is_free else str(self.rows)


def persymmetric(rows):
    return BlockSpec(BlockKind.PERSYMMETRIC, rows)


def free(rows):
    return BlockSpec(BlockKind.FREE, rows)


@dataclass(frozen=True)
class StackedShape:
    cols: int
    blocks: tuple

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        if self.cols < 1:
            raise ShapeError(f"column count must be >= 1, got {self.cols}")
        if self.cols > MAX_COLS:
            raise WidthExceeded(self.cols, MAX_COLS)
        if not self.blocks:
            raise ShapeError("a shape needs at least one block")

    @cached_property
    def free_param_count(self):
        return sum(block.param_count(self.cols) for block in self.blocks)

    @cached_property
    def total_rows(self):
        return sum(block.rows for block in self.blocks)

    @property
    def max_rank(self):
        return min(self.cols, self.total_rows)

    @cached_property
    def block_offsets(self):
        offsets = []
        offset = 0
        for block in self.blocks:
            offsets.append(offset)
            offset += block.param_count(self.cols)
        return tuple(offsets)

    @property
    def state_count(self):
        return 1 << self.free_param_count

    def with_free_rows(self, t):
        """Same shape with a free block of t rows appended (t=0 is a no-op)."""
        if t == 0:
            return self
        return StackedShape(self.cols, self.blocks + (free(t),))

    def split_trailing_free(self):
        """
        Separate a trailing free block from the rest of the shape.

        Returns:
            tuple: (base shape or None, trailing free rows). The base is
            None when the shape is a single free block.
        """
        last = self.blocks[-1]
        if not last.is_free:
            return self, 0
        if len(self.blocks) == 1:
            return None, last.rows
        return StackedShape(self.cols, self.blocks[:-1]), last.rows

    def __str__(self):
        return canonical_string(self)


def canonical_string(shape):
    """Normalized text for a shape: sums collapsed, no whitespace."""
    return "[" + ";".join(b.label() for b in shape.blocks) + f"]x{shape.cols}"


def free_param_count(shape):
    return shape.free_param_count


def parse_shape(text):
    """
    Parse shape text such as ``"[2;2+3;(1)]x4"``.

    Args:
        text: shape text; whitespace is ignored and ``x``, ``X`` or ``×``
            separates the blocks from the column count

    Returns:
        StackedShape

    Raises:
        ShapeError: malformed text or a zero row/column count
        WidthExceeded: more than 64 columns
    """
    if isinstance(text, StackedShape):
        return text
    compact = re.sub(r"\s+", "", str(text))
    match = _SHAPE_RE.match(compact)
    if not match:
        raise ShapeError(f"malformed shape {text!r}: expected '[block;...]xk'")

    cols = int(match.group("cols"))
    if cols == 0:
        raise ShapeError(f"malformed shape {text!r}: k must be >= 1")

    blocks = []
    for token in match.group("blocks").split(";"):
        free_match = _FREE_RE.match(token)
        if free_match:
            rows = int(free_match.group("rows"))
            kind = BlockKind.FREE
        elif _SUM_RE.match(token):
            rows = sum(int(part) for part in token.split("+"))
            kind = BlockKind.PERSYMMETRIC
        else:
            raise ShapeError(f"malformed block {token!r} in shape {text!r}")
        if rows == 0:
            raise ShapeError(f"block {token!r} in shape {text!r} has no rows")
        blocks.append(BlockSpec(kind, rows))

    return StackedShape(cols, tuple(blocks))


def shape_from_sml(s, m, l, k):
    """The triple shape [s; s+m; s+m+l] x k."""
    if s < 1 or m < 0 or l < 0:
        raise ShapeError(f"invalid triple s={s}, m={m}, l={l}")
    return StackedShape(k, (persymmetric(s), persymmetric(s + m), persymmetric(s + m + l)))


def _template_value(token, env, template):
    total = 0
    for part in token.split("+"):
        if part.isdigit():
            total += int(part)
        elif part in env and env[part] is not None:
            total += env[part]
        else:
            raise ShapeError(f"template {template!r}: cannot evaluate {part!r}")
    return total


def instantiate_template(template, k, l=None):
    """
    Concrete shape from a family template such as ``"[2;2+3;2+3+l]xk"``.

    Besides the shape grammar, templates may use the symbols ``k`` and
    ``l`` in row sums and the column count, and ``b^l`` to repeat a block
    l times (``"[1^l]x1"`` is the l-fold stack of one-row blocks).
    """
    env = {"k": k, "l": l}
    compact = re.sub(r"\s+", "", template)
    match = re.match(r"^\[(?P<blocks>[^\]]*)\]x(?P<cols>[\w+]+)$", compact)
    if not match:
        raise ShapeError(f"malformed template {template!r}")

    pieces = []
    for token in match.group("blocks").split(";"):
        body, _, repeat = token.partition("^")
        count = _template_value(repeat, env, template) if repeat else 1
        free_match = re.match(r"^\((?P<rows>[\w+]+)\)$", body)
        if free_match:
            label = f"({_template_value(free_match.group('rows'), env, template)})"
        else:
            label = str(_template_value(body, env, template))
        pieces.extend([label] * count)

    cols = _template_value(match.group("cols"), env, template)
    return parse_shape("[" + ";".join(pieces) + f"]x{cols}")


def row_words(shape, bits):
    """Row words of the matrix realized from an assignment integer."""
    mask = (1 << shape.cols) - 1
    words = []
    for block, offset in zip(shape.blocks, shape.block_offsets):
        if block.is_free:
            for r in range(block.rows):
                words.append((bits >> (offset + r * shape.cols)) & mask)
        else:
            params = bits >> offset
            for r in range(block.rows):
                words.append((params >> r) & mask)
    return words


def realize_batch(shape, states):
    """
    Row words for a batch of assignments.

    Args:
        shape: StackedShape with free_param_count <= 64
        states: uint64 array of assignment integers

    Returns:
        numpy.ndarray: uint64 array of shape (total_rows, len(states))
    """
    states = np.asarray(states, dtype=np.uint64)
    mask = np.uint64((1 << shape.cols) - 1)
    rows = np.empty((shape.total_rows, states.size), dtype=np.uint64)
    r_out = 0
    for block, offset in zip(shape.blocks, shape.block_offsets):
        if block.is_free:
            for r in range(block.rows):
                shift = np.uint64(offset + r * shape.cols)
                rows[r_out] = (states >> shift) & mask
                r_out += 1
        else:
            params = states >> np.uint64(offset)
            for r in range(block.rows):
                rows[r_out] = (params >> np.uint64(r)) & mask
                r_out += 1
    return rows


@dataclass(frozen=True)
class ParamAssignment:
    shape: StackedShape
    bits: int

    def __post_init__(self):
        if self.bits < 0 or self.bits >> self.shape.free_param_count:
            raise ValueError(
                f"assignment needs exactly {self.shape.free_param_count} bits "
                f"for {canonical_string(self.shape)}"
            )

    @classmethod
    def from_bit_list(cls, shape, bit_list):
        if len(bit_list) != shape.free_param_count:
            raise ValueError(
                f"expected {shape.free_param_count} bits, got {len(bit_list)}"
            )
        bits = 0
        for j, bit in enumerate(bit_list):
            bits |= (bit & 1) << j
        return cls(shape, bits)


def realize(p):
    """Matrix for a parameter assignment; block rows stacked in order."""
    return GF2Matrix.from_words(row_words(p.shape, p.bits), p.shape.cols)
