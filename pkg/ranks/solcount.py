"""
Solution counts of bilinear systems over F2[T].

For a shape with blocks b = 1..B the system is

    sum_j Y_j * W_j^(b) = 0      for every constraint family b,

with deg Y_j <= k-1, a persymmetric block of r rows contributing one family
with deg <= r-1 and a free block of r rows contributing r families of
constants. The number of solutions R_q is read off the shape's rank
distribution as R_q = 2^E * sum_i Gamma_i * 2^(-iq) with
E = (k + total_rows) q - free_param_count, or brute-forced over every
coefficient tuple by ``oracle_count_solutions``.
"""

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import DivisibilityViolation, ShapeError, WidthExceeded
from .gf2core import MAX_COLS
from .oracle import EnumerationBudget, check_budget, map_chunks, split_range
from .shape import canonical_string, parse_shape

logger = logging.getLogger(__name__)

FAMILY_LETTERS = "zuvwabcdefghijkmnoprs"


def clmul(a, b):
    """Carry-less product of two polynomials packed as integers."""
    product = 0
    while b:
        if b & 1:
            product ^= a
        a <<= 1
        b >>= 1
    return product


@dataclass(frozen=True)
class PolyGF2:
    """Polynomial over F2 with coefficient j in bit j and a degree bound."""

    bits: int
    degree_bound: int

    def __post_init__(self):
        if self.degree_bound < 0:
            raise ValueError(f"degree bound must be >= 0, got {self.degree_bound}")
        if self.bits < 0 or self.bits >> (self.degree_bound + 1):
            raise ValueError(
                f"coefficients {self.bits:#b} exceed degree bound {self.degree_bound}"
            )

    @property
    def degree(self):
        """Actual degree; -1 for the zero polynomial."""
        return self.bits.bit_length() - 1

    def __add__(self, other):
        return PolyGF2(self.bits ^ other.bits, max(self.degree_bound, other.degree_bound))

    def __mul__(self, other):
        return PolyGF2(
            clmul(self.bits, other.bits), self.degree_bound + other.degree_bound
        )

    def __str__(self):
        if not self.bits:
            return "0"
        monomials = []
        for j in range(self.degree, -1, -1):
            if (self.bits >> j) & 1:
                monomials.append("1" if j == 0 else "T" if j == 1 else f"T^{j}")
        return " + ".join(monomials)


@dataclass(frozen=True)
class ConstraintFamily:
    """One equation sum_j Y_j W_j = 0; W_j has degree <= degree_bound."""

    label: str
    degree_bound: int

    @property
    def coefficient_count(self):
        return self.degree_bound + 1


@dataclass(frozen=True)
class EquationSystemSpec:
    shape: object
    q: int

    def __post_init__(self):
        object.__setattr__(self, "shape", parse_shape(self.shape))
        if self.q < 1:
            raise ValueError(f"q must be >= 1, got {self.q}")

    @property
    def y_degree_bound(self):
        return self.shape.cols - 1

    @cached_property
    def constraint_families(self):
        families = []
        for block in self.shape.blocks:
            if block.is_free:
                families.extend(ConstraintFamily("", 0) for _ in range(block.rows))
            else:
                families.append(ConstraintFamily("", block.rows - 1))
        return tuple(
            ConstraintFamily(_family_label(n), f.degree_bound)
            for n, f in enumerate(families)
        )

    @property
    def coefficient_bits(self):
        """Total coefficient bits of one tuple: q (k + total_rows)."""
        per_index = self.shape.cols + sum(
            f.coefficient_count for f in self.constraint_families
        )
        return self.q * per_index

    @property
    def exponent_pair(self):
        """(a, b) with E = a q - b."""
        return self.shape.cols + self.shape.total_rows, self.shape.free_param_count

    @property
    def exponent(self):
        a, b = self.exponent_pair
        return a * self.q - b

    @property
    def equation_count(self):
        return sum(
            self.shape.cols + f.degree_bound for f in self.constraint_families
        )

    def __str__(self):
        return f"{canonical_string(self.shape)}, q={self.q}"


def _family_label(n):
    if n < len(FAMILY_LETTERS):
        return FAMILY_LETTERS[n]
    return f"w{n - len(FAMILY_LETTERS) + 2}"


def count_solutions(spec, dist):
    """
    R_q from a rank distribution.

    Args:
        spec: EquationSystemSpec
        dist: RankDistribution of ``spec.shape``

    Returns:
        int: exact number of solutions

    Raises:
        ShapeError: the distribution belongs to another shape
        DivisibilityViolation: the weighted sum is not divisible by the
            shift, which only happens for a wrong distribution
    """
    text = canonical_string(spec.shape)
    if canonical_string(parse_shape(dist.shape)) != text:
        raise ShapeError(f"distribution is for {dist.shape}, not {text}")

    q = spec.q
    e = spec.exponent
    shift = max(0, dist.max_rank * q - e)
    numerator = sum(c << (e + shift - i * q) for i, c in enumerate(dist.counts))
    value, remainder = divmod(numerator, 1 << shift)
    if remainder:
        raise DivisibilityViolation(text, remainder, shift)
    return value


def _layout(spec):
    """Bit offsets: Y_1..Y_q first, then W_1..W_q of each family in order."""
    k = spec.shape.cols
    y_offsets = [j * k for j in range(spec.q)]
    offset = spec.q * k
    w_offsets = []
    for family in spec.constraint_families:
        w_offsets.append([offset + j * family.coefficient_count for j in range(spec.q)])
        offset += spec.q * family.coefficient_count
    return y_offsets, w_offsets


def _solution_count(shape_text, q, start, stop, batch_bits):
    """Solutions among counters start..stop-1 (worker entry point)."""
    spec = EquationSystemSpec(shape_text, q)
    k = spec.shape.cols
    y_offsets, w_offsets = _layout(spec)
    y_mask = np.uint64((1 << k) - 1)
    total = 0
    step = 1 << batch_bits
    for lo in range(start, stop, step):
        states = np.arange(lo, min(lo + step, stop), dtype=np.uint64)
        for family, offsets in zip(spec.constraint_families, w_offsets):
            if states.size == 0:
                break
            w_mask = np.uint64((1 << family.coefficient_count) - 1)
            acc = np.zeros(states.size, dtype=np.uint64)
            for y_off, w_off in zip(y_offsets, offsets):
                y = (states >> np.uint64(y_off)) & y_mask
                w = (states >> np.uint64(w_off)) & w_mask
                for t in range(family.coefficient_count):
                    hit = ((w >> np.uint64(t)) & np.uint64(1)).astype(bool)
                    acc ^= np.where(hit, y << np.uint64(t), np.uint64(0))
            states = states[acc == 0]
        total += int(states.size)
    return total


def oracle_count_solutions(spec, budget=None, force=False):
    """
    Brute-force R_q over every coefficient tuple.

    Counters are split by their top bits across workers; each batch drops
    the tuples violating one constraint family before testing the next.

    Raises:
        BudgetExceeded: 2^coefficient_bits above the budget without force
    """
    budget = budget or EnumerationBudget()
    bits = spec.coefficient_bits
    check_budget(1 << bits, budget, force, what="coefficient tuples")
    widest = max(f.degree_bound for f in spec.constraint_families)
    if bits > 64 or spec.shape.cols + widest > MAX_COLS:
        raise WidthExceeded(spec.shape.cols + widest, MAX_COLS)

    text = canonical_string(spec.shape)
    tasks = [
        (text, spec.q, start, stop, budget.batch_bits)
        for start, stop in split_range(bits, budget.chunk_bits)
    ]
    logger.info("Brute-forcing R_%d of %s over 2^%d tuples", spec.q, text, bits)
    return sum(map_chunks(_solution_count, tasks, budget.workers))


def _variable_names(spec, style):
    """Names of every coefficient, keyed by bit offset."""
    k = spec.shape.cols
    y_offsets, w_offsets = _layout(spec)
    names = {}

    def name(letter, j, a, count, offset):
        if style == "indexed":
            return f"x{offset + a + 1}"
        return f"{letter}{j + 1}" if count == 1 else f"{letter}{j + 1}_{a}"

    for j, off in enumerate(y_offsets):
        for a in range(k):
            names[off + a] = name("y", j, a, k, off)
    for family, offsets in zip(spec.constraint_families, w_offsets):
        for j, off in enumerate(offsets):
            for a in range(family.coefficient_count):
                names[off + a] = name(family.label, j, a, family.coefficient_count, off)
    return names


def quadratic_system_expansion(spec, style="indexed"):
    """
    Coefficient-level quadratic equations equivalent to the system.

    Equations run over T-degree, then constraint family; the terms of one
    equation run over j, then the Y coefficient. ``style="indexed"``
    numbers variables x1..xN in layout order, ``style="named"`` writes
    y1_0, z2_1, ... (no suffix for constant polynomials).

    Returns:
        list: equation strings such as ``"x1x5 + x3x7 = 0"``
    """
    if style not in ("indexed", "named"):
        raise ValueError(f"unknown style {style!r}")
    k = spec.shape.cols
    y_offsets, w_offsets = _layout(spec)
    names = _variable_names(spec, style)
    max_degree = k - 1 + max(f.degree_bound for f in spec.constraint_families)

    equations = []
    for d in range(max_degree + 1):
        for family, offsets in zip(spec.constraint_families, w_offsets):
            if d > k - 1 + family.degree_bound:
                continue
            terms = []
            for y_off, w_off in zip(y_offsets, offsets):
                for a in range(k):
                    b = d - a
                    if 0 <= b <= family.degree_bound:
                        terms.append(names[y_off + a] + names[w_off + b])
            equations.append(" + ".join(terms) + " = 0")
    return equations


def variable_legend(spec, style="indexed"):
    """Lines such as ``Y1 = x1 + x2*T`` tying polynomials to variables."""
    k = spec.shape.cols
    y_offsets, w_offsets = _layout(spec)
    names = _variable_names(spec, style)

    def spell(offset, count):
        parts = []
        for a in range(count):
            power = "" if a == 0 else "*T" if a == 1 else f"*T^{a}"
            parts.append(names[offset + a] + power)
        return " + ".join(parts)

    lines = [f"Y{j + 1} = {spell(off, k)}" for j, off in enumerate(y_offsets)]
    for family, offsets in zip(spec.constraint_families, w_offsets):
        for j, off in enumerate(offsets):
            lines.append(
                f"{family.label.upper()}{j + 1} = {spell(off, family.coefficient_count)}"
            )
    return lines
