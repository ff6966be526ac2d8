"""
Closed-form rank distributions and triple reduction rules.

The registry is loaded from a versioned text file (``data/families.txt``)
holding, per family, piecewise exponential polynomials in k and l, explicit
boundary tables, a typo ledger, and the reduction rules that pull high-rank
counts of triple shapes back to smaller shapes. Everything is immutable
after load and every evaluation is exact integer arithmetic.
"""

import logging
import operator
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .exceptions import (
    NegativeCount,
    NoRuleApplies,
    OutOfValidity,
    RegistryError,
    ShapeError,
)
from .oracle import RankDistribution, Source
from .shape import canonical_string, instantiate_template, parse_shape

logger = logging.getLogger(__name__)

DATA_FILE = Path(__file__).resolve().parent / "data" / "families.txt"
SUPPORTED_VERSIONS = ("1",)

_LINEAR_TERM_RE = re.compile(r"(?P<sign>[+-])?(?P<coef>\d+)?(?P<var>[a-z])?")
_POWER_RE = re.compile(r"^2\^(?:\((?P<expr>[^()]+)\)|(?P<lit>\d+))$")
_PREDICATE_RE = re.compile(r"^(?P<var>[kl])(?P<op>>=|<=|==|>|<)(?P<rhs>.+)$")
_BOUNDS_RE = re.compile(r"^(?P<lo>\d+)\.\.(?P<hi>\d+)?$")
_FIELD_RE = re.compile(r"^(?P<key>[a-z_]+)=(?P<value>.*)$")
_OPS = {
    ">": operator.gt,
    ">=": operator.ge,
    "<": operator.lt,
    "<=": operator.le,
    "==": operator.eq,
}


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearExpr:
    """Integer linear expression such as ``2k+2i-10``."""

    coeffs: tuple = ()
    const: int = 0

    @classmethod
    def parse(cls, text, variables="ijklms", line_number=None):
        compact = re.sub(r"\s+", "", str(text))
        if not compact:
            raise RegistryError("empty expression", line_number)
        coeffs = {}
        const = 0
        pos = 0
        while pos < len(compact):
            match = _LINEAR_TERM_RE.match(compact, pos)
            coef_text, var = match.group("coef"), match.group("var")
            if coef_text is None and var is None:
                raise RegistryError(
                    f"cannot parse {text!r} at {compact[pos:]!r}", line_number
                )
            if pos > 0 and match.group("sign") is None:
                raise RegistryError(f"missing operator in {text!r}", line_number)
            sign = -1 if match.group("sign") == "-" else 1
            coef = sign * (int(coef_text) if coef_text else 1)
            if var is None:
                const += coef
            elif var not in variables:
                raise RegistryError(
                    f"variable {var!r} not allowed in {text!r}", line_number
                )
            else:
                coeffs[var] = coeffs.get(var, 0) + coef
            pos = match.end()
        return cls(tuple((v, c) for v, c in coeffs.items() if c), const)

    @property
    def variables(self):
        return {v for v, _ in self.coeffs}

    def coefficient(self, var):
        return dict(self.coeffs).get(var, 0)

    def evaluate(self, env):
        total = self.const
        for var, coef in self.coeffs:
            value = env.get(var)
            if value is None:
                raise RegistryError(f"{self} needs a value for {var}")
            total += coef * value
        return total

    def bind(self, **values):
        """Substitute the given variables, keeping the others symbolic."""
        coeffs = []
        const = self.const
        for var, coef in self.coeffs:
            if values.get(var) is not None:
                const += coef * values[var]
            else:
                coeffs.append((var, coef))
        return LinearExpr(tuple(coeffs), const)

    @property
    def is_constant(self):
        return not self.coeffs

    def __str__(self):
        parts = []
        for var, coef in self.coeffs:
            magnitude = "" if abs(coef) == 1 else str(abs(coef))
            sign = "-" if coef < 0 else "+"
            parts.append((sign, f"{magnitude}{var}"))
        if self.const or not parts:
            parts.append(("-" if self.const < 0 else "+", str(abs(self.const))))
        text = "".join(f"{sign}{body}" for sign, body in parts)
        return text[1:] if text.startswith("+") else text


@dataclass(frozen=True)
class SymTerm:
    """``coef * 2^(exponent)`` with the exponent linear in k, l and i."""

    coef: int
    exponent: LinearExpr = field(default_factory=LinearExpr)

    def evaluate(self, env):
        e = self.exponent.evaluate(env)
        if e < 0:
            raise RegistryError(f"negative exponent 2^{e} in term {self}")
        return self.coef << e

    def bind(self, **values):
        return SymTerm(self.coef, self.exponent.bind(**values))

    def __str__(self):
        if self.exponent.is_constant and self.exponent.const == 0:
            return str(self.coef)
        power = f"2^({self.exponent})"
        if self.coef == 1:
            return power
        if self.coef == -1:
            return f"-{power}"
        return f"{self.coef}*{power}"


def _split_signed(text):
    """Split a term list at top-level + and - signs, keeping each sign."""
    compact = re.sub(r"\s+", "", text)
    parts = []
    depth = 0
    start = 0
    for pos, ch in enumerate(compact):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and pos > start:
            parts.append(compact[start:pos])
            start = pos
    parts.append(compact[start:])
    return [p for p in parts if p]


def parse_terms(text, variables="kli", line_number=None):
    """Parse ``"3*2^(k+1) + 30"`` into a tuple of SymTerm."""
    terms = []
    for chunk in _split_signed(text):
        sign = -1 if chunk[0] == "-" else 1
        body = chunk[1:] if chunk[0] in "+-" else chunk
        coef = 1
        exponent = None
        for factor in body.split("*"):
            if factor.isdigit():
                coef *= int(factor)
                continue
            match = _POWER_RE.match(factor)
            if not match or exponent is not None:
                raise RegistryError(f"cannot parse term {chunk!r}", line_number)
            exponent = LinearExpr.parse(
                match.group("expr") or match.group("lit"), variables, line_number
            )
        terms.append(SymTerm(sign * coef, exponent or LinearExpr()))
    if not terms:
        raise RegistryError(f"empty term list {text!r}", line_number)
    return tuple(terms)


def render_terms(terms):
    text = ""
    for n, term in enumerate(terms):
        body = str(term)
        if n == 0:
            text = body
        elif body.startswith("-"):
            text += f" - {body[1:]}"
        else:
            text += f" + {body}"
    return text


def evaluate_terms(terms, env):
    return sum(term.evaluate(env) for term in terms)


# ---------------------------------------------------------------------------
# Pieces, tables and families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Predicate:
    var: str
    op: str
    rhs: LinearExpr

    @classmethod
    def parse(cls, text, line_number=None):
        compact = re.sub(r"\s+", "", text)
        match = _PREDICATE_RE.match(compact)
        if not match:
            raise RegistryError(f"invalid predicate {text!r}", line_number)
        rhs = LinearExpr.parse(match.group("rhs"), "ikl", line_number)
        return cls(match.group("var"), match.group("op"), rhs)

    def holds(self, env):
        lhs = env.get(self.var)
        if lhs is None:
            return False
        try:
            return _OPS[self.op](lhs, self.rhs.evaluate(env))
        except RegistryError:
            return False

    @property
    def is_diagonal(self):
        return self.var == "k" and self.op == "==" and self.rhs == LinearExpr((("i", 1),))

    def __str__(self):
        return f"{self.var} {self.op} {self.rhs}"


def _parse_predicates(text, line_number):
    return tuple(Predicate.parse(part, line_number) for part in text.split("&"))


@dataclass(frozen=True)
class FormulaPiece:
    """One case line of a family table: a rank selector, validity and terms."""

    lo: LinearExpr
    hi: LinearExpr
    predicates: tuple
    terms: tuple
    anchor: str = ""
    line_number: int = 0

    def rank_bounds(self, l):
        env = {"l": l}
        return self.lo.evaluate(env), self.hi.evaluate(env)

    def covers(self, i, k, l):
        try:
            lo, hi = self.rank_bounds(l)
        except RegistryError:
            return False
        env = {"i": i, "k": k, "l": l}
        return lo <= i <= hi and all(p.holds(env) for p in self.predicates)

    def applies_to_l(self, l):
        """True when the l-conditions hold and the rank range is nonempty."""
        env = {"l": l}
        if not all(p.holds(env) for p in self.predicates if p.var == "l"):
            return False
        try:
            lo, hi = self.rank_bounds(l)
        except RegistryError:
            return False
        return lo <= hi

    def evaluate(self, i, k, l):
        return evaluate_terms(self.terms, {"i": i, "k": k, "l": l})

    def selector_text(self, l=None):
        lo, hi = self.lo.bind(l=l), self.hi.bind(l=l)
        if lo == hi:
            return f"i = {lo}"
        return f"{lo} <= i <= {hi}"

    def render(self, l=None):
        terms = render_terms(tuple(t.bind(l=l) for t in self.terms))
        conditions = [self.selector_text(l)]
        conditions += [str(p) for p in self.predicates if l is None or p.var != "l"]
        return f"{terms}    if {', '.join(conditions)}"


@dataclass(frozen=True)
class BoundaryTable:
    """
    Explicit counts where the piecewise formulas do not apply.

    A diagonal table lists Gamma_i at k = i for i = 1, 2, ...; any other
    table lists Gamma_0.. at the (k, l) its predicates select.
    """

    diagonal: bool
    predicates: tuple
    values: tuple
    anchor: str = ""
    line_number: int = 0

    def lookup(self, i, k, l):
        env = {"i": i, "k": k, "l": l}
        if not all(p.holds(env) for p in self.predicates):
            return None
        if self.diagonal:
            if k == i and 1 <= i <= len(self.values):
                return self.values[i - 1]
            return None
        if 0 <= i < len(self.values):
            return self.values[i]
        return None

    def key_text(self):
        keys = ["k == i"] if self.diagonal else []
        return " & ".join(keys + [str(p) for p in self.predicates])


@dataclass(frozen=True)
class TypoEntry:
    family: str
    where: str
    printed: str
    stored: str
    reason: str
    line_number: int = 0


@dataclass
class Family:
    id: str
    template: str
    title: str = ""
    l_min: int = None
    l_max: int = None
    l_name: str = "l"
    sml: tuple = None
    k_grid: tuple = ()
    l_grid: tuple = ()
    complete: bool = True
    pieces: list = field(default_factory=list)
    boundaries: list = field(default_factory=list)
    typos: list = field(default_factory=list)
    line_number: int = 0

    @property
    def has_l(self):
        return self.l_min is not None

    @property
    def fixed_k(self):
        cols = self.template.rsplit("x", 1)[-1]
        return int(cols) if cols.isdigit() else None

    def accepts_l(self, l):
        if not self.has_l:
            return l is None
        return l is not None and l >= self.l_min and (self.l_max is None or l <= self.l_max)

    def check_params(self, k, l):
        if self.has_l and l is None:
            raise RegistryError(f"family {self.id} needs {self.l_name}")
        if not self.has_l and l is not None:
            raise RegistryError(f"family {self.id} takes no {self.l_name}")
        k = self.fixed_k if k is None else k
        if k is None:
            raise RegistryError(f"family {self.id} needs k")
        if not self.accepts_l(l) or (self.fixed_k is not None and k != self.fixed_k):
            raise OutOfValidity(self.id, k, l, None)
        return k

    def shape_for(self, k=None, l=None):
        return instantiate_template(self.template, self.fixed_k if k is None else k, l)

    def triple(self, l=None):
        """The (s, m, l) of a triple family instance."""
        if self.sml is None:
            raise RegistryError(f"family {self.id} is not a triple family")
        values = []
        for entry in self.sml:
            values.append(l if entry == "l" else int(entry))
        return tuple(values)

    def _resolve(self, i, k, l):
        """(value, anchor) for one rank, or raise OutOfValidity."""
        for table in sorted(self.boundaries, key=lambda b: b.diagonal):
            value = table.lookup(i, k, l)
            if value is not None:
                return value, table.anchor
        for piece in self.pieces:
            if piece.covers(i, k, l):
                value = piece.evaluate(i, k, l)
                if value < 0:
                    raise NegativeCount(self.id, i, value)
                return value, piece.anchor
        raise OutOfValidity(self.id, k, l, i)

    def eval_rank(self, i, k=None, l=None):
        k = self.check_params(k, l)
        if i < 0 or i > self.shape_for(k, l).max_rank:
            return 0
        return self._resolve(i, k, l)[0]

    def eval_ranks(self, k=None, l=None):
        """Gamma_0..Gamma_max with None for every uncovered rank."""
        k = self.check_params(k, l)
        values = []
        for i in range(self.shape_for(k, l).max_rank + 1):
            try:
                values.append(self._resolve(i, k, l)[0])
            except OutOfValidity:
                values.append(None)
        return values

    def evaluate(self, k=None, l=None, complete=False):
        """
        Full distribution at (k, l).

        Args:
            k: column count (defaults to the template's fixed k)
            l: family parameter, for families that have one
            complete: derive a single uncovered top rank from the checksum

        Returns:
            RankDistribution: source CLOSED_FORM; anchors are ``"i=N: ..."``

        Raises:
            OutOfValidity: naming the first uncovered rank
            ChecksumViolation: the evaluated counts do not sum to 2^P
        """
        k = self.check_params(k, l)
        shape = self.shape_for(k, l)
        values = []
        anchors = []
        missing = []
        for i in range(shape.max_rank + 1):
            try:
                value, anchor = self._resolve(i, k, l)
            except OutOfValidity:
                missing.append(i)
                values.append(None)
                continue
            values.append(value)
            anchors.append(f"i={i}: {anchor}")

        if missing:
            top = shape.max_rank
            if not (complete and self.complete and missing == [top]):
                raise OutOfValidity(self.id, k, l, missing[0])
            value = shape.state_count - sum(v for v in values if v is not None)
            if value < 0:
                raise NegativeCount(self.id, top, value)
            values[top] = value
            anchors.append(f"i={top}: checksum-complement")

        return RankDistribution(
            canonical_string(shape), values, Source.CLOSED_FORM, anchors
        ).check()

    def domain(self, k_range=None, l_range=None):
        """(k, l) points to verify: explicit ranges win over the declared grid."""
        if self.fixed_k is not None:
            ks = [self.fixed_k] if k_range is None else [k for k in k_range if k == self.fixed_k]
        else:
            ks = list(k_range if k_range is not None else (self.k_grid or range(1, 9)))
        if not self.has_l:
            ls = [None]
        else:
            ls = [
                l
                for l in (l_range if l_range is not None else (self.l_grid or [self.l_min]))
                if self.accepts_l(l)
            ]
        return [(k, l) for l in ls for k in ks]

    def symbolic_checksum(self, l=None):
        """
        Residue of sum_i Gamma_i - 2^P grouped by the multiplier of k.

        Evaluated with every piece in its large-k regime (k above the row
        count); an empty dict means the identity holds in k.
        """
        if self.fixed_k is not None:
            raise RegistryError(f"family {self.id} has no symbolic k")
        self.check_params(1, l)
        rows = self.shape_for(1, l).total_rows
        k0 = rows + 1
        p0 = self.shape_for(k0, l).free_param_count
        slope = self.shape_for(k0 + 1, l).free_param_count - p0
        intercept = p0 - slope * k0

        groups = {}
        for i in range(rows + 1):
            piece = next((p for p in self.pieces if p.covers(i, k0, l)), None)
            if piece is None:
                raise OutOfValidity(self.id, k0, l, i)
            for term in piece.terms:
                a = term.exponent.coefficient("k")
                rest = term.exponent.bind(i=i, l=l, k=0).const
                value = term.coef << rest if rest >= 0 else Fraction(term.coef, 1 << -rest)
                groups[a] = groups.get(a, 0) + value
        groups[slope] = groups.get(slope, 0) - (1 << intercept)
        return {a: v for a, v in sorted(groups.items()) if v != 0}

    def render_symbolic(self, l=None):
        """Piecewise table as text lines, with l substituted when given."""
        lines = []
        for piece in self.pieces:
            if l is not None and not piece.applies_to_l(l):
                continue
            lines.append(piece.render(l))
        for table in self.boundaries:
            if l is not None and not all(
                p.holds({"l": l}) for p in table.predicates if p.var == "l"
            ):
                continue
            values = ", ".join(str(v) for v in table.values)
            lines.append(f"{table.key_text()}:    {values}")
        return lines


# ---------------------------------------------------------------------------
# Reduction rules
# ---------------------------------------------------------------------------


def triple_label(s, m, l, k):
    return f"[{s};{s + m};{s + m + l}]x{k}"


@dataclass(frozen=True)
class ReductionStep:
    rule: str
    j: int
    power: int
    source: tuple
    target: tuple
    anchor: str = ""

    @property
    def multiplier(self):
        return 16**self.power

    @property
    def target_i(self):
        return self.target[4]

    @property
    def target_k(self):
        return self.target[3]

    @property
    def is_identity(self):
        return self.power == 0 and self.source == self.target

    def describe(self):
        s, m, l, k, i = self.source
        ts, tm, tl, tk, ti = self.target
        return (
            f"Gamma_{i} {triple_label(s, m, l, k)} = 16^{self.power} * "
            f"Gamma_{ti} {triple_label(ts, tm, tl, tk)}  ({self.rule}, j={self.j})"
        )


@dataclass(frozen=True)
class ReductionRule:
    """Gamma_rank(s, m, l; k) = 16^power * Gamma_target_rank(target; target_k)."""

    name: str
    pattern: tuple
    rank: LinearExpr
    j_min: LinearExpr
    j_max: LinearExpr
    k_min: LinearExpr
    power: LinearExpr
    target: tuple
    target_rank: LinearExpr
    target_k: LinearExpr
    anchor: str = ""

    def match(self, s, m, l, k, i):
        """The ReductionStep taking rank i of (s, m, l; k), or None."""
        for fixed, value in zip(self.pattern, (s, m, l)):
            if fixed is not None and fixed != value:
                return None
        env = {"s": s, "m": m, "l": l, "k": k, "j": 0}
        j = i - self.rank.evaluate(env)
        if j < self.j_min.evaluate(env) or j > self.j_max.evaluate(env):
            return None
        env["j"] = j
        if k < self.k_min.evaluate(env):
            return None
        ts, tm, tl = (expr.evaluate(env) for expr in self.target)
        tk = self.target_k.evaluate(env)
        if ts < 1 or tm < 0 or tl < 0 or tk < 1:
            return None
        return ReductionStep(
            self.name,
            j,
            self.power.evaluate(env),
            (s, m, l, k, i),
            (ts, tm, tl, tk, self.target_rank.evaluate(env)),
            self.anchor,
        )


@dataclass(frozen=True)
class ReductionCheck:
    family: str
    k: int
    l: int
    i: int
    step: ReductionStep
    target_family: str
    source_value: int
    target_value: int

    @property
    def expected(self):
        return self.step.multiplier * self.target_value

    @property
    def ok(self):
        return self.source_value == self.expected


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


class FamilyRegistry:
    def __init__(self, families, rules, version, source=None):
        self._families = {f.id: f for f in families}
        self.rules = tuple(rules)
        self.version = version
        self.source = source

    def __iter__(self):
        return iter(self._families.values())

    def __len__(self):
        return len(self._families)

    def __contains__(self, family_id):
        return family_id in self._families

    def get(self, family_id):
        try:
            return self._families[family_id]
        except KeyError:
            known = ", ".join(self._families)
            raise RegistryError(f"unknown family {family_id!r} (known: {known})")

    def typo_ledger(self):
        return [typo for family in self for typo in family.typos]

    def find_triple_family(self, s, m, l):
        """(family, l or None) of the triple family covering (s, m, l), or None."""
        for family in self:
            if family.sml is None:
                continue
            fs, fm, fl = family.sml
            if int(fs) != s or int(fm) != m:
                continue
            if fl == "l" and family.accepts_l(l):
                return family, l
            if fl != "l" and int(fl) == l:
                return family, None
        return None

    def match_shape(self, shape):
        """Every (family, k, l) whose instantiated template equals the shape."""
        shape = parse_shape(shape)
        text = canonical_string(shape)
        matches = []
        for family in self:
            if family.fixed_k is not None and family.fixed_k != shape.cols:
                continue
            if family.has_l:
                upper = shape.total_rows if family.l_max is None else family.l_max
                candidates = range(family.l_min, upper + 1)
            else:
                candidates = [None]
            for l in candidates:
                try:
                    instance = family.shape_for(shape.cols, l)
                except ShapeError:
                    continue
                if canonical_string(instance) == text:
                    matches.append((family, shape.cols, l))
        return matches

    def apply_reduction(self, s, m, l, k, i, rule=None):
        """
        First rule (or the named rule) mapping rank i of [s;s+m;s+m+l]xk.

        Raises:
            NoRuleApplies: no rule's rank expression, j-range and k bound fit
        """
        if rule is not None:
            rules = [r for r in self.rules if r.name == getattr(rule, "name", rule)]
            if not rules:
                raise RegistryError(f"unknown reduction rule {rule!r}")
        else:
            rules = self.rules
        for candidate in rules:
            step = candidate.match(s, m, l, k, i)
            if step is not None:
                return step
        raise NoRuleApplies(i, f" of {triple_label(s, m, l, k)}")

    def reduction_chain(self, s, m, l, k, i):
        """Steps applied until a fixed point; the first step may be an identity."""
        steps = [self.apply_reduction(s, m, l, k, i)]
        while not steps[-1].is_identity and len(steps) < 64:
            ts, tm, tl, tk, ti = steps[-1].target
            try:
                step = self.apply_reduction(ts, tm, tl, tk, ti)
            except NoRuleApplies:
                break
            if step.is_identity:
                break
            steps.append(step)
        return steps

    def reduction_checks(self, family, k, l=None):
        """
        Formula-level reduction identities at one (k, l) of a triple family.

        Only ranks whose source and target are both covered are returned.
        """
        family = self.get(family) if isinstance(family, str) else family
        s, m, l_value = family.triple(l)
        k = family.check_params(k, l)
        checks = []
        for i in range(family.shape_for(k, l).max_rank + 1):
            for rule in self.rules:
                step = rule.match(s, m, l_value, k, i)
                if step is None or step.is_identity:
                    continue
                found = self.find_triple_family(*step.target[:3])
                if found is None:
                    continue
                target_family, target_l = found
                try:
                    source_value = family.eval_rank(i, k, l)
                    target_value = target_family.eval_rank(
                        step.target_i, step.target_k, target_l
                    )
                except OutOfValidity:
                    continue
                checks.append(
                    ReductionCheck(
                        family.id, k, l, i, step, target_family.id,
                        source_value, target_value,
                    )
                )
        return checks

    def validate(self, k_max=16, l_span=6):
        """
        Check that pieces of a family never overlap and that boundary tables
        agree where they meet, over a sample grid.

        Raises:
            RegistryError: naming the offending data file lines
        """
        for family in self:
            if family.has_l:
                upper = family.l_min + l_span
                if family.l_max is not None:
                    upper = min(upper, family.l_max)
                ls = range(family.l_min, upper + 1)
            else:
                ls = [None]
            ks = [family.fixed_k] if family.fixed_k is not None else range(1, k_max + 1)
            for l in ls:
                for k in ks:
                    max_rank = family.shape_for(k, l).max_rank
                    for i in range(max_rank + 1):
                        covering = [p for p in family.pieces if p.covers(i, k, l)]
                        if len(covering) > 1:
                            lines = ", ".join(str(p.line_number) for p in covering)
                            raise RegistryError(
                                f"{family.id}: pieces on lines {lines} overlap "
                                f"at i={i}, k={k}, l={l}"
                            )
                        table_values = {
                            t.lookup(i, k, l) for t in family.boundaries
                        } - {None}
                        if len(table_values) > 1:
                            raise RegistryError(
                                f"{family.id}: boundary tables disagree at "
                                f"i={i}, k={k}, l={l}"
                            )


# ---------------------------------------------------------------------------
# Data file
# ---------------------------------------------------------------------------


def _parse_bounds(text, line_number):
    match = _BOUNDS_RE.match(text)
    if not match:
        raise RegistryError(f"invalid range {text!r}", line_number)
    hi = match.group("hi")
    return int(match.group("lo")), (int(hi) if hi is not None else None)


def _parse_grid(text, line_number):
    lo, hi = _parse_bounds(text, line_number)
    if hi is None:
        raise RegistryError(f"grid {text!r} needs an upper bound", line_number)
    return tuple(range(lo, hi + 1))


def _parse_family(fields, line_number):
    family = Family(id=fields[0], template="", line_number=line_number)
    for entry in fields[1:]:
        match = _FIELD_RE.match(entry)
        if not match:
            # titles may contain "=" ("l >= 4"), keys never contain spaces
            family.title = entry
            continue
        key, value = match.group("key"), match.group("value")
        if key == "shape":
            family.template = value
        elif key == "l":
            family.l_min, family.l_max = _parse_bounds(value, line_number)
        elif key == "lname":
            family.l_name = value
        elif key == "sml":
            parts = tuple(p.strip() for p in value.split(","))
            if len(parts) != 3 or not all(p == "l" or p.isdigit() for p in parts):
                raise RegistryError(f"invalid sml {value!r}", line_number)
            family.sml = parts
        elif key == "kgrid":
            family.k_grid = _parse_grid(value, line_number)
        elif key == "lgrid":
            family.l_grid = _parse_grid(value, line_number)
        elif key == "complete":
            family.complete = value != "no"
        else:
            raise RegistryError(f"unknown family field {key!r} in {entry!r}", line_number)
    if not family.template:
        raise RegistryError(f"family {family.id} has no shape", line_number)
    if "l" in family.template and not family.has_l:
        raise RegistryError(f"family {family.id} uses l without an l range", line_number)
    return family


def _parse_piece(fields, line_number):
    if len(fields) not in (4, 5):
        raise RegistryError("piece needs id | i=... | validity | terms [| anchor]", line_number)
    selector = fields[1]
    if not selector.startswith("i="):
        raise RegistryError(f"invalid rank selector {selector!r}", line_number)
    lo_text, sep, hi_text = selector[2:].partition("..")
    lo = LinearExpr.parse(lo_text, "l", line_number)
    hi = LinearExpr.parse(hi_text, "l", line_number) if sep else lo
    return FormulaPiece(
        lo,
        hi,
        _parse_predicates(fields[2], line_number),
        parse_terms(fields[3], "kli", line_number),
        fields[4] if len(fields) == 5 else "",
        line_number,
    )


def _parse_boundary(fields, line_number):
    if len(fields) not in (3, 4):
        raise RegistryError("boundary needs id | key | values [| anchor]", line_number)
    predicates = _parse_predicates(fields[1], line_number)
    diagonal = any(p.is_diagonal for p in predicates)
    values = tuple(
        evaluate_terms(parse_terms(v, "", line_number), {})
        for v in fields[2].split(",")
    )
    return BoundaryTable(
        diagonal,
        tuple(p for p in predicates if not p.is_diagonal),
        values,
        fields[3] if len(fields) == 4 else "",
        line_number,
    )


def _parse_typo(family_id, fields, line_number):
    if len(fields) != 5:
        raise RegistryError("typo needs id | where | printed: | stored: | reason", line_number)
    printed = fields[2].removeprefix("printed:").strip()
    stored = fields[3].removeprefix("stored:").strip()
    return TypoEntry(family_id, fields[1], printed, stored, fields[4], line_number)


def _strip_prefix(text, prefix, line_number):
    if not text.startswith(prefix):
        raise RegistryError(f"expected {prefix!r}..., got {text!r}", line_number)
    return text[len(prefix):]


def _parse_rule(fields, line_number):
    if len(fields) != 10:
        raise RegistryError("rule needs ten fields", line_number)
    name = fields[0]
    pattern = []
    for position, entry in zip("sml", _strip_prefix(fields[1], "pattern=", line_number).split(",")):
        entry = entry.strip()
        if entry == position:
            pattern.append(None)
        elif entry.isdigit():
            pattern.append(int(entry))
        else:
            raise RegistryError(f"invalid rule pattern entry {entry!r}", line_number)
    if len(pattern) != 3:
        raise RegistryError("rule pattern needs s,m,l", line_number)

    def expr(text):
        return LinearExpr.parse(text, "smljk", line_number)

    rank = expr(_strip_prefix(fields[2], "rank=", line_number))
    if rank.coefficient("j") != 1:
        raise RegistryError(f"rule {name}: rank must advance one per j", line_number)
    j_lo, _, j_hi = _strip_prefix(fields[3], "j=", line_number).partition("..")
    power = _strip_prefix(fields[5], "mult=16^", line_number)
    if not (power.startswith("(") and power.endswith(")")):
        raise RegistryError(f"rule {name}: multiplier must read 16^(...)", line_number)
    target = tuple(expr(t) for t in _strip_prefix(fields[6], "target=", line_number).split(","))
    if len(target) != 3:
        raise RegistryError(f"rule {name}: target needs s,m,l", line_number)
    return ReductionRule(
        name,
        tuple(pattern),
        rank,
        expr(j_lo),
        expr(j_hi),
        expr(_strip_prefix(fields[4], "k>=", line_number)),
        expr(power[1:-1]),
        target,
        expr(_strip_prefix(fields[7], "target_rank=", line_number)),
        expr(_strip_prefix(fields[8], "target_k=", line_number)),
        fields[9],
    )


def parse_family_data(text, source="<string>"):
    """
    Build a FamilyRegistry from data file text.

    Raises:
        RegistryError: unsupported version or a malformed line
    """
    version = None
    families = {}
    rules = []
    for line_number, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        keyword, _, rest = line.partition(" ")
        if keyword == "version":
            version = rest.strip()
            if version not in SUPPORTED_VERSIONS:
                raise RegistryError(f"unsupported data version {version!r}", line_number)
            continue
        if version is None:
            raise RegistryError("data file must start with a version line", line_number)

        fields = [f.strip() for f in rest.split("|")]
        if keyword == "family":
            family = _parse_family(fields, line_number)
            if family.id in families:
                raise RegistryError(f"duplicate family {family.id}", line_number)
            families[family.id] = family
        elif keyword in ("piece", "boundary", "typo"):
            family = families.get(fields[0])
            if family is None:
                raise RegistryError(f"{keyword} for undeclared family {fields[0]!r}", line_number)
            if keyword == "piece":
                family.pieces.append(_parse_piece(fields, line_number))
            elif keyword == "boundary":
                family.boundaries.append(_parse_boundary(fields, line_number))
            else:
                family.typos.append(_parse_typo(family.id, fields, line_number))
        elif keyword == "rule":
            rules.append(_parse_rule(fields, line_number))
        else:
            raise RegistryError(f"unknown record {keyword!r}", line_number)

    if version is None:
        raise RegistryError("data file has no version line")
    logger.debug("Loaded %d families and %d rules from %s", len(families), len(rules), source)
    return FamilyRegistry(families.values(), rules, version, source)


@lru_cache(maxsize=8)
def load_registry(path=DATA_FILE):
    path = Path(path)
    return parse_family_data(path.read_text(encoding="utf-8"), source=str(path))


def default_data_path():
    from django.conf import settings
    from django.core.exceptions import ImproperlyConfigured

    try:
        return settings.RANKS_FAMILY_DATA
    except (ImproperlyConfigured, AttributeError):
        return DATA_FILE


def get_registry(registry=None):
    """The given registry, or the one loaded from the configured data file."""
    if registry is not None:
        return registry
    return load_registry(str(default_data_path()))


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def _resolve_l(family, l, named):
    if named:
        unknown = set(named) - {family.l_name}
        if unknown:
            raise RegistryError(f"family {family.id} has no parameter {sorted(unknown)[0]}")
        l = named[family.l_name]
    return l


def eval_family(family_id, k=None, l=None, complete=False, registry=None, **named):
    """
    Closed-form distribution of a family at (k, l).

    The family parameter may also be passed under its display name, e.g.
    ``eval_family("nfold1", n=3)``.
    """
    family = get_registry(registry).get(family_id)
    return family.evaluate(k, _resolve_l(family, l, named), complete)


def eval_rank(family_id, i, k=None, l=None, registry=None, **named):
    family = get_registry(registry).get(family_id)
    return family.eval_rank(i, k, _resolve_l(family, l, named))


def apply_reduction(rule, s, m, l, k, i, registry=None):
    """Reduction step for rank i of [s;s+m;s+m+l]xk; ``rule=None`` takes the first match."""
    return get_registry(registry).apply_reduction(s, m, l, k, i, rule)


def symbolic_checksum(family_id, l=None, registry=None):
    return get_registry(registry).get(family_id).symbolic_checksum(l)


def find_triple_family(s, m, l, registry=None):
    return get_registry(registry).find_triple_family(s, m, l)


def match_shape(shape, registry=None):
    return get_registry(registry).match_shape(shape)


def typo_ledger(registry=None):
    return get_registry(registry).typo_ledger()
