"""
Service classes for the rank engine.

This module contains the service classes the management commands call:
resolving a distribution by the cheapest exact method, counting solutions,
and verifying registry families against enumeration.
"""

import logging
from dataclasses import dataclass, field

from .exceptions import (
    ChecksumViolation,
    ExtensionError,
    NegativeCount,
    OutOfValidity,
    RegistryError,
)
from .extension import extend_free_rows, extension_counts
from .oracle import EnumerationBudget, RankDistribution, Source, cache_lookup_or_compute
from .registry import get_registry
from .shape import canonical_string, parse_shape
from .solcount import EquationSystemSpec, count_solutions, oracle_count_solutions

logger = logging.getLogger(__name__)

METHODS = ("auto", "oracle", "formula", "extension")


class DistributionService:
    """Service class for obtaining rank distributions"""

    @staticmethod
    def formula_for(shape, registry=None):
        """
        Closed-form distribution from the first registry family covering the shape.

        Args:
            shape: StackedShape or shape text
            registry: FamilyRegistry (defaults to the configured one)

        Returns:
            RankDistribution: source CLOSED_FORM

        Raises:
            RegistryError: no family template matches the shape
            OutOfValidity: families match but none covers every rank
        """
        shape = parse_shape(shape)
        matches = get_registry(registry).match_shape(shape)
        if not matches:
            raise RegistryError(f"no registry family matches {canonical_string(shape)}")
        first_error = None
        for family, k, l in matches:
            try:
                return family.evaluate(k, l, complete=True)
            except OutOfValidity as e:
                first_error = first_error or e
        raise first_error

    @staticmethod
    def extend(shape, budget=None, cache_path=None, force=False, registry=None):
        """Distribution of a shape ending in a free block, from its base."""
        shape = parse_shape(shape)
        base, t = shape.split_trailing_free()
        if t == 0:
            raise ExtensionError(f"{canonical_string(shape)} has no trailing free block")
        if base is None:
            return RankDistribution(
                canonical_string(shape),
                extension_counts([1], t, shape.cols),
                Source.EXTENSION,
                (f"free {t}x{shape.cols} block",),
            ).check()
        base_dist = DistributionService.resolve(
            base, "auto", budget, cache_path, force, registry
        )
        return extend_free_rows(base_dist, t, shape.cols)

    @staticmethod
    def resolve(shape, method="auto", budget=None, cache_path=None, force=False, registry=None):
        """
        Distribution of a shape by the requested method.

        ``auto`` tries the registry first, then the free-row extension when
        the shape ends in a free block, then enumeration.

        Args:
            shape: StackedShape or shape text
            method: one of auto, oracle, formula, extension
            budget: EnumerationBudget for enumeration fallbacks
            cache_path: enumeration cache file, None disables caching
            force: enumerate past the budget

        Returns:
            RankDistribution
        """
        shape = parse_shape(shape)
        if method not in METHODS:
            raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
        if method == "oracle":
            return cache_lookup_or_compute(shape, budget, cache_path, force)
        if method == "formula":
            return DistributionService.formula_for(shape, registry)
        if method == "extension":
            return DistributionService.extend(shape, budget, cache_path, force, registry)

        try:
            return DistributionService.formula_for(shape, registry)
        except (RegistryError, OutOfValidity) as e:
            logger.debug("No closed form for %s: %s", canonical_string(shape), e)
        if shape.split_trailing_free()[1]:
            return DistributionService.extend(shape, budget, cache_path, force, registry)
        return cache_lookup_or_compute(shape, budget, cache_path, force)


class SolutionCountService:
    """Service class for solution counts R_q"""

    @staticmethod
    def count(shape, q, method="auto", budget=None, cache_path=None, force=False, registry=None):
        """
        R_q from the shape's rank distribution.

        Returns:
            tuple: (R_q, RankDistribution used)
        """
        spec = EquationSystemSpec(shape, q)
        dist = DistributionService.resolve(
            spec.shape, method, budget, cache_path, force, registry
        )
        return count_solutions(spec, dist), dist

    @staticmethod
    def brute_force(shape, q, budget=None, force=False):
        return oracle_count_solutions(EquationSystemSpec(shape, q), budget, force)


@dataclass(frozen=True)
class Mismatch:
    family: str
    shape: str
    k: int
    l: int
    i: int
    formula: int
    reference: int
    method: str
    detail: str = ""


@dataclass(frozen=True)
class PointResult:
    shape: str
    k: int
    l: int
    method: str
    ranks_checked: int = 0
    detail: str = ""

    @property
    def skipped(self):
        return self.method == "skipped"


@dataclass
class VerificationReport:
    family: str
    points: list = field(default_factory=list)
    mismatches: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.mismatches

    @property
    def ranks_checked(self):
        return sum(p.ranks_checked for p in self.points)

    @property
    def skipped(self):
        return [p for p in self.points if p.skipped]


class VerificationService:
    """Service class for checking registry families against exact references"""

    @staticmethod
    def _formula_counts(family, k, l, text):
        """(counts with None for uncovered ranks, complete?, formula-level mismatches)"""
        try:
            return list(family.evaluate(k, l, complete=True).counts), True, []
        except OutOfValidity:
            pass
        except ChecksumViolation as e:
            mismatch = Mismatch(
                family.id, text, k, l, None, e.total, e.expected, "checksum",
                "sum of evaluated counts",
            )
            return family.eval_ranks(k, l), False, [mismatch]
        except NegativeCount as e:
            mismatch = Mismatch(
                family.id, text, k, l, e.i, e.value, None, "nonnegative", str(e)
            )
            return [], False, [mismatch]
        return family.eval_ranks(k, l), False, []

    @staticmethod
    def verify_point(family, k, l, budget, cache_path=None, registry=None):
        """
        Compare one (k, l) of a family with the best available reference.

        Enumeration when the state count fits the budget, enumeration of the
        base plus the free-row extension when only that fits, the reduction
        identities for triple families otherwise, and finally the checksum
        alone when the family covers every rank.

        Returns:
            tuple: (PointResult, list of Mismatch)
        """
        registry = get_registry(registry)
        shape = family.shape_for(k, l)
        text = canonical_string(shape)
        formula, complete, mismatches = VerificationService._formula_counts(
            family, k, l, text
        )
        covered = [i for i, v in enumerate(formula) if v is not None]
        if not covered:
            return PointResult(text, k, l, "skipped", 0, "no covered ranks"), mismatches

        base, t = shape.split_trailing_free()
        reference = None
        if shape.state_count <= budget.max_states:
            reference = cache_lookup_or_compute(shape, budget, cache_path).counts
            method = "oracle"
        elif t and base is not None and base.state_count <= budget.max_states:
            base_dist = cache_lookup_or_compute(base, budget, cache_path)
            reference = extend_free_rows(base_dist, t, shape.cols).counts
            method = "extension"

        if reference is not None:
            for i in covered:
                if formula[i] != reference[i]:
                    mismatches.append(
                        Mismatch(family.id, text, k, l, i, formula[i], reference[i], method)
                    )
            return PointResult(text, k, l, method, len(covered)), mismatches

        checks = registry.reduction_checks(family, k, l) if family.sml else []
        if checks:
            for check in checks:
                if not check.ok:
                    mismatches.append(
                        Mismatch(
                            family.id, text, k, l, check.i, check.source_value,
                            check.expected, "reduction", check.step.describe(),
                        )
                    )
            return PointResult(text, k, l, "reduction", len(checks)), mismatches
        if complete:
            return PointResult(text, k, l, "checksum", len(covered)), mismatches
        return (
            PointResult(text, k, l, "skipped", 0, "over budget and no reduction applies"),
            mismatches,
        )

    @staticmethod
    def verify_family(
        family_id,
        k_range=None,
        l_range=None,
        budget=None,
        cache_path=None,
        registry=None,
        verification_logger=None,
    ):
        """
        Verify a family over its (k, l) grid.

        Args:
            family_id: registry family id
            k_range, l_range: iterables overriding the family's declared grid
            budget: EnumerationBudget; its max_states decides enumeration
            cache_path: enumeration cache, None disables caching
            verification_logger: optional VerificationLogger

        Returns:
            VerificationReport: mismatches are report content, never raised
        """
        registry = get_registry(registry)
        family = registry.get(family_id)
        budget = budget or EnumerationBudget()
        report = VerificationReport(family.id)

        for k, l in family.domain(k_range, l_range):
            point, mismatches = VerificationService.verify_point(
                family, k, l, budget, cache_path, registry
            )
            report.points.append(point)
            report.mismatches.extend(mismatches)
            if verification_logger is not None:
                if point.skipped:
                    verification_logger.log_skipped(point.shape, point.detail)
                else:
                    verification_logger.log_point(point.shape, point.method, point.ranks_checked)
                for mismatch in mismatches:
                    verification_logger.log_mismatch(mismatch)
            logger.info(
                "%s %s: %s, %d ranks, %d mismatches",
                family.id, point.shape, point.method, point.ranks_checked, len(mismatches),
            )
        return report

    @staticmethod
    def verify_all(budget=None, cache_path=None, registry=None, logger_factory=None):
        """
        Verify every registry family over its declared grid.

        Args:
            logger_factory: optional callable family_id -> VerificationLogger

        Returns:
            list: VerificationReport per family, in data file order
        """
        registry = get_registry(registry)
        reports = []
        for family in registry:
            verification_logger = logger_factory(family.id) if logger_factory else None
            reports.append(
                VerificationService.verify_family(
                    family.id,
                    budget=budget,
                    cache_path=cache_path,
                    registry=registry,
                    verification_logger=verification_logger,
                )
            )
        return reports
