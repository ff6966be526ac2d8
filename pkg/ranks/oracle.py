"""
Exhaustive rank enumeration: the ground truth every formula is checked
against.

The parameter space of a shape is split by its top ``chunk_bits`` bits into
disjoint ranges. Each range is tallied into a private histogram by a worker
(numpy batches of realized matrices ranked by ``gf2core.batch_rank``), and
the histograms are summed as Python integers.
"""

import logging
import multiprocessing as mp
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from .exceptions import BudgetExceeded, ChecksumViolation
from .gf2core import batch_rank
from .shape import canonical_string, parse_shape, realize_batch

logger = logging.getLogger(__name__)

ENGINE_VERSION = "1"

# Assignments are enumerated as uint64 words.
MAX_ENUMERABLE_PARAMS = 62


class Source(Enum):
    ORACLE = "oracle"
    CLOSED_FORM = "closed-form"
    EXTENSION = "extension"
    REDUCTION = "reduction"


@dataclass(frozen=True)
class RankDistribution:
    """Exact counts Gamma_0..Gamma_max_rank for one shape."""

    shape: str
    counts: tuple
    source: Source
    anchors: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        object.__setattr__(self, "anchors", tuple(self.anchors))

    @property
    def total(self):
        return sum(self.counts)

    @property
    def max_rank(self):
        return len(self.counts) - 1

    def __getitem__(self, i):
        if 0 <= i < len(self.counts):
            return self.counts[i]
        return 0

    def fraction(self, i):
        """Share of all assignments that have rank i, as an exact Fraction."""
        return Fraction(self[i], self.total)

    def check(self):
        """
        Assert the distribution invariants against its shape.

        Raises:
            ChecksumViolation: counts do not sum to 2^free_param_count, or
                the zero assignment is not the only rank-0 matrix
        """
        shape = parse_shape(self.shape)
        expected = 1 << shape.free_param_count
        if self.total != expected or self[0] != 1:
            raise ChecksumViolation(self.shape, self.total, expected)
        if len(self.counts) != shape.max_rank + 1:
            raise ChecksumViolation(self.shape, self.total, expected)
        if any(c < 0 for c in self.counts):
            raise ChecksumViolation(self.shape, self.total, expected)
        return self

    def with_source(self, source, *anchors):
        return RankDistribution(self.shape, self.counts, source, self.anchors + anchors)


@dataclass(frozen=True)
class EnumerationBudget:
    max_states: int = 2**34
    workers: int = 1
    chunk_bits: int = 6
    batch_bits: int = 18

    def __post_init__(self):
        if self.max_states < 1:
            raise ValueError("max_states must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.chunk_bits < 0 or self.batch_bits < 0:
            raise ValueError("chunk_bits and batch_bits must be >= 0")

    @classmethod
    def from_settings(cls, **overrides):
        """Budget from Django settings; keyword arguments that are not None win."""
        from django.conf import settings

        values = {
            "max_states": settings.RANKS_MAX_STATES,
            "workers": settings.RANKS_WORKERS,
            "chunk_bits": settings.RANKS_CHUNK_BITS,
            "batch_bits": settings.RANKS_BATCH_BITS,
        }
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def _rank_histogram(shape_text, start, stop, batch_bits):
    """Histogram of ranks over assignments start..stop-1 (worker entry point)."""
    shape = parse_shape(shape_text)
    hist = np.zeros(shape.max_rank + 1, dtype=np.int64)
    step = 1 << batch_bits
    for lo in range(start, stop, step):
        hi = min(lo + step, stop)
        states = np.arange(lo, hi, dtype=np.uint64)
        ranks = batch_rank(realize_batch(shape, states), shape.cols)
        hist += np.bincount(ranks, minlength=shape.max_rank + 1)
    return [int(c) for c in hist]


def map_chunks(worker, tasks, workers):
    """
    Run ``worker(*task)`` for every task, in a process pool when useful.

    Results come back in task order, so merging is deterministic.
    """
    if workers <= 1 or len(tasks) <= 1:
        return [worker(*task) for task in tasks]
    with mp.Pool(processes=min(workers, len(tasks))) as pool:
        return pool.starmap(worker, tasks)


def split_range(total_bits, chunk_bits):
    """Disjoint (start, stop) ranges covering 0..2^total_bits-1."""
    chunk_bits = min(chunk_bits, total_bits)
    size = 1 << (total_bits - chunk_bits)
    return [(c * size, (c + 1) * size) for c in range(1 << chunk_bits)]


def check_budget(states, budget, force=False, what="states"):
    if states > budget.max_states and not force:
        raise BudgetExceeded(states, budget.max_states, what)


def enumerate_rank_distribution(shape, budget=None, force=False):
    """
    Count every assignment of a shape by the rank of its matrix.

    Args:
        shape: StackedShape or shape text
        budget: EnumerationBudget (defaults to a single-worker budget)
        force: enumerate even when the state count exceeds the budget

    Returns:
        RankDistribution: source ORACLE

    Raises:
        BudgetExceeded: 2^free_param_count > budget.max_states without force
        WidthExceeded: k > 64 (raised while parsing)
    """
    shape = parse_shape(shape)
    budget = budget or EnumerationBudget()
    params = shape.free_param_count
    states = 1 << params
    check_budget(states, budget, force)
    if params > MAX_ENUMERABLE_PARAMS:
        raise BudgetExceeded(states, 1 << MAX_ENUMERABLE_PARAMS)

    text = canonical_string(shape)
    ranges = split_range(params, budget.chunk_bits)
    tasks = [(text, start, stop, budget.batch_bits) for start, stop in ranges]
    logger.info(
        "Enumerating %s: 2^%d states, %d chunks, %d workers",
        text,
        params,
        len(tasks),
        budget.workers,
    )

    started = time.perf_counter()
    counts = [0] * (shape.max_rank + 1)
    for partial in map_chunks(_rank_histogram, tasks, budget.workers):
        for i, c in enumerate(partial):
            counts[i] += c
    elapsed = time.perf_counter() - started
    logger.info("Enumerated %s in %.2fs", text, elapsed)

    return RankDistribution(text, counts, Source.ORACLE).check()


def measure_throughput(shape, states=2**20, workers=1, batch_bits=18):
    """
    Time the enumeration kernel over the first ``states`` assignments.

    Returns:
        dict: {'shape', 'states', 'workers', 'seconds', 'states_per_second'}
    """
    shape = parse_shape(shape)
    states = min(states, shape.state_count)
    text = canonical_string(shape)
    per_worker = -(-states // workers)
    tasks = [
        (text, lo, min(lo + per_worker, states), batch_bits)
        for lo in range(0, states, per_worker)
    ]
    started = time.perf_counter()
    map_chunks(_rank_histogram, tasks, workers)
    seconds = time.perf_counter() - started
    return {
        "shape": text,
        "states": states,
        "workers": workers,
        "seconds": seconds,
        "states_per_second": int(states / seconds) if seconds else 0,
    }


def cache_lookup_or_compute(shape, budget=None, cache_path=None, force=False):
    """
    Cached enumeration.

    Args:
        shape: StackedShape or shape text
        budget: EnumerationBudget
        cache_path: JSON-lines cache file; None or "" disables caching
        force: passed to the enumerator on a miss

    Returns:
        RankDistribution

    Raises:
        CacheCorrupt: a record in the cache file is malformed
    """
    from .cache import append_record, find_record, record_for

    shape = parse_shape(shape)
    if not cache_path:
        return enumerate_rank_distribution(shape, budget, force)

    text = canonical_string(shape)
    record = find_record(cache_path, text, ENGINE_VERSION)
    if record is not None:
        logger.info("Cache hit for %s in %s", text, cache_path)
        return RankDistribution(text, record["counts"], Source.ORACLE)

    logger.info("Cache miss for %s", text)
    started = time.perf_counter()
    dist = enumerate_rank_distribution(shape, budget, force)
    append_record(
        cache_path,
        record_for(dist, shape.free_param_count, ENGINE_VERSION, time.perf_counter() - started),
    )
    return dist
