"""
Free-row extension: the rank distribution of a shape with t arbitrary rows
appended, computed from the distribution of the shape itself.

Appending t free rows to a rank-j matrix and landing on rank i = j + D
means choosing which D-dimensional extension of the row space the new rows
reach ([t, D]_2 ways up to basis), a basis completion outside the current
space (the product over a), and arbitrary components for the remaining
t - D rows inside the reached space (2^{j (t - D)}).
"""

from functools import lru_cache

from .exceptions import ExtensionError
from .oracle import RankDistribution, Source
from .shape import canonical_string, parse_shape


@lru_cache(maxsize=None)
def gaussian_binomial(n, d):
    """
    Number of d-dimensional subspaces of F2^n.

    Uses the q=2 Pascal rule [n,d] = [n-1,d-1] + 2^d [n-1,d].

    Args:
        n: dimension of the ambient space (>= 0)
        d: subspace dimension; out-of-range values give 0

    Returns:
        int
    """
    if n < 0:
        raise ValueError(f"gaussian_binomial needs n >= 0, got {n}")
    if d < 0 or d > n:
        return 0
    if d == 0 or d == n:
        return 1
    return gaussian_binomial(n - 1, d - 1) + (1 << d) * gaussian_binomial(n - 1, d)


def _basis_completions(k, j, delta):
    """Ordered ways to pick delta vectors of F2^k independent over a j-dim space."""
    product = 1
    for a in range(delta):
        product *= (1 << k) - (1 << (j + a))
    return product


def extension_counts(counts, t, k):
    """
    Extended counts from plain integer counts.

    Args:
        counts: Gamma_0..Gamma_r of the base shape
        t: free rows appended (>= 0)
        k: column count

    Returns:
        list: Gamma'_0..Gamma'_{min(k, r + t)}
    """
    if t < 0:
        raise ExtensionError(f"cannot append {t} rows")
    counts = list(counts)
    new_max = min(k, len(counts) - 1 + t)
    extended = []
    for i in range(new_max + 1):
        total = 0
        for delta in range(min(t, i) + 1):
            j = i - delta
            if j >= len(counts) or counts[j] == 0:
                continue
            total += (
                gaussian_binomial(t, delta)
                * (1 << (j * (t - delta)))
                * _basis_completions(k, j, delta)
                * counts[j]
            )
        extended.append(total)
    return extended


def extend_free_rows(d, t, k):
    """
    Distribution of ``d.shape`` with a free block of t rows appended.

    Args:
        d: RankDistribution of the base shape
        t: number of free rows (t=0 returns d unchanged)
        k: column count; must match the base shape

    Returns:
        RankDistribution: source EXTENSION

    Raises:
        ExtensionError: mismatched k or negative t
    """
    shape = parse_shape(d.shape)
    if shape.cols != k:
        raise ExtensionError(
            f"distribution of {d.shape} has {shape.cols} columns, not {k}"
        )
    if t < 0:
        raise ExtensionError(f"cannot append {t} rows")
    if t == 0:
        return d

    extended = shape.with_free_rows(t)
    return RankDistribution(
        canonical_string(extended),
        extension_counts(d.counts, t, k),
        Source.EXTENSION,
        d.anchors + (f"extended from {d.shape} by ({t})",),
    ).check()
