"""
Argument helpers shared by the rank engine commands.

Usage errors (bad shape, unknown family, malformed range) become
``CommandError(..., returncode=2)``; a verification mismatch ends with
returncode 1.
"""

from django.conf import settings
from django.core.management.base import CommandError

from ranks.exceptions import ShapeError
from ranks.oracle import EnumerationBudget
from ranks.shape import parse_shape, shape_from_sml
from ranks.utils import parse_budget, parse_sml

USAGE_ERROR = 2
MISMATCH = 1


def usage_error(message):
    return CommandError(str(message), returncode=USAGE_ERROR)


def add_shape_arguments(parser):
    parser.add_argument("--shape", type=str, help='Shape text, e.g. "[2;2+3;(1)]x4"')
    parser.add_argument(
        "--smL",
        dest="sml",
        type=parse_sml,
        help="Triple [s;s+m;s+m+l] given as s,m,l (needs --k)",
    )
    parser.add_argument("--k", type=int, help="Column count for --smL")


def shape_from_options(options):
    """StackedShape from --shape, or from --smL with --k."""
    shape_text = options.get("shape")
    sml = options.get("sml")
    k = options.get("k")
    if shape_text and sml:
        raise usage_error("Give either --shape or --smL, not both")
    try:
        if shape_text:
            return parse_shape(shape_text)
        if sml:
            if k is None:
                raise usage_error("--smL needs --k")
            return shape_from_sml(*sml, k)
    except ShapeError as e:
        raise usage_error(f"Invalid shape: {e}")
    raise usage_error("A shape is required: --shape TEXT or --smL s,m,l --k K")


def add_budget_arguments(parser, default_max_states=None):
    parser.add_argument(
        "--max-states",
        "--budget",
        dest="max_states",
        type=parse_budget,
        default=default_max_states,
        help="Largest state count to enumerate, e.g. 2^26 (default from settings)",
    )
    parser.add_argument("--workers", type=int, help="Worker processes (default from settings)")
    parser.add_argument("--chunk-bits", type=int, help="log2 of the chunk count per enumeration")
    parser.add_argument(
        "--force",
        action="store_true",
        help="Enumerate even when the state count exceeds the budget",
    )


def add_cache_arguments(parser):
    parser.add_argument(
        "--no-cache",
        action="store_true",
        help="Neither read nor write the distribution cache",
    )


def budget_from_options(options):
    try:
        return EnumerationBudget.from_settings(
            max_states=options.get("max_states"),
            workers=options.get("workers"),
            chunk_bits=options.get("chunk_bits"),
        )
    except ValueError as e:
        raise usage_error(e)


def cache_path_from_options(options):
    if options.get("no_cache"):
        return None
    return settings.RANKS_CACHE_PATH or None
