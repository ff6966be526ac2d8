"""
Django management command to count solutions of the bilinear system of a shape.

Usage:
    python manage.py solve_count --shape "[5]x5" --q 2

Prints R_q, read off the shape's rank distribution.
"""

from django.core.management.base import BaseCommand, CommandError

from ranks.exceptions import (
    BudgetExceeded,
    ExtensionError,
    OutOfValidity,
    RegistryError,
    ShapeError,
)
from ranks.services import METHODS, SolutionCountService

from ._options import (
    add_budget_arguments,
    add_cache_arguments,
    add_shape_arguments,
    budget_from_options,
    cache_path_from_options,
    shape_from_options,
    usage_error,
)


class Command(BaseCommand):
    help = "Count solutions R_q of the shape's system over F2[T] from its rank distribution"

    def add_arguments(self, parser):
        add_shape_arguments(parser)
        parser.add_argument("--q", type=int, required=True, help="Number of unknown pairs")
        parser.add_argument(
            "--method",
            choices=METHODS,
            default="auto",
            help="Source of the rank distribution (default: auto)",
        )
        add_budget_arguments(parser)
        add_cache_arguments(parser)

    def handle(self, *args, **options):
        shape = shape_from_options(options)
        if options["q"] < 1:
            raise usage_error("--q must be at least 1")

        try:
            value, dist = SolutionCountService.count(
                shape,
                options["q"],
                options["method"],
                budget_from_options(options),
                cache_path_from_options(options),
                options["force"],
            )
        except (ShapeError, RegistryError, OutOfValidity, ExtensionError) as e:
            raise usage_error(e)
        except BudgetExceeded as e:
            raise CommandError(f"❌ {e}")

        if options["verbosity"] > 1:
            self.stdout.write(f"📊 {dist.shape}, q={options['q']} ({dist.source.value})")
        self.stdout.write(str(value))
