"""
Django management command to compute a rank distribution.

Usage:
    python manage.py dist --shape "[2;2]x4"
    python manage.py dist --smL 3,0,2 --k 5 --method formula --format json

The distribution comes from the registry, the free-row extension or
exhaustive enumeration (``--method auto`` picks the first that applies).
"""

from django.core.management.base import BaseCommand, CommandError

from ranks.exceptions import (
    BudgetExceeded,
    ExtensionError,
    OutOfValidity,
    RegistryError,
    ShapeError,
)
from ranks.reports import emit_report, report_rows
from ranks.reports.markdown import render_aligned
from ranks.services import METHODS, DistributionService

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
    help = "Compute the rank distribution of a stacked persymmetric shape"

    def add_arguments(self, parser):
        add_shape_arguments(parser)
        parser.add_argument(
            "--method",
            choices=METHODS,
            default="auto",
            help="Where the distribution comes from (default: auto)",
        )
        parser.add_argument(
            "--format",
            choices=["table", "json", "md", "csv"],
            default="table",
            help="Output format (default: table)",
        )
        add_budget_arguments(parser)
        add_cache_arguments(parser)

    def handle(self, *args, **options):
        shape = shape_from_options(options)
        budget = budget_from_options(options)

        try:
            dist = DistributionService.resolve(
                shape,
                options["method"],
                budget,
                cache_path_from_options(options),
                options["force"],
            )
        except (ShapeError, RegistryError, OutOfValidity, ExtensionError) as e:
            raise usage_error(e)
        except BudgetExceeded as e:
            raise CommandError(f"❌ {e}")

        if options["format"] != "table":
            self.stdout.write(emit_report(options["format"], [dist]), ending="")
            return

        self.stdout.write(f"📊 {dist.shape}  ({dist.source.value})")
        self.stdout.write(render_aligned(report_rows([dist])))
        self.stdout.write(
            self.style.SUCCESS(f"✅ Sum = {dist.total} = 2^{shape.free_param_count}")
        )
