"""
Django management command to brute-force the solution count of a shape's system.

Usage:
    python manage.py oracle_solve --shape "[2;2;2]x2" --q 2 --show-system

Every coefficient tuple of Y_j and the constraint polynomials is tried,
so this is only feasible for small systems (see --max-states).
"""

from django.core.management.base import BaseCommand, CommandError

from ranks.exceptions import BudgetExceeded, WidthExceeded
from ranks.solcount import (
    EquationSystemSpec,
    oracle_count_solutions,
    quadratic_system_expansion,
    variable_legend,
)

from ._options import (
    add_budget_arguments,
    add_shape_arguments,
    budget_from_options,
    shape_from_options,
    usage_error,
)


class Command(BaseCommand):
    help = "Brute-force R_q over every coefficient tuple"

    def add_arguments(self, parser):
        add_shape_arguments(parser)
        parser.add_argument("--q", type=int, required=True, help="Number of unknown pairs")
        parser.add_argument(
            "--show-system",
            action="store_true",
            help="Print the coefficient-level quadratic system first",
        )
        parser.add_argument(
            "--style",
            choices=["indexed", "named"],
            default="indexed",
            help="Variable names for --show-system (default: indexed x1..xN)",
        )
        add_budget_arguments(parser)

    def handle(self, *args, **options):
        shape = shape_from_options(options)
        if options["q"] < 1:
            raise usage_error("--q must be at least 1")
        spec = EquationSystemSpec(shape, options["q"])

        if options["show_system"]:
            self.stdout.write(
                f"📋 {spec}: {spec.coefficient_bits} variables, "
                f"{spec.equation_count} equations"
            )
            for line in variable_legend(spec, options["style"]):
                self.stdout.write(f"   {line}")
            for equation in quadratic_system_expansion(spec, options["style"]):
                self.stdout.write(f"   {equation}")

        try:
            value = oracle_count_solutions(
                spec, budget_from_options(options), options["force"]
            )
        except BudgetExceeded as e:
            raise CommandError(f"❌ {e}")
        except WidthExceeded as e:
            raise usage_error(e)

        self.stdout.write(str(value))
