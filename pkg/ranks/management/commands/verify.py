"""
Django management command to verify registry families against exact references.

Usage:
    python manage.py verify --family double22 --k 1..10
    python manage.py verify --all --budget 2^26 --workers 8

Each (k, l) point is compared with enumeration when its state count fits
the budget, otherwise with the free-row extension of an enumerable base,
the reduction identities, or the checksum. Exits with status 1 on any
mismatch.
"""

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ranks.exceptions import CacheCorrupt, OutOfValidity, RegistryError
from ranks.registry import get_registry
from ranks.services import VerificationService
from ranks.utils import parse_int_range
from ranks.verification_logger import VerificationLogger

from ._options import (
    MISMATCH,
    add_budget_arguments,
    add_cache_arguments,
    budget_from_options,
    cache_path_from_options,
    usage_error,
)

DEFAULT_BUDGET = 2**26


class Command(BaseCommand):
    help = "Verify closed-form families against enumeration and reduction identities"

    def add_arguments(self, parser):
        target = parser.add_mutually_exclusive_group(required=True)
        target.add_argument("--family", type=str, help="Registry family id")
        target.add_argument("--all", action="store_true", help="Verify every family")
        parser.add_argument(
            "--k", type=parse_int_range, help="Column range, e.g. 1..10 (default: family grid)"
        )
        parser.add_argument(
            "--l", type=parse_int_range, help="Parameter range, e.g. 0..2 (default: family grid)"
        )
        add_budget_arguments(parser, default_max_states=DEFAULT_BUDGET)
        add_cache_arguments(parser)
        parser.add_argument(
            "--log-dir",
            type=str,
            help="Directory for verification logs (default: RANKS_LOG_DIR)",
        )

    def handle(self, *args, **options):
        if options["all"] and (options["k"] or options["l"]):
            raise usage_error("--k and --l apply to a single --family")

        budget = budget_from_options(options)
        cache_path = cache_path_from_options(options)
        log_dir = options["log_dir"] or settings.RANKS_LOG_DIR
        loggers = []

        def logger_factory(family_id):
            verification_logger = VerificationLogger(family_id, log_dir)
            loggers.append(verification_logger)
            return verification_logger

        self.stdout.write(
            f"🔎 Verifying with budget {budget.max_states:,} states, "
            f"{budget.workers} worker(s)"
        )
        try:
            if options["all"]:
                reports = VerificationService.verify_all(
                    budget, cache_path, logger_factory=logger_factory
                )
            else:
                get_registry().get(options["family"])
                reports = [
                    VerificationService.verify_family(
                        options["family"],
                        options["k"],
                        options["l"],
                        budget,
                        cache_path,
                        verification_logger=logger_factory(options["family"]),
                    )
                ]
        except (RegistryError, OutOfValidity) as e:
            raise usage_error(e)
        except CacheCorrupt as e:
            raise CommandError(f"❌ {e}")

        for report, verification_logger in zip(reports, loggers):
            self.print_report(report)
            verification_logger.write_summary(
                {
                    "Budget": f"{budget.max_states:,} states",
                    "Workers": budget.workers,
                }
            )
            if options["verbosity"] > 1:
                verification_logger.print_console_summary(self.stdout)

        mismatches = sum(len(r.mismatches) for r in reports)
        points = sum(len(r.points) for r in reports)
        if mismatches:
            raise CommandError(
                f"❌ {mismatches} mismatch(es) over {points} point(s)",
                returncode=MISMATCH,
            )
        self.stdout.write(
            self.style.SUCCESS(
                f"\n✅ {len(reports)} famil{'y' if len(reports) == 1 else 'ies'} verified, "
                f"{points} point(s), no mismatches"
            )
        )

    def print_report(self, report):
        methods = {}
        for point in report.points:
            methods[point.method] = methods.get(point.method, 0) + 1
        by_method = ", ".join(f"{m}: {n}" for m, n in sorted(methods.items()))
        line = (
            f"{report.family}: {len(report.points)} point(s), "
            f"{report.ranks_checked} rank(s) [{by_method}]"
        )

        if report.ok:
            self.stdout.write(self.style.SUCCESS(f"✅ {line}"))
        else:
            self.stdout.write(self.style.ERROR(f"❌ {line}"))
            for m in report.mismatches:
                self.stdout.write(
                    f"   {m.shape} i={m.i}: formula {m.formula}, "
                    f"{m.method} {m.reference} {m.detail}".rstrip()
                )
        for point in report.skipped:
            self.stdout.write(self.style.WARNING(f"   ⚠️  {point.shape}: {point.detail}"))
