"""
Django management command to print closed-form tables from the family registry.

Usage:
    python manage.py table --list
    python manage.py table --family triple-s3 --l 2 --symbolic
    python manage.py table --family double22 --k 1..10 --format csv
    python manage.py table --family double55 --format xlsx --output double55.xlsx
    python manage.py table --typos
"""

from pathlib import Path

from django.core.management.base import BaseCommand

from ranks.exceptions import NegativeCount, OutOfValidity, RegistryError
from ranks.registry import get_registry
from ranks.reports import FORMATS, emit_report
from ranks.utils import parse_int_range

from ._options import usage_error


class Command(BaseCommand):
    help = "Render registry families as tables (symbolic or evaluated)"

    def add_arguments(self, parser):
        parser.add_argument("--family", type=str, help="Registry family id")
        parser.add_argument("--l", type=int, help="Family parameter l")
        parser.add_argument("--k", type=parse_int_range, help="Column range, e.g. 1..10")
        parser.add_argument(
            "--symbolic",
            action="store_true",
            help="Print the piecewise formulas instead of evaluated counts",
        )
        parser.add_argument(
            "--format", choices=FORMATS, default="md", help="Report format (default: md)"
        )
        parser.add_argument("--output", type=str, help="Write the report to this file")
        parser.add_argument("--typos", action="store_true", help="Print the typo ledger")
        parser.add_argument("--list", action="store_true", help="List registry families")

    def handle(self, *args, **options):
        registry = get_registry()

        if options["list"]:
            self.list_families(registry)
            return
        if options["typos"]:
            self.print_typos(registry)
            return
        if not options["family"]:
            raise usage_error("Give --family ID, --list or --typos")

        try:
            family = registry.get(options["family"])
        except RegistryError as e:
            raise usage_error(e)
        l = options["l"]
        if family.has_l and l is None and not options["symbolic"]:
            raise usage_error(f"family {family.id} needs --l")

        if options["symbolic"]:
            self.stdout.write(f"📋 {family.id}: {family.template}  {family.title}")
            for line in family.render_symbolic(l):
                self.stdout.write(f"   {line}")
            return

        results = []
        for k, point_l in family.domain(options["k"], [l] if family.has_l else None):
            try:
                results.append(family.evaluate(k, point_l, complete=True))
            except OutOfValidity as e:
                self.stderr.write(self.style.WARNING(f"⚠️  {e}"))
            except NegativeCount as e:
                self.stderr.write(self.style.ERROR(f"❌ {e}"))
        if not results:
            raise usage_error(f"{family.id}: no fully covered point in the requested range")

        self.write_report(options["format"], results, options["output"])

    def write_report(self, fmt, results, output):
        content = emit_report(fmt, results)
        if fmt == "xlsx" and not output:
            raise usage_error("--format xlsx needs --output PATH")
        if not output:
            self.stdout.write(content, ending="")
            return

        path = Path(output)
        path.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(content, bytes):
            path.write_bytes(content)
        else:
            path.write_text(content, encoding="utf-8")
        self.stdout.write(
            self.style.SUCCESS(f"✅ {len(results)} distribution(s) written to {path}")
        )

    def list_families(self, registry):
        self.stdout.write(f"📋 {len(registry)} families (data version {registry.version})")
        for family in registry:
            if family.has_l:
                upper = "" if family.l_max is None else family.l_max
                params = f"{family.l_name}={family.l_min}..{upper}"
            else:
                params = ""
            partial = "" if family.complete else "  (partial)"
            self.stdout.write(
                f"   {family.id:<20} {family.template:<24} {params:<8} {family.title}{partial}"
            )

    def print_typos(self, registry):
        ledger = registry.typo_ledger()
        self.stdout.write(f"📋 {len(ledger)} typo arbitration(s)")
        for typo in ledger:
            self.stdout.write(f"   {typo.family} {typo.where}")
            self.stdout.write(f"      printed: {typo.printed}")
            self.stdout.write(f"      stored:  {typo.stored}")
            self.stdout.write(f"      reason:  {typo.reason}")
