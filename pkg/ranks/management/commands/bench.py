"""
Django management command to measure enumeration throughput.

Usage:
    python manage.py bench --shape "[4;4;4;4]x16" --states 2^22 --workers 8
"""

from django.conf import settings
from django.core.management.base import BaseCommand

from ranks.oracle import measure_throughput
from ranks.utils import parse_budget

from ._options import add_shape_arguments, shape_from_options


class Command(BaseCommand):
    help = "Measure rank enumeration throughput in states per second"

    def add_arguments(self, parser):
        add_shape_arguments(parser)
        parser.add_argument(
            "--states",
            type=parse_budget,
            default=2**20,
            help="States to enumerate, e.g. 2^22 (default: 2^20)",
        )
        parser.add_argument("--workers", type=int, help="Worker processes (default from settings)")

    def handle(self, *args, **options):
        shape = shape_from_options(options)
        workers = options["workers"] or settings.RANKS_WORKERS

        result = measure_throughput(
            shape, options["states"], workers, settings.RANKS_BATCH_BITS
        )
        per_worker = result["states_per_second"] // result["workers"]
        self.stdout.write(f"📊 {result['shape']}")
        self.stdout.write(f"   States: {result['states']:,}")
        self.stdout.write(f"   Workers: {result['workers']}")
        self.stdout.write(f"   Seconds: {result['seconds']:.3f}")
        self.stdout.write(f"   States/second: {result['states_per_second']:,}")
        self.stdout.write(
            self.style.SUCCESS(f"✅ {per_worker:,} states/second/worker")
        )
