"""
Django management command to trace the reduction rules on a triple shape.

Usage:
    python manage.py reduce --smL 3,0,2 --k 12 --i 8

Prints each step Gamma_i = 16^j * Gamma_i' down to the base family and,
when the registry covers both ends, the value on each side.
"""

from django.core.management.base import BaseCommand

from ranks.exceptions import NoRuleApplies, OutOfValidity, RegistryError
from ranks.registry import get_registry, triple_label
from ranks.utils import parse_sml

from ._options import usage_error


class Command(BaseCommand):
    help = "Trace the reduction chain of one rank of a triple shape"

    def add_arguments(self, parser):
        parser.add_argument(
            "--smL", dest="sml", type=parse_sml, required=True, help="Triple as s,m,l"
        )
        parser.add_argument("--k", type=int, required=True, help="Column count")
        parser.add_argument("--i", type=int, required=True, help="Rank index")

    def handle(self, *args, **options):
        s, m, l = options["sml"]
        k, i = options["k"], options["i"]
        registry = get_registry()

        try:
            steps = registry.reduction_chain(s, m, l, k, i)
        except NoRuleApplies as e:
            raise usage_error(e)

        self.stdout.write(f"🔗 Gamma_{i} {triple_label(s, m, l, k)}")
        power = 0
        for step in steps:
            power += step.power
            self.stdout.write(f"   {step.describe()}")
            if step.anchor:
                self.stdout.write(f"      {step.anchor}")

        ts, tm, tl, tk, ti = steps[-1].target
        self.stdout.write(
            f"   => Gamma_{i} {triple_label(s, m, l, k)} = 16^{power} * "
            f"Gamma_{ti} {triple_label(ts, tm, tl, tk)}"
        )

        source_value = self.registry_value(registry, s, m, l, k, i)
        target_value = self.registry_value(registry, ts, tm, tl, tk, ti)
        if target_value is None:
            self.stdout.write(self.style.WARNING("⚠️  Target is not covered by the registry"))
            return
        reduced = 16**power * target_value
        self.stdout.write(f"   target value: {target_value}")
        self.stdout.write(f"   16^{power} * target: {reduced}")
        if source_value is None:
            return
        if source_value == reduced:
            self.stdout.write(self.style.SUCCESS(f"✅ Matches the source formula: {source_value}"))
        else:
            self.stdout.write(
                self.style.ERROR(f"❌ Source formula gives {source_value}, chain gives {reduced}")
            )

    @staticmethod
    def registry_value(registry, s, m, l, k, i):
        found = registry.find_triple_family(s, m, l)
        if found is None:
            return None
        family, family_l = found
        try:
            return family.eval_rank(i, k, family_l)
        except (OutOfValidity, RegistryError):
            return None
