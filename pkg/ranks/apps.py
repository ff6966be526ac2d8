from django.apps import AppConfig


class RanksConfig(AppConfig):
    name = "ranks"
    verbose_name = "Persymmetric rank engine"
