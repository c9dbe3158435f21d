from django.apps import AppConfig


class RcmlabConfig(AppConfig):
    name = "rcmlab"
    verbose_name = "Random conductance laboratory"
