from rcmlab.harness.services import dynamic

from ..base import LabCommand


class Command(LabCommand):
    help = "Annealed kernels of dynamic environments and the interface variance checks"

    def add_command_arguments(self, parser):
        parser.add_argument("pipeline", choices=sorted(dynamic.EXPERIMENTS))

    def run(self, config, options):
        name = options["pipeline"]
        self.execute_pipeline(f"dynamic {name}", dynamic.EXPERIMENTS[name], config, options)
