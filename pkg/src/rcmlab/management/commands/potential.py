from functools import partial

from rcmlab.harness.services import potential_query

from ..base import LabCommand


class Command(LabCommand):
    help = "Potential kernel a(x, y) by the Green-function difference on B(0, n)"

    def add_command_arguments(self, parser):
        parser.add_argument("--x", nargs=2, type=int, default=[1, 0], metavar=("X1", "X2"))
        parser.add_argument("--y", nargs=2, type=int, default=[0, 0], metavar=("Y1", "Y2"))
        parser.add_argument("--n", type=int, default=64, help="Cutoff radius")

    def run(self, config, options):
        query = partial(_query, x=options["x"], y=options["y"], n=options["n"])
        self.execute_pipeline("potential", query, config, options)


def _query(config, threads=None, *, x, y, n):
    return potential_query(config, x, y, n)
