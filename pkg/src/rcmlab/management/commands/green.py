from functools import partial

from rcmlab.harness.services import green_query

from ..base import LabCommand


class Command(LabCommand):
    help = "Killed Green function g_B(0,n)(x, y) on the run's first environment"

    def add_command_arguments(self, parser):
        parser.add_argument("--x", nargs=2, type=int, default=[0, 0], metavar=("X1", "X2"))
        parser.add_argument("--y", nargs=2, type=int, default=[0, 0], metavar=("Y1", "Y2"))
        parser.add_argument("--n", type=int, default=16, help="Ball radius")

    def run(self, config, options):
        query = partial(_query, x=options["x"], y=options["y"], n=options["n"])
        self.execute_pipeline("green", query, config, options)


def _query(config, threads=None, *, x, y, n):
    return green_query(config, x, y, n)
