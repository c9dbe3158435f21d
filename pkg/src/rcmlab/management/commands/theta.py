from rcmlab.harness.services import static

from ..base import LabCommand


class Command(LabCommand):
    help = "Estimate the giant-cluster density theta over independent windows"

    def run(self, config, options):
        self.execute_pipeline("theta", static.theta_table, config, options)
