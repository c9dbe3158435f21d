from rcmlab.harness.services import static

from ..base import LabCommand


class Command(LabCommand):
    help = "Estimate the limiting covariance Sigma^2 from walk displacements"

    def run(self, config, options):
        self.execute_pipeline("sigma", static.sigma_table, config, options)
