from rcmlab.harness.services import static

from ..base import LabCommand


class Command(LabCommand):
    help = "Tabulate t * p_t(0, 0) along a geometric time grid"

    def run(self, config, options):
        self.execute_pipeline("llt", static.llt_table, config, options)
