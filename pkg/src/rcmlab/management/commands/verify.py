from rcmlab.harness.services import static

from ..base import LabCommand

PIPELINES = {
    "thm12": static.verify_thm12,
    "thm13-on": static.verify_thm13_ondiag,
    "thm13-off": static.verify_thm13_offdiag,
    "lemma22": static.verify_lemma22,
    "cor23": static.verify_cor23,
    "classical": static.classical_constant,
}


class Command(LabCommand):
    help = "Run a static verification pipeline and check its acceptance criteria"

    def add_command_arguments(self, parser):
        parser.add_argument("pipeline", choices=sorted(PIPELINES))

    def run(self, config, options):
        name = options["pipeline"]
        self.execute_pipeline(f"verify {name}", PIPELINES[name], config, options)
