from pathlib import Path

from django.core.management.base import CommandError

from rcmlab.harness import read_snapshot, write_snapshot
from rcmlab.harness.services import environment_summary, output_dir, sample_env

from ..base import USAGE, LabCommand


class Command(LabCommand):
    help = "Sample an environment to a snapshot file, or inspect an existing snapshot"

    def add_command_arguments(self, parser):
        parser.add_argument("action", choices=["sample", "inspect"])
        parser.add_argument("snapshot", nargs="?", help="Snapshot path (default: <out>/env.bin)")

    def run(self, config, options):
        if options["action"] == "sample":
            path = Path(options["snapshot"] or output_dir(config, options.get("out")) / "env.bin")
            env = sample_env(config, 0)
            write_snapshot(path, env)
            self.stdout.write(f"Wrote {path}")
        else:
            if not options["snapshot"]:
                raise CommandError("env inspect needs a snapshot path", returncode=USAGE)
            env = read_snapshot(options["snapshot"])
        self.execute_pipeline(
            f"env {options['action']}",
            lambda config, threads=None: environment_summary(env, config),
            config,
            options,
        )
