"""Shared flags, config loading and exit statuses for the lab commands."""

from django.core.management.base import BaseCommand, CommandError

from rcmlab.exceptions import ConfigurationError, LabError
from rcmlab.harness import ExperimentConfig
from rcmlab.harness.services import run_experiment

FAILURE = 1
ACCEPTANCE_FAILED = 2
CONFIGURATION_ERROR = 3
USAGE = 64


class LabCommand(BaseCommand):
    """
    Base for every rcm-lab command.

    Subclasses implement add_command_arguments and run; library errors are
    turned into CommandError with the exit status of their kind.
    """

    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Flat TOML experiment config")
        parser.add_argument("--seed", type=int, help="Master seed (overrides the config)")
        parser.add_argument("--out", help="Output directory")
        parser.add_argument("--format", choices=["csv", "json"], help="Result file format")
        parser.add_argument("--threads", type=int, help="Worker threads")
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def load_config(self, options) -> ExperimentConfig:
        config = ExperimentConfig()
        if options.get("config"):
            config = ExperimentConfig.from_toml(options["config"])
        return config.with_overrides(
            master_seed=options.get("seed"),
            format=options.get("format"),
            threads=options.get("threads"),
        )

    def handle(self, *args, **options):
        try:
            config = self.load_config(options)
            self.run(config, options)
        except ConfigurationError as e:
            raise CommandError(str(e), returncode=CONFIGURATION_ERROR) from e
        except LabError as e:
            raise CommandError(f"{type(e).__name__}: {e}", returncode=FAILURE) from e

    def run(self, config: ExperimentConfig, options: dict):
        raise NotImplementedError

    def execute_pipeline(self, command: str, fn, config: ExperimentConfig, options: dict):
        result, paths = run_experiment(command, fn, config, options.get("out"), config.threads)
        for path in paths:
            self.stdout.write(f"Wrote {path}")
        for key, value in result.estimates.items():
            self.stdout.write(f"  {key}: {value}")
        for note in result.notes:
            self.stdout.write(self.style.WARNING(f"  note: {note}"))
        if result.passed is False:
            raise CommandError(
                f"{command}: acceptance criteria not met", returncode=ACCEPTANCE_FAILED
            )
        if result.passed:
            self.stdout.write(self.style.SUCCESS(f"{command}: passed"))
        else:
            self.stdout.write(self.style.SUCCESS(f"{command}: done"))
        return result
