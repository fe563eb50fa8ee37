"""Command line interface definition."""

import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click

from shrinklab import services, version
from shrinklab.adapters import dump_report, load_scenario
from shrinklab.config import configure_shrinklab
from shrinklab.entrypoints import load_logger
from shrinklab.exceptions import ConfigError, ScenarioError, ShrinklabError
from shrinklab.model import CommandKind, ShrinklabConfig

log = logging.getLogger(__name__)


@click.group()
@click.version_option(version="", message=version.version_info())
@click.option("--verbose", "-v", help="Enable verbose logging.", count=True)
@click.option(
    "--config-file",
    "-c",
    multiple=True,
    type=str,
    help="Path to a custom configuration file.",
)
@click.option(
    "--env-prefix",
    type=str,
    default="SHRINKLAB",
    help="Read shrinklab relevant environment variables starting with this prefix.",
)
@click.pass_context
def cli(
    ctx: click.Context,
    verbose: int,
    config_file: Optional[List[str]],
    env_prefix: str,
) -> None:
    """Shrink free pro-p operator groups and check the theory behind it."""
    load_logger(verbose)
    config = ShrinklabConfig()
    try:
        configure_shrinklab(
            config, config_file, _parse_env_vars_as_shrinklab_config(env_prefix.lower())
        )
    except ConfigError as error:
        raise click.UsageError(str(error)) from error
    ctx.obj = config


def _scenario_options(function: Callable[..., Any]) -> Callable[..., Any]:
    """Add the options every sub-command shares."""
    options = [
        click.option(
            "--scenario",
            "-s",
            "scenario_path",
            required=True,
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="YAML or JSON scenario to run.",
        ),
        click.option(
            "--out",
            "-o",
            type=click.Path(dir_okay=False, path_type=Path),
            default=None,
            help="Write the report here instead of stdout.",
        ),
        click.option(
            "--seed", type=int, default=None, help="Override the solver seed."
        ),
        click.option(
            "--reproducible",
            is_flag=True,
            help="Make the solver deterministic so reports are byte-identical.",
        ),
    ]
    for option in reversed(options):
        function = option(function)
    return function


def _run(
    config: ShrinklabConfig,
    command: CommandKind,
    scenario_path: Path,
    out: Optional[Path],
    seed: Optional[int],
    reproducible: bool,
) -> None:
    try:
        scenario = load_scenario(scenario_path)
    except ScenarioError as error:
        raise click.UsageError(str(error)) from error
    if scenario.command != command:
        raise click.UsageError(
            f"{scenario_path} is a {scenario.command.value} scenario, "
            f"not {command.value}"
        )
    if reproducible:
        config.reproducible = True
    log.info("Running the %s scenario %s", command.value, scenario_path)
    try:
        record = services.run_scenario(scenario, config, seed, reproducible)
    except ScenarioError as error:
        raise click.UsageError(str(error)) from error
    except ShrinklabError as error:
        log.error("%s: %s", error.__class__.__name__, error)
        sys.exit(1)

    text = dump_report(record)
    target = out or (Path(scenario.out) if scenario.out else None)
    if target is None:
        click.echo(text, nl=False)
    else:
        target.write_text(text, encoding="utf-8")
        log.info("Report written to %s", target)

    if record.get("passed") is False:
        log.error("First failing check: %s", record.get("first_failure"))
        sys.exit(1)


def _subcommand(command: CommandKind, help_text: str) -> None:
    @cli.command(name=command.value, help=help_text)
    @_scenario_options
    @click.pass_obj
    def run(  # pylint: disable=too-many-arguments
        config: ShrinklabConfig,
        scenario_path: Path,
        out: Optional[Path],
        seed: Optional[int],
        reproducible: bool,
    ) -> None:
        _run(config, command, scenario_path, out, seed, reproducible)


_subcommand(CommandKind.WITT, "Tabulate the Witt dimensions of the free Lie algebra.")
_subcommand(CommandKind.TRUNCATE, "Dump a truncated free pro-p operator group.")
_subcommand(
    CommandKind.COHOMOLOGY, "Compute Tate cohomology dimensions in degrees -2..2."
)
_subcommand(
    CommandKind.SHRINK, "Find a surjection killing the given classes or tensors."
)
_subcommand(CommandKind.ORE, "List the Ore tower of a solvable group.")
_subcommand(CommandKind.VERIFY, "Run a verification suite and report its counters.")


def _parse_env_vars_as_shrinklab_config(env_prefix: str) -> Dict[str, str]:
    prefix_length = len(env_prefix) + 1  # prefix with underscore / delimiter (+1)
    additional_config: Dict[str, str] = {}

    for env_key, env_val in os.environ.items():
        sanitized_key = env_key.lower()

        if sanitized_key.startswith(env_prefix) and len(sanitized_key) > prefix_length:
            additional_config[sanitized_key[prefix_length:]] = env_val

    return additional_config


if __name__ == "__main__":  # pragma: no cover
    cli()  # pylint: disable=E1120
