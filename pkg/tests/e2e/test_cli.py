"""Test the command line interface."""

import logging
import re
from pathlib import Path
from textwrap import dedent

import pytest
from _pytest.logging import LogCaptureFixture
from click.testing import CliRunner

from shrinklab.entrypoints.cli import cli
from shrinklab.version import __version__


@pytest.fixture(name="runner")
def fixture_runner() -> CliRunner:
    """Configure the Click cli test runner."""
    return CliRunner(mix_stderr=False)


def _write(tmp_path: Path, name: str, text: str) -> Path:
    scenario_file = tmp_path / name
    scenario_file.write_text(dedent(text))
    return scenario_file


@pytest.fixture(name="witt_file")
def fixture_witt_file(tmp_path: Path) -> Path:
    """Write a witt scenario."""
    return _write(
        tmp_path,
        "witt.yaml",
        """\
        command: witt
        generators: 2
        max_weight: 5
        """,
    )


@pytest.fixture(name="truncate_file")
def fixture_truncate_file(tmp_path: Path) -> Path:
    """Write a truncate scenario for the free pro-2 C2-operator group."""
    return _write(
        tmp_path,
        "truncate.yaml",
        """\
        command: truncate
        group: C2
        p: 2
        d: 1
        nu_plus_1: "(3,1)"
        """,
    )


def test_version(runner: CliRunner) -> None:
    """Prints program version when called with --version."""
    result = runner.invoke(cli, ["--version"])

    assert result.exit_code == 0
    assert re.search(
        rf" *shrinklab: {__version__}\n *Python: .*\n *numpy: .*\n *Platform: .*",
        result.stdout,
    )


def test_witt_prints_the_report(runner: CliRunner, witt_file: Path) -> None:
    """Tabulates the Witt dimensions on stdout."""
    result = runner.invoke(cli, ["witt", "--scenario", str(witt_file)])

    assert result.exit_code == 0
    assert "table: 2 1 2 3 6\n" in result.stdout


def test_out_option_writes_the_report(
    runner: CliRunner, witt_file: Path, tmp_path: Path
) -> None:
    """Writes the report to --out instead of stdout."""
    out = tmp_path / "report.yaml"

    result = runner.invoke(cli, ["witt", "-s", str(witt_file), "-o", str(out)])

    assert result.exit_code == 0
    assert result.stdout == ""
    assert out.read_text().startswith("command: witt\n")


def test_scenario_out_field(runner: CliRunner, tmp_path: Path) -> None:
    """Writes the report where the scenario says when --out is missing."""
    out = tmp_path / "ore.yaml"
    scenario_file = _write(
        tmp_path,
        "ore_scenario.yaml",
        f"""\
        command: ore
        group: S4
        out: {out}
        """,
    )

    result = runner.invoke(cli, ["ore", "-s", str(scenario_file)])

    assert result.exit_code == 0
    assert "tower: V4 ⋊ S3 ; C3 ⋊ C2 ; C2\n" in out.read_text(encoding="utf-8")


def test_cohomology(runner: CliRunner, tmp_path: Path) -> None:
    """Prints the Tate dimensions of C2 with trivial F_2 coefficients."""
    scenario_file = _write(
        tmp_path,
        "cohomology.yaml",
        """\
        command: cohomology
        group: C2
        p: 2
        module: trivial
        """,
    )

    result = runner.invoke(cli, ["cohomology", "-s", str(scenario_file)])

    assert result.exit_code == 0
    assert "line: 1 1 1 1 1\n" in result.stdout
    assert "duality: nondegenerate\n" in result.stdout


def test_truncate(runner: CliRunner, truncate_file: Path) -> None:
    """Dumps the truncated group."""
    result = runner.invoke(cli, ["truncate", "-s", str(truncate_file)])

    assert result.exit_code == 0
    assert "order: 32\n" in result.stdout


def test_reproducible_shrink_is_byte_identical(
    runner: CliRunner, tmp_path: Path
) -> None:
    """Two reproducible runs of one shrink scenario print the same bytes."""
    scenario_file = _write(
        tmp_path,
        "shrink.yaml",
        """\
        command: shrink
        group: "1"
        p: 3
        shrink: prop2
        module: trivial
        s: 2
        r: 3
        targets: random(5, 2)
        """,
    )
    args = ["shrink", "-s", str(scenario_file), "--seed", "3", "--reproducible"]

    first = runner.invoke(cli, args)
    second = runner.invoke(cli, args)

    assert first.exit_code == 0
    assert "verdicts: [zero, zero]\n" in first.stdout
    assert first.stdout_bytes == second.stdout_bytes


def test_verify_runs_a_suite(runner: CliRunner, tmp_path: Path) -> None:
    """Runs the shapiro suite and reports its named statement."""
    scenario_file = _write(
        tmp_path, "verify.yaml", "command: verify\nsuite: shapiro\n"
    )

    result = runner.invoke(cli, ["verify", "-s", str(scenario_file)])

    assert result.exit_code == 0
    assert "passed: true\n" in result.stdout
    assert "Shapiro: induced coefficients" in result.stdout


@pytest.mark.parametrize(
    ("command", "text"),
    [
        ("ore", "command: witt\ngenerators: 2\nmax_weight: 3\n"),
        ("witt", "command: witt\ngenerators: 2\n"),
        ("witt", "command: witt\ngenerators: 2\nmax_weight: 3\nsize: 4\n"),
        ("verify", "command: verify\nsuite: astrology\n"),
    ],
)
def test_usage_errors(
    runner: CliRunner, tmp_path: Path, command: str, text: str
) -> None:
    """Exits with 2 on mismatched, incomplete or unknown scenario contents."""
    scenario_file = _write(tmp_path, "bad.yaml", text)

    result = runner.invoke(cli, [command, "-s", str(scenario_file)])

    assert result.exit_code == 2


def test_missing_scenario_file(runner: CliRunner, tmp_path: Path) -> None:
    """Exits with 2 when the scenario does not exist."""
    result = runner.invoke(cli, ["witt", "-s", str(tmp_path / "missing.yaml")])

    assert result.exit_code == 2


def test_library_errors_exit_with_one(
    runner: CliRunner, tmp_path: Path, caplog: LogCaptureFixture
) -> None:
    """Logs the error and exits with 1 when the group is not solvable."""
    scenario_file = _write(tmp_path, "a5.yaml", "command: ore\ngroup: A5\n")

    result = runner.invoke(cli, ["ore", "-s", str(scenario_file)])

    assert result.exit_code == 1
    assert any(
        name == "shrinklab.entrypoints.cli"
        and level == logging.ERROR
        and message.startswith("NotSolvable")
        for name, level, message in caplog.record_tuples
    )


def test_config_file_caps(
    runner: CliRunner, tmp_path: Path, truncate_file: Path
) -> None:
    """Applies the caps of a configuration file."""
    config_file = tmp_path / "shrinklab.toml"
    config_file.write_text("max_generators = 1\n")

    result = runner.invoke(
        cli, ["--config-file", str(config_file), "truncate", "-s", str(truncate_file)]
    )

    assert result.exit_code == 1


def test_read_prefixed_environment_variables(
    runner: CliRunner, truncate_file: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    """Make sure environment variables are parsed into the config object."""
    monkeypatch.setenv("SHRINKLAB_TEST_MAX_WEIGHT", "2")

    result = runner.invoke(
        cli, ["--env-prefix", "SHRINKLAB_TEST", "truncate", "-s", str(truncate_file)]
    )

    assert result.exit_code == 1


@pytest.mark.secondary()
@pytest.mark.parametrize("verbose", [0, 1, 2])
def test_verbose_option(runner: CliRunner, truncate_file: Path, verbose: int) -> None:
    """Prints debug level logs only when called with -vv."""
    # Clear logging handlers for logs to work with CliRunner
    # For more info see https://github.com/pallets/click/issues/1053)
    logging.getLogger().handlers = []
    args = ["-v"] * verbose + ["truncate", "-s", str(truncate_file)]

    result = runner.invoke(cli, args)

    debug_log_format = "[\033[37m+\033[0m]"
    info_log_format = "[\033[36m+\033[0m]"
    assert result.exit_code == 0
    assert f"{info_log_format} Running the truncate scenario" in result.stderr
    assert (debug_log_format in result.stderr) == (verbose == 2)


def test_config_file_out_of_range(
    runner: CliRunner, tmp_path: Path, truncate_file: Path
) -> None:
    """Rejects a configuration file whose cap is below one as a usage error."""
    config_file = tmp_path / "shrinklab.toml"
    config_file.write_text("max_layer_tensor = 0\n")

    result = runner.invoke(
        cli, ["--config-file", str(config_file), "truncate", "-s", str(truncate_file)]
    )

    assert result.exit_code == 2
    assert "max_layer_tensor must be at least 1" in result.stderr
