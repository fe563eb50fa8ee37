"""Test the configuration layer."""

from pathlib import Path
from textwrap import dedent

import pytest

from shrinklab.config import configure_shrinklab
from shrinklab.exceptions import ConfigError
from shrinklab.model import ShrinklabConfig


def test_defaults_are_the_documented_caps() -> None:
    """
    Given: Nothing
    When: ShrinklabConfig is built without overrides
    Then: the caps have their documented values
    """
    result = ShrinklabConfig()

    assert result.closure_cap == 10_000
    assert result.max_generators == 8
    assert result.max_layer_tensor == 4096
    assert result.exhaustive_limit == 2**22
    assert result.equivariant_search_limit == 2**20
    assert not result.reproducible


def test_reads_toml_file(tmp_path: Path) -> None:
    """
    Given: a shrinklab.toml file that lowers two caps
    When: configure_shrinklab is called with it
    Then: the config carries the new values and keeps the rest
    """
    config_file = tmp_path / "shrinklab.toml"
    config_file.write_text(
        dedent(
            """\
            max_weight = 3
            workers = 2
            """
        )
    )
    config = ShrinklabConfig()

    configure_shrinklab(config, [str(config_file)])  # act

    assert config.max_weight == 3
    assert config.workers == 2
    assert config.closure_cap == 10_000


def test_additional_config_wins_over_files(tmp_path: Path) -> None:
    """
    Given: a pyproject file and an environment style override for the same key
    When: configure_shrinklab merges them
    Then: the override is applied
    """
    (tmp_path / "pyproject.toml").write_text(
        "[tool.shrinklab]\nseed = 3\nworkers = 4\n"
    )
    config = ShrinklabConfig()

    configure_shrinklab(
        config, ["pyproject.toml"], {"config_path": str(tmp_path), "seed": "11"}
    )  # act

    assert config.seed == 11
    assert config.workers == 4


@pytest.mark.parametrize(
    ("line", "message"),
    [
        ("workers = 0", "workers must be at least 1"),
        ("max_layer_tensor = -3", "max_layer_tensor must be at least 1"),
        ("shift_range = 1", "shift_range must cover degrees -2..2"),
        ("max_escalations = -1", "max_escalations can't be negative"),
    ],
)
def test_rejects_caps_out_of_range(tmp_path: Path, line: str, message: str) -> None:
    """
    Given: a shrinklab.toml file with a cap outside its range
    When: configure_shrinklab loads it
    Then: ConfigError names the field and the config object is left untouched
    """
    config_file = tmp_path / "shrinklab.toml"
    config_file.write_text(line + "\n")
    config = ShrinklabConfig()

    with pytest.raises(ConfigError, match=message):
        configure_shrinklab(config, [str(config_file)])

    assert config == ShrinklabConfig()


def test_overrides_are_validated(tmp_path: Path) -> None:
    """
    Given: an environment style override that is not a number
    When: configure_shrinklab merges it
    Then: ConfigError is raised
    """
    (tmp_path / "pyproject.toml").write_text("[tool.shrinklab]\nseed = 3\n")
    config = ShrinklabConfig()

    with pytest.raises(ConfigError, match="workers"):
        configure_shrinklab(
            config, ["pyproject.toml"], {"config_path": str(tmp_path), "workers": "x"}
        )
