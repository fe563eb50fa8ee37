"""Define program entities like configuration and scenario entities."""

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

from maison.schema import ConfigSchema
from pydantic import BaseModel, Extra, root_validator, validator
from pydantic.fields import ModelField

from shrinklab.exceptions import ScenarioError

_INDEX_RE = re.compile(r"^\s*\(?\s*(\d+)\s*,\s*(\d+)\s*\)?\s*$")
_RANDOM_RE = re.compile(r"^\s*random\(\s*(-?\d+)\s*,\s*(\d+)\s*\)\s*$")

_POSITIVE_CAPS = (
    "closure_cap",
    "subgroup_order_cap",
    "associativity_full_check_order",
    "associativity_samples",
    "module_entry_cap",
    "cochain_entry_cap",
    "max_weight",
    "max_generators",
    "max_layer_tensor",
    "operator_rank_cap",
    "exhaustive_limit",
    "random_budget",
    "equivariant_search_limit",
    "workers",
)


@dataclass(frozen=True, order=True)
class FilterIndex:
    """Index ν = (i, j) of the refined p-central filtration, ordered lexicographically.

    Requires i ≥ j ≥ 1.
    """

    i: int
    j: int

    def __post_init__(self) -> None:
        """Reject pairs outside the i ≥ j ≥ 1 convention."""
        if not 1 <= self.j <= self.i:
            raise ValueError(
                f"Invalid filtration index ({self.i},{self.j}): need i >= j >= 1"
            )

    def succ(self) -> "FilterIndex":
        """Return ν + 1: (i, j + 1) if i > j, (i + 1, 1) if i = j."""
        if self.i > self.j:
            return FilterIndex(self.i, self.j + 1)
        return FilterIndex(self.i + 1, 1)

    @classmethod
    def parse(
        cls, text: Union[str, "FilterIndex", Tuple[int, int], List[int]]
    ) -> "FilterIndex":
        """Build an index from "(i,j)", "i,j" or a pair."""
        if isinstance(text, FilterIndex):
            return text
        if isinstance(text, (tuple, list)):
            return cls(int(text[0]), int(text[1]))
        match = _INDEX_RE.match(str(text))
        if match is None:
            raise ScenarioError(
                f"Can't parse filtration index {text!r}, expected '(i,j)'"
            )
        return cls(int(match.group(1)), int(match.group(2)))

    def __str__(self) -> str:
        """Render as (i,j)."""
        return f"({self.i},{self.j})"


class ShrinklabConfig(ConfigSchema):
    """Configuration entity for shrinklab: computational caps and solver defaults."""

    closure_cap: int = 10_000
    subgroup_order_cap: int = 200
    associativity_full_check_order: int = 256
    associativity_samples: int = 2_000
    module_entry_cap: int = 10_000_000
    cochain_entry_cap: int = 10_000_000
    shift_range: int = 4
    max_weight: int = 4
    max_generators: int = 8
    max_layer_tensor: int = 4096
    operator_rank_cap: int = 100_000
    exhaustive_limit: int = 2**22
    random_budget: int = 1_000_000
    max_escalations: int = 6
    equivariant_search_limit: int = 2**20
    workers: int = 1
    seed: int = 0
    reproducible: bool = False
    config_path: Optional[str] = None

    @validator(*_POSITIVE_CAPS)
    def _check_positive(cls, value: int, field: ModelField) -> int:  # noqa: N805
        if value < 1:
            raise ValueError(f"{field.name} must be at least 1, got {value}")
        return value

    @validator("shift_range")
    def _check_shift_range(cls, value: int) -> int:  # noqa: N805
        if value < 2:
            raise ValueError(f"shift_range must cover degrees -2..2, got {value}")
        return value

    @validator("max_escalations")
    def _check_escalations(cls, value: int) -> int:  # noqa: N805
        if value < 0:
            raise ValueError(f"max_escalations can't be negative, got {value}")
        return value


class CommandKind(str, Enum):
    """Sub-commands a scenario can drive."""

    WITT = "witt"
    TRUNCATE = "truncate"
    COHOMOLOGY = "cohomology"
    SHRINK = "shrink"
    ORE = "ore"
    VERIFY = "verify"


class ShrinkKind(str, Enum):
    """Which shrinking solver a shrink scenario runs."""

    PROP2 = "prop2"
    PROP6 = "prop6"
    PROP7 = "prop7"
    PROP7_KERNEL = "prop7_kernel"


class StrictModel(BaseModel):
    """Base for scenario records: unknown keys are rejected."""

    class Config:
        """Forbid keys the schema does not know."""

        extra = Extra.forbid


class PermutationSpec(StrictModel):
    """A group given by permutation generators in cycle notation."""

    degree: int
    generators: List[str] = []


class RandomTargets(StrictModel):
    """Targets drawn at random from one seed."""

    seed: int
    count: int


class SolverOptions(StrictModel):
    """Solver knobs of a shrink scenario."""

    budget: Optional[int] = None
    seed: int = 0
    reproducible: bool = False
    workers: int = 1
    blocks: Optional[int] = None
    stage1_blocks: Optional[int] = None


TargetSpec = Union[RandomTargets, List[List[int]]]

_REQUIRED: Dict[CommandKind, Tuple[str, ...]] = {
    CommandKind.WITT: ("generators", "max_weight"),
    CommandKind.TRUNCATE: ("p", "d", "nu_plus_1"),
    CommandKind.COHOMOLOGY: ("p", "module"),
    CommandKind.SHRINK: ("p", "shrink"),
    CommandKind.ORE: (),
    CommandKind.VERIFY: ("suite",),
}

_NEEDS_GROUP = (
    CommandKind.TRUNCATE,
    CommandKind.COHOMOLOGY,
    CommandKind.SHRINK,
    CommandKind.ORE,
)

_REQUIRED_SHRINK: Dict[ShrinkKind, Tuple[str, ...]] = {
    ShrinkKind.PROP2: ("module", "s", "r", "targets"),
    ShrinkKind.PROP6: ("n", "nu", "k", "targets"),
    ShrinkKind.PROP7: ("n", "nu", "targets"),
    ShrinkKind.PROP7_KERNEL: ("n", "nu", "targets"),
}


class Scenario(StrictModel):
    """One fully specified job for the command line."""

    command: CommandKind
    group: Optional[str] = None
    permutations: Optional[PermutationSpec] = None
    p: Optional[int] = None
    d: Optional[int] = None
    n: Optional[int] = None
    nu: Optional[str] = None
    nu_plus_1: Optional[str] = None
    k: Optional[int] = None
    s: Optional[int] = None
    r: Optional[int] = None
    module: Optional[str] = None
    coefficients: Optional[str] = None
    character: Optional[List[int]] = None
    shrink: Optional[ShrinkKind] = None
    targets: Optional[TargetSpec] = None
    solver: SolverOptions = SolverOptions()
    suite: Optional[str] = None
    generators: Optional[int] = None
    max_weight: Optional[int] = None
    out: Optional[str] = None

    @validator("nu", "nu_plus_1", pre=True)
    def _parse_index(cls, value: Any) -> Optional[str]:  # noqa: ANN401, N805
        if value is None:
            return None
        try:
            return str(FilterIndex.parse(value))
        except (ScenarioError, ValueError) as error:
            raise ValueError(str(error)) from error

    @validator("targets", pre=True)
    def _parse_targets(cls, value: Any) -> Any:  # noqa: ANN401, N805
        if isinstance(value, str):
            match = _RANDOM_RE.match(value)
            if match is None:
                raise ValueError(
                    f"Can't parse targets {value!r}, expected 'random(seed, count)'"
                )
            return {"seed": int(match.group(1)), "count": int(match.group(2))}
        return value

    @root_validator(skip_on_failure=True)
    def _check_required(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        command = values["command"]
        required = list(_REQUIRED[command])
        if command in _NEEDS_GROUP:
            if values.get("group") is None and values.get("permutations") is None:
                raise ValueError(
                    f"Scenario '{command.value}' needs a group or permutations"
                )
        if command == CommandKind.SHRINK and values.get("shrink") is not None:
            required.extend(_REQUIRED_SHRINK[values["shrink"]])
        missing = [name for name in required if values.get(name) is None]
        if missing:
            raise ValueError(
                f"Scenario '{command.value}' is missing explicit values for: "
                f"{', '.join(missing)}"
            )
        return values

    @property
    def nu_index(self) -> FilterIndex:
        """Return ν as a FilterIndex."""
        return FilterIndex.parse(_required(self.nu, "nu"))

    @property
    def nu_plus_1_index(self) -> FilterIndex:
        """Return ν + 1 as a FilterIndex."""
        return FilterIndex.parse(_required(self.nu_plus_1, "nu_plus_1"))


def _required(value: Optional[str], name: str) -> str:
    if value is None:
        raise ScenarioError(f"The scenario does not define {name}")
    return value
