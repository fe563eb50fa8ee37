"""Define the factories of the scenario models."""

from typing import Any

from pydantic_factories import ModelFactory

from shrinklab.model import CommandKind, RandomTargets, Scenario, SolverOptions


class SolverOptionsFactory(ModelFactory[Any]):
    """Build solver options that keep the search small."""

    __model__ = SolverOptions

    budget = None
    workers = 1
    blocks = None
    stage1_blocks = None
    reproducible = True


class RandomTargetsFactory(ModelFactory[Any]):
    """Build random target specifications."""

    __model__ = RandomTargets

    count = 2


class ScenarioFactory(ModelFactory[Any]):
    """Build an ore scenario on S4; override fields for other commands."""

    __model__ = Scenario

    command = CommandKind.ORE
    group = "S4"
    permutations = None
    p = None
    d = None
    n = None
    nu = None
    nu_plus_1 = None
    k = None
    s = None
    r = None
    module = None
    coefficients = None
    character = None
    shrink = None
    targets = None
    solver = SolverOptions()
    suite = None
    generators = None
    max_weight = None
    out = None
