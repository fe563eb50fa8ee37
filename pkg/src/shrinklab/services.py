"""Define all the orchestration functionality required by the program to work.

Every cmd_* function takes a validated scenario, runs the matching library
operations and returns the report as an ordered mapping of plain values.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from shrinklab import suites
from shrinklab.adapters import parse_module, resolve_group, truncation_record
from shrinklab.cohom import (
    CohClass,
    CohGroup,
    DEGREES,
    duality_pairing,
    random_class,
    shift_is_bijective,
    tate,
)
from shrinklab.exceptions import ScenarioError, VerificationFailure
from shrinklab.fgroup import FiniteGroup, describe_tower, ore_tower
from shrinklab.gmod import FpGModule, trivial_module
from shrinklab.model import (
    CommandKind,
    RandomTargets,
    Scenario,
    ShrinkKind,
    ShrinklabConfig,
    SolverOptions,
)
from shrinklab.profree import build_truncation, witt_dim
from shrinklab.shrink import (
    BlockTensor,
    Prop7Session,
    ShrinkProblem,
    prop2_solve,
    prop6_annihilate,
    prop6_plan,
    prop7_annihilate,
    prop7_kernel_only,
    required_blocks,
    sub_block_classes,
)

log = logging.getLogger(__name__)

Report = Dict[str, Any]


def _need(value: Optional[Any], name: str) -> Any:  # noqa: ANN401
    if value is None:
        raise ScenarioError(f"The scenario does not define {name}")
    return value


def cmd_witt(scenario: Scenario) -> Report:
    """Tabulate W_D(1..max_weight)."""
    generators = _need(scenario.generators, "generators")
    max_weight = _need(scenario.max_weight, "max_weight")
    dims = [witt_dim(generators, weight) for weight in range(1, max_weight + 1)]
    log.info("Witt dimensions for %s generators: %s", generators, dims)
    return {
        "command": CommandKind.WITT.value,
        "generators": generators,
        "max_weight": max_weight,
        "dims": dims,
        "table": " ".join(str(dim) for dim in dims),
    }


def cmd_truncate(
    scenario: Scenario, config: Optional[ShrinklabConfig] = None
) -> Report:
    """Build 𝓕(d)/𝓕(d)^{(ν+1)} and dump it with its layer dimensions."""
    group = resolve_group(scenario, config)
    truncation = build_truncation(
        _need(scenario.p, "p"),
        _need(scenario.d, "d"),
        group,
        scenario.nu_plus_1_index,
        config,
    )
    log.info("Truncation of order %s", truncation.order)
    return {"command": CommandKind.TRUNCATE.value, **truncation_record(truncation)}


def cmd_cohomology(
    scenario: Scenario, config: Optional[ShrinklabConfig] = None
) -> Report:
    """Compute dim Ĥ^k for k in -2..2 and cross-check them by dimension shifting."""
    group = resolve_group(scenario, config)
    p = _need(scenario.p, "p")
    module = parse_module(_need(scenario.module, "module"), group, p, config)
    dims = {degree: tate(group, module, degree, config).dim for degree in DEGREES}
    shifts = {
        degree: shift_is_bijective(group, module, degree, config) for degree in DEGREES
    }
    pairing = duality_pairing(group, module, scenario.character, config)
    if not all(shifts.values()):
        failing = [degree for degree, verdict in shifts.items() if not verdict]
        raise VerificationFailure(f"Dimension shifting disagrees in degrees {failing}")
    return {
        "command": CommandKind.COHOMOLOGY.value,
        "group": group.name,
        "p": p,
        "module": module.name,
        "dim": module.dim,
        "dims": dims,
        "line": " ".join(str(dims[degree]) for degree in DEGREES),
        "dim_shift": "agrees",
        "duality": "nondegenerate" if pairing.is_nondegenerate() else "degenerate",
    }


def _classes(
    cohomology: CohGroup, targets: Any, rng: np.random.Generator  # noqa: ANN401
) -> List[CohClass]:
    if isinstance(targets, RandomTargets):
        return [random_class(cohomology, rng) for _ in range(targets.count)]
    return [cohomology.element(coords) for coords in targets]


def _target_count(targets: Any) -> int:  # noqa: ANN401
    return targets.count if isinstance(targets, RandomTargets) else len(targets)


def _target_rng(targets: Any, seed: int) -> np.random.Generator:  # noqa: ANN401
    return np.random.default_rng(
        targets.seed if isinstance(targets, RandomTargets) else seed
    )


def _sub_blocks(blocks: int, required: int) -> Optional[int]:
    """Return how many leading blocks random targets use below the bound."""
    return blocks - 1 if 2 <= blocks < required else None


def _solver(
    scenario: Scenario, seed: Optional[int], reproducible: bool
) -> SolverOptions:
    options = scenario.solver
    update: Dict[str, Any] = {}
    if seed is not None:
        update["seed"] = seed
    if reproducible:
        update["reproducible"] = True
    return options.copy(update=update) if update else options


def _shrink_prop2(
    scenario: Scenario,
    group: FiniteGroup,
    options: SolverOptions,
    config: Optional[ShrinklabConfig],
) -> Report:
    p = _need(scenario.p, "p")
    module = parse_module(_need(scenario.module, "module"), group, p, config)
    normal = parse_module(scenario.coefficients or "trivial", group, p, config)
    s, r = _need(scenario.s, "s"), _need(scenario.r, "r")
    targets = _need(scenario.targets, "targets")
    if isinstance(targets, RandomTargets):
        rng = np.random.default_rng(targets.seed)
        used = _sub_blocks(r, required_blocks(s, targets.count, module.dim, normal.dim))
        tensors = [
            BlockTensor.random(rng, p, r, s, module.dim, normal.dim, used)
            for _ in range(targets.count)
        ]
    else:
        tensors = [
            BlockTensor.from_dense(np.array(vector), p, r, s, module.dim, normal.dim)
            for vector in targets
        ]
    problem = ShrinkProblem(p, group, module, normal, s, r, tuple(tensors))
    certificate = prop2_solve(problem, options, config)
    return {
        "bound": problem.bound,
        "guaranteed": problem.guaranteed,
        **certificate.as_record(),
    }


def _coefficients(
    scenario: Scenario, group: FiniteGroup, p: int, config: Optional[ShrinklabConfig]
) -> FpGModule:
    if scenario.module is None:
        return trivial_module(group, p)
    return parse_module(scenario.module, group, p, config)


def _shrink_prop6(
    scenario: Scenario,
    group: FiniteGroup,
    options: SolverOptions,
    config: Optional[ShrinklabConfig],
) -> Report:
    p = _need(scenario.p, "p")
    targets = _need(scenario.targets, "targets")
    plan = prop6_plan(
        group,
        p,
        _need(scenario.n, "n"),
        scenario.nu_index,
        _need(scenario.k, "k"),
        _coefficients(scenario, group, p, config),
        _target_count(targets),
        options.blocks,
        config,
    )
    rng = _target_rng(targets, options.seed)
    if isinstance(targets, RandomTargets) and _sub_blocks(plan.blocks, plan.required):
        classes = sub_block_classes(plan, targets.count, rng, config)
    else:
        classes = _classes(plan.source, targets, rng)
    return prop6_annihilate(plan, classes, options, config).as_record()


def _stage2_provider(
    targets: Any, session: Prop7Session, seed: int  # noqa: ANN401
) -> Any:  # noqa: ANN401
    rng = np.random.default_rng(seed + 1)
    count = _target_count(targets) if isinstance(targets, RandomTargets) else 0
    used = _sub_blocks(session.blocks, session.required)

    def provide(level: int) -> Sequence[BlockTensor]:
        log.debug("Drawing %s stage 2 tensors at level %s", count, level)
        return [
            BlockTensor.random(
                rng,
                session.p,
                session.blocks,
                session.nu.j + 1,
                session.group.order * session.n,
                session.coefficients.dim,
                used,
            )
            for _ in range(count)
        ]

    return provide


def _shrink_prop7(
    scenario: Scenario,
    group: FiniteGroup,
    options: SolverOptions,
    config: Optional[ShrinklabConfig],
) -> Report:
    p = _need(scenario.p, "p")
    targets = _need(scenario.targets, "targets")
    stage2_count = _target_count(targets) if isinstance(targets, RandomTargets) else 0
    session = Prop7Session(
        group,
        p,
        _need(scenario.n, "n"),
        scenario.nu_index,
        _coefficients(scenario, group, p, config),
        _target_count(targets),
        stage2_count,
        options,
        config,
    )
    rng = _target_rng(targets, options.seed)
    plan = session.plan
    if isinstance(targets, RandomTargets) and _sub_blocks(plan.blocks, plan.required):
        classes = sub_block_classes(plan, targets.count, rng, config)
    else:
        classes = _classes(session.stage1_group, targets, rng)
    seed = targets.seed if isinstance(targets, RandomTargets) else options.seed
    report = prop7_annihilate(
        session, classes, _stage2_provider(targets, session, seed)
    )
    return report.as_record()


def _shrink_prop7_kernel(
    scenario: Scenario,
    group: FiniteGroup,
    options: SolverOptions,
    config: Optional[ShrinklabConfig],
) -> Report:
    p = _need(scenario.p, "p")
    n = _need(scenario.n, "n")
    nu = scenario.nu_index
    targets = _need(scenario.targets, "targets")
    coefficients = _coefficients(scenario, group, p, config)
    width = group.order * n

    def provide(level: int) -> Sequence[BlockTensor]:
        blocks = level // n
        if isinstance(targets, RandomTargets):
            rng = np.random.default_rng(targets.seed)
            required = required_blocks(nu.j + 1, targets.count, width, coefficients.dim)
            used = _sub_blocks(blocks, required)
            return [
                BlockTensor.random(
                    rng, p, blocks, nu.j + 1, width, coefficients.dim, used
                )
                for _ in range(targets.count)
            ]
        return [
            BlockTensor.from_dense(
                np.array(vector), p, blocks, nu.j + 1, width, coefficients.dim
            )
            for vector in targets
        ]

    report = prop7_kernel_only(
        group, p, n, nu, coefficients, _target_count(targets), provide, options, config
    )
    return report.as_record()


_SHRINKERS = {
    ShrinkKind.PROP2: _shrink_prop2,
    ShrinkKind.PROP6: _shrink_prop6,
    ShrinkKind.PROP7: _shrink_prop7,
    ShrinkKind.PROP7_KERNEL: _shrink_prop7_kernel,
}


def cmd_shrink(
    scenario: Scenario,
    config: Optional[ShrinklabConfig] = None,
    seed: Optional[int] = None,
    reproducible: bool = False,
) -> Report:
    """Run the shrinking solver the scenario names and return its certificate."""
    group = resolve_group(scenario, config)
    kind = _need(scenario.shrink, "shrink")
    options = _solver(scenario, seed, reproducible)
    log.info("Running the %s shrinking solver over %s", kind.value, group.name)
    record = _SHRINKERS[kind](scenario, group, options, config)
    return {"command": CommandKind.SHRINK.value, "shrink": kind.value, **record}


def cmd_ore(scenario: Scenario, config: Optional[ShrinklabConfig] = None) -> Report:
    """List the Ore tower of a solvable group."""
    group = resolve_group(scenario, config)
    tower = ore_tower(group, config)
    steps = [
        {
            "group": step.group.order,
            "kernel": step.kernel.order,
            "actor": step.actor.order,
        }
        for step in tower
    ]
    return {
        "command": CommandKind.ORE.value,
        "group": group.name,
        "tower": describe_tower(tower),
        "steps": steps,
    }


def cmd_verify(
    scenario: Scenario,
    config: Optional[ShrinklabConfig] = None,
    seed: Optional[int] = None,
) -> Report:
    """Run a verification suite and return its counters."""
    name = _need(scenario.suite, "suite")
    config = config if config is not None else ShrinklabConfig()
    result = suites.run_suite(name, config, seed if seed is not None else config.seed)
    return {"command": CommandKind.VERIFY.value, **result.as_record()}


def run_scenario(
    scenario: Scenario,
    config: Optional[ShrinklabConfig] = None,
    seed: Optional[int] = None,
    reproducible: bool = False,
) -> Report:
    """Dispatch a scenario to its command."""
    command = scenario.command
    if command == CommandKind.WITT:
        return cmd_witt(scenario)
    if command == CommandKind.TRUNCATE:
        return cmd_truncate(scenario, config)
    if command == CommandKind.COHOMOLOGY:
        return cmd_cohomology(scenario, config)
    if command == CommandKind.SHRINK:
        return cmd_shrink(scenario, config, seed, reproducible)
    if command == CommandKind.ORE:
        return cmd_ore(scenario, config)
    return cmd_verify(scenario, config, seed)
