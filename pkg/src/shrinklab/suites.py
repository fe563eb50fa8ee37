"""Define the verification suites run by the verify command.

Every suite checks one statement of the theory on small instances from the
built-in corpus and counts the checks it ran and those that failed. A check
that raises a library error counts as a failure labelled with the error.
"""

import logging
from dataclasses import dataclass, field
from itertools import product
from math import comb
from typing import Callable, Dict, Iterator, List, Optional, Tuple, TypeVar

import numpy as np

from shrinklab.adapters import builtin_corpus, corpus_group
from shrinklab.cohom import (
    DEGREES,
    duality_pairing,
    five_term_maps,
    random_class,
    shift_is_bijective,
    tate_dims,
)
from shrinklab.exceptions import ScenarioError, ShrinklabError
from shrinklab.fgroup import (
    FiniteGroup,
    Subgroup,
    all_subgroups,
    conjugation_action,
    describe_tower,
    fitting,
    frattini,
    is_solvable,
    ore_tower,
    proper_supplement,
)
from shrinklab.gmod import (
    FpGModule,
    augmentation_ideal,
    induced_trivial,
    regular_module,
    shift_coefficients,
    trivial_module,
)
from shrinklab.model import FilterIndex, ShrinklabConfig, SolverOptions
from shrinklab.profree import (
    HallBasis,
    LieLayer,
    TruncatedFreeGroup,
    check_consistency,
    psi_nu_matrix,
    weight_modulus,
    witt_dim,
)
from shrinklab.shrink import (
    BlockTensor,
    Prop7Session,
    ShrinkProblem,
    killing_surjection_exists,
    prop2_solve,
    prop6_annihilate,
    prop6_plan,
    prop7_annihilate,
    prop7_kernel_only,
    required_blocks,
    sub_block_classes,
)

log = logging.getLogger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class SuiteBudget:
    """Sample counts of the randomized suites."""

    collection_samples: int = 1000
    congruence_samples: int = 500
    membership_samples: int = 200
    prop2_problems: int = 100
    prop6_groups: Tuple[str, ...] = ("1", "C2", "C3", "C4", "V4")
    prop7_instances: int = 20


@dataclass
class SuiteResult:
    """Counters of one suite run.

    Attributes:
        name: Suite name as given to the verify command.
        statement: The statement the suite checks.
        checks: Number of checks run.
        failures: Labels of the failing checks, in order.
        parts: Results of the suites an aggregate run is made of.
    """

    name: str
    statement: str
    checks: int = 0
    failures: List[str] = field(default_factory=list)
    parts: List["SuiteResult"] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """Tell whether no check failed."""
        return not self.failures

    def check(self, condition: bool, label: str) -> bool:
        """Count a check and remember its label when it fails."""
        self.checks += 1
        if not condition:
            log.error("Suite %s: check %s failed", self.name, label)
            self.failures.append(label)
        return condition

    def attempt(self, label: str, run: Callable[[], T]) -> Optional[T]:
        """Count a check that passes when run() returns without a library error."""
        try:
            value = run()
        except ShrinklabError as error:
            self.check(False, f"{label}: {error.__class__.__name__}: {error}")
            return None
        self.check(True, label)
        return value

    def absorb(self, part: "SuiteResult") -> None:
        """Add the counters of a sub-suite."""
        self.parts.append(part)
        self.checks += part.checks
        self.failures.extend(f"{part.name}: {failure}" for failure in part.failures)

    def as_record(self) -> Dict[str, object]:
        """Return the report fields in their stable order."""
        record: Dict[str, object] = {
            "suite": self.name,
            "statement": self.statement,
            "passed": self.passed,
            "checks": self.checks,
            "failures": len(self.failures),
            "first_failure": self.failures[0] if self.failures else None,
        }
        if self.parts:
            record["suites"] = [part.as_record() for part in self.parts]
        return record


@dataclass(frozen=True)
class SuiteContext:
    """What every suite receives: caps, the random stream and the sample counts."""

    config: ShrinklabConfig
    rng: np.random.Generator
    seed: int
    budget: SuiteBudget


SuiteFunction = Callable[[SuiteResult, SuiteContext], None]

_TOPS = (FilterIndex(2, 2), FilterIndex(3, 1), FilterIndex(4, 1))
_WITT_TOPS = (
    FilterIndex(2, 1),
    FilterIndex(2, 2),
    FilterIndex(3, 1),
    FilterIndex(3, 2),
    FilterIndex(3, 3),
    FilterIndex(4, 1),
)
_WITT_GROUPS = ("1", "C2", "C3", "C4", "V4", "C6", "S3")


def _truncation_grid(context: SuiteContext) -> Iterator[TruncatedFreeGroup]:
    """Yield the truncations over 1, C2 and C3 with p ∈ {2, 3} and D ≤ 6."""
    for name in ("1", "C2", "C3"):
        group = corpus_group(name, config=context.config)
        for p, top in product((2, 3), _TOPS):
            for d in range(1, 6 // group.order + 1):
                yield TruncatedFreeGroup(p, d, group, top, context.config)


def _witt_grid(context: SuiteContext) -> Iterator[TruncatedFreeGroup]:
    """Yield every truncation with p ∈ {2, 3}, D ≤ 6 and ν+1 ≤ (4,1)."""
    for name in _WITT_GROUPS:
        group = corpus_group(name, config=context.config)
        for p, top in product((2, 3), _WITT_TOPS):
            for d in range(1, 6 // group.order + 1):
                yield TruncatedFreeGroup(p, d, group, top, context.config)


def _label(truncation: TruncatedFreeGroup) -> str:
    t = truncation
    return f"p={t.p} D={t.generators} {t.group.name} {t.nu_plus_1}"


def _suite_witt(result: SuiteResult, context: SuiteContext) -> None:
    for generators, weight in product(range(1, 5), range(1, 5)):
        basis = HallBasis(generators, weight)
        result.check(
            len(basis.of_weight(weight)) == witt_dim(generators, weight),
            f"Hall count D={generators} w={weight}",
        )
    for truncation in _witt_grid(context):
        for index in truncation.layer_indices():
            dim = truncation.layer_module(index).dim
            result.check(
                dim == witt_dim(truncation.generators, index.j),
                f"layer {index} of {_label(truncation)} has dimension {dim}",
            )


def _suite_collection(result: SuiteResult, context: SuiteContext) -> None:
    samples = context.budget.collection_samples
    for truncation in _truncation_grid(context):
        result.attempt(
            f"associativity of {_label(truncation)}",
            lambda: check_consistency(truncation, context.rng, samples),
        )


def _congruence_cases(top: FilterIndex) -> List[Tuple[int, int, int]]:
    """Return every (i, j, r) whose first congruence lands inside the truncation."""
    orders = range(1, top.i + 1)
    return [
        (i, j, r)
        for i, j, r in product(orders, orders, range(top.i + 1))
        if FilterIndex(i + j + max(1, r), 1) <= top
    ]


def _exponent(p: int, r: int, rng: np.random.Generator) -> int:
    units = [unit for unit in range(1, 2 * p + 1) if unit % p]
    return p**r * units[int(rng.integers(0, len(units)))]


def _congruences(
    result: SuiteResult,
    truncation: TruncatedFreeGroup,
    rng: np.random.Generator,
    samples: int,
) -> None:
    t = truncation
    top = t.nu_plus_1
    cases = _congruence_cases(top)
    for _ in range(samples if cases else 0):
        i, j, r = cases[int(rng.integers(0, len(cases)))]
        a = _exponent(t.p, r, rng)
        x = t.random_member(FilterIndex(i, 1), rng)
        y = t.random_member(FilterIndex(j, 1), rng)
        label = f"{_label(t)} i={i} j={j} a={a}"
        commutator_term = t.power(t.commutator(y, x), comb(a, 2))
        power_rule = t.power(x, a) * t.power(y, a) * commutator_term
        result.check(
            t.filtration_member(
                t.inverse(power_rule) * t.power(x * y, a),
                FilterIndex(i + j + max(1, r), 1),
            ),
            f"(xy)^a at {label}",
        )
        index = FilterIndex(i + j + 1 + max(1, r), 1)
        if index > top:
            continue
        xy = t.commutator(x, y)
        left_rule = t.power(xy, a) * t.power(t.commutator(xy, x), comb(a, 2))
        right_rule = t.power(xy, a) * t.power(t.commutator(xy, y), comb(a, 2))
        result.check(
            t.filtration_member(
                t.inverse(left_rule) * t.commutator(t.power(x, a), y), index
            ),
            f"(x^a, y) at {label}",
        )
        result.check(
            t.filtration_member(
                t.inverse(right_rule) * t.commutator(x, t.power(y, a)), index
            ),
            f"(x, y^a) at {label}",
        )


def _all_indices(top: FilterIndex) -> List[FilterIndex]:
    indices = [FilterIndex(1, 1)]
    while indices[-1] < top:
        indices.append(indices[-1].succ())
    return indices


def _membership(
    result: SuiteResult,
    truncation: TruncatedFreeGroup,
    rng: np.random.Generator,
    samples: int,
) -> None:
    t = truncation
    indices = _all_indices(t.nu_plus_1)
    for _ in range(samples):
        index = indices[int(rng.integers(0, len(indices)))]
        generators = [
            t.power(t.basic(element.index), weight_modulus(t.p, index, element.weight))
            for element in t.hall
        ]
        word = t.identity()
        for _ in range(6):
            chosen = generators[int(rng.integers(0, len(generators)))]
            word = word * t.power(chosen, int(rng.integers(-t.p, t.p + 1)))
        result.check(
            t.filtration_member(word, index), f"{_label(t)} generated member of {index}"
        )
        member = t.random_member(index, rng)
        rebuilt = t.identity()
        for element, generator in zip(t.hall, generators):
            step = weight_modulus(t.p, index, element.weight)
            rebuilt = rebuilt * t.power(
                generator, member.exponents[element.index] // step
            )
        result.check(rebuilt == member, f"{_label(t)} round trip in {index}")


_LEMMA4_GRID = (
    (2, "1", 2, FilterIndex(3, 1)),
    (2, "1", 2, FilterIndex(4, 1)),
    (3, "1", 2, FilterIndex(4, 1)),
    (2, "1", 3, FilterIndex(4, 1)),
    (3, "1", 3, FilterIndex(3, 1)),
    (2, "C2", 2, FilterIndex(4, 1)),
)


def _lemma4_grid(context: SuiteContext) -> Iterator[TruncatedFreeGroup]:
    for p, name, d, top in _LEMMA4_GRID:
        group = corpus_group(name, config=context.config)
        yield TruncatedFreeGroup(p, d, group, top, context.config)


def _suite_congruences(result: SuiteResult, context: SuiteContext) -> None:
    samples = context.budget.congruence_samples
    for truncation in _lemma4_grid(context):
        _congruences(result, truncation, context.rng, samples)


def _suite_refinement(result: SuiteResult, context: SuiteContext) -> None:
    samples = context.budget.membership_samples
    for truncation in _lemma4_grid(context):
        _membership(result, truncation, context.rng, samples)


def _suite_prop5(result: SuiteResult, context: SuiteContext) -> None:
    for truncation in _truncation_grid(context):
        for index in truncation.layer_indices():
            theta = result.attempt(
                f"θ at {index} of {_label(truncation)}",
                lambda: psi_nu_matrix(truncation, index),
            )
            if theta is not None:
                result.check(
                    theta.is_surjective(),
                    f"θ at {index} of {_label(truncation)} is onto",
                )
            layer = result.attempt(
                f"Lie layer at {index} of {_label(truncation)}",
                lambda: LieLayer(
                    truncation.p,
                    truncation.d,
                    truncation.group,
                    index,
                    context.config,
                ),
            )
            if theta is not None and layer is not None:
                result.check(
                    np.array_equal(layer.theta.matrix, theta.matrix)
                    and np.array_equal(
                        layer.module.rho, truncation.layer_module(index).rho
                    ),
                    f"Lie layer at {index} of {_label(truncation)} matches collection",
                )


def _small_groups(context: SuiteContext, limit: int) -> Iterator[FiniteGroup]:
    for name in builtin_corpus():
        group = corpus_group(name, config=context.config)
        if group.order <= limit:
            yield group


def _standard_modules(
    group: FiniteGroup, p: int, config: ShrinklabConfig
) -> List[FpGModule]:
    return [
        trivial_module(group, p),
        augmentation_ideal(group, p, config),
        regular_module(group, p, config),
    ]


def _suite_tate(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    for group in _small_groups(context, 8):
        cyclic = any(
            group.element_order(element) == group.order
            for element in range(group.order)
        )
        for p in (2, 3):
            free = tate_dims(group, regular_module(group, p, config), config=config)
            result.check(
                not any(free.values()), f"free coefficients over {group.name} p={p}"
            )
            for module in _standard_modules(group, p, config):
                label = f"{module.name} over {group.name} p={p}"
                if cyclic:
                    dims = tate_dims(group, module, config=config)
                    result.check(
                        dims[-2] == dims[0] == dims[2] and dims[-1] == dims[1],
                        f"periodicity of {label}",
                    )
                for degree in DEGREES:
                    if degree == 2 and group.order > 6:
                        continue
                    result.check(
                        shift_is_bijective(group, module, degree, config),
                        f"dimension shift of {label} from degree {degree}",
                    )


_SHAPIRO_PAIRS = (("S3", 2), ("S3", 3), ("C4", 2))


def _subgroup_of_order(
    group: FiniteGroup, order: int, config: ShrinklabConfig
) -> Subgroup:
    return next(sub for sub in all_subgroups(group, config) if sub.order == order)


def _suite_shapiro(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    for name, order in _SHAPIRO_PAIRS:
        group = corpus_group(name, config=config)
        subgroup = _subgroup_of_order(group, order, config)
        for p in (2, 3):
            induced = tate_dims(
                group, induced_trivial(subgroup, p, config), config=config
            )
            small = subgroup.as_group
            restricted = tate_dims(small, trivial_module(small, p), config=config)
            result.check(
                induced == restricted, f"Ind from order {order} to {name} p={p}"
            )


def _suite_duality(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    for group in _small_groups(context, 8):
        for p in (2, 3):
            for module in _standard_modules(group, p, config):
                result.attempt(
                    f"pairing of {module.name} over {group.name} p={p}",
                    lambda: duality_pairing(group, module, config=config),
                )


def _complements(
    group: FiniteGroup, config: ShrinklabConfig
) -> Iterator[Tuple[Subgroup, Subgroup]]:
    """Yield the pairs (N, U) with N normal, N ∩ U = 1 and N·U = G."""
    subgroups = all_subgroups(group, config)
    for normal in subgroups:
        if not normal.is_normal():
            continue
        for actor in subgroups:
            complementary = normal.order * actor.order == group.order
            if complementary and normal.intersection(actor).is_trivial:
                yield normal, actor


def _suite_five_term(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    for group in _small_groups(context, 16):
        for normal, actor in _complements(group, config):
            quotient, acting = normal.as_group, actor.as_group
            action = conjugation_action(normal, actor)
            for p in (2, 3):
                if group.order % p:
                    continue
                result.attempt(
                    f"{group.name} as {quotient.order} ⋊ {acting.order} p={p}",
                    lambda: five_term_maps(
                        quotient, acting, action, trivial_module(acting, p), config
                    ),
                )


def _suite_prop2(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    group = corpus_group("1", config=config)
    for p, s in product((2, 3, 5), (1, 2)):
        dim_m = 2 if s == 1 else 1
        module, normal = trivial_module(group, p, dim_m), trivial_module(group, p)
        r = required_blocks(s, 1, dim_m, 1)
        for number in range(context.budget.prop2_problems):
            tensors = (BlockTensor.random(context.rng, p, r, s, dim_m, 1),)
            problem = ShrinkProblem(p, group, module, normal, s, r, tensors)
            options = SolverOptions(seed=context.seed + number, reproducible=True)
            label = f"p={p} s={s} r={r} problem {number}"
            certificate = result.attempt(
                label, lambda: prop2_solve(problem, options, config)
            )
            if certificate is not None:
                result.check(certificate.is_valid(), f"certificate of {label}")


_PROP6_INDICES = (FilterIndex(2, 2), FilterIndex(3, 1))


def _bound_fits(
    group: FiniteGroup,
    nu: FilterIndex,
    coefficients: FpGModule,
    k: int,
    count: int,
    config: ShrinklabConfig,
) -> bool:
    """Tell whether the layer at the level chosen by the bound stays under the caps."""
    shifted = shift_coefficients(coefficients, k, config)
    blocks = required_blocks(nu.j, count, group.order, shifted.dim)
    return (group.order * blocks) ** nu.j <= config.max_layer_tensor


def _suite_prop6(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    options = SolverOptions(seed=context.seed, reproducible=True)
    for name in context.budget.prop6_groups:
        group = corpus_group(name, config=config)
        grid = product((2, 3), _PROP6_INDICES, (-2, -1, 2), (1, 2))
        for p, nu, k, count in grid:
            label = f"{name} p={p} ν={nu} k={k} t={count}"
            coefficients = trivial_module(group, p)
            at_bound = _bound_fits(group, nu, coefficients, k, count, config)
            blocks = None if at_bound else 2
            plan = result.attempt(
                f"plan for {label}",
                lambda: prop6_plan(
                    group, p, 1, nu, k, coefficients, count, blocks, config
                ),
            )
            if plan is None:
                continue
            targets = [random_class(plan.source, context.rng) for _ in range(count)]
            if plan.below_bound and not killing_surjection_exists(
                plan, targets, config
            ):
                log.debug("No killing surjection exists for %s", label)
                continue
            report = result.attempt(
                f"killing {label} with m={plan.m}",
                lambda: prop6_annihilate(plan, targets, options, config),
            )
            if report is not None and not plan.below_bound:
                result.check(
                    not report.fallback,
                    f"solver alone at the bound for {label}, used {report.strategy}",
                )
            elif report is not None and report.fallback:
                log.info("Equivariant search was needed below the bound for %s", label)


def _prop7_session(
    context: SuiteContext, number: int
) -> Tuple[Prop7Session, SolverOptions]:
    config = context.config
    group = corpus_group("C2", config=config)
    options = SolverOptions(
        seed=context.seed + number, reproducible=True, blocks=2, stage1_blocks=2
    )
    session = Prop7Session(
        group, 2, 1, FilterIndex(2, 2), trivial_module(group, 2), 1, 1, options, config
    )
    return session, options


def _stage2_tensors(
    rng: np.random.Generator, session: Prop7Session, level: int
) -> List[BlockTensor]:
    blocks = level // session.n
    width = session.group.order * session.n
    return [
        BlockTensor.random(
            rng,
            session.p,
            blocks,
            session.nu.j + 1,
            width,
            session.coefficients.dim,
            blocks - 1,
        )
    ]


def _suite_prop7(result: SuiteResult, context: SuiteContext) -> None:
    for number in range(context.budget.prop7_instances):
        session, options = _prop7_session(context, number)
        rng = np.random.default_rng(context.seed + number)
        label = f"C2 p=2 ν=(2,2) instance {number}"
        result.attempt(
            f"two stages of {label}",
            lambda: prop7_annihilate(
                session,
                sub_block_classes(session.plan, 1, rng, context.config),
                lambda level: _stage2_tensors(rng, session, level),
            ),
        )
        result.attempt(
            f"kernel only {label}",
            lambda: prop7_kernel_only(
                session.group,
                session.p,
                session.n,
                session.nu,
                session.coefficients,
                1,
                lambda level: _stage2_tensors(rng, session, level),
                options,
                context.config,
            ),
        )


def _solvable_groups(context: SuiteContext) -> Iterator[FiniteGroup]:
    for group in _small_groups(context, 48):
        if group.order > 1 and is_solvable(group):
            yield group


def _suite_frattini(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    for group in _solvable_groups(context):
        phi, fit = frattini(group, config), fitting(group, config)
        result.check(phi < fit, f"Φ ⊊ F for {group.name}")


def _suite_supplements(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    for group in _solvable_groups(context):
        phi = frattini(group, config)
        for normal in all_subgroups(group, config):
            if not normal.is_normal() or normal <= phi:
                continue
            supplement = result.attempt(
                f"supplement of order {normal.order} normal in {group.name}",
                lambda: proper_supplement(group, normal, config),
            )
            if supplement is not None:
                result.check(
                    not supplement.is_whole
                    and normal.set_product_size(supplement) == group.order,
                    f"N·U = G for order {normal.order} normal in {group.name}",
                )


def _suite_ore(result: SuiteResult, context: SuiteContext) -> None:
    config = context.config
    for group in _solvable_groups(context):
        result.attempt(f"Ore tower of {group.name}", lambda: ore_tower(group, config))
    tower = describe_tower(ore_tower(corpus_group("S4", config=config), config))
    result.check(tower == "V4 ⋊ S3 ; C3 ⋊ C2 ; C2", f"Ore tower of S4 is {tower}")



SUITES: Dict[str, Tuple[str, SuiteFunction]] = {
    "witt": ("Witt dimensions: layer dimensions follow Witt's formula", _suite_witt),
    "collection": (
        "Collection: multiplication in the truncated free groups is associative",
        _suite_collection,
    ),
    "lemma4-i": (
        "Lemma 4(i): power and commutator congruences hold in the p-central series",
        _suite_congruences,
    ),
    "lemma4-ii": (
        "Lemma 4(ii): each refined term is generated by powers of basic commutators",
        _suite_refinement,
    ),
    "prop5": (
        "Prop 5: iterated brackets map (P/P²)^⊗j onto every layer",
        _suite_prop5,
    ),
    "prop2": (
        "Prop 2: above the Chevalley-Warning bound a surjection kills the targets",
        _suite_prop2,
    ),
    "tate": (
        "Tate cohomology: periodic for cyclic groups, zero on free modules and "
        "shifted bijectively in dimension",
        _suite_tate,
    ),
    "shapiro": (
        "Shapiro: induced coefficients compute the cohomology of the subgroup",
        _suite_shapiro,
    ),
    "duality": (
        "Duality: cohomology of the dual pairs perfectly with homology",
        _suite_duality,
    ),
    "five-term": (
        "Five-term sequence: low degree homology of a semidirect product is exact",
        _suite_five_term,
    ),
    "prop6": (
        "Prop 6: classes of a layer are killed by a surjection of operator groups",
        _suite_prop6,
    ),
    "prop7": (
        "Prop 7: H₁ classes of the truncated semidirect product die in two stages",
        _suite_prop7,
    ),
    "prop16": ("Prop 16: Φ(G) ⊊ F(G) for solvable G ≠ 1", _suite_frattini),
    "prop17": (
        "Prop 17: a normal subgroup outside Φ(G) has a proper supplement",
        _suite_supplements,
    ),
    "ore": (
        "Ore recursion: solvable groups reduce to towers of semidirect products",
        _suite_ore,
    ),
}


def run_suite(
    name: str,
    config: Optional[ShrinklabConfig] = None,
    seed: int = 0,
    budget: Optional[SuiteBudget] = None,
) -> SuiteResult:
    """Run one suite by name, or every suite in order for "all".

    Raises:
        ScenarioError: if the suite name is unknown.
    """
    config = config if config is not None else ShrinklabConfig()
    budget = budget if budget is not None else SuiteBudget()
    if name == "all":
        total = SuiteResult("all", "Every statement checked by the verify command")
        for part in SUITES:
            total.absorb(run_suite(part, config, seed, budget))
        return total
    if name not in SUITES:
        raise ScenarioError(f"Unknown suite {name!r}, known: all, {', '.join(SUITES)}")
    statement, function = SUITES[name]
    context = SuiteContext(config, np.random.default_rng(seed), seed, budget)
    result = SuiteResult(name, statement)
    log.info("Running the %s suite", name)
    function(result, context)
    log.info(
        "Suite %s ran %s checks, %s failed", name, result.checks, len(result.failures)
    )
    return result
