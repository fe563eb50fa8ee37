"""Shrinking solvers.

prop2_solve picks a ∈ F_p^r with ψ_a = φ_a^{⊗s} ⊗ id killing given tensors of
(⊕_r M)^{⊗s} ⊗ N. prop6_annihilate and Prop7Session turn that into surjections
𝓕(m) ↠ 𝓕(n) of free operator groups that kill Tate classes of the layers.
"""

import hashlib
import logging
from dataclasses import dataclass
from functools import reduce
from itertools import product
from multiprocessing import Pool
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from shrinklab.cohom import (
    CohClass,
    CohGroup,
    apply_module_hom,
    dim_shift,
    random_class,
    tate,
)
from shrinklab.exceptions import (
    DimensionMismatch,
    GroupMismatch,
    InternalVerifyFail,
    NotFound,
    ParentMismatch,
    SolverBudgetExhausted,
    StageOrderViolation,
    SurjectivityFailure,
    VerifyFail,
)
from shrinklab.fgroup import FiniteGroup
from shrinklab.gmod import (
    FpGModule,
    ModuleHom,
    direct_sum,
    hom_space,
    shift_coefficients,
    tensor_module,
)
from shrinklab.linalg import as_fp, kernel, rank, solve
from shrinklab.model import FilterIndex, ShrinklabConfig, SolverOptions
from shrinklab.profree import (
    LieLayer,
    OperatorHom,
    TruncatedFreeGroup,
    block_inclusion,
    letter_module,
    lift_operator_hom,
)

log = logging.getLogger(__name__)

BlockKey = Tuple[int, ...]

_BATCH = 4096
EQUIVARIANT_SEARCH = "equivariant-search"


def _config(config: Optional[ShrinklabConfig]) -> ShrinklabConfig:
    return config if config is not None else ShrinklabConfig()


def chevalley_bound(s: int, targets: int, dim_m: int, dim_n: int) -> int:
    """Return s·n with n = t·dim(M^{⊗s} ⊗ N): equations times degree."""
    return s * targets * dim_m**s * dim_n


def required_blocks(s: int, targets: int, dim_m: int, dim_n: int) -> int:
    """Return the smallest r that Chevalley-Warning guarantees to be solvable."""
    return chevalley_bound(s, targets, dim_m, dim_n) + 1


@dataclass(frozen=True, eq=False)
class BlockTensor:
    """Element of (⊕_r M)^{⊗s} ⊗ N stored block by block.

    blocks[(b₁, …, b_s)] is the component in M_{b₁} ⊗ … ⊗ M_{b_s} ⊗ N, a vector
    of length dim(M)^s·dim(N) in row-major order. Zero components are dropped.
    """

    p: int
    r: int
    s: int
    dim_m: int
    dim_n: int
    blocks: Dict[BlockKey, np.ndarray]

    def __post_init__(self) -> None:
        """Reduce the components and check their keys and lengths."""
        reduced = {}
        for key, component in sorted(self.blocks.items()):
            key = tuple(int(block) for block in key)
            if len(key) != self.s or any(not 0 <= block < self.r for block in key):
                raise DimensionMismatch(
                    f"Block key {key} does not fit r={self.r}, s={self.s}"
                )
            vector = as_fp(component, self.p).reshape(-1)
            if vector.shape[0] != self.component_dim:
                raise DimensionMismatch(
                    f"Component {key} has length {vector.shape[0]}, "
                    f"expected {self.component_dim}"
                )
            if np.any(vector):
                reduced[key] = vector
        object.__setattr__(self, "blocks", reduced)

    @property
    def component_dim(self) -> int:
        """Return dim(M^{⊗s} ⊗ N)."""
        return int(self.dim_m**self.s * self.dim_n)

    @property
    def dense_dim(self) -> int:
        """Return dim((⊕_r M)^{⊗s} ⊗ N)."""
        return int((self.r * self.dim_m) ** self.s * self.dim_n)

    @classmethod
    def zero(cls, p: int, r: int, s: int, dim_m: int, dim_n: int) -> "BlockTensor":
        """Return the zero tensor."""
        return cls(p, r, s, dim_m, dim_n, {})

    @classmethod
    def from_dense(
        cls, vector: np.ndarray, p: int, r: int, s: int, dim_m: int, dim_n: int
    ) -> "BlockTensor":
        """Split a row-major vector of (⊕_r M)^{⊗s} ⊗ N into its block components."""
        array = as_fp(vector, p).reshape((r, dim_m) * s + (dim_n,))
        axes = [2 * position for position in range(s)]
        axes += [2 * position + 1 for position in range(s)] + [2 * s]
        array = array.transpose(axes).reshape((r,) * s + (-1,))
        blocks = {
            key: array[key] for key in product(range(r), repeat=s) if np.any(array[key])
        }
        return cls(p, r, s, dim_m, dim_n, blocks)

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        p: int,
        r: int,
        s: int,
        dim_m: int,
        dim_n: int,
        blocks: Optional[int] = None,
    ) -> "BlockTensor":
        """Draw a uniform tensor supported on the first blocks (all r by default)."""
        used = r if blocks is None else min(blocks, r)
        width = dim_m**s * dim_n
        components = {
            key: rng.integers(0, p, size=width, dtype=np.int64)
            for key in product(range(used), repeat=s)
        }
        return cls(p, r, s, dim_m, dim_n, components)

    def to_dense(self) -> np.ndarray:
        """Return the row-major vector of (⊕_r M)^{⊗s} ⊗ N."""
        shape = (self.r,) * self.s + (self.dim_m,) * self.s + (self.dim_n,)
        array = np.zeros(shape, dtype=np.int64)
        for key, component in self.blocks.items():
            array[key] = component.reshape(shape[self.s :])
        axes: List[int] = []
        for position in range(self.s):
            axes.extend([position, self.s + position])
        return array.transpose(axes + [2 * self.s]).reshape(-1)

    def is_zero(self) -> bool:
        """Tell whether every component vanishes."""
        return not self.blocks

    def support(self) -> Set[int]:
        """Return the blocks some component touches."""
        return {block for key in self.blocks for block in key}

    def evaluate(self, a: Sequence[int]) -> np.ndarray:
        """Return ψ_a(z) = Σ a_{b₁}⋯a_{b_s}·z_{b₁…b_s} in M^{⊗s} ⊗ N."""
        if len(a) != self.r:
            raise DimensionMismatch(f"Need {self.r} coefficients, got {len(a)}")
        total = np.zeros(self.component_dim, dtype=np.int64)
        for key, component in self.blocks.items():
            coefficient = 1
            for block in key:
                coefficient = coefficient * int(a[block]) % self.p
            if coefficient:
                total = (total + coefficient * component) % self.p
        return total

    def padded(self, extra: int = 1) -> "BlockTensor":
        """Return the same tensor inside (⊕_{r+extra} M)^{⊗s} ⊗ N."""
        return BlockTensor(
            self.p, self.r + extra, self.s, self.dim_m, self.dim_n, self.blocks
        )

    def canonical_text(self) -> str:
        """Return a stable text rendering of the coordinates."""
        parts = [f"p={self.p};r={self.r};s={self.s};m={self.dim_m};n={self.dim_n}"]
        for key, component in self.blocks.items():
            parts.append(
                ",".join(str(block) for block in key)
                + ":"
                + "".join(str(int(value)) + " " for value in component).strip()
            )
        return "\n".join(parts)

    def digest(self) -> str:
        """Return the SHA-256 of the canonical text."""
        return hashlib.sha256(self.canonical_text().encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class ShrinkProblem:
    """Targets z₁, …, z_t ∈ (⊕_r M)^{⊗s} ⊗ N to be killed by one ψ_a."""

    p: int
    group: FiniteGroup
    m: FpGModule
    n: FpGModule
    s: int
    r: int
    targets: Tuple[BlockTensor, ...]

    def __post_init__(self) -> None:
        """Check modules and targets against the parameters."""
        if self.r < 1:
            raise DimensionMismatch("A shrink problem needs r ≥ 1")
        for module in (self.m, self.n):
            if module.group is not self.group or module.p != self.p:
                raise GroupMismatch(
                    f"{module!r} is not an F_{self.p}-module over {self.group!r}"
                )
        object.__setattr__(self, "targets", tuple(self.targets))
        for target in self.targets:
            if (target.p, target.r, target.s, target.dim_m, target.dim_n) != (
                self.p,
                self.r,
                self.s,
                self.m.dim,
                self.n.dim,
            ):
                raise DimensionMismatch("Target does not live in (⊕_r M)^{⊗s} ⊗ N")

    @property
    def bound(self) -> int:
        """Return the Chevalley-Warning bound s·n."""
        return chevalley_bound(self.s, len(self.targets), self.m.dim, self.n.dim)

    @property
    def guaranteed(self) -> bool:
        """Tell whether r > s·n, so a solution must exist."""
        return self.r > self.bound

    def padded(self, extra: int = 1) -> "ShrinkProblem":
        """Return the problem at rank r + extra with zero blocks appended."""
        return ShrinkProblem(
            self.p,
            self.group,
            self.m,
            self.n,
            self.s,
            self.r + extra,
            tuple(target.padded(extra) for target in self.targets),
        )


@dataclass(frozen=True)
class PolynomialSystem:
    """The equations ψ_a(z_i) = 0 as monomials in a₁, …, a_r.

    monomials[k] lists the variables of the k-th monomial in ascending order and
    coefficients[k] its coefficient in every equation.
    """

    p: int
    variables: int
    monomials: np.ndarray
    coefficients: np.ndarray

    @classmethod
    def from_targets(
        cls, p: int, r: int, s: int, targets: Sequence[BlockTensor]
    ) -> "PolynomialSystem":
        """Collect the block components of all targets by monomial."""
        width = targets[0].component_dim if targets else 0
        collected: Dict[BlockKey, np.ndarray] = {}
        for position, target in enumerate(targets):
            for key, component in target.blocks.items():
                monomial = tuple(sorted(key))
                row = collected.setdefault(
                    monomial, np.zeros(len(targets) * width, dtype=np.int64)
                )
                segment = slice(position * width, (position + 1) * width)
                row[segment] = (row[segment] + component) % p
        kept = {monomial: row for monomial, row in collected.items() if np.any(row)}
        monomials = np.array(sorted(kept), dtype=np.int64).reshape(len(kept), s)
        coefficients = np.array(
            [kept[monomial] for monomial in sorted(kept)], dtype=np.int64
        ).reshape(len(kept), len(targets) * width)
        return cls(p, r, monomials, coefficients)

    @property
    def is_zero(self) -> bool:
        """Tell whether no equation remains."""
        return self.monomials.shape[0] == 0

    @property
    def degree(self) -> int:
        """Return s."""
        return int(self.monomials.shape[1])

    def used_variables(self) -> Set[int]:
        """Return the variables occurring in some monomial."""
        return {int(variable) for variable in np.unique(self.monomials)}

    def linear_matrix(self) -> np.ndarray:
        """Return the (equations × r) matrix of a degree one system."""
        matrix = np.zeros((self.coefficients.shape[1], self.variables), dtype=np.int64)
        for monomial, row in zip(self.monomials[:, 0], self.coefficients):
            matrix[:, monomial] = (matrix[:, monomial] + row) % self.p
        return matrix

    def evaluate(self, candidates: np.ndarray) -> np.ndarray:
        """Return the equation values for a batch of candidates of shape (B, r)."""
        values = np.ones((candidates.shape[0], self.monomials.shape[0]), dtype=np.int64)
        for position in range(self.degree):
            values = values * candidates[:, self.monomials[:, position]] % self.p
        return values @ self.coefficients % self.p

    def first_solution(self, candidates: np.ndarray) -> Optional[np.ndarray]:
        """Return the first candidate of a batch solving every equation."""
        if candidates.shape[0] == 0:
            return None
        hits = np.flatnonzero(~np.any(self.evaluate(candidates), axis=1))
        return candidates[hits[0]] if hits.size else None

    def restrict(self, keep: int) -> "PolynomialSystem":
        """Set a_b = 0 for b ≥ keep."""
        rows = np.all(self.monomials < keep, axis=1)
        return PolynomialSystem(
            self.p, keep, self.monomials[rows], self.coefficients[rows]
        )


@dataclass(frozen=True, eq=False)
class ShrinkCertificate:
    """A nonzero a with φ_a and the recomputed images of every target."""

    p: int
    r: int
    a: Tuple[int, ...]
    strategy: str
    candidates: int
    target_hashes: Tuple[str, ...]
    verified: Tuple[np.ndarray, ...]
    phi: Optional[ModuleHom] = None

    @property
    def verdicts(self) -> Tuple[str, ...]:
        """Return "zero" or "nonzero" for every target image."""
        return tuple("nonzero" if np.any(image) else "zero" for image in self.verified)

    def is_valid(self) -> bool:
        """Tell whether a ≠ 0 and every image is exactly zero."""
        return any(self.a) and all(verdict == "zero" for verdict in self.verdicts)

    @property
    def used_blocks(self) -> int:
        """Return the number of leading blocks a actually touches."""
        return max(
            (index + 1 for index, value in enumerate(self.a) if value), default=0
        )

    def as_record(self) -> Dict[str, object]:
        """Return the fields in their stable report order."""
        return {
            "p": self.p,
            "r": self.r,
            "a": list(self.a),
            "used_blocks": self.used_blocks,
            "strategy": self.strategy,
            "candidates": self.candidates,
            "target_hashes": list(self.target_hashes),
            "verdicts": list(self.verdicts),
        }


@dataclass(frozen=True)
class _Search:
    budget: int
    seed: int
    workers: int
    exhaustive_limit: int
    max_escalations: int

    @classmethod
    def build(
        cls, options: Optional[SolverOptions], config: ShrinklabConfig
    ) -> "_Search":
        options = options if options is not None else SolverOptions(seed=config.seed)
        reproducible = options.reproducible or config.reproducible
        workers = 1 if reproducible else max(options.workers, config.workers, 1)
        budget = options.budget if options.budget is not None else config.random_budget
        return cls(
            budget,
            options.seed,
            workers,
            config.exhaustive_limit,
            config.max_escalations,
        )


def _unit(r: int, index: int = 0) -> np.ndarray:
    vector = np.zeros(r, dtype=np.int64)
    vector[index] = 1
    return vector


def _exhaustive(system: PolynomialSystem) -> Tuple[Optional[np.ndarray], int]:
    """Scan every nonzero a in the order of its base-p code, a₁ least significant."""
    total = system.p**system.variables
    powers = system.p ** np.arange(system.variables, dtype=np.int64)
    tried = 0
    for start in range(1, total, _BATCH):
        codes = np.arange(start, min(start + _BATCH, total), dtype=np.int64)
        candidates = codes[:, None] // powers[None, :] % system.p
        tried += candidates.shape[0]
        found = system.first_solution(candidates)
        if found is not None:
            return found, tried
    return None, tried


def _random_chunk(
    job: Tuple[PolynomialSystem, int, int]
) -> Tuple[Optional[np.ndarray], int]:
    system, seed, budget = job
    rng = np.random.default_rng(seed)
    tried = 0
    while tried < budget:
        size = min(_BATCH, budget - tried)
        candidates = rng.integers(
            0, system.p, size=(size, system.variables), dtype=np.int64
        )
        candidates = candidates[np.any(candidates, axis=1)]
        tried += size
        found = system.first_solution(candidates)
        if found is not None:
            return found, tried
    return None, tried


def _random(
    system: PolynomialSystem, budget: int, seed: int, workers: int
) -> Tuple[Optional[np.ndarray], int]:
    """Sample candidates, split over workers; the lowest worker with a hit wins."""
    seeds = [
        int(child.generate_state(1)[0])
        for child in np.random.SeedSequence(seed).spawn(workers)
    ]
    share = -(-budget // workers)
    jobs = [(system, child, share) for child in seeds]
    if workers == 1:
        results = [_random_chunk(jobs[0])]
    else:
        with Pool(workers) as pool:
            results = pool.map(_random_chunk, jobs)
    tried = sum(count for _, count in results)
    for found, _ in results:
        if found is not None:
            return found, tried
    return None, tried


def _solve_small_or_random(
    system: PolynomialSystem, search: _Search, budget: int, seed: int
) -> Tuple[Optional[np.ndarray], int]:
    if system.p**system.variables <= search.exhaustive_limit:
        return _exhaustive(system)
    return _random(system, budget, seed, search.workers)


def _ladder(
    problem: ShrinkProblem, system: PolynomialSystem, search: _Search
) -> Tuple[np.ndarray, str, int]:
    p, r = problem.p, problem.r
    if system.is_zero:
        return _unit(r), "trivial", 0
    if system.degree == 1:
        solutions = kernel(system.linear_matrix(), p)
        if solutions.shape[0] == 0:
            raise NotFound(
                f"The linear system in {r} unknowns has only the zero solution"
            )
        return solutions[0], "linear", 0
    unused = sorted(set(range(r)) - system.used_variables())
    if unused:
        return _unit(r, unused[0]), "support", 0
    if p**r <= search.exhaustive_limit:
        found, tried = _exhaustive(system)
        if found is None:
            if problem.guaranteed:
                raise InternalVerifyFail(
                    f"No solution in F_{p}^{r} although r > {problem.bound}"
                )
            raise NotFound(f"No nonzero a in F_{p}^{r} kills the targets")
        return found, "exhaustive", tried
    found, tried = _random(system, search.budget, search.seed, search.workers)
    if found is not None:
        return found, "random", tried
    keep = min(r, problem.bound + 1)
    if keep < r:
        log.debug("Fixing a_%s..a_%s to zero", keep + 1, r)
        found, more = _solve_small_or_random(
            system.restrict(keep), search, search.budget, search.seed + 1
        )
        tried += more
        if found is not None:
            padded = np.concatenate([found, np.zeros(r - keep, dtype=np.int64)])
            return padded, "greedy", tried
    if not problem.guaranteed:
        log.warning(
            "No solution found below the Chevalley-Warning bound r=%s ≤ %s",
            r,
            problem.bound,
        )
        raise NotFound(f"No solution found with r={r} ≤ s·n={problem.bound}")
    budget = search.budget
    for attempt in range(search.max_escalations):
        budget *= 2
        log.debug("Escalating the random search to %s candidates", budget)
        found, more = _random(system, budget, search.seed + 2 + attempt, search.workers)
        tried += more
        if found is not None:
            return found, "escalation", tried
    raise SolverBudgetExhausted(
        f"No solution after {tried} candidates although r > {problem.bound}"
    )


def phi_a(module: FpGModule, a: Sequence[int]) -> ModuleHom:
    """Return φ_a: ⊕_r M → M, (x_b) ↦ Σ a_b x_b."""
    row = np.asarray(list(a), dtype=np.int64).reshape(1, -1)
    return ModuleHom(
        direct_sum(module, row.shape[1]), module, np.kron(row, module.identity)
    )


def certify(
    problem: ShrinkProblem, a: Sequence[int], strategy: str, candidates: int
) -> ShrinkCertificate:
    """Recompute every ψ_a(z_i) block by block and package the result.

    Raises:
        InternalVerifyFail: if a = 0 or some image is not zero.
    """
    vector = tuple(int(value) % problem.p for value in a)
    if not any(vector):
        raise InternalVerifyFail("The solver returned a = 0")
    images = tuple(target.evaluate(vector) for target in problem.targets)
    certificate = ShrinkCertificate(
        p=problem.p,
        r=problem.r,
        a=vector,
        strategy=strategy,
        candidates=candidates,
        target_hashes=tuple(target.digest() for target in problem.targets),
        verified=images,
        phi=phi_a(problem.m, vector),
    )
    if not certificate.is_valid():
        raise InternalVerifyFail(f"a={list(vector)} leaves a target alive")
    return certificate


def prop2_solve(
    problem: ShrinkProblem,
    options: Optional[SolverOptions] = None,
    config: Optional[ShrinklabConfig] = None,
) -> ShrinkCertificate:
    """Find a nonzero a ∈ F_p^r with ψ_a(z_i) = 0 for every target.

    Strategies are tried in order: trivial, linear (s = 1), support (an unused
    block), exhaustive (p^r small), random, greedy (trailing a_b fixed to zero
    down to the bound) and escalation of the random budget.

    Raises:
        NotFound: if no solution is found and r ≤ s·n.
        SolverBudgetExhausted: if the escalated search fails above the bound.
        InternalVerifyFail: if the recomputation contradicts the solver.
    """
    search = _Search.build(options, _config(config))
    system = PolynomialSystem.from_targets(
        problem.p, problem.r, problem.s, problem.targets
    )
    a, strategy, tried = _ladder(problem, system, search)
    log.debug(
        "Solved r=%s s=%s t=%s by %s after %s candidates",
        problem.r,
        problem.s,
        len(problem.targets),
        strategy,
        tried,
    )
    return certify(problem, a, strategy, tried)


@dataclass(frozen=True, eq=False)
class Prop6Plan:
    """The level m = r·n chosen for killing t classes of Ĥ^k(G, 𝓔(m, ν) ⊗ T)."""

    group: FiniteGroup
    p: int
    n: int
    nu: FilterIndex
    k: int
    coefficients: FpGModule
    blocks: int
    required: int
    large: LieLayer
    small: LieLayer
    source: CohGroup
    target: CohGroup

    @property
    def m(self) -> int:
        """Return the operator rank of the large free group."""
        return self.blocks * self.n

    @property
    def below_bound(self) -> bool:
        """Tell whether fewer blocks than the Chevalley-Warning bound are used."""
        return self.blocks < self.required


def prop6_plan(
    group: FiniteGroup,
    p: int,
    n: int,
    nu: FilterIndex,
    k: int,
    coefficients: FpGModule,
    targets: int,
    blocks: Optional[int] = None,
    config: Optional[ShrinklabConfig] = None,
) -> Prop6Plan:
    """Choose r from the bound with M = 𝓕(n)/𝓕(n)², s = j and N = T ⊗ A_k.

    Only the layers 𝓔(m, ν) and 𝓔(n, ν) are built, so m may exceed the cap on
    full truncations. An explicit blocks count overrides the bound; the
    pipeline then falls back to searching all equivariant surjections when the
    solver finds nothing.
    """
    shifted = shift_coefficients(coefficients, k, config)
    required = required_blocks(nu.j, targets, group.order * n, shifted.dim)
    chosen = blocks if blocks is not None else required
    large = LieLayer(p, chosen * n, group, nu, config)
    small = LieLayer(p, n, group, nu, config)
    source = tate(group, tensor_module(large.module, coefficients, config), k, config)
    target = tate(group, tensor_module(small.module, coefficients, config), k, config)
    log.info(
        "Killing %s classes of H^%s at %s needs r=%s, using m=%s",
        targets,
        k,
        nu,
        required,
        chosen * n,
    )
    return Prop6Plan(
        group, p, n, nu, k, coefficients, chosen, required, large, small, source, target
    )


@dataclass(frozen=True, eq=False)
class Prop6Report:
    """A surjection 𝓕(m) ↠ 𝓕(n) and the evidence that it kills the targets."""

    plan: Prop6Plan
    strategy: str
    candidates: int
    psi_bar: ModuleHom
    psi_star: ModuleHom
    certificate: Optional[ShrinkCertificate]
    images: Tuple[CohClass, ...]

    @property
    def fallback(self) -> bool:
        """Tell whether the equivariant search, not the solver, found ψ̄."""
        return self.strategy == EQUIVARIANT_SEARCH

    def lift(self, config: Optional[ShrinklabConfig] = None) -> OperatorHom:
        """Extend ψ̄ to the truncations 𝓕(m)/𝓕(m)^{(ν+1)} ↠ 𝓕(n)/𝓕(n)^{(ν+1)}.

        Raises:
            CapExceeded: if the level m is too large to collect.
        """
        plan = self.plan
        large = TruncatedFreeGroup(plan.p, plan.m, plan.group, plan.nu.succ(), config)
        small = TruncatedFreeGroup(plan.p, plan.n, plan.group, plan.nu.succ(), config)
        psi_bar = ModuleHom(
            large.layer_module(FilterIndex(1, 1)),
            small.layer_module(FilterIndex(1, 1)),
            self.psi_bar.matrix,
        )
        return lift_operator_hom(psi_bar, large, small)

    def as_record(self) -> Dict[str, object]:
        """Return the report fields in a stable order."""
        record: Dict[str, object] = {
            "p": self.plan.p,
            "n": self.plan.n,
            "m": self.plan.m,
            "nu": str(self.plan.nu),
            "k": self.plan.k,
            "required_blocks": self.plan.required,
            "strategy": self.strategy,
            "below_bound": self.plan.below_bound,
            "candidates": self.candidates,
            "psi_bar": self.psi_bar.matrix.tolist(),
        }
        if self.certificate is not None:
            record["certificate"] = self.certificate.as_record()
        record["verdicts"] = [
            "zero" if image.is_zero() else "nonzero" for image in self.images
        ]
        return record


def _support_order(plan: Prop6Plan, columns: int, extra: int) -> np.ndarray:
    """Order tensor columns by the largest block they touch."""
    width = plan.group.order * plan.n
    letters = plan.large.generators
    indices = np.arange(columns) // extra
    largest = np.zeros(columns, dtype=np.int64)
    for _ in range(plan.nu.j):
        largest = np.maximum(largest, (indices % letters) // width)
        indices = indices // letters
    return np.argsort(largest, kind="stable")


def _lift_targets(plan: Prop6Plan, shifted: Sequence[CohClass]) -> List[np.ndarray]:
    """Find z with (θ_ν ⊗ id) z ≡ w modulo I_G·W for each shifted representative w.

    Boundary columns come first and tensor columns follow by block, so the
    pivots pick a z on as few leading blocks as the class allows.
    """
    if not shifted:
        return []
    theta = plan.large.theta.matrix
    extra = shifted[0].parent.module.dim // max(theta.shape[0], 1)
    full = np.kron(theta, np.eye(extra, dtype=np.int64))
    order = _support_order(plan, full.shape[1], extra)
    boundaries = shifted[0].parent.quotient.boundaries.T
    system = np.hstack([boundaries, full[:, order]])
    lifted = []
    for x in shifted:
        solution = solve(system, x.representative, plan.p)
        if solution is None:
            raise SurjectivityFailure(f"θ at {plan.nu} does not reach a shifted target")
        z = np.zeros(full.shape[1], dtype=np.int64)
        z[order] = solution[boundaries.shape[1] :]
        lifted.append(z)
    return lifted


def _killing_search(
    plan: Prop6Plan, lifted: Sequence[np.ndarray], extra: int, config: ShrinklabConfig
) -> Tuple[Optional[np.ndarray], int]:
    """Scan the equivariant surjections V_m → V_n killing the lifted targets."""
    target = plan.small.letters
    basis = hom_space(plan.large.letters, target)
    if plan.p ** len(basis) > config.equivariant_search_limit:
        log.warning("Hom space of dimension %s is too large to search", len(basis))
        return None, 0
    theta = np.kron(plan.small.theta.matrix, np.eye(extra, dtype=np.int64))
    shifted = tate(
        plan.group,
        shift_coefficients(
            tensor_module(plan.small.module, plan.coefficients),
            plan.k,
            config,
        ),
        -1,
        config,
    )
    tried = 0
    for coefficients in product(range(plan.p), repeat=len(basis)):
        if not any(coefficients):
            continue
        tried += 1
        candidate = np.mod(sum(c * b for c, b in zip(coefficients, basis)), plan.p)
        if rank(candidate, plan.p) < target.dim:
            continue
        power = np.kron(
            reduce(np.kron, [candidate] * plan.nu.j), np.eye(extra, dtype=np.int64)
        )
        if all(
            not np.any(shifted.projection(np.mod(theta @ (power @ z), plan.p)))
            for z in lifted
        ):
            return candidate, tried
    return None, tried


def killing_surjection_exists(
    plan: Prop6Plan,
    targets: Sequence[CohClass],
    config: Optional[ShrinklabConfig] = None,
) -> bool:
    """Tell by exhaustive search whether an equivariant surjection kills the targets."""
    config = _config(config)
    shifted = [dim_shift(x, config) for x in targets]
    if not shifted:
        return True
    extra = shifted[0].parent.module.dim // plan.large.dim
    found, _ = _killing_search(plan, _lift_targets(plan, shifted), extra, config)
    return found is not None


def _check_targets(plan: Prop6Plan, targets: Sequence[CohClass]) -> None:
    for x in targets:
        if x.parent.module.dim != plan.source.module.dim or x.parent.degree != plan.k:
            raise ParentMismatch(f"{x.parent!r} is not the group {plan.source!r}")


def _verify_killed(
    layer_map: ModuleHom,
    coefficients: FpGModule,
    targets: Sequence[CohClass],
    config: Optional[ShrinklabConfig],
) -> Tuple[CohClass, ...]:
    """Push every class along ψ_* ⊗ id_T and insist on zero.

    Raises:
        VerifyFail: if a pushed class is not zero.
    """
    induced = layer_map.tensor(ModuleHom.identity(coefficients))
    images = tuple(apply_module_hom(x, induced, config) for x in targets)
    for index, image in enumerate(images):
        if not image.is_zero():
            log.error("Target %s survives the surjection", index)
            raise VerifyFail(f"Target {index} is not killed: {image.coords.tolist()}")
    return images


def prop6_annihilate(
    plan: Prop6Plan,
    targets: Sequence[CohClass],
    options: Optional[SolverOptions] = None,
    config: Optional[ShrinklabConfig] = None,
) -> Prop6Report:
    """Find 𝓕(m) ↠ 𝓕(n) whose layer map kills classes of Ĥ^k(G, 𝓔(m, ν) ⊗ T).

    The classes are shifted to degree −1, lifted through θ_ν to tensors of
    V_m^{⊗j} ⊗ T ⊗ A_k and handed to prop2_solve. The pushed classes are then
    recomputed through the layer map of φ_a.

    Raises:
        NotFound: if nothing kills the targets below the bound.
        VerifyFail: if the recomputation leaves a class alive.
    """
    config = _config(config)
    _check_targets(plan, targets)
    shifted = [dim_shift(x, config) for x in targets]
    lifted = _lift_targets(plan, shifted)
    width = plan.group.order * plan.n
    normal = shift_coefficients(plan.coefficients, plan.k, config)
    problem = ShrinkProblem(
        plan.p,
        plan.group,
        plan.small.letters,
        normal,
        plan.nu.j,
        plan.blocks,
        tuple(
            BlockTensor.from_dense(z, plan.p, plan.blocks, plan.nu.j, width, normal.dim)
            for z in lifted
        ),
    )
    certificate: Optional[ShrinkCertificate] = None
    try:
        certificate = prop2_solve(problem, options, config)
        matrix = np.kron(
            np.array([certificate.a], dtype=np.int64), np.eye(width, dtype=np.int64)
        )
        strategy, candidates = certificate.strategy, certificate.candidates
    except NotFound:
        log.info("Solver failed below the bound, searching equivariant surjections")
        found, candidates = _killing_search(plan, lifted, normal.dim, config)
        if found is None:
            raise
        matrix, strategy = found, EQUIVARIANT_SEARCH
    psi_bar = ModuleHom(plan.large.letters, plan.small.letters, matrix)
    psi_star = plan.large.induced(psi_bar, plan.small)
    images = _verify_killed(psi_star, plan.coefficients, targets, config)
    return Prop6Report(
        plan, strategy, candidates, psi_bar, psi_star, certificate, images
    )


def sub_block_classes(
    plan: Prop6Plan,
    count: int,
    rng: np.random.Generator,
    config: Optional[ShrinklabConfig] = None,
) -> List[CohClass]:
    """Draw random classes of the level (r − 1)·n and push them into the plan's source.

    These classes come from the first r − 1 blocks, so the last block alone
    gives a surjection killing them.
    """
    if plan.blocks < 2:
        raise DimensionMismatch("Sub-block classes need at least two blocks")
    inner = LieLayer(plan.p, (plan.blocks - 1) * plan.n, plan.group, plan.nu, config)
    inclusion = block_inclusion(inner.letters, plan.large.letters)
    source = tate(
        plan.group,
        tensor_module(inner.module, plan.coefficients, config),
        plan.k,
        config,
    )
    layer_map = inner.induced(inclusion, plan.large)
    hom = layer_map.tensor(ModuleHom.identity(plan.coefficients))
    return [
        plan.source.classify(
            apply_module_hom(random_class(source, rng), hom, config).representative
        )
        for _ in range(count)
    ]


Stage2Provider = Callable[[int], Sequence[BlockTensor]]


@dataclass(frozen=True, eq=False)
class Prop7Report:
    """The composite 𝓕(m) ↠ 𝓕(r) ↠ 𝓕(n) with the evidence of both stages."""

    p: int
    n: int
    r: int
    m: int
    nu: FilterIndex
    stage1: Optional[Prop6Report]
    stage2: Optional[ShrinkCertificate]
    composite: Optional[ModuleHom]

    @property
    def stages(self) -> int:
        """Return how many stages ran."""
        return int(self.stage1 is not None) + int(self.stage2 is not None)

    def as_record(self) -> Dict[str, object]:
        """Return the report fields in a stable order."""
        return {
            "p": self.p,
            "n": self.n,
            "r": self.r,
            "m": self.m,
            "nu": str(self.nu),
            "stages": self.stages,
            "stage1": None if self.stage1 is None else self.stage1.as_record(),
            "stage2": None if self.stage2 is None else self.stage2.as_record(),
        }


class Prop7Session:
    """Two-stage killing of H₁ classes of 𝓕(m)/𝓕(m)^{(ν+1)} ⋊ G.

    Stage 1 kills the images in H₁(G, 𝓔(m, ν) ⊗ T) with prop6_annihilate at
    k = −2 down to level r. Stage 2 then kills β-preimages given as tensors of
    (V_r)^{⊗(j+1)} ⊗ T, which are only asked for once stage 1 has run. For
    ν = (1,1) only stage 1 runs, straight down to level n.
    """

    def __init__(
        self,
        group: FiniteGroup,
        p: int,
        n: int,
        nu: FilterIndex,
        coefficients: FpGModule,
        stage1_count: int,
        stage2_count: int,
        options: Optional[SolverOptions] = None,
        config: Optional[ShrinklabConfig] = None,
    ) -> None:
        """Fix r and m and build the three layers."""
        self.group = group
        self.p = p
        self.n = n
        self.nu = nu
        self.coefficients = coefficients
        self.options = options if options is not None else SolverOptions()
        self.config = _config(config)
        self.two_stage = nu >= FilterIndex(2, 1)
        if self.two_stage:
            self.required = required_blocks(
                nu.j + 1, stage2_count, group.order * n, coefficients.dim
            )
            self.blocks = self.options.blocks or self.required
        else:
            self.required, self.blocks = 1, 1
        self.r = self.blocks * n
        self.plan = prop6_plan(
            group,
            p,
            self.r,
            nu,
            -2,
            coefficients,
            stage1_count,
            self.options.stage1_blocks,
            self.config,
        )
        self.m = self.plan.m
        self.small = LieLayer(p, n, group, nu, self.config)
        self._stage1: Optional[Prop6Report] = None
        self._stage2: Optional[ShrinkCertificate] = None
        self._epsilon: Optional[ModuleHom] = None
        self._targets: List[CohClass] = []

    @property
    def stage1_group(self) -> CohGroup:
        """Return H₁(G, 𝓔(m, ν) ⊗ T), where the stage 1 targets live."""
        return self.plan.source

    def run_stage1(self, targets: Sequence[CohClass]) -> Prop6Report:
        """Kill the stage 1 classes with a surjection 𝓕(m) ↠ 𝓕(r)."""
        self._targets = list(targets)
        self._stage1 = prop6_annihilate(
            self.plan, self._targets, self.options, self.config
        )
        return self._stage1

    def stage2_problem(self, tensors: Sequence[BlockTensor]) -> ShrinkProblem:
        """Wrap β-preimages of (V_r)^{⊗(j+1)} ⊗ T as a shrink problem.

        Raises:
            StageOrderViolation: if stage 1 has not run yet.
        """
        if self._stage1 is None:
            raise StageOrderViolation(
                "Stage 2 targets depend on the stage 1 surjection"
            )
        return ShrinkProblem(
            self.p,
            self.group,
            self.small.letters,
            self.coefficients,
            self.nu.j + 1,
            self.blocks,
            tuple(tensors),
        )

    def run_stage2(self, provider: Stage2Provider) -> Optional[ShrinkCertificate]:
        """Ask the provider for tensors at level r and kill them with 𝓕(r) ↠ 𝓕(n)."""
        if self._stage1 is None:
            raise StageOrderViolation("Run stage 1 before asking for stage 2 targets")
        if not self.two_stage:
            return None
        problem = self.stage2_problem(provider(self.r))
        self._stage2 = prop2_solve(problem, self.options, self.config)
        width = self.group.order * self.n
        self._epsilon = ModuleHom(
            self.plan.small.letters,
            self.small.letters,
            np.kron(
                np.array([self._stage2.a], dtype=np.int64),
                np.eye(width, dtype=np.int64),
            ),
        )
        return self._stage2

    def report(self) -> Prop7Report:
        """Compose the stages and re-check the stage 1 classes through the composite.

        Raises:
            StageOrderViolation: if a stage is missing.
            VerifyFail: if the composite leaves a stage 1 class alive.
        """
        if self._stage1 is None or (self.two_stage and self._epsilon is None):
            raise StageOrderViolation("Both stages must run before the report")
        composite = self._stage1.psi_bar
        if self._epsilon is not None:
            composite = self._epsilon.compose(composite)
            layer_map = self.plan.large.induced(composite, self.small)
            _verify_killed(layer_map, self.coefficients, self._targets, self.config)
        return Prop7Report(
            self.p,
            self.n,
            self.r,
            self.m,
            self.nu,
            self._stage1,
            self._stage2,
            composite,
        )


def prop7_annihilate(
    session: Prop7Session,
    stage1_targets: Sequence[CohClass],
    stage2_provider: Stage2Provider,
) -> Prop7Report:
    """Run both stages of a session in order and return the verified composite."""
    session.run_stage1(stage1_targets)
    session.run_stage2(stage2_provider)
    return session.report()


def prop7_kernel_only(
    group: FiniteGroup,
    p: int,
    n: int,
    nu: FilterIndex,
    coefficients: FpGModule,
    targets: int,
    provider: Stage2Provider,
    options: Optional[SolverOptions] = None,
    config: Optional[ShrinklabConfig] = None,
) -> Prop7Report:
    """Kill classes already in the kernel of H₁(𝓕(r)/ν ⋊ G) → H₁(G, ·) in one stage."""
    options = options if options is not None else SolverOptions()
    width = group.order * n
    blocks = options.blocks or required_blocks(
        nu.j + 1, targets, width, coefficients.dim
    )
    large = letter_module(p, blocks * n, group, config)
    small = letter_module(p, n, group, config)
    problem = ShrinkProblem(
        p,
        group,
        small,
        coefficients,
        nu.j + 1,
        blocks,
        tuple(provider(blocks * n)),
    )
    certificate = prop2_solve(problem, options, config)
    psi_bar = ModuleHom(
        large,
        small,
        np.kron(
            np.array([certificate.a], dtype=np.int64), np.eye(width, dtype=np.int64)
        ),
    )
    return Prop7Report(p, n, blocks * n, blocks * n, nu, None, certificate, psi_bar)
