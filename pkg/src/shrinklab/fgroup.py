"""Finite groups as explicit multiplication tables.

Elements are the indices 0..order-1 and the identity is always index 0.
Permutations compose as functions: (g·h)(x) = g(h(x)).
"""

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce
from itertools import combinations, product
from math import comb
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint, primefactors

from shrinklab.exceptions import (
    CapExceeded,
    ClosureExceedsCap,
    ContainedInFrattini,
    GroupMismatch,
    ModelInconsistency,
    NotBijective,
    NotNormal,
    NotPGroup,
    NotSolvable,
    OrderExceedsCap,
    ParentMismatch,
)
from shrinklab.linalg import rank as fp_rank
from shrinklab.model import FilterIndex, ShrinklabConfig

log = logging.getLogger(__name__)

Permutation = Tuple[int, ...]

_SHORT_GENERATING_SET = 6


def _config(config: Optional[ShrinklabConfig]) -> ShrinklabConfig:
    return config if config is not None else ShrinklabConfig()


@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """Finite group given by its multiplication table.

    Attributes:
        order: Number of elements.
        mul: order × order table, mul[a, b] is the index of a·b.
        inv: inv[a] is the index of a⁻¹.
        generators: Indices that generate the group.
        name: Optional label.
    """

    order: int
    mul: np.ndarray
    inv: np.ndarray
    generators: Tuple[int, ...]
    name: Optional[str] = None

    identity = 0

    def __post_init__(self) -> None:
        """Check the shape, identity and inverse laws."""
        if self.mul.shape != (self.order, self.order):
            raise ModelInconsistency(
                f"Multiplication table has shape {self.mul.shape}, "
                f"expected order {self.order}"
            )
        elements = np.arange(self.order)
        if not np.array_equal(self.mul[0], elements) or not np.array_equal(
            self.mul[:, 0], elements
        ):
            raise ModelInconsistency("Index 0 is not a two sided identity")
        if not np.all(self.mul[elements, self.inv] == 0):
            raise ModelInconsistency("Inverse table does not satisfy a·a⁻¹ = 1")

    def __repr__(self) -> str:
        """Show the label and order."""
        return f"FiniteGroup({self.name or '?'}, order={self.order})"

    def multiply(self, *elements: int) -> int:
        """Return the product of the given elements, left to right."""
        result = 0
        for element in elements:
            result = int(self.mul[result, element])
        return result

    def inverse(self, element: int) -> int:
        """Return the inverse of element."""
        return int(self.inv[element])

    def power(self, element: int, exponent: int) -> int:
        """Return element raised to an integer exponent."""
        base = element if exponent >= 0 else self.inverse(element)
        exponent = abs(exponent)
        result = 0
        while exponent:
            if exponent & 1:
                result = int(self.mul[result, base])
            base = int(self.mul[base, base])
            exponent >>= 1
        return result

    def commutator(self, left: int, right: int) -> int:
        """Return [a, b] = a⁻¹b⁻¹ab."""
        return self.multiply(self.inverse(left), self.inverse(right), left, right)

    def conjugate(self, element: int, by: int) -> int:
        """Return by·element·by⁻¹."""
        return self.multiply(by, element, self.inverse(by))

    def element_order(self, element: int) -> int:
        """Return the order of element."""
        order, current = 1, element
        while current != 0:
            current = int(self.mul[current, element])
            order += 1
        return order

    @cached_property
    def is_abelian(self) -> bool:
        """Tell whether the table is symmetric."""
        return bool(np.array_equal(self.mul, self.mul.T))

    @cached_property
    def whole(self) -> "Subgroup":
        """Return G as a subgroup of itself."""
        return Subgroup(self, tuple(range(self.order)))

    @cached_property
    def trivial(self) -> "Subgroup":
        """Return the trivial subgroup."""
        return Subgroup(self, (0,))

    def closure(
        self, elements: Iterable[int], config: Optional[ShrinklabConfig] = None
    ) -> "Subgroup":
        """Return the subgroup generated by elements."""
        cap = _config(config).closure_cap
        gens = sorted({int(element) for element in elements} - {0})
        found = {0}
        frontier = [0]
        while frontier:
            next_frontier = []
            for element in frontier:
                for gen in gens:
                    image = int(self.mul[element, gen])
                    if image not in found:
                        found.add(image)
                        next_frontier.append(image)
            if len(found) > cap:
                raise ClosureExceedsCap(f"Closure exceeds the cap of {cap} elements")
            frontier = next_frontier
        return Subgroup(self, tuple(sorted(found)), tuple(gens))

    def subgroup(self, elements: Iterable[int]) -> "Subgroup":
        """Return the subgroup generated by elements."""
        return self.closure(elements)


@dataclass(frozen=True, eq=False)
class Subgroup:
    """Subgroup of a FiniteGroup given by its sorted element indices."""

    parent: FiniteGroup
    elements: Tuple[int, ...]
    gens: Tuple[int, ...] = ()

    def __post_init__(self) -> None:
        """Check the elements are sorted and contain the identity."""
        if not self.elements or self.elements[0] != 0:
            raise ModelInconsistency("A subgroup must contain the identity")
        if list(self.elements) != sorted(set(self.elements)):
            raise ModelInconsistency("Subgroup elements must be sorted and distinct")

    def __eq__(self, other: object) -> bool:
        """Compare parent identity and element sets."""
        if not isinstance(other, Subgroup):
            return NotImplemented
        return self.parent is other.parent and self.elements == other.elements

    def __hash__(self) -> int:
        """Hash the element set."""
        return hash((id(self.parent), self.elements))

    def __repr__(self) -> str:
        """Show the order and parent."""
        return f"Subgroup(order={self.order} of {self.parent!r})"

    def __contains__(self, element: object) -> bool:
        """Tell whether an index belongs to the subgroup."""
        return element in self.element_set

    def __le__(self, other: "Subgroup") -> bool:
        """Tell whether self is contained in other."""
        self._same_parent(other)
        return self.element_set <= other.element_set

    def __lt__(self, other: "Subgroup") -> bool:
        """Tell whether self is strictly contained in other."""
        return self <= other and self.order < other.order

    @property
    def order(self) -> int:
        """Return the number of elements."""
        return len(self.elements)

    @cached_property
    def element_set(self) -> frozenset:  # type: ignore[type-arg]
        """Return the elements as a set."""
        return frozenset(self.elements)

    @property
    def is_trivial(self) -> bool:
        """Tell whether this is the trivial subgroup."""
        return self.order == 1

    @property
    def is_whole(self) -> bool:
        """Tell whether this is the parent group."""
        return self.order == self.parent.order

    def _same_parent(self, other: "Subgroup") -> None:
        if other.parent is not self.parent:
            raise ParentMismatch("Subgroups live in different groups")

    def generating_set(self) -> Tuple[int, ...]:
        """Return a small generating set, picked greedily in index order."""
        if self.gens and len(self.gens) <= _SHORT_GENERATING_SET:
            return self.gens
        gens: List[int] = []
        span = {0}
        for element in self.elements:
            if element not in span:
                gens.append(element)
                span = set(self.parent.closure(gens).elements)
        return tuple(gens)

    def intersection(self, other: "Subgroup") -> "Subgroup":
        """Return self ∩ other."""
        self._same_parent(other)
        return Subgroup(
            self.parent, tuple(sorted(self.element_set & other.element_set))
        )

    def join(self, other: "Subgroup") -> "Subgroup":
        """Return the subgroup generated by self and other."""
        self._same_parent(other)
        return self.parent.closure(self.generating_set() + other.generating_set())

    def is_normal(self) -> bool:
        """Tell whether the subgroup is normal in its parent."""
        group = self.parent
        return all(
            group.conjugate(element, by) in self.element_set
            for by in group.generators
            for element in self.elements
        )

    def set_product_size(self, other: "Subgroup") -> int:
        """Return |self·other| = |self||other| / |self ∩ other|."""
        return self.order * other.order // self.intersection(other).order

    @cached_property
    def position(self) -> Dict[int, int]:
        """Map parent indices to indices of as_group."""
        return {element: index for index, element in enumerate(self.elements)}

    @cached_property
    def as_group(self) -> FiniteGroup:
        """Return the subgroup as a FiniteGroup, re-indexed in element order."""
        lookup = np.full(self.parent.order, -1, dtype=np.int64)
        lookup[list(self.elements)] = np.arange(self.order)
        picked = np.asarray(self.elements, dtype=np.int64)
        mul = lookup[self.parent.mul[np.ix_(picked, picked)]]
        inv = lookup[self.parent.inv[picked]]
        gens = tuple(int(lookup[gen]) for gen in self.generating_set())
        return FiniteGroup(self.order, mul, inv, gens, name=f"sub{self.order}")

    def embed(self, index: int) -> int:
        """Map an index of as_group back to the parent."""
        return self.elements[index]


def _check_associative(mul: np.ndarray, config: ShrinklabConfig) -> None:
    order = mul.shape[0]
    if order <= config.associativity_full_check_order:
        for left in range(order):
            if not np.array_equal(mul[mul[left]], mul[left][mul]):
                raise ModelInconsistency(f"Table is not associative at element {left}")
        return
    rng = np.random.default_rng(config.seed)
    triples = rng.integers(0, order, size=(config.associativity_samples, 3))
    first, second, third = triples.T
    if not np.array_equal(
        mul[mul[first, second], third], mul[first, mul[second, third]]
    ):
        raise ModelInconsistency("Table failed the sampled associativity check")


def from_table(
    mul: Sequence[Sequence[int]],
    generators: Optional[Sequence[int]] = None,
    name: Optional[str] = None,
    config: Optional[ShrinklabConfig] = None,
) -> FiniteGroup:
    """Build a group from a multiplication table with identity at index 0."""
    config = _config(config)
    table = np.asarray(mul, dtype=np.int64)
    order = table.shape[0]
    if table.ndim != 2 or table.shape[1] != order:
        raise ModelInconsistency(
            f"Multiplication table must be square, got {table.shape}"
        )
    if order > config.closure_cap:
        raise ClosureExceedsCap(
            f"Group of order {order} exceeds the cap of {config.closure_cap}"
        )
    expected = np.arange(order)
    if not all(np.array_equal(np.sort(row), expected) for row in table):
        raise ModelInconsistency("Multiplication table rows must be permutations")
    _check_associative(table, config)
    inv = np.argmax(table == 0, axis=1).astype(np.int64)
    group = FiniteGroup(order, table, inv, tuple(generators or ()), name)
    if generators is None:
        return FiniteGroup(order, table, inv, group.whole.generating_set(), name)
    if not group.closure(generators, config).is_whole:
        raise ModelInconsistency("The given generators do not generate the group")
    return group


def compose(left: Permutation, right: Permutation) -> Permutation:
    """Return left∘right."""
    return tuple(left[point] for point in right)


def from_permutations(
    degree: int,
    perms: Sequence[Sequence[int]],
    name: Optional[str] = None,
    config: Optional[ShrinklabConfig] = None,
) -> FiniteGroup:
    """Enumerate the group generated by permutations of {0..degree-1}.

    Elements are listed in breadth first order from the identity, multiplying
    on the right by the generators in input order.

    Raises:
        NotBijective: if an input is not a permutation of the right degree.
        ClosureExceedsCap: if the group is larger than the closure cap.
    """
    config = _config(config)
    gens = [tuple(int(point) for point in perm) for perm in perms]
    for perm in gens:
        if sorted(perm) != list(range(degree)):
            raise NotBijective(f"{perm} is not a permutation of {degree} points")
    identity: Permutation = tuple(range(degree))
    elements: List[Permutation] = [identity]
    index: Dict[Permutation, int] = {identity: 0}
    parent: List[Tuple[int, int]] = [(-1, -1)]
    cursor = 0
    while cursor < len(elements):
        for gen_index, gen in enumerate(gens):
            composed = compose(elements[cursor], gen)
            if composed not in index:
                if len(elements) >= config.closure_cap:
                    raise ClosureExceedsCap(
                        f"The generated group exceeds the cap of "
                        f"{config.closure_cap} elements"
                    )
                index[composed] = len(elements)
                elements.append(composed)
                parent.append((cursor, gen_index))
        cursor += 1
    order = len(elements)
    right = np.array(
        [[index[compose(element, gen)] for element in elements] for gen in gens],
        dtype=np.int64,
    ).reshape(len(gens), order)
    mul = np.zeros((order, order), dtype=np.int64)
    mul[:, 0] = np.arange(order)
    for element in range(1, order):
        previous, gen_index = parent[element]
        mul[:, element] = right[gen_index][mul[:, previous]]
    _check_associative(mul, config)
    inv = np.argmax(mul == 0, axis=1).astype(np.int64)
    gen_indices = tuple(index[gen] for gen in gens)
    log.debug("Enumerated group %s of order %s", name or "?", order)
    return FiniteGroup(order, mul, inv, gen_indices, name)


def trivial_group() -> FiniteGroup:
    """Return the group of order 1."""
    return from_permutations(1, [], name="1")


def cyclic_group(order: int) -> FiniteGroup:
    """Return the cyclic group of the given order."""
    if order == 1:
        return trivial_group()
    rotation = [(point + 1) % order for point in range(order)]
    return from_permutations(order, [rotation], name=f"C{order}")


def direct_product(left: FiniteGroup, right: FiniteGroup) -> FiniteGroup:
    """Return left × right with (a, b) at index a·|right| + b."""
    size = right.order
    mul = (left.mul[:, None, :, None] * size + right.mul[None, :, None, :]).reshape(
        left.order * size, left.order * size
    )
    inv = (left.inv[:, None] * size + right.inv[None, :]).reshape(-1)
    gens = tuple(gen * size for gen in left.generators) + right.generators
    return FiniteGroup(left.order * size, mul, inv, gens, f"{left.name}×{right.name}")


def commutator_subgroup(first: Subgroup, second: Subgroup) -> Subgroup:
    """Return [A, B], generated by all a⁻¹b⁻¹ab."""
    if first.parent is not second.parent:
        raise GroupMismatch("Commutators need subgroups of one group")
    group = first.parent
    return group.closure(
        group.commutator(left, right)
        for left in first.elements
        for right in second.elements
    )


def derived_series(group: FiniteGroup) -> List[Subgroup]:
    """Return G ⊋ G' ⊋ G'' ⊋ … until the series stabilizes."""
    series = [group.whole]
    while True:
        following = commutator_subgroup(series[-1], series[-1])
        if following.order == series[-1].order:
            return series
        series.append(following)


def is_solvable(group: FiniteGroup) -> bool:
    """Tell whether the derived series reaches the trivial subgroup."""
    return derived_series(group)[-1].is_trivial


def lower_central_series(group: FiniteGroup) -> List[Subgroup]:
    """Return G = G_1 ⊇ G_2 = [G_1, G] ⊇ … until it stabilizes."""
    series = [group.whole]
    while True:
        following = commutator_subgroup(series[-1], group.whole)
        if following.order == series[-1].order:
            return series
        series.append(following)


def is_nilpotent(group: FiniteGroup) -> bool:
    """Tell whether the lower central series reaches the trivial subgroup."""
    return lower_central_series(group)[-1].is_trivial


def power_commutator(subgroup: Subgroup, p: int) -> Subgroup:
    """Return H^p[H, G] for a subgroup H of G."""
    group = subgroup.parent
    powers = [group.power(element, p) for element in subgroup.elements]
    commutators = commutator_subgroup(subgroup, group.whole).elements
    return group.closure(list(powers) + list(commutators))


def p_group_prime(order: int) -> Optional[int]:
    """Return p when order is a positive power of p, None otherwise."""
    factors = factorint(order)
    if len(factors) != 1:
        return None
    return int(next(iter(factors)))


def _check_order(group: FiniteGroup, config: ShrinklabConfig) -> None:
    if group.order > config.subgroup_order_cap:
        raise OrderExceedsCap(
            f"Group of order {group.order} exceeds the subgroup enumeration cap of "
            f"{config.subgroup_order_cap}"
        )


@lru_cache(maxsize=64)
def _lattice(group: FiniteGroup) -> Tuple[Subgroup, ...]:
    cyclic = {group.closure([element]) for element in range(1, group.order)}
    found = {group.trivial}
    frontier = [group.trivial]
    while frontier:
        next_frontier = []
        for subgroup in frontier:
            for extension in cyclic:
                if extension <= subgroup:
                    continue
                joined = group.closure(subgroup.generating_set() + extension.gens)
                if joined not in found:
                    found.add(joined)
                    next_frontier.append(joined)
        frontier = next_frontier
    return tuple(
        sorted(found, key=lambda subgroup: (subgroup.order, subgroup.elements))
    )


def all_subgroups(
    group: FiniteGroup, config: Optional[ShrinklabConfig] = None
) -> List[Subgroup]:
    """Enumerate every subgroup by cyclic extension, ordered by (order, elements).

    Raises:
        OrderExceedsCap: if the group is above the enumeration cap.
    """
    _check_order(group, _config(config))
    return list(_lattice(group))


def maximal_subgroups(
    group: FiniteGroup, config: Optional[ShrinklabConfig] = None
) -> List[Subgroup]:
    """Return the proper subgroups not strictly contained in another proper one."""
    proper = [
        subgroup for subgroup in all_subgroups(group, config) if not subgroup.is_whole
    ]
    return [
        subgroup
        for subgroup in proper
        if not any(subgroup < other for other in proper if other.order > subgroup.order)
    ]


def frattini(group: FiniteGroup, config: Optional[ShrinklabConfig] = None) -> Subgroup:
    """Return Φ(G), the intersection of the maximal subgroups.

    For p-groups the result is compared with G^p[G, G].

    Raises:
        OrderExceedsCap: if the group is above the enumeration cap.
        ModelInconsistency: if the p-group cross check fails.
    """
    maximal = maximal_subgroups(group, config)
    if not maximal:
        return group.whole
    result = reduce(Subgroup.intersection, maximal)
    p = p_group_prime(group.order)
    if p is not None and power_commutator(group.whole, p) != result:
        raise ModelInconsistency(
            f"Frattini subgroup of {group!r} differs from G^p[G,G]"
        )
    return result


def sylow_subgroups(
    group: FiniteGroup, p: int, config: Optional[ShrinklabConfig] = None
) -> List[Subgroup]:
    """Return the Sylow p-subgroups."""
    full = p ** factorint(group.order).get(p, 0)
    return [
        subgroup for subgroup in all_subgroups(group, config) if subgroup.order == full
    ]


def p_core(
    group: FiniteGroup, p: int, config: Optional[ShrinklabConfig] = None
) -> Subgroup:
    """Return O_p(G), the intersection of the Sylow p-subgroups."""
    return reduce(Subgroup.intersection, sylow_subgroups(group, p, config))


def fitting(group: FiniteGroup, config: Optional[ShrinklabConfig] = None) -> Subgroup:
    """Return F(G), the product of the O_p(G) over the primes dividing |G|."""
    _check_order(group, _config(config))
    elements: List[int] = []
    for p in primefactors(group.order):
        elements.extend(p_core(group, p, config).elements)
    return group.closure(elements)


def proper_supplement(
    group: FiniteGroup, normal: Subgroup, config: Optional[ShrinklabConfig] = None
) -> Subgroup:
    """Return a proper subgroup U of minimal order with N·U = G.

    Ties are broken by the lexicographically smallest element list.

    Raises:
        NotNormal: if N is not normal in G.
        ContainedInFrattini: if N ⊆ Φ(G), where no proper supplement exists.
    """
    if normal.parent is not group:
        raise ParentMismatch("The normal subgroup must live in the given group")
    if not normal.is_normal():
        raise NotNormal(f"{normal!r} is not normal")
    if normal <= frattini(group, config):
        raise ContainedInFrattini(f"{normal!r} is contained in the Frattini subgroup")
    candidates = [
        subgroup
        for subgroup in all_subgroups(group, config)
        if not subgroup.is_whole and normal.set_product_size(subgroup) == group.order
    ]
    return min(candidates, key=lambda subgroup: (subgroup.order, subgroup.elements))


def conjugation_action(kernel: Subgroup, actor: Subgroup) -> np.ndarray:
    """Return act[u, h]: the index in kernel of u·h·u⁻¹, both in subgroup indexing."""
    group = kernel.parent
    position = kernel.position
    return np.array(
        [
            [position[group.conjugate(element, by)] for element in kernel.elements]
            for by in actor.elements
        ],
        dtype=np.int64,
    ).reshape(actor.order, kernel.order)


def semidirect_product(
    normal: FiniteGroup,
    actor: FiniteGroup,
    action: Sequence[Sequence[int]],
    name: Optional[str] = None,
    config: Optional[ShrinklabConfig] = None,
) -> FiniteGroup:
    """Return Q ⋊ G for an action G → Aut(Q) given as automorphism tables.

    The pair (q, g) sits at index g·|Q| + q and multiplies by
    (q₁, g₁)(q₂, g₂) = (q₁·g₁(q₂), g₁g₂).

    Raises:
        ClosureExceedsCap: if |Q|·|G| is above the closure cap.
        ModelInconsistency: if the action is not a homomorphism into Aut(Q).
    """
    config = _config(config)
    table = np.asarray(action, dtype=np.int64).reshape(actor.order, normal.order)
    size = normal.order * actor.order
    if size > config.closure_cap:
        raise ClosureExceedsCap(f"Semidirect product of order {size} exceeds the cap")
    if not np.array_equal(table[0], np.arange(normal.order)):
        raise ModelInconsistency("The identity must act trivially")
    for row in table:
        bijective = len(set(row.tolist())) == normal.order
        if not bijective or not np.array_equal(
            row[normal.mul], normal.mul[np.ix_(row, row)]
        ):
            raise ModelInconsistency("The action is not by automorphisms")
    composite = table[np.arange(actor.order)[:, None, None], table[None, :, :]]
    if not np.array_equal(table[actor.mul], composite):
        raise ModelInconsistency("The action is not a homomorphism")
    order_q = normal.order
    first_q = np.arange(order_q)[None, :, None, None]
    acted = table[:, None, None, :]
    q_part = normal.mul[first_q, acted]
    g_part = actor.mul[:, None, :, None]
    mul = (g_part * order_q + q_part).reshape(size, size)
    gens = list(normal.generators) + [gen * order_q for gen in actor.generators]
    label = name or f"{normal.name}⋊{actor.name}"
    return from_table(mul, gens, name=label, config=config)


@dataclass(frozen=True)
class OreStep:
    """One step G_k ← F(G_k) ⋊ U_k of the solvable reduction."""

    group: FiniteGroup
    kernel: Subgroup
    actor: Subgroup

    def __iter__(self) -> Iterator[Subgroup]:
        """Unpack as (kernel, actor)."""
        return iter((self.kernel, self.actor))

    def describe(self) -> str:
        """Render the step as 'kernel ⋊ actor'."""
        kernel = describe_group(self.kernel.as_group)
        return f"{kernel} ⋊ {describe_group(self.actor.as_group)}"


def _verify_ore_step(step: OreStep, config: ShrinklabConfig) -> None:
    kernel, actor = step.kernel, step.actor
    product_group = semidirect_product(
        kernel.as_group,
        actor.as_group,
        conjugation_action(kernel, actor),
        config=config,
    )
    image = np.array(
        [
            step.group.mul[
                kernel.embed(index % kernel.order), actor.embed(index // kernel.order)
            ]
            for index in range(product_group.order)
        ],
        dtype=np.int64,
    )
    if not np.array_equal(
        image[product_group.mul], step.group.mul[np.ix_(image, image)]
    ):
        raise ModelInconsistency("The map F ⋊ U → G is not a homomorphism")
    if len(set(image.tolist())) != step.group.order:
        raise ModelInconsistency("The map F ⋊ U → G is not surjective")


def ore_tower(
    group: FiniteGroup, config: Optional[ShrinklabConfig] = None
) -> List[OreStep]:
    """Peel Fitting subgroups off a solvable group.

    Each non-nilpotent G_k gives the step (F(G_k), U_k) with U_k a proper
    supplement of F(G_k) and G_{k+1} = U_k. A nilpotent G_k ends the tower with
    the step (G_k, 1). Every step is checked to be a quotient of F ⋊ U.

    Raises:
        NotSolvable: if the group is not solvable.
    """
    config = _config(config)
    if not is_solvable(group):
        raise NotSolvable(f"{group!r} is not solvable")
    steps: List[OreStep] = []
    current = group
    while current.order > 1:
        if is_nilpotent(current):
            step = OreStep(current, current.whole, current.trivial)
        else:
            kernel = fitting(current, config)
            step = OreStep(current, kernel, proper_supplement(current, kernel, config))
        _verify_ore_step(step, config)
        log.debug("Ore step %s", step.describe())
        steps.append(step)
        if step.actor.is_trivial:
            break
        current = step.actor.as_group
    return steps


def describe_group(group: FiniteGroup) -> str:
    """Return a short label for a small group."""
    if group.order == 1:
        return "1"
    if any(
        group.element_order(element) == group.order for element in range(group.order)
    ):
        return f"C{group.order}"
    if group.is_abelian and group.order == 4:
        return "V4"
    if not group.is_abelian and group.order == 6:
        return "S3"
    if group.name and not group.name.startswith("sub"):
        return group.name
    return f"G{group.order}"


def group_isomorphism(
    source: FiniteGroup, target: FiniteGroup
) -> Optional[Dict[int, int]]:
    """Return an isomorphism source → target as a map of indices, or None.

    Every choice of images for the generators of source is walked along the
    Cayley graph; a choice that agrees on every edge and hits every element
    is an isomorphism.
    """
    if source.order != target.order:
        return None
    for images in product(range(target.order), repeat=len(source.generators)):
        mapping = {0: 0}
        frontier = [0]
        consistent = True
        while frontier and consistent:
            next_frontier = []
            for element in frontier:
                for gen, image in zip(source.generators, images):
                    step = int(source.mul[element, gen])
                    value = int(target.mul[mapping[element], image])
                    if step not in mapping:
                        mapping[step] = value
                        next_frontier.append(step)
                    elif mapping[step] != value:
                        consistent = False
                        break
                if not consistent:
                    break
            frontier = next_frontier
        if consistent and len(set(mapping.values())) == target.order:
            return mapping
    return None


def isomorphic_subgroup(
    group: FiniteGroup, model: FiniteGroup, config: Optional[ShrinklabConfig] = None
) -> Subgroup:
    """Return the first subgroup, in lattice order, isomorphic to model.

    Raises:
        GroupMismatch: if no subgroup is isomorphic to model.
    """
    for subgroup in all_subgroups(group, config):
        if subgroup.order != model.order:
            continue
        if group_isomorphism(model, subgroup.as_group) is not None:
            return subgroup
    raise GroupMismatch(f"{group!r} has no subgroup isomorphic to {model!r}")


def describe_tower(steps: Sequence[OreStep]) -> str:
    """Render a tower as "F₁ ⋊ U₁ ; F₂ ⋊ U₂ ; …", the last nilpotent step bare."""
    labels = [
        (
            describe_group(step.kernel.as_group)
            if step.actor.is_trivial
            else step.describe()
        )
        for step in steps
    ]
    return " ; ".join(labels)


def _require_p_group(group: FiniteGroup, p: int) -> None:
    if group.order > 1 and p_group_prime(group.order) != p:
        raise NotPGroup(f"{group!r} is not a {p}-group")


def p_central_series(group: FiniteGroup, p: int) -> List[Subgroup]:
    """Return P = P^1 ⊋ P^2 ⊋ … ⊋ 1 with P^{i+1} = (P^i)^p [P^i, P]."""
    _require_p_group(group, p)
    series = [group.whole]
    while not series[-1].is_trivial:
        series.append(power_commutator(series[-1], p))
    return series


def pgroup_filtration(group: FiniteGroup, p: int) -> Dict[FilterIndex, Subgroup]:
    """Return the refined filtration P^{(i,j)} = (P^i ∩ P_j) P^{i+1}.

    Entries are listed in increasing ν from (1,1), and the last entry is the
    first trivial one.

    Raises:
        NotPGroup: if |P| is not a power of p.
    """
    upper = p_central_series(group, p)
    lower = lower_central_series(group)

    def term(series: List[Subgroup], index: int) -> Subgroup:
        return series[index - 1] if index <= len(series) else group.trivial

    filtration: Dict[FilterIndex, Subgroup] = {}
    nu = FilterIndex(1, 1)
    while True:
        layer = term(upper, nu.i).intersection(term(lower, nu.j))
        entry = group.closure(layer.elements + term(upper, nu.i + 1).elements)
        filtration[nu] = entry
        if entry.is_trivial:
            return filtration
        nu = nu.succ()


@dataclass(frozen=True)
class ElementaryQuotient:
    """Coordinates on G/G^p[G, G] ≅ F_p^rank.

    Attributes:
        kernel: G^p[G, G], which is Φ(P) for a p-group.
        representatives: Lifts of the basis vectors.
        coords: coords[x] is the coordinate vector of the class of x.
    """

    group: FiniteGroup
    p: int
    kernel: Subgroup
    representatives: Tuple[int, ...]
    coords: np.ndarray

    @property
    def rank(self) -> int:
        """Return the dimension of the quotient."""
        return len(self.representatives)


def elementary_quotient(group: FiniteGroup, p: int) -> ElementaryQuotient:
    """Pick a basis of G/G^p[G, G] and tabulate the coordinates of every element.

    For a p-group this quotient is P/Φ(P).
    """
    phi = power_commutator(group.whole, p)
    representatives: List[int] = []
    span = phi
    for element in range(group.order):
        if element not in span:
            representatives.append(element)
            span = group.closure(phi.generating_set() + tuple(representatives))
    coords = np.zeros((group.order, len(representatives)), dtype=np.int64)
    for exponents in product(range(p), repeat=len(representatives)):
        pairs = zip(representatives, exponents)
        lift = group.multiply(*(group.power(rep, exponent) for rep, exponent in pairs))
        for element in phi.elements:
            coords[group.mul[lift, element]] = exponents
    return ElementaryQuotient(group, p, phi, tuple(representatives), coords)


def _quotient_action(
    quotient: ElementaryQuotient, action: Sequence[Sequence[int]]
) -> List[np.ndarray]:
    return [
        quotient.coords[
            [automorphism[rep] for rep in quotient.representatives]
        ].T % quotient.p
        for automorphism in action
    ]


def _span_rank(
    matrices: List[np.ndarray], vectors: Sequence[np.ndarray], p: int
) -> int:
    return fp_rank(
        np.array([matrix @ vector for matrix in matrices for vector in vectors]), p
    )


def operator_rank(
    group: FiniteGroup,
    p: int,
    actor: FiniteGroup,
    action: Sequence[Sequence[int]],
    config: Optional[ShrinklabConfig] = None,
) -> int:
    """Return the least number of generators of P/Φ(P) as an F_p[U]-module.

    A greedy choice gives an upper bound, every smaller candidate set is then
    checked exhaustively.

    Raises:
        CapExceeded: if the exhaustive confirmation needs more candidate sets
            than the configured cap.
    """
    config = _config(config)
    if len(action) != actor.order:
        raise GroupMismatch(f"Expected {actor.order} automorphisms, got {len(action)}")
    quotient = elementary_quotient(group, p)
    dimension = quotient.rank
    if dimension == 0:
        return 0
    total = p**dimension
    if total > config.operator_rank_cap:
        raise CapExceeded(f"P/Φ(P) has {total} vectors, above the cap")
    matrices = _quotient_action(quotient, action)
    vectors = [
        np.array(vector, dtype=np.int64)
        for vector in product(range(p), repeat=dimension)
    ]
    vectors = vectors[1:]
    chosen: List[np.ndarray] = []
    while not chosen or _span_rank(matrices, chosen, p) < dimension:
        chosen.append(
            max(vectors, key=lambda vector: _span_rank(matrices, chosen + [vector], p))
        )
    upper = len(chosen)
    lower = max(1, -(-dimension // actor.order))
    for size in range(lower, upper):
        if comb(len(vectors), size) > config.operator_rank_cap:
            raise CapExceeded(f"Confirming rank {size} needs too many candidate sets")
        if any(
            _span_rank(matrices, combo, p) == dimension
            for combo in combinations(vectors, size)
        ):
            return size
    return upper


def operator_type(
    group: FiniteGroup,
    p: int,
    actor: FiniteGroup,
    action: Sequence[Sequence[int]],
    config: Optional[ShrinklabConfig] = None,
) -> Tuple[int, FilterIndex]:
    """Return (n, ν) with P a quotient of F(n)/F(n)^(ν) as an operator group."""
    nu = list(pgroup_filtration(group, p))[-1]
    return operator_rank(group, p, actor, action, config), nu
