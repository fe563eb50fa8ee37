"""Truncated free pro-p G-operator groups 𝓕(d)/𝓕(d)^{(I,J)}.

Elements are stored in Hall normal form ∏ c^{e_c} over the basic commutators
c, ordered by (weight, Lyndon word). Products are computed exactly in the free
nilpotent group of class I − 1 through the Magnus embedding x_a ↦ 1 + X_a into
truncated noncommutative power series with integer coefficients, then the
exponents are reduced by the weight moduli.
"""

import logging
from dataclasses import dataclass
from functools import cached_property, reduce
from itertools import product
from math import factorial
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import divisors, mobius

from shrinklab.exceptions import (
    CapExceeded,
    GroupMismatch,
    IndexOutOfRange,
    ModelInconsistency,
    NotSurjective,
    ParentMismatch,
    SurjectivityFailure,
)
from shrinklab.fgroup import FiniteGroup
from shrinklab.gmod import (
    FpGModule,
    ModuleHom,
    from_generators,
    permutation_module,
    tensor_power,
)
from shrinklab.linalg import as_fp, inverse
from shrinklab.model import FilterIndex, ShrinklabConfig

log = logging.getLogger(__name__)

LyndonWord = Tuple[int, ...]


def _config(config: Optional[ShrinklabConfig]) -> ShrinklabConfig:
    return config if config is not None else ShrinklabConfig()


def witt_dim(generators: int, weight: int) -> int:
    """Return the number of basic commutators of a given weight on D letters.

    This is the necklace number (1/w)·Σ_{e|w} μ(e)·D^{w/e}.
    """
    total = sum(
        int(mobius(divisor)) * generators ** (weight // divisor)
        for divisor in divisors(weight)
    )
    return total // weight


def lyndon_words(letters: int, max_length: int) -> Iterator[LyndonWord]:
    """Yield the Lyndon words of length ≤ max_length in lexicographic order (Duval)."""
    if letters == 0 or max_length == 0:
        return
    word = [-1]
    while word:
        word[-1] += 1
        yield tuple(word)
        size = len(word)
        while len(word) < max_length:
            word.append(word[len(word) - size])
        while word and word[-1] == letters - 1:
            word.pop()


def _standard_split(
    word: LyndonWord, known: Dict[LyndonWord, int]
) -> Tuple[LyndonWord, LyndonWord]:
    for start in range(1, len(word)):
        if word[start:] in known:
            return word[:start], word[start:]
    raise ModelInconsistency(f"Lyndon word {word} has no standard factorization")


@dataclass(frozen=True)
class BasicCommutator:
    """One element of the Hall basis.

    Attributes:
        index: Position in the basis.
        word: Lyndon word over the generator indices.
        left: Index of the left factor, None for letters.
        right: Index of the right factor, None for letters.
    """

    index: int
    word: LyndonWord
    left: Optional[int]
    right: Optional[int]

    @property
    def weight(self) -> int:
        """Return the length of the word."""
        return len(self.word)


class HallBasis:
    """Lyndon basis of the free Lie ring, with standard bracketing.

    Commutators are ordered by weight, then lexicographically by Lyndon word.
    The bracket of the standard factorization w = uv, v the longest proper
    Lyndon suffix, is the group commutator [u, v] = u⁻¹v⁻¹uv.
    """

    def __init__(self, generators: int, max_weight: int) -> None:
        """Enumerate the basic commutators up to max_weight."""
        self.generators = generators
        self.max_weight = max_weight
        words = sorted(
            lyndon_words(generators, max_weight), key=lambda word: (len(word), word)
        )
        self.position: Dict[LyndonWord, int] = {}
        self.commutators: List[BasicCommutator] = []
        for word in words:
            if len(word) == 1:
                element = BasicCommutator(len(self.commutators), word, None, None)
            else:
                left, right = _standard_split(word, self.position)
                element = BasicCommutator(
                    len(self.commutators),
                    word,
                    self.position[left],
                    self.position[right],
                )
            self.position[word] = element.index
            self.commutators.append(element)

    def __len__(self) -> int:
        """Return the number of basic commutators."""
        return len(self.commutators)

    def __iter__(self) -> Iterator[BasicCommutator]:
        """Iterate in basis order."""
        return iter(self.commutators)

    def __getitem__(self, index: int) -> BasicCommutator:
        """Return a basic commutator by index."""
        return self.commutators[index]

    def of_weight(self, weight: int) -> List[BasicCommutator]:
        """Return the basic commutators of one weight."""
        return [element for element in self.commutators if element.weight == weight]

    def bracket_text(self, index: int) -> str:
        """Render a basic commutator as nested brackets of x0, x1, …."""
        element = self.commutators[index]
        if element.left is None or element.right is None:
            return f"x{element.word[0]}"
        return f"[{self.bracket_text(element.left)},{self.bracket_text(element.right)}]"

    def satisfies_hall_condition(self, index: int) -> bool:
        """Check the Lyndon form of the Hall condition.

        For c = [u, v]: u < v, and if u = [u', u''] then u'' ≥ v.
        """
        element = self.commutators[index]
        if element.left is None or element.right is None:
            return True
        left, right = self.commutators[element.left], self.commutators[element.right]
        if not left.word < right.word:
            return False
        if left.right is None:
            return True
        return self.commutators[left.right].word >= right.word


def _binomial(exponent: int, order: int) -> int:
    """Return C(e, k) for any integer e."""
    numerator = 1
    for step in range(order):
        numerator *= exponent - step
    return numerator // factorial(order)


def _outer(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.asarray(np.multiply.outer(left, right), dtype=object)


class Series:
    """Truncated noncommutative series Σ_k A_k with A_k of shape (D,)*k.

    Coefficients are Python integers held in object arrays.
    """

    def __init__(self, components: Sequence[np.ndarray]) -> None:
        """Store the homogeneous components, degree 0 first."""
        self.components = list(components)

    @classmethod
    def one(cls, letters: int, degree: int) -> "Series":
        """Return the constant series 1."""
        components = [
            np.zeros((letters,) * weight, dtype=object) for weight in range(degree + 1)
        ]
        components[0][()] = 1
        return cls(components)

    @classmethod
    def letter(cls, letters: int, degree: int, index: int) -> "Series":
        """Return 1 + X_index."""
        series = cls.one(letters, degree)
        if degree >= 1:
            series.components[1][index] = 1
        return series

    @property
    def degree(self) -> int:
        """Return the truncation degree."""
        return len(self.components) - 1

    def __mul__(self, other: "Series") -> "Series":
        """Multiply, dropping degrees above the truncation."""
        result = []
        for weight in range(self.degree + 1):
            total = _outer(self.components[0], other.components[weight])
            for split in range(1, weight + 1):
                total = total + _outer(
                    self.components[split], other.components[weight - split]
                )
            result.append(total)
        return Series(result)

    def __sub__(self, other: "Series") -> "Series":
        """Subtract component-wise."""
        return Series(
            [
                np.asarray(left - right, dtype=object)
                for left, right in zip(self.components, other.components)
            ]
        )

    def augmentation(self) -> "Series":
        """Return the series minus its constant term."""
        components = [component.copy() for component in self.components]
        components[0] = np.zeros((), dtype=object)
        return Series(components)

    def __eq__(self, other: object) -> bool:
        """Compare coefficients."""
        if not isinstance(other, Series):
            return NotImplemented
        return all(
            np.array_equal(left, right)
            for left, right in zip(self.components, other.components)
        )

    def substitute(self, permutation: np.ndarray) -> "Series":
        """Rename the letters X_a ↦ X_{permutation[a]}."""
        inverse = np.argsort(permutation)
        components = [self.components[0].copy()]
        for component in self.components[1:]:
            components.append(component[np.ix_(*([inverse] * component.ndim))])
        return Series(components)


class UnipotentPowers:
    """Powers (1 + A)^e = Σ_k C(e, k)·A^k of a unipotent series."""

    def __init__(self, series: Series) -> None:
        """Precompute A^k up to the truncation degree."""
        self.degree = series.degree
        augmented = series.augmentation()
        self.powers = [Series.one(self._letters(series), self.degree), augmented]
        for _ in range(2, self.degree + 1):
            self.powers.append(self.powers[-1] * augmented)

    @staticmethod
    def _letters(series: Series) -> int:
        return series.components[1].shape[0] if series.degree >= 1 else 0

    def power(self, exponent: int) -> Series:
        """Return the series raised to an integer exponent."""
        components = [component.copy() for component in self.powers[0].components]
        for order in range(1, min(self.degree, len(self.powers) - 1) + 1):
            coefficient = _binomial(exponent, order)
            if coefficient:
                for weight in range(1, self.degree + 1):
                    component = self.powers[order].components[weight]
                    components[weight] = components[weight] + coefficient * component
        return Series(components)


def weight_modulus(p: int, index: FilterIndex, weight: int) -> int:
    """Return the exponent modulus 𝓕^{(i,j)} imposes on weight-w basic commutators.

    p^{i+1−w} below weight j and p^{i−w} from weight j on, never below 1.
    """
    if weight < index.j:
        return int(p ** max(0, index.i + 1 - weight))
    return int(p ** max(0, index.i - weight))


class TruncatedFreeGroup:
    """The quotient 𝓕(d)/𝓕(d)^{(I,J)} of the free pro-p G-operator group.

    Generators x_{i,g} are indexed by a = i·|G| + g and G acts by
    g'·x_{i,g} = x_{i,g'g}. Basic commutators of weight ≥ I die, so the
    arithmetic runs in the free nilpotent group of class I − 1.

    Raises:
        CapExceeded: if I or D = |G|·d exceeds the configured caps.
    """

    def __init__(
        self,
        p: int,
        d: int,
        group: FiniteGroup,
        nu_plus_1: FilterIndex,
        config: Optional[ShrinklabConfig] = None,
    ) -> None:
        """Precompute the Hall basis, moduli and commutator series."""
        config = _config(config)
        self.p = p
        self.d = d
        self.group = group
        self.nu_plus_1 = nu_plus_1
        self.generators = group.order * d
        if nu_plus_1.i > config.max_weight:
            raise CapExceeded(
                f"Filtration index {nu_plus_1} exceeds max weight {config.max_weight}"
            )
        if self.generators > config.max_generators:
            raise CapExceeded(
                f"{self.generators} generators exceed the cap of "
                f"{config.max_generators}"
            )
        self.degree = nu_plus_1.i - 1
        self.hall = HallBasis(self.generators, self.degree)
        self.moduli = tuple(
            weight_modulus(p, nu_plus_1, element.weight) for element in self.hall
        )
        self._by_weight = {
            weight: self.hall.of_weight(weight) for weight in range(1, self.degree + 1)
        }
        self._powers: List[UnipotentPowers] = []
        for element in self.hall:
            if element.left is None or element.right is None:
                series = Series.letter(self.generators, self.degree, element.word[0])
            else:
                left, right = self._powers[element.left], self._powers[element.right]
                series = (
                    left.power(-1) * right.power(-1) * left.power(1) * right.power(1)
                )
            self._powers.append(UnipotentPowers(series))
        self._lie = [
            self._powers[element.index].powers[1].components[element.weight]
            for element in self.hall
        ]
        self.permutations = letter_permutations(group, self.generators)
        self._layers: Dict[FilterIndex, FpGModule] = {}
        log.debug(
            "Built truncation p=%s D=%s %s with %s basic commutators",
            p,
            self.generators,
            nu_plus_1,
            len(self.hall),
        )

    def __repr__(self) -> str:
        """Show the parameters."""
        return (
            f"TruncatedFreeGroup(p={self.p}, d={self.d}, {self.group!r}, "
            f"nu_plus_1={self.nu_plus_1})"
        )

    @property
    def order(self) -> int:
        """Return the order of the truncated group."""
        result = 1
        for modulus in self.moduli:
            result *= modulus
        return result

    def weight_moduli(self) -> Dict[int, int]:
        """Return the modulus of each surviving weight."""
        return {
            weight: weight_modulus(self.p, self.nu_plus_1, weight)
            for weight in self._by_weight
        }

    def word(self, exponents: Sequence[int]) -> "Word":
        """Return the word with the given Hall exponents."""
        return Word(self, tuple(int(exponent) for exponent in exponents))

    def identity(self) -> "Word":
        """Return the identity word."""
        return self.word([0] * len(self.hall))

    def basic(self, index: int) -> "Word":
        """Return the basic commutator with the given index."""
        exponents = [0] * len(self.hall)
        exponents[index] = 1
        return self.word(exponents)

    def generator(self, block: int, element: int = 0) -> "Word":
        """Return x_{i,g}."""
        return self.basic(self.hall.position[(block * self.group.order + element,)])

    def _check(self, *words: "Word") -> None:
        for word in words:
            if word.parent is not self:
                raise ParentMismatch(f"{word!r} belongs to another truncation")

    def series(self, word: "Word") -> Series:
        """Return the Magnus series of a word."""
        result = Series.one(self.generators, self.degree)
        for index, exponent in enumerate(word.exponents):
            if exponent:
                result = result * self._powers[index].power(exponent)
        return result

    def normal_form(self, series: Series) -> "Word":
        """Read off the Hall exponents of a unipotent series, weight by weight.

        The weight-w part is Σ e_c·P_c over the Lie polynomials P_c, and each
        P_c has its Lyndon word as smallest monomial with coefficient 1.
        """
        exponents = [0] * len(self.hall)
        current = series
        for weight, block in self._by_weight.items():
            residual = current.components[weight]
            for element in block:
                exponent = int(residual[element.word])
                if exponent:
                    residual = residual - exponent * self._lie[element.index]
                exponents[element.index] = exponent
            if np.any(residual != 0):
                raise ModelInconsistency(f"Weight {weight} part is not a Lie element")
            correction = Series.one(self.generators, self.degree)
            for element in reversed(block):
                if exponents[element.index]:
                    correction = correction * self._powers[element.index].power(
                        -exponents[element.index]
                    )
            current = correction * current
        return self.word(exponents)

    def multiply(self, left: "Word", right: "Word") -> "Word":
        """Return left·right."""
        self._check(left, right)
        return self.normal_form(left.series * right.series)

    def inverse(self, word: "Word") -> "Word":
        """Return word⁻¹."""
        self._check(word)
        result = Series.one(self.generators, self.degree)
        for index in reversed(range(len(word.exponents))):
            if word.exponents[index]:
                result = result * self._powers[index].power(-word.exponents[index])
        return self.normal_form(result)

    def power(self, word: "Word", exponent: int) -> "Word":
        """Return word^n by repeated squaring."""
        self._check(word)
        base = word if exponent >= 0 else self.inverse(word)
        exponent = abs(exponent)
        result = self.identity()
        while exponent:
            if exponent & 1:
                result = self.multiply(result, base)
            exponent >>= 1
            if exponent:
                base = self.multiply(base, base)
        return result

    def commutator(self, left: "Word", right: "Word") -> "Word":
        """Return [u, v] = u⁻¹v⁻¹uv."""
        self._check(left, right)
        inverse_left, inverse_right = self.inverse(left), self.inverse(right)
        series = inverse_left.series * inverse_right.series * left.series * right.series
        return self.normal_form(series)

    def bracket(self, words: Sequence["Word"]) -> "Word":
        """Return the right-normed bracket [w₁,[w₂,[…,w_j]]]."""
        result = words[-1]
        for word in reversed(words[:-1]):
            result = self.commutator(word, result)
        return result

    def g_act(self, element: int, word: "Word") -> "Word":
        """Apply g by permuting the generator letters and re-collecting."""
        self._check(word)
        if element == 0:
            return word
        return self.normal_form(word.series.substitute(self.permutations[element]))

    def check_index(self, index: FilterIndex) -> None:
        """Reject filtration indices beyond the truncation."""
        if index > self.nu_plus_1:
            raise IndexOutOfRange(
                f"{index} is beyond the truncation index {self.nu_plus_1}"
            )

    def filtration_member(self, word: "Word", index: FilterIndex) -> bool:
        """Tell whether word lies in 𝓕^{(μ)} by coordinate divisibility."""
        self._check(word)
        self.check_index(index)
        return all(
            exponent % weight_modulus(self.p, index, element.weight) == 0
            for element, exponent in zip(self.hall, word.exponents)
        )

    def layer_indices(self) -> List[FilterIndex]:
        """Return every ν whose layer 𝓔(d, ν) lives in the truncation."""
        indices = []
        index = FilterIndex(1, 1)
        while index.succ() <= self.nu_plus_1:
            indices.append(index)
            index = index.succ()
        return indices

    def _check_layer(self, index: FilterIndex) -> None:
        if index.succ() > self.nu_plus_1:
            raise IndexOutOfRange(
                f"Layer {index} needs {index.succ()} ≤ {self.nu_plus_1}"
            )

    def layer_word(self, index: FilterIndex, element: BasicCommutator) -> "Word":
        """Return the layer basis element c^{p^{i−j}}."""
        return self.power(self.basic(element.index), self.p ** (index.i - index.j))

    def layer_coords(self, word: "Word", index: FilterIndex) -> np.ndarray:
        """Return the coordinates of word in 𝓔(d, ν), a member of 𝓕^{(ν)}.

        Raises:
            IndexOutOfRange: if the layer is beyond the truncation or the word
                is not in 𝓕^{(ν)}.
        """
        self._check_layer(index)
        if not self.filtration_member(word, index):
            raise IndexOutOfRange(f"{word!r} is not in the filtration subgroup {index}")
        scale = self.p ** (index.i - index.j)
        return np.array(
            [
                (word.exponents[element.index] // scale) % self.p
                for element in self._by_weight.get(index.j, [])
            ],
            dtype=np.int64,
        )

    def layer_module(self, index: FilterIndex) -> FpGModule:
        """Return 𝓔(d, ν) spanned by p^{i−j}-th powers of weight-j basic commutators."""
        self._check_layer(index)
        if index in self._layers:
            return self._layers[index]
        basis = [
            self.layer_word(index, element)
            for element in self._by_weight.get(index.j, [])
        ]
        dim = len(basis)
        if not self.group.generators:
            module = FpGModule(
                self.p, self.group, np.eye(dim, dtype=np.int64)[None], f"E{index}"
            )
        else:
            matrices = [
                np.array(
                    [self.layer_coords(self.g_act(gen, word), index) for word in basis],
                    dtype=np.int64,
                ).T.reshape(dim, dim)
                for gen in self.group.generators
            ]
            module = from_generators(self.group, self.p, matrices, name=f"E{index}")
        self._layers[index] = module
        return module

    def random_word(self, rng: np.random.Generator) -> "Word":
        """Return a uniformly random element."""
        return self.word([int(rng.integers(0, modulus)) for modulus in self.moduli])

    def random_member(self, index: FilterIndex, rng: np.random.Generator) -> "Word":
        """Return a uniformly random element of 𝓕^{(μ)}."""
        self.check_index(index)
        exponents = []
        for element, modulus in zip(self.hall, self.moduli):
            step = weight_modulus(self.p, index, element.weight)
            exponents.append(int(rng.integers(0, modulus // step)) * step)
        return self.word(exponents)


@dataclass(frozen=True, eq=False)
class Word:
    """Element of a truncation in Hall normal form, exponents reduced by the moduli."""

    parent: TruncatedFreeGroup
    exponents: Tuple[int, ...]

    def __post_init__(self) -> None:
        """Reduce the exponents."""
        if len(self.exponents) != len(self.parent.moduli):
            raise ParentMismatch(
                f"Word has {len(self.exponents)} exponents, "
                f"expected {len(self.parent.moduli)}"
            )
        reduced = tuple(
            exponent % modulus
            for exponent, modulus in zip(self.exponents, self.parent.moduli)
        )
        object.__setattr__(self, "exponents", reduced)

    def __eq__(self, other: object) -> bool:
        """Compare parents and exponents."""
        if not isinstance(other, Word):
            return NotImplemented
        return self.parent is other.parent and self.exponents == other.exponents

    def __hash__(self) -> int:
        """Hash the exponents."""
        return hash((id(self.parent), self.exponents))

    def __repr__(self) -> str:
        """Show the nonzero exponents by bracket."""
        factors = [
            f"{self.parent.hall.bracket_text(index)}^{exponent}"
            for index, exponent in enumerate(self.exponents)
            if exponent
        ]
        return "Word(" + (" ".join(factors) or "1") + ")"

    def __mul__(self, other: "Word") -> "Word":
        """Multiply in the parent truncation."""
        return self.parent.multiply(self, other)

    @cached_property
    def series(self) -> Series:
        """Return the Magnus series."""
        return self.parent.series(self)

    def is_identity(self) -> bool:
        """Tell whether every exponent vanishes."""
        return not any(self.exponents)


def build_truncation(
    p: int,
    d: int,
    group: FiniteGroup,
    nu_plus_1: FilterIndex,
    config: Optional[ShrinklabConfig] = None,
) -> TruncatedFreeGroup:
    """Build 𝓕(d)/𝓕(d)^{(ν+1)} and run the collection consistency checks."""
    truncation = TruncatedFreeGroup(p, d, group, nu_plus_1, config)
    check_consistency(
        truncation, np.random.default_rng(_config(config).seed), samples=20
    )
    return truncation


def check_consistency(
    truncation: TruncatedFreeGroup, rng: np.random.Generator, samples: int = 1000
) -> None:
    """Check associativity on random triples and the generator orders.

    Raises:
        ModelInconsistency: if a check fails.
    """
    for _ in range(samples):
        first, second, third = (truncation.random_word(rng) for _ in range(3))
        if (first * second) * third != first * (second * third):
            raise ModelInconsistency(
                f"Collection is not associative on {first!r}, {second!r}, {third!r}"
            )
    if not truncation.hall.of_weight(1) or truncation.degree == 0:
        return
    order = truncation.moduli[0]
    generator = truncation.basic(0)
    if not truncation.power(generator, order).is_identity():
        raise ModelInconsistency(f"x_0 does not have order {order}")
    if truncation.power(generator, order // truncation.p).is_identity():
        raise ModelInconsistency(f"x_0 has order smaller than {order}")


def layer_module(truncation: TruncatedFreeGroup, index: FilterIndex) -> FpGModule:
    """Return 𝓔(d, ν) of a truncation."""
    return truncation.layer_module(index)


def psi_nu_matrix(truncation: TruncatedFreeGroup, index: FilterIndex) -> ModuleHom:
    """Return θ_ν: V^{⊗j} → 𝓔(d, ν), x̄₁ ⊗ … ⊗ x̄_j ↦ [x₁,[x₂,[…,x_j]]]^{p^{i−j}}.

    Basis tensors are enumerated row-major, matching tensor_power.

    Raises:
        SurjectivityFailure: if the assembled matrix is not onto.
    """
    target = truncation.layer_module(index)
    source = tensor_power(truncation.layer_module(FilterIndex(1, 1)), index.j)
    scale = truncation.p ** (index.i - index.j)
    letters = [
        truncation.basic(truncation.hall.position[(a,)])
        for a in range(truncation.generators)
    ]
    columns = []
    for letter_indices in product(range(truncation.generators), repeat=index.j):
        word = truncation.bracket([letters[a] for a in letter_indices])
        columns.append(truncation.layer_coords(truncation.power(word, scale), index))
    matrix = np.array(columns, dtype=np.int64).T.reshape(target.dim, source.dim)
    theta = ModuleHom(source, target, matrix)
    if theta.rank() != target.dim:
        raise SurjectivityFailure(
            f"θ at {index} has rank {theta.rank()}, "
            f"the layer has dimension {target.dim}"
        )
    return theta


def letter_permutations(group: FiniteGroup, generators: int) -> np.ndarray:
    """Return perms[g, a], the letter g·x_a, for letters a = i·|G| + h."""
    blocks = np.arange(generators) // group.order
    members = np.arange(generators) % group.order
    return blocks[None, :] * group.order + group.mul[:, members]


def letter_module(
    p: int, d: int, group: FiniteGroup, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return V_d = 𝓕(d)/𝓕(d)², the permutation module F_p[G]^d on the letters."""
    return permutation_module(
        group, p, letter_permutations(group, group.order * d), f"V{d}", config
    )


def block_inclusion(inner: FpGModule, outer: FpGModule) -> ModuleHom:
    """Return V_r → V_m sending the letters of V_r to the first letters of V_m."""
    if inner.dim > outer.dim:
        raise GroupMismatch(f"Can't embed {inner.dim} letters into {outer.dim}")
    return ModuleHom(inner, outer, np.eye(outer.dim, inner.dim, dtype=np.int64))


class LieLayer:
    """The layer 𝓔(d, ν) read off the free Lie algebra on D = |G|·d letters.

    The basis is the weight-j part of the Hall basis, each element standing
    for c^{p^{i−j}}. A Lie element of V^{⊗j} has the coordinates of its
    expansion in the Lie polynomials P_c, read at the Lyndon monomials where
    the expansion is unitriangular. Nothing is collected in the group, so D
    may exceed the cap on full truncations.

    Raises:
        CapExceeded: if j exceeds max_weight or D^j exceeds max_layer_tensor.
    """

    def __init__(
        self,
        p: int,
        d: int,
        group: FiniteGroup,
        index: FilterIndex,
        config: Optional[ShrinklabConfig] = None,
    ) -> None:
        """Check the caps and lay out the letters."""
        self.config = _config(config)
        self.p = p
        self.d = d
        self.group = group
        self.index = index
        self.generators = group.order * d
        self.size = self.generators**index.j
        if index.j > self.config.max_weight:
            raise CapExceeded(
                f"Layer {index} needs weight {index.j} > {self.config.max_weight}"
            )
        if self.size > self.config.max_layer_tensor:
            raise CapExceeded(
                f"Layer {index} on {self.generators} letters needs tensors of "
                f"length {self.size} > {self.config.max_layer_tensor}"
            )
        self.permutations = letter_permutations(group, self.generators)
        self.letters = letter_module(p, d, group, self.config)

    def __repr__(self) -> str:
        """Show the parameters."""
        return f"LieLayer(p={self.p}, d={self.d}, {self.group!r}, index={self.index})"

    @cached_property
    def _basis(self) -> Tuple[Tuple[LyndonWord, ...], np.ndarray]:
        hall = HallBasis(self.generators, self.index.j)
        polynomials: List[np.ndarray] = []
        for element in hall:
            if element.left is None or element.right is None:
                polynomial = np.zeros(self.generators, dtype=np.int64)
                polynomial[element.word[0]] = 1
            else:
                left, right = polynomials[element.left], polynomials[element.right]
                polynomial = np.mod(
                    np.outer(left, right).reshape(-1)
                    - np.outer(right, left).reshape(-1),
                    self.p,
                )
            polynomials.append(polynomial)
        basis = hall.of_weight(self.index.j)
        rows = [polynomials[element.index] for element in basis]
        matrix = np.array(rows, dtype=np.int64).reshape(len(basis), self.size)
        return tuple(element.word for element in basis), matrix

    @property
    def words(self) -> Tuple[LyndonWord, ...]:
        """Return the Lyndon words of the basis, in basis order."""
        return self._basis[0]

    @property
    def polynomials(self) -> np.ndarray:
        """Return P_c over F_p as rows of length D^j, one per basis element."""
        return self._basis[1]

    @property
    def dim(self) -> int:
        """Return the number of weight-j basic commutators."""
        return int(self.polynomials.shape[0])

    @cached_property
    def rows(self) -> np.ndarray:
        """Return the positions of the Lyndon monomials in V^{⊗j}."""
        places = self.generators ** np.arange(self.index.j - 1, -1, -1)
        return np.array(
            [int(np.dot(word, places)) for word in self.words], dtype=np.int64
        )

    @cached_property
    def _reader(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((0, 0), dtype=np.int64)
        return inverse(self.polynomials[:, self.rows].T, self.p)

    def coords(self, tensors: np.ndarray) -> np.ndarray:
        """Return the layer coordinates of Lie elements given as columns.

        Raises:
            ModelInconsistency: if a column is not in the span of the P_c.
        """
        tensors = as_fp(tensors, self.p).reshape(self.size, -1)
        coords = np.mod(self._reader @ tensors[self.rows], self.p)
        if not np.array_equal(np.mod(self.polynomials.T @ coords, self.p), tensors):
            raise ModelInconsistency(f"A tensor is not a Lie element of {self!r}")
        return coords

    def _contract(self, matrix: np.ndarray) -> np.ndarray:
        """Apply the letter map matrix to every factor of every P_c."""
        shape = (self.dim,) + (self.generators,) * self.index.j
        tensors = self.polynomials.reshape(shape)
        for axis in range(1, self.index.j + 1):
            tensors = np.mod(
                np.moveaxis(np.tensordot(matrix, tensors, axes=([1], [axis])), 0, axis),
                self.p,
            )
        return tensors.reshape(self.dim, -1)

    @cached_property
    def module(self) -> FpGModule:
        """Return 𝓔(d, ν) with G permuting the letters."""
        name = f"E{self.index}"
        if not self.group.generators:
            identity = np.eye(self.dim, dtype=np.int64)[None]
            return FpGModule(self.p, self.group, identity, name)
        matrices = [
            self.coords(self._contract(self.letters.rho[gen]).T)
            for gen in self.group.generators
        ]
        return from_generators(self.group, self.p, matrices, name, self.config)

    @cached_property
    def theta(self) -> ModuleHom:
        """Return θ_ν: V^{⊗j} → 𝓔(d, ν), x_{a₁} ⊗ … ⊗ x_{a_j} ↦ [x_{a₁},[…,x_{a_j}]].

        Only the Lyndon rows of the expanded brackets are formed.

        Raises:
            SurjectivityFailure: if the matrix is not onto.
        """
        letters, j = self.generators, self.index.j
        columns = np.arange(self.size, dtype=np.int64)
        digits = [columns // letters ** (j - 1 - place) % letters for place in range(j)]
        terms = [(digits[-1], 1)]
        for length, letter in enumerate(reversed(digits[:-1]), start=1):
            terms = [
                (letter * letters**length + flat, sign) for flat, sign in terms
            ] + [(flat * letters + letter, -sign) for flat, sign in terms]
        lookup = np.full(self.size, -1, dtype=np.int64)
        lookup[self.rows] = np.arange(self.dim)
        expanded = np.zeros((self.dim, self.size), dtype=np.int64)
        for flat, sign in terms:
            hits = lookup[flat]
            kept = hits >= 0
            np.add.at(expanded, (hits[kept], columns[kept]), sign)
        matrix = np.mod(self._reader @ np.mod(expanded, self.p), self.p)
        source = tensor_power(self.letters, j, self.config)
        theta = ModuleHom(source, self.module, matrix)
        if theta.rank() != self.dim:
            raise SurjectivityFailure(
                f"θ at {self.index} has rank {theta.rank()}, "
                f"the layer has dimension {self.dim}"
            )
        return theta

    def induced(
        self, linear: ModuleHom, target: "LieLayer", verify: bool = True
    ) -> ModuleHom:
        """Return ψ_*: 𝓔(d, ν) → 𝓔(d', ν) of a letter map ψ̄: V_d → V_{d'}.

        ψ_* sends P_c to the coordinates of (ψ̄^{⊗j}) P_c. With verify set the
        square ψ_* ∘ θ = θ ∘ ψ̄^{⊗j} is checked as well.

        Raises:
            GroupMismatch: if the layers don't share p, G and ν.
            ModelInconsistency: if the square does not commute.
        """
        if (
            self.p != target.p
            or self.group is not target.group
            or self.index != target.index
        ):
            raise GroupMismatch(f"{self!r} and {target!r} differ in p, G or ν")
        matrix = np.asarray(linear.matrix, dtype=np.int64)
        images = self._contract(matrix).T if self.dim else np.zeros((target.size, 0))
        layer_map = ModuleHom(self.module, target.module, target.coords(images))
        if verify:
            power = reduce(np.kron, [matrix] * self.index.j)
            left = np.mod(layer_map.matrix @ self.theta.matrix, self.p)
            right = np.mod(target.theta.matrix @ power, self.p)
            if not np.array_equal(left, right):
                raise ModelInconsistency(
                    f"Induced map on the layer {self.index} does not commute with θ"
                )
        return layer_map


@dataclass(frozen=True, eq=False)
class OperatorHom:
    """G-operator homomorphism between truncations, given on the basic commutators."""

    source: TruncatedFreeGroup
    target: TruncatedFreeGroup
    linear: ModuleHom
    images: Tuple[Word, ...]

    def apply(self, word: Word) -> Word:
        """Return the image of a word of the source truncation."""
        if word.parent is not self.source:
            raise ParentMismatch(f"{word!r} is not a word of the source truncation")
        result = self.target.identity()
        for image, exponent in zip(self.images, word.exponents):
            if exponent:
                result = result * self.target.power(image, exponent)
        return result

    def layer_map(self, index: FilterIndex) -> ModuleHom:
        """Return ψ_*: 𝓔(m, ν) → 𝓔(n, ν)."""
        source = self.source.layer_module(index)
        target = self.target.layer_module(index)
        columns = [
            self.target.layer_coords(
                self.apply(self.source.layer_word(index, element)), index
            )
            for element in self.source.hall.of_weight(index.j)
        ]
        matrix = np.array(columns, dtype=np.int64).T.reshape(target.dim, source.dim)
        return ModuleHom(source, target, matrix)

    def check_layer(self, index: FilterIndex) -> ModuleHom:
        """Check ψ_* ∘ θ_ν(m) = θ_ν(n) ∘ ψ̄^{⊗j} and return ψ_*.

        Raises:
            ModelInconsistency: if the square does not commute.
        """
        induced = self.layer_map(index)
        power = reduce(np.kron, [self.linear.matrix] * index.j)
        left = np.mod(
            induced.matrix @ psi_nu_matrix(self.source, index).matrix, self.source.p
        )
        right = np.mod(psi_nu_matrix(self.target, index).matrix @ power, self.source.p)
        if not np.array_equal(left, right):
            raise ModelInconsistency(
                f"Induced map on the layer {index} does not commute with θ"
            )
        return induced

    def verify(self) -> None:
        """Check the compatibility square on every layer of the truncation."""
        for index in self.source.layer_indices():
            self.check_layer(index)

    def compose(self, first: "OperatorHom") -> "OperatorHom":
        """Return self ∘ first."""
        if first.target is not self.source:
            raise ParentMismatch(
                "Composable operator maps must share the middle truncation"
            )
        return OperatorHom(
            first.source,
            self.target,
            self.linear.compose(first.linear),
            tuple(self.apply(image) for image in first.images),
        )


def _check_compatible(source: TruncatedFreeGroup, target: TruncatedFreeGroup) -> None:
    if (
        source.p != target.p
        or source.group is not target.group
        or source.nu_plus_1 != target.nu_plus_1
    ):
        raise GroupMismatch(
            f"{source!r} and {target!r} differ in p, G or the truncation index"
        )


def lift_operator_hom(
    psi_bar: ModuleHom,
    source: TruncatedFreeGroup,
    target: TruncatedFreeGroup,
    require_surjective: bool = True,
    verify: bool = True,
) -> OperatorHom:
    """Extend an equivariant map 𝓕(m)/𝓕(m)² → 𝓕(n)/𝓕(n)² to the truncations.

    x_{i,1} goes to ∏_b x_b^{ψ̄[b, a]} over the target letters in order and
    x_{i,g} to its g-translate. Commutators follow from the letters.

    Raises:
        GroupMismatch: if the truncations don't share p, G and ν+1.
        NotSurjective: if ψ̄ is not onto and require_surjective is set.
        NotEquivariant: if ψ̄ does not commute with the letter permutation.
    """
    _check_compatible(source, target)
    linear = ModuleHom(
        source.layer_module(FilterIndex(1, 1)),
        target.layer_module(FilterIndex(1, 1)),
        psi_bar.matrix,
    )
    if require_surjective and not linear.is_surjective():
        raise NotSurjective(f"ψ̄ has rank {linear.rank()} < {target.generators}")
    letters = [
        target.basic(target.hall.position[(b,)]) for b in range(target.generators)
    ]
    order = source.group.order
    images: List[Word] = []
    for element in source.hall:
        if element.left is None or element.right is None:
            block, member = divmod(element.word[0], order)
            base = target.identity()
            for letter, exponent in zip(letters, linear.matrix[:, block * order]):
                if exponent:
                    base = base * target.power(letter, int(exponent))
            images.append(target.g_act(member, base))
        else:
            images.append(
                target.commutator(images[element.left], images[element.right])
            )
    lifted = OperatorHom(source, target, linear, tuple(images))
    if verify:
        lifted.verify()
    log.debug(
        "Lifted a map of %s letters onto %s letters",
        source.generators,
        target.generators,
    )
    return lifted
