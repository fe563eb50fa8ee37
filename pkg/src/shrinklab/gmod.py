"""Finite dimensional F_p[G]-modules with explicit action matrices.

A module stores rho with shape (|G|, dim, dim); rho[g] acts on column vectors.
Tensor bases are row-major in the factor indices.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence

import numpy as np

from shrinklab.exceptions import (
    CapExceeded,
    DimensionMismatch,
    GroupMismatch,
    NotEquivariant,
    RangeExceeded,
)
from shrinklab.fgroup import FiniteGroup, Subgroup
from shrinklab.linalg import as_fp, kernel, rank
from shrinklab.model import ShrinklabConfig

log = logging.getLogger(__name__)

Character = Sequence[int]


def _config(config: Optional[ShrinklabConfig]) -> ShrinklabConfig:
    return config if config is not None else ShrinklabConfig()


@dataclass(frozen=True, eq=False)
class FpGModule:
    """Representation of a finite group on F_p^dim.

    Attributes:
        p: Prime of the coefficient field.
        group: Acting group.
        rho: Action matrices of every group element.
        name: Optional label used in reports.
    """

    p: int
    group: FiniteGroup
    rho: np.ndarray
    name: Optional[str] = None

    def __post_init__(self) -> None:
        """Reduce the matrices and check their shape."""
        rho = as_fp(self.rho, self.p)
        square = rho.ndim == 3 and rho.shape[1] == rho.shape[2]
        if not square or rho.shape[0] != self.group.order:
            raise DimensionMismatch(
                f"Action array has shape {rho.shape}, "
                f"expected ({self.group.order}, d, d)"
            )
        object.__setattr__(self, "rho", rho)

    def __repr__(self) -> str:
        """Show the label, dimension and group."""
        name = self.name or "?"
        return f"FpGModule({name}, dim={self.dim}, p={self.p}, {self.group!r})"

    @property
    def dim(self) -> int:
        """Return the dimension over F_p."""
        return int(self.rho.shape[1])

    @property
    def identity(self) -> np.ndarray:
        """Return the identity matrix of the module."""
        return np.eye(self.dim, dtype=np.int64)

    def act(self, element: int, vector: np.ndarray) -> np.ndarray:
        """Return element·vector."""
        return np.mod(self.rho[element] @ vector, self.p)

    def is_trivial(self) -> bool:
        """Tell whether every element acts as the identity."""
        return bool(np.all(self.rho == self.identity[None]))

    def check_relations(self) -> None:
        """Check rho(a·g) = rho(a)·rho(g) for every a and generator g.

        Raises:
            NotEquivariant: if the matrices are not a representation.
        """
        if not np.array_equal(self.rho[0], self.identity):
            raise NotEquivariant("The identity does not act trivially")
        for gen in self.group.generators:
            products = np.mod(self.rho @ self.rho[gen], self.p)
            if not np.array_equal(self.rho[self.group.mul[:, gen]], products):
                raise NotEquivariant(
                    f"Action matrices break the relations at generator {gen}"
                )


def _check_cap(group: FiniteGroup, dim: int, config: Optional[ShrinklabConfig]) -> None:
    cap = _config(config).module_entry_cap
    if group.order * dim * dim > cap:
        raise CapExceeded(
            f"A module of dim {dim} over a group of order {group.order} "
            f"exceeds the cap of "
            f"{cap} matrix entries"
        )


def from_generators(
    group: FiniteGroup,
    p: int,
    matrices: Sequence[np.ndarray],
    name: Optional[str] = None,
    config: Optional[ShrinklabConfig] = None,
) -> FpGModule:
    """Build a module from the matrices of the group generators, in generator order.

    Raises:
        NotEquivariant: if the matrices don't satisfy the group relations.
    """
    if len(matrices) != len(group.generators):
        raise DimensionMismatch(
            f"Expected {len(group.generators)} generator matrices, got {len(matrices)}"
        )
    dim = int(np.asarray(matrices[0]).shape[0]) if matrices else 1
    _check_cap(group, dim, config)
    gens = [as_fp(matrix, p) for matrix in matrices]
    rho = np.zeros((group.order, dim, dim), dtype=np.int64)
    known = np.zeros(group.order, dtype=bool)
    rho[0] = np.eye(dim, dtype=np.int64)
    known[0] = True
    frontier = [0]
    while frontier:
        next_frontier = []
        for element in frontier:
            for gen, matrix in zip(group.generators, gens):
                target = int(group.mul[element, gen])
                if not known[target]:
                    rho[target] = np.mod(rho[element] @ matrix, p)
                    known[target] = True
                    next_frontier.append(target)
        frontier = next_frontier
    module = FpGModule(p, group, rho, name)
    module.check_relations()
    return module


def trivial_module(group: FiniteGroup, p: int, dim: int = 1) -> FpGModule:
    """Return F_p^dim with trivial action."""
    rho = np.broadcast_to(np.eye(dim, dtype=np.int64), (group.order, dim, dim)).copy()
    return FpGModule(p, group, rho, f"trivial({dim})")


def character_module(group: FiniteGroup, p: int, values: Character) -> FpGModule:
    """Return the one dimensional module where generator k acts by values[k]."""
    if any(value % p == 0 for value in values):
        raise DimensionMismatch("A character takes values in F_p^×")
    return from_generators(
        group, p, [np.array([[value]]) for value in values], name=f"chi{list(values)}"
    )


def permutation_module(
    group: FiniteGroup,
    p: int,
    points: np.ndarray,
    name: Optional[str] = None,
    config: Optional[ShrinklabConfig] = None,
) -> FpGModule:
    """Return the permutation module of an action given by points[g, x] = g·x."""
    points = np.asarray(points, dtype=np.int64)
    size = points.shape[1]
    _check_cap(group, size, config)
    rho = np.zeros((group.order, size, size), dtype=np.int64)
    elements = np.repeat(np.arange(group.order), size)
    columns = np.tile(np.arange(size), group.order)
    rho[elements, points.reshape(-1), columns] = 1
    return FpGModule(p, group, rho, name)


def regular_module(
    group: FiniteGroup, p: int, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return F_p[G] with basis indexed by group elements and left translation."""
    return permutation_module(group, p, group.mul, "regular", config)


def augmentation_ideal(
    group: FiniteGroup, p: int, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return I_G with basis b_h = h − 1 for h ≠ 1, in element order.

    The action is g·b_h = b_{gh} − b_g with b_1 = 0.
    """
    dim = group.order - 1
    _check_cap(group, dim, config)
    rho = np.zeros((group.order, dim, dim), dtype=np.int64)
    for element in range(group.order):
        for basis in range(1, group.order):
            image = int(group.mul[element, basis])
            if image != 0:
                rho[element, image - 1, basis - 1] += 1
            if element != 0:
                rho[element, element - 1, basis - 1] -= 1
    return FpGModule(p, group, rho, "aug")


def _same_category(*modules: FpGModule) -> None:
    first = modules[0]
    for module in modules[1:]:
        if module.group is not first.group or module.p != first.p:
            raise GroupMismatch(
                f"{module!r} and {first!r} live over different groups or primes"
            )


def tensor_module(
    left: FpGModule, right: FpGModule, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return left ⊗ right with the diagonal action."""
    _same_category(left, right)
    dim = left.dim * right.dim
    _check_cap(left.group, dim, config)
    rho = np.einsum("gij,gkl->gikjl", left.rho, right.rho).reshape(
        left.group.order, dim, dim
    )
    return FpGModule(left.p, left.group, rho, f"tensor({left.name},{right.name})")


def tensor_power(
    module: FpGModule, exponent: int, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return module^{⊗s}; the zeroth power is the trivial one dimensional module."""
    if exponent < 0:
        raise RangeExceeded("Use dual_module for negative tensor powers")
    if exponent == 0:
        return trivial_module(module.group, module.p)
    return reduce(
        lambda left, right: tensor_module(left, right, config), [module] * exponent
    )


def dual_module(module: FpGModule) -> FpGModule:
    """Return Hom(M, F_p) with g acting by rho(g⁻¹)ᵀ."""
    rho = module.rho[module.group.inv].transpose(0, 2, 1)
    return FpGModule(module.p, module.group, rho, f"dual({module.name})")


def direct_sum_of(modules: Sequence[FpGModule]) -> FpGModule:
    """Return the block diagonal sum of modules over one group."""
    _same_category(*modules)
    first = modules[0]
    dim = sum(module.dim for module in modules)
    rho = np.zeros((first.group.order, dim, dim), dtype=np.int64)
    offset = 0
    for module in modules:
        rho[:, offset : offset + module.dim, offset : offset + module.dim] = module.rho
        offset += module.dim
    return FpGModule(
        first.p, first.group, rho, "+".join(str(module.name) for module in modules)
    )


def direct_sum(module: FpGModule, copies: int) -> FpGModule:
    """Return the sum of copies of module."""
    if copies == 0:
        return FpGModule(
            module.p, module.group, np.zeros((module.group.order, 0, 0)), "zero"
        )
    return direct_sum_of([module] * copies)


def twist(module: FpGModule, character: Character) -> FpGModule:
    """Return module ⊗ χ⁻¹: every rho(g) multiplied by χ(g)⁻¹."""
    inverse = dual_module(character_module(module.group, module.p, character))
    return FpGModule(
        module.p,
        module.group,
        module.rho * inverse.rho[:, 0, 0][:, None, None],
        f"twist({module.name},{list(character)})",
    )


def coefficient_module(
    group: FiniteGroup, p: int, degree: int, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return A_k = I_G^{⊗−(k+1)}; negative powers are duals of positive ones.

    Raises:
        RangeExceeded: if |k| is above the configured shift range.
    """
    shift_range = _config(config).shift_range
    if abs(degree) > shift_range:
        raise RangeExceeded(f"Degree {degree} is outside -{shift_range}..{shift_range}")
    exponent = -(degree + 1)
    ideal = augmentation_ideal(group, p, config)
    if exponent >= 0:
        return tensor_power(ideal, exponent, config)
    return dual_module(tensor_power(ideal, -exponent, config))


def shift_coefficients(
    module: FpGModule, degree: int, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return M ⊗ A_k."""
    coefficients = coefficient_module(module.group, module.p, degree, config)
    shifted = tensor_module(module, coefficients, config)
    return FpGModule(
        shifted.p, shifted.group, shifted.rho, f"shift({module.name},{degree})"
    )


def _relations(module: FpGModule) -> List[np.ndarray]:
    return [module.rho[gen] - module.identity for gen in module.group.generators]


def invariants(module: FpGModule) -> np.ndarray:
    """Return a basis of M^G as rows."""
    if not module.group.generators or module.dim == 0:
        return np.eye(module.dim, dtype=np.int64)
    return kernel(np.vstack(_relations(module)), module.p)


def coinvariants(module: FpGModule) -> np.ndarray:
    """Return the projection M → M_G as a (dim M_G) × (dim M) matrix.

    Its rows are the functionals vanishing on every (g − 1)v, so the trivial
    module projects by the identity.
    """
    if not module.group.generators or module.dim == 0:
        return np.eye(module.dim, dtype=np.int64)
    return kernel(np.vstack([relation.T for relation in _relations(module)]), module.p)


def norm_map(module: FpGModule) -> np.ndarray:
    """Return N_G = Σ_g rho(g)."""
    return np.mod(module.rho.sum(axis=0), module.p)


@dataclass(frozen=True, eq=False)
class ModuleHom:
    """Equivariant linear map, matrix of shape (dim target, dim source)."""

    source: FpGModule
    target: FpGModule
    matrix: np.ndarray

    def __post_init__(self) -> None:
        """Check shapes and equivariance on the generators."""
        _same_category(self.source, self.target)
        matrix = as_fp(self.matrix, self.source.p).reshape(
            self.target.dim, self.source.dim
        )
        object.__setattr__(self, "matrix", matrix)
        p = self.source.p
        for gen in self.source.group.generators:
            left = np.mod(matrix @ self.source.rho[gen], p)
            right = np.mod(self.target.rho[gen] @ matrix, p)
            if not np.array_equal(left, right):
                raise NotEquivariant(f"Map does not commute with generator {gen}")

    @classmethod
    def identity(cls, module: FpGModule) -> "ModuleHom":
        """Return the identity map."""
        return cls(module, module, module.identity)

    def apply(self, vector: np.ndarray) -> np.ndarray:
        """Return the image of a vector."""
        return np.mod(self.matrix @ vector, self.source.p)

    def rank(self) -> int:
        """Return the rank over F_p."""
        return rank(self.matrix, self.source.p) if self.matrix.size else 0

    def is_surjective(self) -> bool:
        """Tell whether the map is onto."""
        return self.rank() == self.target.dim

    def is_injective(self) -> bool:
        """Tell whether the map is one to one."""
        return self.rank() == self.source.dim

    def compose(self, first: "ModuleHom") -> "ModuleHom":
        """Return self ∘ first."""
        if first.target.dim != self.source.dim:
            raise DimensionMismatch("Composable maps must share the middle module")
        return ModuleHom(
            first.source, self.target, np.mod(self.matrix @ first.matrix, self.source.p)
        )

    def tensor(self, other: "ModuleHom") -> "ModuleHom":
        """Return self ⊗ other."""
        return ModuleHom(
            tensor_module(self.source, other.source),
            tensor_module(self.target, other.target),
            np.kron(self.matrix, other.matrix),
        )

    def dual(self) -> "ModuleHom":
        """Return the transpose map between duals."""
        return ModuleHom(
            dual_module(self.target), dual_module(self.source), self.matrix.T
        )

    def direct_sum(self, other: "ModuleHom") -> "ModuleHom":
        """Return the block diagonal map."""
        matrix = np.zeros(
            (self.target.dim + other.target.dim, self.source.dim + other.source.dim),
            dtype=np.int64,
        )
        matrix[: self.target.dim, : self.source.dim] = self.matrix
        matrix[self.target.dim :, self.source.dim :] = other.matrix
        return ModuleHom(
            direct_sum_of([self.source, other.source]),
            direct_sum_of([self.target, other.target]),
            matrix,
        )


def hom_space(source: FpGModule, target: FpGModule) -> List[np.ndarray]:
    """Return a basis of Hom_G(source, target) as (dim target) × (dim source) matrices.

    With row-major vectorization X·A − B·X becomes (I ⊗ Aᵀ − B ⊗ I)·vec(X).
    """
    _same_category(source, target)
    if source.dim == 0 or target.dim == 0:
        return []
    identity_source = source.identity
    identity_target = target.identity
    equations = [
        np.kron(identity_target, source.rho[gen].T) - np.kron(
            target.rho[gen], identity_source
        )
        for gen in source.group.generators
    ]
    size = source.dim * target.dim
    if not equations:
        equations = [np.zeros((1, size), dtype=np.int64)]
    basis = kernel(np.vstack(equations), source.p)
    return [vector.reshape(target.dim, source.dim) for vector in basis]


def find_isomorphism(
    source: FpGModule, target: FpGModule, seed: int = 0, attempts: int = 64
) -> Optional[ModuleHom]:
    """Search for an equivariant isomorphism among basis maps then random ones."""
    if source.dim != target.dim:
        return None
    basis = hom_space(source, target)
    if source.dim == 0:
        return ModuleHom(source, target, np.zeros((0, 0), dtype=np.int64))
    if not basis:
        return None
    candidates = list(basis)
    rng = np.random.default_rng(seed)
    for _ in range(attempts):
        weights = rng.integers(0, source.p, size=len(basis))
        candidates.append(
            np.mod(np.tensordot(weights, np.array(basis), axes=1), source.p)
        )
    for candidate in candidates:
        if rank(candidate, source.p) == source.dim:
            return ModuleHom(source, target, candidate)
    log.debug("No isomorphism found among %s candidates", len(candidates))
    return None


def restrict(module: FpGModule, subgroup: Subgroup) -> FpGModule:
    """Return the restriction to a subgroup, acting through subgroup.as_group."""
    if subgroup.parent is not module.group:
        raise GroupMismatch("The subgroup must live in the acting group")
    rho = module.rho[list(subgroup.elements)]
    return FpGModule(module.p, subgroup.as_group, rho, f"res({module.name})")


def coset_action(subgroup: Subgroup) -> np.ndarray:
    """Return points[g, c] for the left cosets gH ordered by minimal representative."""
    group = subgroup.parent
    members = list(subgroup.elements)
    label = np.full(group.order, -1, dtype=np.int64)
    representatives: List[int] = []
    for element in range(group.order):
        if label[element] < 0:
            label[group.mul[element, members]] = len(representatives)
            representatives.append(element)
    return label[group.mul[:, representatives]]


def induced_trivial(
    subgroup: Subgroup, p: int, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Return Ind_H^G 𝟙, the permutation module on the cosets of H."""
    return permutation_module(subgroup.parent, p, coset_action(subgroup), "ind", config)
