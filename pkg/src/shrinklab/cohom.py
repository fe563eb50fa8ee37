"""Tate cohomology of finite groups in degrees -2..2.

Cochains are inhomogeneous and stored as flat vectors: a 1-cochain f sits at
f[g·d + i], a 2-cochain at f[(g·n + h)·d + i]. Homology uses the bar complex
with the right action m·g = g⁻¹m, so a 1-chain Σ m_g[g] is stored the same way
as a 1-cochain. Ĥ⁰ and Ĥ⁻¹ live in M itself.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from shrinklab.exceptions import (
    CapExceeded,
    DimensionMismatch,
    GroupMismatch,
    InternalVerifyFail,
    ModelInconsistency,
)
from shrinklab.fgroup import FiniteGroup, elementary_quotient, semidirect_product
from shrinklab.gmod import (
    FpGModule,
    ModuleHom,
    augmentation_ideal,
    dual_module,
    norm_map,
    regular_module,
    shift_coefficients,
    tensor_module,
    twist,
)
from shrinklab.linalg import independent_rows, inverse, kernel, rank, row_basis
from shrinklab.model import ShrinklabConfig

log = logging.getLogger(__name__)

DEGREES = (-2, -1, 0, 1, 2)


def _config(config: Optional[ShrinklabConfig]) -> ShrinklabConfig:
    return config if config is not None else ShrinklabConfig()


def chain_dim(module: FpGModule, degree: int) -> int:
    """Return the dimension of the (co)chain space holding degree k representatives."""
    order = module.group.order
    return {-2: order, -1: 1, 0: 1, 1: order, 2: order * order}[degree] * module.dim


def _check_cap(
    module: FpGModule, rows: int, cols: int, config: ShrinklabConfig
) -> None:
    if rows * cols > config.cochain_entry_cap:
        raise CapExceeded(
            f"A {rows}×{cols} (co)boundary matrix over {module.group!r} "
            f"exceeds the cap of "
            f"{config.cochain_entry_cap} entries"
        )


def coboundary_0(module: FpGModule) -> np.ndarray:
    """Return δ⁰: M → C¹, (δm)(g) = gm − m."""
    order, dim = module.group.order, module.dim
    return np.mod(module.rho - module.identity[None], module.p).reshape(
        order * dim, dim
    )


def coboundary_1(module: FpGModule) -> np.ndarray:
    """Return δ¹: C¹ → C², (δf)(g, h) = g·f(h) − f(gh) + f(g)."""
    group, dim = module.group, module.dim
    order = group.order
    first, second = np.meshgrid(np.arange(order), np.arange(order), indexing="ij")
    matrix = np.zeros((order, order, dim, order, dim), dtype=np.int64)
    matrix[first, second, :, second, :] += module.rho[first]
    matrix[first, second, :, group.mul[first, second], :] -= module.identity
    matrix[first, second, :, first, :] += module.identity
    return np.mod(matrix.reshape(order * order * dim, order * dim), module.p)


def coboundary_2(module: FpGModule) -> np.ndarray:
    """Return δ²: C² → C³, (δf)(g,h,k) = g·f(h,k) − f(gh,k) + f(g,hk) − f(g,h)."""
    group, dim = module.group, module.dim
    order = group.order
    first, second, third = np.meshgrid(
        np.arange(order), np.arange(order), np.arange(order), indexing="ij"
    )
    identity = module.identity
    matrix = np.zeros((order, order, order, dim, order, order, dim), dtype=np.int64)
    matrix[first, second, third, :, second, third, :] += module.rho[first]
    matrix[first, second, third, :, group.mul[first, second], third, :] -= identity
    matrix[first, second, third, :, first, group.mul[second, third], :] += identity
    matrix[first, second, third, :, first, second, :] -= identity
    return np.mod(matrix.reshape(order**3 * dim, order**2 * dim), module.p)


def boundary_1(module: FpGModule) -> np.ndarray:
    """Return d₁: C₁ → M, d(m[g]) = g⁻¹m − m."""
    order, dim = module.group.order, module.dim
    blocks = module.rho[module.group.inv] - module.identity[None]
    return np.mod(blocks.transpose(1, 0, 2).reshape(dim, order * dim), module.p)


def boundary_2(module: FpGModule) -> np.ndarray:
    """Return d₂: C₂ → C₁, d(m[g|h]) = (g⁻¹m)[h] − m[gh] + m[g]."""
    group, dim = module.group, module.dim
    order = group.order
    first, second = np.meshgrid(np.arange(order), np.arange(order), indexing="ij")
    matrix = np.zeros((order, dim, order, order, dim), dtype=np.int64)
    matrix[second, :, first, second, :] += module.rho[group.inv[first]]
    matrix[group.mul[first, second], :, first, second, :] -= module.identity
    matrix[first, :, first, second, :] += module.identity
    return np.mod(matrix.reshape(order * dim, order * order * dim), module.p)


@dataclass(frozen=True, eq=False)
class Subquotient:
    """Quotient Z/B of subspaces of F_p^ambient with exact coordinates.

    The class basis is made of representatives completing a basis of B to one
    of Z; coordinates are read off through an invertible square minor.
    """

    p: int
    ambient: int
    boundaries: np.ndarray
    representatives: np.ndarray
    _rows: np.ndarray = field(repr=False)
    _left_inverse: np.ndarray = field(repr=False)

    @classmethod
    def build(
        cls, cycles: np.ndarray, boundaries: np.ndarray, p: int, ambient: int
    ) -> "Subquotient":
        """Return Z/B from spanning rows of Z and of B ⊆ Z."""
        cycles = np.asarray(cycles, dtype=np.int64).reshape(-1, ambient)
        boundaries = np.asarray(boundaries, dtype=np.int64).reshape(-1, ambient)
        boundary_basis = row_basis(boundaries, p) if boundaries.shape[0] else boundaries
        stacked = np.vstack([boundary_basis, cycles])
        chosen = independent_rows(stacked, p) if stacked.shape[0] else ()
        independent = len([row for row in chosen if row < boundary_basis.shape[0]])
        if independent != boundary_basis.shape[0]:
            raise InternalVerifyFail("Boundary rows are not independent")
        representatives = stacked[
            [row for row in chosen if row >= boundary_basis.shape[0]]
        ]
        representatives = representatives.reshape(-1, ambient)
        basis = np.vstack([boundary_basis, representatives]).T
        if basis.shape[1]:
            rows = np.asarray(independent_rows(basis, p), dtype=np.int64)
            left_inverse = inverse(basis[rows], p)
        else:
            rows = np.zeros(0, dtype=np.int64)
            left_inverse = np.zeros((0, 0), dtype=np.int64)
        return cls(p, ambient, boundary_basis, representatives, rows, left_inverse)

    @property
    def dim(self) -> int:
        """Return dim Z/B."""
        return int(self.representatives.shape[0])

    def coords(self, vector: np.ndarray) -> np.ndarray:
        """Return the class coordinates of a cycle.

        Raises:
            InternalVerifyFail: if the vector is not in Z.
        """
        vector = np.mod(
            np.asarray(vector, dtype=np.int64).reshape(self.ambient), self.p
        )
        if self._rows.size == 0:
            if np.any(vector):
                raise InternalVerifyFail("Vector is not a cycle")
            return np.zeros(0, dtype=np.int64)
        solution = np.mod(self._left_inverse @ vector[self._rows], self.p)
        basis = np.vstack([self.boundaries, self.representatives])
        if not np.array_equal(np.mod(solution @ basis, self.p), vector):
            raise InternalVerifyFail("Vector is not a cycle")
        return solution[self.boundaries.shape[0] :]

    def contains(self, vector: np.ndarray) -> bool:
        """Tell whether the vector lies in Z."""
        try:
            self.coords(vector)
        except InternalVerifyFail:
            return False
        return True

    def lift(self, coords: np.ndarray) -> np.ndarray:
        """Return the representative with the given class coordinates."""
        if self.dim == 0:
            return np.zeros(self.ambient, dtype=np.int64)
        return np.mod(np.asarray(coords, dtype=np.int64) @ self.representatives, self.p)


@dataclass(frozen=True, eq=False)
class CohGroup:
    """Ĥ^k(G, M) with representatives in the degree k (co)chain space."""

    group: FiniteGroup
    module: FpGModule
    degree: int
    quotient: Subquotient

    def __repr__(self) -> str:
        """Show degree, module and dimension."""
        return f"CohGroup(H^{self.degree}, {self.module!r}, dim={self.dim})"

    @property
    def dim(self) -> int:
        """Return the dimension over F_p."""
        return self.quotient.dim

    @property
    def basis(self) -> List[np.ndarray]:
        """Return the representatives of the basis classes."""
        return list(self.quotient.representatives)

    def projection(self, cocycle: np.ndarray) -> np.ndarray:
        """Return the class coordinates of a cocycle."""
        return self.quotient.coords(cocycle)

    def classify(self, cocycle: np.ndarray) -> "CohClass":
        """Return the class of a cocycle."""
        return CohClass(self, self.projection(cocycle))

    def element(self, coords: Iterable[int]) -> "CohClass":
        """Return the class with the given coordinates."""
        return CohClass(self, np.asarray(list(coords), dtype=np.int64))

    def zero(self) -> "CohClass":
        """Return the zero class."""
        return CohClass(self, np.zeros(self.dim, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class CohClass:
    """Class in a CohGroup given by coordinates."""

    parent: CohGroup
    coords: np.ndarray

    def __post_init__(self) -> None:
        """Reduce and check the coordinates."""
        coords = np.mod(
            np.asarray(self.coords, dtype=np.int64).reshape(-1), self.parent.module.p
        )
        if coords.shape[0] != self.parent.dim:
            raise GroupMismatch(
                f"Class has {coords.shape[0]} coordinates, "
                f"the group has dim {self.parent.dim}"
            )
        object.__setattr__(self, "coords", coords)

    def __eq__(self, other: object) -> bool:
        """Compare parents and coordinates."""
        if not isinstance(other, CohClass):
            return NotImplemented
        return self.parent is other.parent and np.array_equal(self.coords, other.coords)

    def __hash__(self) -> int:
        """Hash the coordinates."""
        return hash((id(self.parent), self.coords.tobytes()))

    def __add__(self, other: "CohClass") -> "CohClass":
        """Add classes of one group."""
        if other.parent is not self.parent:
            raise GroupMismatch("Classes live in different groups")
        return CohClass(self.parent, self.coords + other.coords)

    @property
    def representative(self) -> np.ndarray:
        """Return the cocycle representing the class."""
        return self.parent.quotient.lift(self.coords)

    def is_zero(self) -> bool:
        """Tell whether the class vanishes."""
        return not np.any(self.coords)


def _tate_spaces(
    module: FpGModule, degree: int, config: ShrinklabConfig
) -> Subquotient:
    p, dim, order = module.p, module.dim, module.group.order
    ambient = chain_dim(module, degree)
    if degree == 2:
        _check_cap(module, order**3 * dim, order**2 * dim, config)
        cycles = kernel(coboundary_2(module), p)
        boundaries = coboundary_1(module).T
    elif degree == 1:
        _check_cap(module, order**2 * dim, order * dim, config)
        cycles = kernel(coboundary_1(module), p)
        boundaries = coboundary_0(module).T
    elif degree == 0:
        cycles = kernel(coboundary_0(module), p)
        boundaries = norm_map(module).T
    elif degree == -1:
        cycles = kernel(norm_map(module), p)
        boundaries = coboundary_0(module).reshape(order, dim, dim).transpose(0, 2, 1)
        boundaries = boundaries.reshape(order * dim, dim)
    else:
        _check_cap(module, order * dim, order**2 * dim, config)
        cycles = kernel(boundary_1(module), p)
        boundaries = boundary_2(module).T
    return Subquotient.build(cycles, boundaries, p, ambient)


def tate(
    group: FiniteGroup,
    module: FpGModule,
    degree: int,
    config: Optional[ShrinklabConfig] = None,
) -> CohGroup:
    """Return Ĥ^k(G, M) for k in -2..2 with explicit representatives.

    Ĥ⁰ = M^G / N·M, Ĥ⁻¹ = ker N / I_G·M, Ĥ¹ and Ĥ² come from the inhomogeneous
    cochains, and Ĥ⁻² = H₁ from the bar chains.

    Raises:
        CapExceeded: if a (co)boundary matrix is above the cochain cap.
    """
    if module.group is not group:
        raise GroupMismatch(f"{module!r} is not a module over {group!r}")
    if degree not in DEGREES:
        raise ValueError(f"Tate cohomology is computed in degrees -2..2, got {degree}")
    result = CohGroup(
        group, module, degree, _tate_spaces(module, degree, _config(config))
    )
    log.debug("dim H^%s(%s, %s) = %s", degree, group.name, module.name, result.dim)
    return result


def tate_dims(
    group: FiniteGroup,
    module: FpGModule,
    degrees: Iterable[int] = DEGREES,
    config: Optional[ShrinklabConfig] = None,
) -> Dict[int, int]:
    """Return dim Ĥ^k(G, M) for the requested degrees."""
    return {degree: tate(group, module, degree, config).dim for degree in degrees}


def random_class(cohomology: CohGroup, rng: np.random.Generator) -> CohClass:
    """Return a uniformly random class."""
    return cohomology.element(rng.integers(0, cohomology.module.p, size=cohomology.dim))


@dataclass(frozen=True, eq=False)
class ShortExactSequence:
    """0 → A → B → C → 0 with B cohomologically trivial.

    Attributes:
        inclusion: Matrix of A → B.
        projection: Matrix of B → C.
        section: Linear (not equivariant) splitting C → B of the projection.
        retraction: Linear left inverse B → A of the inclusion.
    """

    sub: FpGModule
    middle: FpGModule
    quotient: FpGModule
    inclusion: np.ndarray
    projection: np.ndarray
    section: np.ndarray
    retraction: np.ndarray

    def __post_init__(self) -> None:
        """Check the maps are equivariant and the splittings are splittings."""
        ModuleHom(self.sub, self.middle, self.inclusion)
        ModuleHom(self.middle, self.quotient, self.projection)
        p = self.sub.p
        if np.any(np.mod(self.projection @ self.inclusion, p)):
            raise InternalVerifyFail("Projection does not kill the inclusion")
        if not np.array_equal(
            np.mod(self.projection @ self.section, p), self.quotient.identity
        ):
            raise InternalVerifyFail("Section does not split the projection")
        if not np.array_equal(
            np.mod(self.retraction @ self.inclusion, p), self.sub.identity
        ):
            raise InternalVerifyFail("Retraction does not split the inclusion")


def induced_sequence(module: FpGModule) -> ShortExactSequence:
    """Return 0 → W⊗I_G → W⊗F_p[G] → W → 0 with section w ↦ w⊗e_1."""
    group, p = module.group, module.p
    order = group.order
    ideal_inclusion = np.zeros((order, order - 1), dtype=np.int64)
    ideal_inclusion[np.arange(1, order), np.arange(order - 1)] = 1
    ideal_inclusion[0, :] = -1
    unit = np.zeros((order, 1), dtype=np.int64)
    unit[0, 0] = 1
    identity = module.identity
    return ShortExactSequence(
        sub=tensor_module(module, augmentation_ideal(group, p)),
        middle=tensor_module(module, regular_module(group, p)),
        quotient=module,
        inclusion=np.kron(identity, ideal_inclusion),
        projection=np.kron(identity, np.ones((1, order), dtype=np.int64)),
        section=np.kron(identity, unit),
        retraction=np.kron(identity, np.eye(order, dtype=np.int64)[1:]),
    )


def coinduced_sequence(module: FpGModule) -> ShortExactSequence:
    """Return 0 → W → W⊗F_p[G]* → W⊗I_G* → 0 with section b*_h ↦ e*_h."""
    group, p = module.group, module.p
    order = group.order
    restriction = np.zeros((order - 1, order), dtype=np.int64)
    restriction[np.arange(order - 1), np.arange(1, order)] = 1
    restriction[:, 0] = -1
    identity = module.identity
    first = np.zeros((1, order), dtype=np.int64)
    first[0, 0] = 1
    return ShortExactSequence(
        sub=module,
        middle=tensor_module(module, dual_module(regular_module(group, p))),
        quotient=tensor_module(module, dual_module(augmentation_ideal(group, p))),
        inclusion=np.kron(identity, np.ones((order, 1), dtype=np.int64)),
        projection=np.kron(identity, restriction),
        section=np.kron(identity, np.eye(order, dtype=np.int64)[:, 1:]),
        retraction=np.kron(identity, first),
    )


def _blockwise(matrix: np.ndarray, vector: np.ndarray, blocks: int) -> np.ndarray:
    return (vector.reshape(blocks, -1) @ matrix.T).reshape(-1)


def _connect(
    sequence: ShortExactSequence, degree: int, cocycle: np.ndarray
) -> np.ndarray:
    """Lift a degree k cocycle of C to B, apply the differential, pull back to A."""
    middle = sequence.middle
    order, p = middle.group.order, middle.p
    if degree == -2:
        lifted = _blockwise(sequence.section, cocycle, order)
        image = boundary_1(middle) @ lifted
    elif degree == -1:
        image = norm_map(middle) @ (sequence.section @ cocycle)
    elif degree == 0:
        image = coboundary_0(middle) @ (sequence.section @ cocycle)
    elif degree == 1:
        lifted = _blockwise(sequence.section, cocycle, order)
        image = coboundary_1(middle) @ lifted
    else:
        raise ValueError(f"No connecting map out of degree {degree}")
    image = np.mod(image, p)
    blocks = image.shape[0] // middle.dim
    pulled = np.mod(_blockwise(sequence.retraction, image, blocks), p)
    if not np.array_equal(
        np.mod(_blockwise(sequence.inclusion, pulled, blocks), p), image
    ):
        raise InternalVerifyFail(
            "The lifted differential does not come from the submodule"
        )
    return pulled


def connecting_map(
    sequence: ShortExactSequence, degree: int, config: Optional[ShrinklabConfig] = None
) -> np.ndarray:
    """Return the matrix of Ĥ^k(G, C) → Ĥ^{k+1}(G, A) on class coordinates."""
    group = sequence.sub.group
    source = tate(group, sequence.quotient, degree, config)
    target = tate(group, sequence.sub, degree + 1, config)
    columns = [
        target.projection(_connect(sequence, degree, rep)) for rep in source.basis
    ]
    if not columns:
        return np.zeros((target.dim, 0), dtype=np.int64)
    return np.array(columns, dtype=np.int64).T.reshape(target.dim, source.dim)


def dim_shift(x: CohClass, config: Optional[ShrinklabConfig] = None) -> CohClass:
    """Move a class of Ĥ^k(G, M) to Ĥ^{-1}(G, M ⊗ A_k).

    Degree -2 goes up through 0 → M⊗I → M⊗F_p[G] → M → 0; degrees 0..2 step
    down through 0 → W → W⊗F_p[G]* → W⊗I* → 0 by inverting the connecting
    isomorphisms.
    """
    source = x.parent
    group, module, degree = source.group, source.module, source.degree
    target = tate(group, shift_coefficients(module, degree, config), -1, config)
    if degree == -1:
        return target.classify(x.representative)
    if degree == -2:
        return target.classify(_connect(induced_sequence(module), -2, x.representative))
    current, coords = module, x.coords
    for step in range(degree, -1, -1):
        sequence = coinduced_sequence(current)
        matrix = connecting_map(sequence, step - 1, config)
        if matrix.shape[0] != matrix.shape[1]:
            raise InternalVerifyFail(f"Connecting map into degree {step} is not square")
        if coords.size:
            try:
                coords = np.mod(inverse(matrix, module.p) @ coords, module.p)
            except DimensionMismatch as error:
                raise InternalVerifyFail(
                    f"Connecting map into degree {step} is not invertible"
                ) from error
        current = sequence.quotient
    representative = tate(group, current, -1, config).quotient.lift(coords)
    return target.classify(representative)


def dim_shift_map(
    group: FiniteGroup,
    module: FpGModule,
    degree: int,
    config: Optional[ShrinklabConfig] = None,
) -> np.ndarray:
    """Return the matrix of dim_shift on the class coordinates of Ĥ^k(G, M)."""
    source = tate(group, module, degree, config)
    identity = np.eye(source.dim, dtype=np.int64)
    if source.dim == 0:
        shifted = tate(group, shift_coefficients(module, degree, config), -1, config)
        return np.zeros((shifted.dim, 0), dtype=np.int64)
    columns = [dim_shift(source.element(row), config).coords for row in identity]
    return np.array(columns, dtype=np.int64).T.reshape(-1, source.dim)


def shift_is_bijective(
    group: FiniteGroup,
    module: FpGModule,
    degree: int,
    config: Optional[ShrinklabConfig] = None,
) -> bool:
    """Tell whether dim_shift maps Ĥ^k(G, M) onto Ĥ^{-1}(G, M ⊗ A_k) bijectively."""
    matrix = dim_shift_map(group, module, degree, config)
    shifted = tate(group, shift_coefficients(module, degree, config), -1, config)
    if matrix.shape != (shifted.dim, shifted.dim):
        return False
    return matrix.size == 0 or rank(matrix, module.p) == shifted.dim


@dataclass(frozen=True, eq=False)
class Pairing:
    """Evaluation pairing Ĥ¹(G, L) × H₁(G, R) → F_p with L = R*.

    matrix[a, b] pairs the a-th cohomology basis class with the b-th homology one.
    """

    cohomology: CohGroup
    homology: CohGroup
    matrix: np.ndarray

    def evaluate(self, left: CohClass, right: CohClass) -> int:
        """Return ⟨left, right⟩."""
        return int(left.coords @ self.matrix @ right.coords % self.cohomology.module.p)

    def is_nondegenerate(self) -> bool:
        """Tell whether the pairing matrix is square of full rank."""
        dims = (self.cohomology.dim, self.homology.dim)
        if dims[0] != dims[1]:
            return False
        return dims[0] == 0 or rank(self.matrix, self.cohomology.module.p) == dims[0]


def duality_pairing(
    group: FiniteGroup,
    module: FpGModule,
    character: Optional[Sequence[int]] = None,
    config: Optional[ShrinklabConfig] = None,
) -> Pairing:
    """Pair Ĥ¹(G, M*⊗χ) with H₁(G, M⊗χ⁻¹) by ⟨f, Σ m_g[g]⟩ = Σ_g f(g)(m_g).

    Raises:
        ModelInconsistency: if the pairing is degenerate.
    """
    values = list(character) if character is not None else [1] * len(group.generators)
    right = twist(module, values)
    left = dual_module(right)
    cohomology = tate(group, left, 1, config)
    homology = tate(group, right, -2, config)
    if cohomology.dim and homology.dim:
        matrix = np.mod(
            np.array(cohomology.basis) @ np.array(homology.basis).T, module.p
        ).reshape(cohomology.dim, homology.dim)
    else:
        matrix = np.zeros((cohomology.dim, homology.dim), dtype=np.int64)
    pairing = Pairing(cohomology, homology, matrix)
    if not pairing.is_nondegenerate():
        raise ModelInconsistency(
            f"Duality pairing over {group!r} is degenerate: dims {cohomology.dim} and "
            f"{homology.dim}"
        )
    return pairing


def inflate(
    module: FpGModule, group: FiniteGroup, projection: Sequence[int]
) -> FpGModule:
    """Pull a module back along a surjection E → G given by projection[e]."""
    rho = module.rho[np.asarray(projection, dtype=np.int64)]
    inflated = FpGModule(module.p, group, rho, f"inf({module.name})")
    inflated.check_relations()
    return inflated


def apply_module_hom(
    x: CohClass, hom: ModuleHom, config: Optional[ShrinklabConfig] = None
) -> CohClass:
    """Push a class along an equivariant map, value by value on a representative."""
    source = x.parent
    if hom.source.group is not source.group:
        raise GroupMismatch("The map and the class live over different groups")
    target = tate(source.group, hom.target, source.degree, config)
    blocks = chain_dim(source.module, source.degree) // max(source.module.dim, 1)
    image = _blockwise(hom.matrix, x.representative, blocks)
    return target.classify(np.mod(image, source.module.p))


@dataclass(frozen=True, eq=False)
class FiveTermMaps:
    """H₁(Q, W)_G → H₁(E, W) → H₁(G, W) → 0 for E = Q ⋊ G.

    map_a is written on the basis (Q/Q^p[Q,Q]) ⊗ W, index a·dim W + i.
    """

    product: FiniteGroup
    quotient_rank: int
    product_homology: CohGroup
    actor_homology: CohGroup
    map_a: np.ndarray
    map_b: np.ndarray


def five_term_maps(
    normal: FiniteGroup,
    actor: FiniteGroup,
    action: Sequence[Sequence[int]],
    module: FpGModule,
    config: Optional[ShrinklabConfig] = None,
) -> FiveTermMaps:
    """Compute the low degree homology maps of Q ⋊ G with coefficients inflated from G.

    Raises:
        ModelInconsistency: if the sequence is not exact at H₁(E, W) or not
            onto H₁(G, W).
    """
    if module.group is not actor:
        raise GroupMismatch("W must be a module over the acting group")
    p, dim = module.p, module.dim
    product_group = semidirect_product(normal, actor, action, config=config)
    order_q = normal.order
    projection = np.arange(product_group.order) // order_q
    inflated = inflate(module, product_group, projection)
    product_homology = tate(product_group, inflated, -2, config)
    actor_homology = tate(actor, module, -2, config)
    quotient = elementary_quotient(normal, p)
    columns = []
    for representative in quotient.representatives:
        for coordinate in range(dim):
            chain = np.zeros(product_group.order * dim, dtype=np.int64)
            chain[representative * dim + coordinate] = 1
            columns.append(product_homology.projection(chain))
    map_a = np.array(columns, dtype=np.int64).T.reshape(
        product_homology.dim, len(columns)
    )
    columns = []
    for basis_chain in product_homology.basis:
        folded = np.zeros((actor.order, dim), dtype=np.int64)
        np.add.at(folded, projection, basis_chain.reshape(product_group.order, dim))
        columns.append(actor_homology.projection(np.mod(folded.reshape(-1), p)))
    map_b = np.array(columns, dtype=np.int64).T.reshape(
        actor_homology.dim, product_homology.dim
    )
    maps = FiveTermMaps(
        product_group, quotient.rank, product_homology, actor_homology, map_a, map_b
    )
    _check_five_term(maps, p)
    return maps


def _check_five_term(maps: FiveTermMaps, p: int) -> None:
    rank_a = rank(maps.map_a, p) if maps.map_a.size else 0
    rank_b = rank(maps.map_b, p) if maps.map_b.size else 0
    if maps.map_a.size and maps.map_b.size and np.any(
        np.mod(maps.map_b @ maps.map_a, p)
    ):
        raise ModelInconsistency("The composite H₁(Q)_G → H₁(E) → H₁(G) is not zero")
    if rank_a != maps.product_homology.dim - rank_b:
        raise ModelInconsistency("The five term sequence is not exact at H₁(E)")
    if rank_b != maps.actor_homology.dim:
        raise ModelInconsistency("Corestriction H₁(E) → H₁(G) is not onto")
