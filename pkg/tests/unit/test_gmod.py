"""Test the F_p[G]-module layer."""

import numpy as np
import pytest

from shrinklab.exceptions import GroupMismatch, NotEquivariant, RangeExceeded
from shrinklab.fgroup import FiniteGroup, all_subgroups
from shrinklab.gmod import (
    ModuleHom,
    augmentation_ideal,
    character_module,
    coefficient_module,
    coinvariants,
    direct_sum,
    dual_module,
    find_isomorphism,
    from_generators,
    hom_space,
    induced_trivial,
    invariants,
    norm_map,
    regular_module,
    restrict,
    shift_coefficients,
    tensor_module,
    tensor_power,
    trivial_module,
    twist,
)


class TestConstructions:
    """Test the module constructors."""

    def test_standard_modules_are_representations(self, s3: FiniteGroup) -> None:
        """
        Given: S3 over F_3
        When: the regular, augmentation, dual and tensor modules are built
        Then: each satisfies the group relations with the expected dimension
        """
        regular = regular_module(s3, 3)
        ideal = augmentation_ideal(s3, 3)
        modules = [regular, ideal, dual_module(ideal), tensor_module(ideal, regular)]

        for module in modules:
            module.check_relations()
        assert [module.dim for module in modules] == [6, 5, 5, 30]

    def test_from_generators_rejects_broken_relations(self, c2: FiniteGroup) -> None:
        """
        Given: a matrix of order three for the generator of C2
        When: the module is built
        Then: NotEquivariant is raised
        """
        with pytest.raises(NotEquivariant):
            from_generators(c2, 5, [np.array([[2]])])

    def test_character_and_twist(self, c2: FiniteGroup) -> None:
        """
        Given: the sign character of C2 over F_3
        When: the trivial module is twisted by it
        Then: the generator acts by the inverse character value
        """
        sign = character_module(c2, 3, [2])

        result = twist(trivial_module(c2, 3), [2])

        assert int(sign.rho[1, 0, 0]) == 2
        assert int(result.rho[1, 0, 0]) == 2

    @pytest.mark.parametrize(("degree", "dim"), [(-2, 2), (-1, 1), (0, 2), (1, 4)])
    def test_coefficient_module_dims(
        self, c3: FiniteGroup, degree: int, dim: int
    ) -> None:
        """
        Given: C3, whose augmentation ideal has dimension two
        When: A_k = I^{⊗−(k+1)} is built
        Then: its dimension is 2^{|k+1|}
        """
        result = coefficient_module(c3, 3, degree)

        assert result.dim == dim

    def test_coefficient_module_range(self, c2: FiniteGroup) -> None:
        """
        Given: a degree outside the shift range
        When: A_k is asked for
        Then: RangeExceeded is raised
        """
        with pytest.raises(RangeExceeded):
            coefficient_module(c2, 2, 9)

    def test_shift_coefficients_and_powers(self, c2: FiniteGroup) -> None:
        """
        Given: the regular module of C2
        When: it is shifted and raised to tensor powers
        Then: dimensions multiply
        """
        regular = regular_module(c2, 2)

        assert shift_coefficients(regular, -2).dim == 2
        assert tensor_power(regular, 3).dim == 8
        assert tensor_power(regular, 0).dim == 1
        assert direct_sum(regular, 3).dim == 6

    def test_mixing_groups_fails(self, c2: FiniteGroup, c3: FiniteGroup) -> None:
        """
        Given: modules over different groups
        When: they are tensored
        Then: GroupMismatch is raised
        """
        with pytest.raises(GroupMismatch):
            tensor_module(trivial_module(c2, 2), trivial_module(c3, 2))


class TestFixedPoints:
    """Test invariants, coinvariants and the norm."""

    def test_regular_module(self, c3: FiniteGroup) -> None:
        """
        Given: F_3[C3]
        When: its invariants, coinvariants and norm are computed
        Then: each fixed space is one dimensional and the norm has rank one
        """
        regular = regular_module(c3, 3)

        assert invariants(regular).shape[0] == 1
        assert coinvariants(regular).shape[0] == 1
        assert np.count_nonzero(norm_map(regular)) == 9

    def test_trivial_module(self, c2: FiniteGroup) -> None:
        """
        Given: the trivial module of dimension two
        When: its invariants and coinvariants are computed
        Then: both are everything
        """
        module = trivial_module(c2, 2, 2)

        assert invariants(module).shape == (2, 2)
        assert coinvariants(module).shape == (2, 2)


class TestHoms:
    """Test equivariant maps."""

    def test_hom_space_dimensions(self, s3: FiniteGroup) -> None:
        """
        Given: S3 over F_2
        When: Hom spaces out of the regular module are computed
        Then: their dimensions are those of the targets
        """
        regular = regular_module(s3, 2)

        assert len(hom_space(regular, trivial_module(s3, 2))) == 1
        assert len(hom_space(regular, regular)) == 6

    def test_rejects_non_equivariant_matrix(self, c2: FiniteGroup) -> None:
        """
        Given: the projection of F_2[C2] onto one basis vector
        When: it is wrapped as a ModuleHom
        Then: NotEquivariant is raised
        """
        with pytest.raises(NotEquivariant):
            ModuleHom(regular_module(c2, 2), trivial_module(c2, 2), np.array([[1, 0]]))

    def test_compose_and_tensor(self, c2: FiniteGroup) -> None:
        """
        Given: the augmentation map of F_3[C2]
        When: it is composed with the identity and tensored with itself
        Then: the ranks behave as for matrices
        """
        regular = regular_module(c2, 3)
        augmentation = ModuleHom(regular, trivial_module(c2, 3), np.array([[1, 1]]))

        composed = augmentation.compose(ModuleHom.identity(regular))
        squared = augmentation.tensor(augmentation)

        assert composed.is_surjective()
        assert not composed.is_injective()
        assert squared.matrix.shape == (1, 4)
        assert augmentation.dual().matrix.shape == (2, 1)

    def test_regular_module_is_self_dual(self, s3: FiniteGroup) -> None:
        """
        Given: F_2[S3] and its dual
        When: an isomorphism is searched for
        Then: one is found
        """
        regular = regular_module(s3, 2)

        result = find_isomorphism(dual_module(regular), regular)

        assert result is not None
        assert result.is_injective()


class TestInduction:
    """Test restriction and induction."""

    def test_induced_trivial_from_c2_in_s3(self, s3: FiniteGroup) -> None:
        """
        Given: a subgroup of order two in S3
        When: the trivial module is induced and restricted back
        Then: the induced module has dimension three and one fixed line per orbit
        """
        subgroup = next(sub for sub in all_subgroups(s3) if sub.order == 2)

        induced = induced_trivial(subgroup, 3)
        restricted = restrict(induced, subgroup)

        induced.check_relations()
        assert induced.dim == 3
        assert invariants(induced).shape[0] == 1
        assert invariants(restricted).shape[0] == 2
