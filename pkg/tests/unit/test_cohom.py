"""Test the Tate cohomology layer."""

import numpy as np
import pytest

from shrinklab.cohom import (
    DEGREES,
    apply_module_hom,
    coinduced_sequence,
    connecting_map,
    dim_shift,
    duality_pairing,
    five_term_maps,
    induced_sequence,
    inflate,
    random_class,
    shift_is_bijective,
    tate,
    tate_dims,
)
from shrinklab.exceptions import GroupMismatch
from shrinklab.fgroup import FiniteGroup, semidirect_product
from shrinklab.gmod import (
    ModuleHom,
    augmentation_ideal,
    character_module,
    regular_module,
    trivial_module,
)

INVERSION = [[0, 1, 2], [0, 2, 1]]


class TestTateGroups:
    """Test the dimensions and classes of Ĥ^k."""

    @pytest.mark.parametrize(
        ("p", "expected"),
        [(2, [1, 1, 1, 1, 1]), (3, [0, 0, 0, 0, 0])],
    )
    def test_cyclic_of_order_two_with_trivial_coefficients(
        self, c2: FiniteGroup, p: int, expected: list
    ) -> None:
        """
        Given: C2 acting trivially on F_p
        When: the Tate dimensions are computed
        Then: they are all one when p divides the order and all zero otherwise
        """
        result = tate_dims(c2, trivial_module(c2, p))

        assert [result[degree] for degree in DEGREES] == expected

    def test_free_modules_have_no_cohomology(self, s3: FiniteGroup) -> None:
        """
        Given: the regular module of S3 over F_2 and F_3
        When: the Tate dimensions are computed
        Then: every degree vanishes
        """
        for p in (2, 3):
            result = tate_dims(s3, regular_module(s3, p))

            assert set(result.values()) == {0}

    def test_cyclic_groups_are_periodic(self, c3: FiniteGroup) -> None:
        """
        Given: the augmentation ideal of C3 over F_3
        When: the Tate dimensions are computed
        Then: they repeat with period two
        """
        result = tate_dims(c3, augmentation_ideal(c3, 3))

        assert result[-2] == result[0] == result[2]
        assert result[-1] == result[1]

    def test_classes_round_trip_through_representatives(
        self, c3: FiniteGroup, rng: np.random.Generator
    ) -> None:
        """
        Given: a random class of Ĥ¹(C3, F_3)
        When: its representative is classified again
        Then: the same class comes back
        """
        cohomology = tate(c3, trivial_module(c3, 3), 1)
        x = random_class(cohomology, rng)

        result = cohomology.classify(x.representative)

        assert result == x
        assert cohomology.zero().is_zero()

    def test_classes_of_different_groups_do_not_mix(self, c2: FiniteGroup) -> None:
        """
        Given: classes of Ĥ¹ and Ĥ² of C2 with F_2 coefficients
        When: they are added, or a class is built with wrong coordinates
        Then: GroupMismatch is raised
        """
        module = trivial_module(c2, 2)
        first = tate(c2, module, 1).element([1])
        second = tate(c2, module, 2).element([1])

        with pytest.raises(GroupMismatch):
            first + second  # pylint: disable=pointless-statement
        with pytest.raises(GroupMismatch):
            tate(c2, module, 1).element([1, 0])

    def test_rejects_foreign_modules_and_degrees(
        self, c2: FiniteGroup, c3: FiniteGroup
    ) -> None:
        """
        Given: a module over C3
        When: the cohomology of C2 is asked for, or a degree outside -2..2
        Then: the call is rejected
        """
        with pytest.raises(GroupMismatch):
            tate(c2, trivial_module(c3, 3), 0)
        with pytest.raises(ValueError, match="degrees -2..2"):
            tate(c3, trivial_module(c3, 3), 3)


class TestDimensionShifting:
    """Test the moves to degree -1."""

    def test_sequences_split_and_connect(self, c2: FiniteGroup) -> None:
        """
        Given: the induced and coinduced sequences of F_2 over C2
        When: the connecting map out of degree 0 is computed
        Then: the sequences are exact and the map is an isomorphism
        """
        module = trivial_module(c2, 2)
        induced_sequence(module)
        sequence = coinduced_sequence(module)

        result = connecting_map(sequence, 0)

        assert result.shape == (1, 1)
        assert result[0, 0] % 2 == 1

    @pytest.mark.parametrize("degree", DEGREES)
    def test_shift_is_bijective(self, c2: FiniteGroup, degree: int) -> None:
        """
        Given: C2 acting trivially on F_2
        When: Ĥ^k is shifted to degree -1
        Then: the shift is a bijection
        """
        result = shift_is_bijective(c2, trivial_module(c2, 2), degree)

        assert result

    def test_shift_from_degree_minus_one_keeps_the_class(self, c3: FiniteGroup) -> None:
        """
        Given: the nonzero class of Ĥ⁻¹(C3, F_3)
        When: it is shifted
        Then: a nonzero class of degree -1 comes back
        """
        x = tate(c3, trivial_module(c3, 3), -1).element([1])

        result = dim_shift(x)

        assert result.parent.degree == -1
        assert not result.is_zero()

    def test_shift_of_symmetric_group_degree_zero(self, s3: FiniteGroup) -> None:
        """
        Given: S3 acting trivially on F_2
        When: Ĥ⁰ is shifted
        Then: the shift is a bijection
        """
        assert shift_is_bijective(s3, trivial_module(s3, 2), 0)


class TestDuality:
    """Test the evaluation pairing."""

    def test_pairing_is_perfect(self, c3: FiniteGroup) -> None:
        """
        Given: C3 acting trivially on F_3
        When: Ĥ¹ is paired with H₁
        Then: the pairing is a perfect pairing of one dimensional spaces
        """
        result = duality_pairing(c3, trivial_module(c3, 3))

        assert result.is_nondegenerate()
        assert result.matrix.shape == (1, 1)
        x = result.cohomology.element([1])
        y = result.homology.element([1])
        assert result.evaluate(x, y) != 0

    def test_twisted_pairing(self, c2: FiniteGroup) -> None:
        """
        Given: the sign character of C2 over F_3
        When: the twisted pairing is built
        Then: both sides vanish and the pairing is trivially perfect
        """
        result = duality_pairing(c2, trivial_module(c2, 3), [2])

        assert result.is_nondegenerate()
        assert result.matrix.shape == (0, 0)


class TestFunctoriality:
    """Test the maps induced on cohomology."""

    def test_scalar_map_scales_classes(self, c3: FiniteGroup) -> None:
        """
        Given: multiplication by two on F_3 over C3
        When: the generator of Ĥ¹ is pushed along it
        Then: its coordinate doubles
        """
        module = trivial_module(c3, 3)
        hom = ModuleHom(module, module, np.array([[2]]))
        x = tate(c3, module, 1).element([1])

        result = apply_module_hom(x, hom)

        assert list(result.coords) == [2]

    def test_inflate_along_semidirect_projection(
        self, c2: FiniteGroup, c3: FiniteGroup
    ) -> None:
        """
        Given: the sign character of C2 over F_3 and S3 = C3 ⋊ C2
        When: the character is inflated to S3
        Then: C3 acts trivially and the module is one dimensional
        """
        product = semidirect_product(c3, c2, INVERSION)
        projection = np.arange(product.order) // c3.order

        result = inflate(character_module(c2, 3, [2]), product, projection)

        assert result.dim == 1
        assert all(result.rho[element][0, 0] == 1 for element in range(c3.order))

    @pytest.mark.parametrize(
        ("p", "quotient_rank", "shapes"),
        [(2, 0, ((1, 0), (1, 1))), (3, 1, ((0, 1), (0, 0)))],
    )
    def test_five_term_sequence(
        self,
        c2: FiniteGroup,
        c3: FiniteGroup,
        p: int,
        quotient_rank: int,
        shapes: tuple,
    ) -> None:
        """
        Given: S3 = C3 ⋊ C2 with trivial coefficients inflated from C2
        When: the five term maps are computed
        Then: the sequence is exact with the expected shapes
        """
        result = five_term_maps(c3, c2, INVERSION, trivial_module(c2, p))

        assert result.product.order == 6
        assert result.quotient_rank == quotient_rank
        assert (result.map_a.shape, result.map_b.shape) == shapes
