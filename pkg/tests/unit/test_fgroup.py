"""Test the finite group layer."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinklab.adapters import corpus_group
from shrinklab.exceptions import (
    ContainedInFrattini,
    GroupMismatch,
    ModelInconsistency,
    NotBijective,
    NotPGroup,
    NotSolvable,
)
from shrinklab.fgroup import (
    FiniteGroup,
    all_subgroups,
    conjugation_action,
    cyclic_group,
    describe_group,
    describe_tower,
    direct_product,
    elementary_quotient,
    fitting,
    frattini,
    from_permutations,
    from_table,
    group_isomorphism,
    is_nilpotent,
    is_solvable,
    isomorphic_subgroup,
    lower_central_series,
    maximal_subgroups,
    operator_rank,
    operator_type,
    ore_tower,
    p_central_series,
    p_core,
    pgroup_filtration,
    proper_supplement,
    semidirect_product,
    sylow_subgroups,
)
from shrinklab.model import FilterIndex, ShrinklabConfig


class TestFiniteGroup:
    """Test the group tables built from permutations."""

    def test_enumerates_s3(self, s3: FiniteGroup) -> None:
        """
        Given: S3 from the corpus
        When: its table is inspected
        Then: it has six elements, identity 0 and is not abelian
        """
        assert s3.order == 6
        assert not s3.is_abelian
        assert s3.multiply(0, 3) == 3
        assert all(
            s3.multiply(element, s3.inverse(element)) == 0 for element in range(6)
        )

    @given(st.integers(0, 5), st.integers(0, 5), st.integers(0, 5))
    @settings(max_examples=50, deadline=None)
    def test_multiplication_is_associative(
        self, first: int, second: int, third: int
    ) -> None:
        """
        Given: three elements of S3
        When: they are multiplied in both bracketings
        Then: the results agree
        """
        group = corpus_group("S3")

        left = group.multiply(group.multiply(first, second), third)
        right = group.multiply(first, group.multiply(second, third))

        assert left == right

    def test_composition_convention(self) -> None:
        """
        Given: two transpositions of three points
        When: the group they generate is built
        Then: the table follows (g·h)(x) = g(h(x))
        """
        first, second = (1, 0, 2), (0, 2, 1)

        result = from_permutations(3, [first, second])

        product_index = result.multiply(result.generators[0], result.generators[1])
        assert result.order == 6
        assert result.element_order(product_index) == 3

    def test_rejects_non_permutations(self) -> None:
        """
        Given: a tuple that repeats a point
        When: from_permutations is called
        Then: NotBijective is raised
        """
        with pytest.raises(NotBijective):
            from_permutations(3, [(0, 0, 1)])

    def test_from_table_rejects_latin_failures(self) -> None:
        """
        Given: a table whose rows are not permutations
        When: from_table is called
        Then: ModelInconsistency is raised
        """
        with pytest.raises(ModelInconsistency, match="permutations"):
            from_table([[0, 1], [1, 1]])

    def test_direct_product(self) -> None:
        """
        Given: C2 and C3
        When: their direct product is built
        Then: it is cyclic of order six
        """
        result = direct_product(cyclic_group(2), cyclic_group(3))

        assert result.order == 6
        assert describe_group(result) == "C6"


class TestSubgroups:
    """Test the subgroup lattice and the characteristic subgroups."""

    def test_s3_lattice(self, s3: FiniteGroup) -> None:
        """
        Given: S3
        When: its subgroups are enumerated
        Then: there are six, four of them maximal
        """
        result = all_subgroups(s3)

        assert [subgroup.order for subgroup in result] == [1, 2, 2, 2, 3, 6]
        assert len(maximal_subgroups(s3)) == 4
        assert len(sylow_subgroups(s3, 2)) == 3
        assert p_core(s3, 3).order == 3

    def test_series_of_s3(self, s3: FiniteGroup) -> None:
        """
        Given: S3
        When: solvability and nilpotency are checked
        Then: it is solvable but not nilpotent
        """
        assert is_solvable(s3)
        assert not is_nilpotent(s3)
        assert [term.order for term in lower_central_series(s3)] == [6, 3]

    @pytest.mark.parametrize(
        ("name", "frattini_order", "fitting_order"),
        [("D4", 2, 8), ("Q8", 2, 8), ("S4", 1, 4), ("A4", 1, 4), ("C6", 1, 6)],
    )
    def test_frattini_inside_fitting(
        self, name: str, frattini_order: int, fitting_order: int
    ) -> None:
        """
        Given: a solvable corpus group
        When: Φ(G) and F(G) are computed
        Then: they have the known orders and Φ(G) ⊊ F(G)
        """
        group = corpus_group(name)

        phi, fit = frattini(group), fitting(group)

        assert (phi.order, fit.order) == (frattini_order, fitting_order)
        assert phi < fit

    def test_proper_supplement_of_v4_in_s4(self) -> None:
        """
        Given: S4 and its normal Klein four subgroup
        When: a proper supplement is asked for
        Then: it is a complement of order six
        """
        group = corpus_group("S4")
        kernel = fitting(group)

        result = proper_supplement(group, kernel)

        assert result.order == 6
        assert kernel.set_product_size(result) == 24

    def test_no_supplement_inside_frattini(self) -> None:
        """
        Given: D4 and its Frattini subgroup
        When: a proper supplement is asked for
        Then: ContainedInFrattini is raised
        """
        group = corpus_group("D4")

        with pytest.raises(ContainedInFrattini):
            proper_supplement(group, frattini(group))

    @pytest.mark.parametrize(
        ("left", "right", "expected"),
        [
            ("C4", "V4", False),
            ("C6", "S3", False),
            ("C6", "C6", True),
            ("S3", "S3", True),
        ],
    )
    def test_group_isomorphism(
        self, config: ShrinklabConfig, left: str, right: str, expected: bool
    ) -> None:
        """
        Given: two corpus groups of the same order
        When: an isomorphism is searched for
        Then: one is found exactly when the groups agree and it respects products
        """
        source = corpus_group(left, config=config)
        target = corpus_group(right, config=config)

        result = group_isomorphism(source, target)

        assert (result is not None) == expected
        if result is not None:
            assert all(
                result[int(source.mul[a, b])] == target.mul[result[a], result[b]]
                for a in range(source.order)
                for b in range(source.order)
            )

    def test_isomorphic_subgroup(self, config: ShrinklabConfig) -> None:
        """
        Given: S4 and the Klein four group
        When: a subgroup of S4 isomorphic to V4 is asked for, and one to C6
        Then: a non-cyclic subgroup of order four comes back, and C6 is refused
        """
        s4 = corpus_group("S4", config=config)

        result = isomorphic_subgroup(s4, corpus_group("V4", config=config), config)

        assert result.order == 4
        assert describe_group(result.as_group()) == "V4"
        with pytest.raises(GroupMismatch):
            isomorphic_subgroup(s4, corpus_group("C6", config=config), config)


class TestOreTower:
    """Test the reduction of solvable groups to semidirect products."""

    def test_s4(self) -> None:
        """
        Given: S4
        When: its Ore tower is computed
        Then: it is V4 ⋊ S3, then C3 ⋊ C2, then C2
        """
        result = ore_tower(corpus_group("S4"))

        assert describe_tower(result) == "V4 ⋊ S3 ; C3 ⋊ C2 ; C2"
        assert [(step.kernel.order, step.actor.order) for step in result] == [
            (4, 6),
            (3, 2),
            (2, 1),
        ]

    def test_rejects_a5(self) -> None:
        """
        Given: A5
        When: its Ore tower is asked for
        Then: NotSolvable is raised
        """
        with pytest.raises(NotSolvable):
            ore_tower(corpus_group("A5"))

    def test_semidirect_product_s3(self, c2: FiniteGroup, c3: FiniteGroup) -> None:
        """
        Given: C3 with C2 acting by inversion
        When: the semidirect product is built
        Then: it is S3
        """
        result = semidirect_product(c3, c2, [[0, 1, 2], [0, 2, 1]])

        assert result.order == 6
        assert describe_group(result) == "S3"

    def test_semidirect_product_rejects_non_automorphisms(
        self, c2: FiniteGroup, c3: FiniteGroup
    ) -> None:
        """
        Given: an action that is not by automorphisms
        When: the semidirect product is built
        Then: ModelInconsistency is raised
        """
        with pytest.raises(ModelInconsistency):
            semidirect_product(c3, c2, [[0, 1, 2], [1, 0, 2]])


class TestPGroups:
    """Test the p-central machinery."""

    def test_c4_filtration(self) -> None:
        """
        Given: C4
        When: its refined filtration is computed
        Then: it runs (1,1), (2,1) and ends at the trivial (2,2)
        """
        result = pgroup_filtration(corpus_group("C4"), 2)

        assert list(result) == [FilterIndex(1, 1), FilterIndex(2, 1), FilterIndex(2, 2)]
        assert [subgroup.order for subgroup in result.values()] == [4, 2, 1]

    def test_p_central_series_needs_a_p_group(self, s3: FiniteGroup) -> None:
        """
        Given: S3
        When: its 2-central series is asked for
        Then: NotPGroup is raised
        """
        with pytest.raises(NotPGroup):
            p_central_series(s3, 2)

    @pytest.mark.parametrize(
        ("name", "rank"), [("C4", 1), ("V4", 2), ("C2^3", 3), ("Q8", 2)]
    )
    def test_elementary_quotient_rank(self, name: str, rank: int) -> None:
        """
        Given: a 2-group
        When: P/Φ(P) is coordinatized
        Then: it has the Burnside rank
        """
        result = elementary_quotient(corpus_group(name), 2)

        assert result.rank == rank
        assert not np.any(result.coords[list(result.kernel.elements)])

    def test_operator_type_of_v4_under_s3(self, config: ShrinklabConfig) -> None:
        """
        Given: V4 with S3 acting by conjugation inside S4
        When: its operator rank and type are computed
        Then: one generator suffices and the filtration ends at (2,1)
        """
        group = corpus_group("S4")
        kernel = fitting(group)
        actor = proper_supplement(group, kernel)
        action = conjugation_action(kernel, actor)

        result = operator_type(kernel.as_group, 2, actor.as_group, action, config)

        assert result == (1, FilterIndex(2, 1))
        assert operator_rank(kernel.as_group, 2, cyclic_group(1), [list(range(4))]) == 2
