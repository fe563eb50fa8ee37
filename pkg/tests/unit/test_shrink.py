"""Test the shrinking solver and the killing pipelines."""

import numpy as np
import pytest

from shrinklab.exceptions import (
    CapExceeded,
    DimensionMismatch,
    GroupMismatch,
    InternalVerifyFail,
    NotFound,
    ParentMismatch,
    StageOrderViolation,
)
from shrinklab.fgroup import FiniteGroup, trivial_group
from shrinklab.gmod import FpGModule, trivial_module
from shrinklab.model import FilterIndex, ShrinklabConfig, SolverOptions
from shrinklab.shrink import (
    EQUIVARIANT_SEARCH,
    BlockTensor,
    Prop7Session,
    ShrinkProblem,
    certify,
    chevalley_bound,
    phi_a,
    prop2_solve,
    prop6_annihilate,
    prop6_plan,
    prop7_annihilate,
    prop7_kernel_only,
    required_blocks,
    sub_block_classes,
)


@pytest.fixture(name="trivial")
def fixture_trivial() -> FiniteGroup:
    """Return the trivial group."""
    return trivial_group()


def _problem(
    group: FiniteGroup, p: int, r: int, s: int, blocks: dict
) -> ShrinkProblem:
    """Build a one target problem over one dimensional M and N."""
    line = trivial_module(group, p)
    target = BlockTensor(p, r, s, 1, 1, {key: [value] for key, value in blocks.items()})
    return ShrinkProblem(p, group, line, line, s, r, (target,))


class TestBlockTensor:
    """Test the block storage of tensors."""

    def test_dense_layout(self) -> None:
        """
        Given: a row-major vector of (M ⊕ M)^{⊗2} with M one dimensional
        When: it is split into blocks
        Then: the diagonal components survive and the vector comes back
        """
        vector = np.array([1, 0, 0, 2])

        result = BlockTensor.from_dense(vector, 3, 2, 2, 1, 1)

        assert sorted(result.blocks) == [(0, 0), (1, 1)]
        assert result.to_dense().tolist() == [1, 0, 0, 2]
        assert result.support() == {0, 1}

    def test_evaluate(self) -> None:
        """
        Given: z = e₀⊗e₀ + 2·e₁⊗e₁ over F_3
        When: ψ_a is applied for a = (1, 1) and a = (1, 0)
        Then: the values are 1 + 2 = 0 and 1
        """
        tensor = BlockTensor(3, 2, 2, 1, 1, {(0, 0): [1], (1, 1): [2]})

        assert tensor.evaluate([1, 1]).tolist() == [0]
        assert tensor.evaluate([1, 0]).tolist() == [1]
        with pytest.raises(DimensionMismatch):
            tensor.evaluate([1])

    def test_rejects_bad_blocks(self) -> None:
        """
        Given: a block key beyond r and a component of the wrong length
        When: the tensor is built
        Then: DimensionMismatch is raised
        """
        with pytest.raises(DimensionMismatch):
            BlockTensor(2, 2, 1, 1, 1, {(2,): [1]})
        with pytest.raises(DimensionMismatch):
            BlockTensor(2, 2, 1, 1, 1, {(0,): [1, 1]})

    def test_padding_and_digest(self) -> None:
        """
        Given: a tensor with one component
        When: it is padded by a block
        Then: the dense dimension grows and the digest changes only with r
        """
        tensor = BlockTensor(2, 2, 2, 1, 1, {(0, 1): [1]})

        result = tensor.padded()

        assert result.dense_dim == 9
        assert result.blocks.keys() == tensor.blocks.keys()
        assert len(tensor.digest()) == 64
        assert tensor.digest() == BlockTensor(2, 2, 2, 1, 1, {(0, 1): [3]}).digest()
        assert result.digest() != tensor.digest()

    def test_random_sub_block_support(self, rng: np.random.Generator) -> None:
        """
        Given: a random tensor drawn on the first two of four blocks
        When: its support is read
        Then: no component touches the last two blocks
        """
        result = BlockTensor.random(rng, 3, 4, 2, 2, 1, blocks=2)

        assert result.support() <= {0, 1}


class TestProp2Solver:
    """Test the strategy ladder of prop2_solve."""

    def test_bound(self) -> None:
        """
        Given: s = 2, one target and one dimensional M and N
        When: the bound is computed
        Then: r = 3 blocks are required
        """
        assert chevalley_bound(2, 1, 1, 1) == 2
        assert required_blocks(2, 1, 1, 1) == 3

    def test_zero_targets_are_trivial(self, trivial: FiniteGroup) -> None:
        """
        Given: a zero target
        When: the problem is solved
        Then: the first unit vector is returned without a search
        """
        problem = _problem(trivial, 2, 2, 2, {})

        result = prop2_solve(problem)

        assert result.strategy == "trivial"
        assert result.a == (1, 0)
        assert result.is_valid()

    def test_linear_systems(self, trivial: FiniteGroup) -> None:
        """
        Given: the degree one target e₀ + e₁ over F_2
        When: the problem is solved
        Then: a kernel vector is used
        """
        problem = _problem(trivial, 2, 3, 1, {(0,): 1, (1,): 1})

        result = prop2_solve(problem)

        assert result.strategy == "linear"
        assert result.is_valid()

    def test_unused_blocks(self, trivial: FiniteGroup) -> None:
        """
        Given: a target supported on the first of two blocks
        When: the problem is solved
        Then: the second unit vector kills it
        """
        problem = _problem(trivial, 3, 2, 2, {(0, 0): 1})

        result = prop2_solve(problem)

        assert result.strategy == "support"
        assert result.a == (0, 1)
        assert result.used_blocks == 2

    def test_exhaustive_search(self, trivial: FiniteGroup) -> None:
        """
        Given: a₀² + a₁² = 0 over F_2
        When: the problem is solved
        Then: the scan finds (1, 1) after three candidates
        """
        problem = _problem(trivial, 2, 2, 2, {(0, 0): 1, (1, 1): 1})

        result = prop2_solve(problem)

        assert (result.strategy, result.a, result.candidates) == (
            "exhaustive", (1, 1), 3
        )
        assert result.as_record()["verdicts"] == ["zero"]

    def test_unsolvable_below_the_bound(self, trivial: FiniteGroup) -> None:
        """
        Given: a₀² + a₀a₁ + a₁² = 0 over F_2, which has no nonzero solution
        When: the problem is solved with r at the bound
        Then: NotFound is raised
        """
        problem = _problem(trivial, 2, 2, 2, {(0, 0): 1, (0, 1): 1, (1, 1): 1})

        with pytest.raises(NotFound):
            prop2_solve(problem)

    def test_random_search(self, trivial: FiniteGroup) -> None:
        """
        Given: a₀² + a₁² = 0 over F_2 and no room for an exhaustive scan
        When: the problem is solved reproducibly
        Then: the random sampler finds (1, 1)
        """
        problem = _problem(trivial, 2, 2, 2, {(0, 0): 1, (1, 1): 1})
        options = SolverOptions(budget=64, seed=1, reproducible=True)

        result = prop2_solve(problem, options, ShrinklabConfig(exhaustive_limit=1))

        assert (result.strategy, result.a) == ("random", (1, 1))

    def test_above_the_bound_always_solves(
        self, trivial: FiniteGroup, rng: np.random.Generator
    ) -> None:
        """
        Given: random quadratic targets over F_3 with r beyond the bound
        When: they are solved
        Then: every certificate is valid
        """
        line = trivial_module(trivial, 3)
        r = required_blocks(2, 1, 1, 1)
        for _ in range(10):
            target = BlockTensor.random(rng, 3, r, 2, 1, 1)
            problem = ShrinkProblem(3, trivial, line, line, 2, r, (target,))

            assert prop2_solve(problem).is_valid()

    def test_problem_checks(self, trivial: FiniteGroup, c2: FiniteGroup) -> None:
        """
        Given: a target of the wrong rank and a module over another group
        When: the problem is built
        Then: it is rejected
        """
        line = trivial_module(trivial, 2)
        target = BlockTensor.zero(2, 3, 1, 1, 1)

        with pytest.raises(DimensionMismatch):
            ShrinkProblem(2, trivial, line, line, 1, 2, (target,))
        with pytest.raises(GroupMismatch):
            ShrinkProblem(2, trivial, trivial_module(c2, 2), line, 1, 3, (target,))

    def test_certify_rejects_zero(self, trivial: FiniteGroup) -> None:
        """
        Given: the zero vector
        When: it is certified
        Then: InternalVerifyFail is raised
        """
        problem = _problem(trivial, 2, 2, 1, {(0,): 1})

        with pytest.raises(InternalVerifyFail):
            certify(problem, [0, 0], "manual", 0)

    def test_phi_a(self, trivial: FiniteGroup) -> None:
        """
        Given: a = (1, 2) over F_3
        When: φ_a is built on two copies of a line
        Then: its matrix is the row a
        """
        result = phi_a(trivial_module(trivial, 3), [1, 2])

        assert result.matrix.tolist() == [[1, 2]]


class TestProp6:
    """Test killing classes at one level."""

    @pytest.fixture(name="coefficients")
    def fixture_coefficients(self, c2: FiniteGroup) -> FpGModule:
        """Return F_2 with the trivial C2 action."""
        return trivial_module(c2, 2)

    def test_plan(self, c2: FiniteGroup, coefficients: FpGModule) -> None:
        """
        Given: one class of Ĥ⁰ at ν = (2,2) over C2 with n = 1
        When: the level is planned with two blocks
        Then: the plan is below the bound of nine blocks
        """
        result = prop6_plan(c2, 2, 1, FilterIndex(2, 2), 0, coefficients, 1, blocks=2)

        assert (result.m, result.required) == (2, 9)
        assert result.below_bound

    @pytest.mark.parametrize("k", [-1, 2])
    def test_single_class_at_the_bound(
        self, c2: FiniteGroup, coefficients: FpGModule, k: int
    ) -> None:
        """
        Given: a nonzero class of Ĥ^k(G, 𝓔(m, (2,2))) over C2 with p = 2 and n = 1
        When: the level is chosen by the bound and the class is annihilated
        Then: m = 9 lies past the truncation cap and the solver kills it alone
        """
        plan = prop6_plan(c2, 2, 1, FilterIndex(2, 2), k, coefficients, 1)
        target = plan.source.element(np.ones(plan.source.dim, dtype=np.int64))

        result = prop6_annihilate(plan, [target])

        assert (plan.m, plan.required) == (9, 9)
        assert not plan.below_bound
        assert plan.large.dim == 153
        assert not target.is_zero()
        assert not result.fallback
        assert result.strategy != EQUIVARIANT_SEARCH
        assert all(image.is_zero() for image in result.images)
        assert result.as_record()["below_bound"] is False
        with pytest.raises(CapExceeded):
            result.lift()

    def test_sub_block_classes_are_killed(
        self, c2: FiniteGroup, coefficients: FpGModule, rng: np.random.Generator
    ) -> None:
        """
        Given: classes pushed in from the first of two blocks
        When: they are annihilated
        Then: the surjection onto one block kills every class and lifts to the groups
        """
        plan = prop6_plan(c2, 2, 1, FilterIndex(2, 2), 0, coefficients, 2, blocks=2)
        targets = sub_block_classes(plan, 2, rng)

        result = prop6_annihilate(plan, targets)

        assert all(image.is_zero() for image in result.images)
        assert result.psi_bar.matrix.shape == (2, 4)
        assert np.array_equal(
            result.lift().layer_map(FilterIndex(2, 2)).matrix, result.psi_star.matrix
        )
        assert not result.fallback
        assert result.as_record()["verdicts"] == ["zero", "zero"]

    def test_sub_block_classes_need_two_blocks(
        self, c2: FiniteGroup, coefficients: FpGModule, rng: np.random.Generator
    ) -> None:
        """
        Given: a plan with a single block
        When: sub-block classes are asked for
        Then: DimensionMismatch is raised
        """
        plan = prop6_plan(c2, 2, 1, FilterIndex(2, 2), 0, coefficients, 1, blocks=1)

        with pytest.raises(DimensionMismatch):
            sub_block_classes(plan, 1, rng)

    def test_foreign_targets(self, c2: FiniteGroup, coefficients: FpGModule) -> None:
        """
        Given: a class of the small level
        When: it is handed to the pipeline as a target
        Then: ParentMismatch is raised
        """
        plan = prop6_plan(c2, 2, 1, FilterIndex(2, 2), 0, coefficients, 1, blocks=2)

        with pytest.raises(ParentMismatch):
            prop6_annihilate(plan, [plan.target.zero()])


class TestProp7:
    """Test the two-stage session."""

    def test_one_stage_at_the_bottom_layer(self, c2: FiniteGroup) -> None:
        """
        Given: ν = (1,1) over C2, where H₁ of the free layer vanishes
        When: both stages are requested
        Then: only the first runs and the composite is its letter map
        """
        session = Prop7Session(c2, 2, 1, FilterIndex(1, 1), trivial_module(c2, 2), 1, 0)

        result = prop7_annihilate(session, [], lambda level: [])

        assert not session.two_stage
        assert result.stages == 1
        assert result.as_record()["stage2"] is None
        assert result.composite is not None
        assert result.stage1 is not None
        assert result.composite is result.stage1.psi_bar

    def test_stages_run_in_order(self, c2: FiniteGroup) -> None:
        """
        Given: a two-stage session
        When: stage 2 or the report is asked for first
        Then: StageOrderViolation is raised
        """
        session = Prop7Session(
            c2,
            2,
            1,
            FilterIndex(2, 2),
            trivial_module(c2, 2),
            1,
            1,
            SolverOptions(blocks=2, stage1_blocks=2),
        )

        with pytest.raises(StageOrderViolation):
            session.run_stage2(lambda level: [])
        with pytest.raises(StageOrderViolation):
            session.stage2_problem([])
        with pytest.raises(StageOrderViolation):
            session.report()

    def test_kernel_only(self, trivial: FiniteGroup) -> None:
        """
        Given: a tensor on the first of two blocks at ν = (1,1)
        When: it is killed in a single stage
        Then: the last block is kept and the report has one stage
        """
        tensors = [BlockTensor(2, 2, 2, 1, 1, {(0, 0): [1]})]
        options = SolverOptions(blocks=2)

        result = prop7_kernel_only(
            trivial,
            2,
            1,
            FilterIndex(1, 1),
            trivial_module(trivial, 2),
            1,
            lambda level: tensors,
            options,
        )

        assert result.stage2 is not None
        assert result.stage2.a == (0, 1)
        assert (result.r, result.stages) == (2, 1)
