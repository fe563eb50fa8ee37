"""Run the verification suites end to end on a reduced budget."""

import pytest

from shrinklab.exceptions import NotFound, ScenarioError
from shrinklab.suites import SUITES, SuiteBudget, SuiteResult, run_suite

SMALL = SuiteBudget(
    collection_samples=20,
    congruence_samples=20,
    membership_samples=10,
    prop2_problems=5,
    prop6_groups=("1", "C2"),
    prop7_instances=1,
)

FAST = ["collection", "prop5", "prop2", "shapiro", "duality"]
SLOW = [
    "witt",
    "lemma4-i",
    "lemma4-ii",
    "tate",
    "five-term",
    "prop6",
    "prop7",
    "prop16",
    "prop17",
    "ore",
]


class TestSuiteResult:
    """Test the counters."""

    def test_attempt_counts_library_errors(self) -> None:
        """
        Given: a suite result
        When: one attempt succeeds and one raises a library error
        Then: both are counted and the failure keeps its label
        """
        result = SuiteResult("demo", "Demonstration")

        assert result.attempt("works", lambda: 3) == 3
        assert result.attempt("fails", _raise_not_found) is None

        assert result.checks == 2
        assert not result.passed
        assert result.as_record()["first_failure"] == "fails: NotFound: nothing here"

    def test_absorb(self) -> None:
        """
        Given: a passing part and a failing part
        When: they are absorbed by an aggregate
        Then: the counters add up and failures are prefixed by the part name
        """
        total = SuiteResult("all", "Everything")
        good, bad = SuiteResult("good", "Good"), SuiteResult("bad", "Bad")
        good.check(True, "fine")
        bad.check(False, "broken")

        total.absorb(good)
        total.absorb(bad)

        record = total.as_record()
        assert (record["checks"], record["failures"]) == (2, 1)
        assert record["first_failure"] == "bad: broken"
        parts = record["suites"]
        assert [part["suite"] for part in parts] == ["good", "bad"]  # type: ignore


def _raise_not_found() -> int:
    raise NotFound("nothing here")


class TestSuites:
    """Run every suite."""

    def test_every_suite_is_listed(self) -> None:
        """
        Given: the suite table
        When: its names are read
        Then: the fast and slow lists cover it exactly
        """
        assert sorted(SUITES) == sorted(FAST + SLOW)

    @pytest.mark.parametrize(
        ("name", "prefix"),
        [
            ("lemma4-i", "Lemma 4(i): "),
            ("lemma4-ii", "Lemma 4(ii): "),
            ("prop6", "Prop 6: "),
            ("prop16", "Prop 16: "),
            ("prop17", "Prop 17: "),
            ("ore", "Ore recursion: "),
        ],
    )
    def test_statements_are_named(self, name: str, prefix: str) -> None:
        """
        Given: a suite of the table
        When: its statement is read
        Then: it opens with the name of the statement it checks
        """
        statement, _ = SUITES[name]

        assert statement.startswith(prefix)

    def test_unknown_suite(self) -> None:
        """
        Given: a name missing from the table
        When: the suite is run
        Then: ScenarioError names the known suites
        """
        with pytest.raises(ScenarioError, match="known: all, witt"):
            run_suite("astrology")

    @pytest.mark.parametrize("name", FAST)
    def test_fast_suites_pass(self, name: str) -> None:
        """
        Given: a suite that runs quickly
        When: it runs on the reduced budget
        Then: it passes at least one check and fails none
        """
        result = run_suite(name, seed=1, budget=SMALL)

        assert result.checks > 0
        assert result.passed, result.failures

    @pytest.mark.slow()
    @pytest.mark.parametrize("name", SLOW)
    def test_slow_suites_pass(self, name: str) -> None:
        """
        Given: a suite that builds larger objects
        When: it runs on the reduced budget
        Then: it passes at least one check and fails none
        """
        result = run_suite(name, seed=1, budget=SMALL)

        assert result.checks > 0
        assert result.passed, result.failures

    @pytest.mark.slow()
    def test_suites_are_reproducible(self) -> None:
        """
        Given: one seed
        When: the prop2 suite runs twice
        Then: the records are identical
        """
        first = run_suite("prop2", seed=4, budget=SMALL).as_record()
        second = run_suite("prop2", seed=4, budget=SMALL).as_record()

        assert first == second
