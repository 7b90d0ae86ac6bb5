import contextlib

import pytest

from pufferot import DiscreteDistribution, DiscriminativePair, adult_education_pair

# Worked-example conditional pairs used across the suite.
EXAMPLE1 = {
    "support": [1, 2, 3, 4],
    "p": [1 / 3, 1 / 6, 1 / 3, 1 / 6],
    "q": [1 / 4, 1 / 4, 1 / 6, 1 / 3],
}
EXAMPLE2 = {
    "support": [1, 2, 3, 4, 5],
    "p": [0.2, 0.225, 0.5, 0.075, 0.0],
    "q": [0.0, 0.075, 0.5, 0.225, 0.2],
}


def make_pair(example, name) -> DiscriminativePair:
    return DiscriminativePair(
        labels=("secret-a", "secret-b"),
        p=DiscreteDistribution.from_weights(example["support"], example["p"]),
        q=DiscreteDistribution.from_weights(example["support"], example["q"]),
        prior=name,
    )


@pytest.fixture
def example1_pair() -> DiscriminativePair:
    return make_pair(EXAMPLE1, "worked-example-1")


@pytest.fixture
def example2_pair() -> DiscriminativePair:
    return make_pair(EXAMPLE2, "worked-example-2")


@pytest.fixture
def adult_pair() -> DiscriminativePair:
    return adult_education_pair()


@pytest.fixture
def canonical_pairs(example1_pair, example2_pair, adult_pair):
    """The three conditional pairs every soundness check runs over."""
    return [example1_pair, example2_pair, adult_pair]


# ---------------------------------------------------------------------------
# Acceptance-criteria reporting: one pass/fail line per criterion in the
# terminal summary.
# ---------------------------------------------------------------------------

acceptance_results: list[str] = []


@pytest.fixture
def criterion():
    @contextlib.contextmanager
    def _criterion(number: int, description: str):
        try:
            yield
        except BaseException:
            acceptance_results.append(f"criterion {number}: FAIL - {description}")
            raise
        acceptance_results.append(f"criterion {number}: PASS - {description}")

    return _criterion


def pytest_terminal_summary(terminalreporter):
    if acceptance_results:
        terminalreporter.section("acceptance criteria")
        for line in sorted(acceptance_results):
            terminalreporter.write_line(line)
