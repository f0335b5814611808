"""Release gate: every acceptance criterion must pass at its tolerance.

Each test runs one criterion and prints its one-line verdict, so a plain
``pytest -v`` run shows a pass/fail line per criterion.
"""

import pytest

from comb_qmc import acceptance


@pytest.mark.parametrize(
    "criterion", acceptance.CRITERIA, ids=lambda c: c.__name__.replace("criterion_", "")
)
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()


def test_battery_registry_is_complete():
    # run_all drives exactly these criteria; the per-criterion tests above
    # exercise them, so only the registry shape is asserted here.
    assert len(acceptance.CRITERIA) == 10
    assert len({c.__name__ for c in acceptance.CRITERIA}) == 10
