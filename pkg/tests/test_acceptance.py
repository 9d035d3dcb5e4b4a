"""The ten end-to-end acceptance criteria at full sample size.

Each criterion checks its guarantees with exact rational comparisons; the
summary at the end of the run lists one PASS/FAIL line per criterion.
"""
import pytest

from conftest import ACCEPTANCE_LINES
from matround.harness.acceptance import CRITERIA

# smallest sample each criterion must cover
MINIMUM = {1: 200, 2: 200, 3: 100, 4: 100, 5: 500, 6: 200, 7: 300, 8: 50, 9: 100, 10: 100}

pytestmark = [pytest.mark.acceptance, pytest.mark.slow]


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number, request):
    fn, scale = CRITERIA[number - 1]
    kwargs = {"count": round(200 * scale), "seed": 0, "workers": 1}
    if number == 8:
        kwargs["size"] = 7
    res = fn(**kwargs)
    line = res.line()
    request.config.stash[ACCEPTANCE_LINES].append(line)
    print(line)
    for key, value in res.stats.items():
        print(f"    {key}: {value}")
    assert res.number == number
    assert not res.failures, res.failures[:5]
    assert res.checked >= MINIMUM[number]
