import numpy as np
import pytest
from hypothesis import settings

from sfcgame.domain import GridTariff, ResidentialUnit

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


def random_units(rng: np.random.Generator, n: int, k_range=(90.0, 150.0), e_gen=10.0):
    k = rng.uniform(*k_range, size=n)
    return [ResidentialUnit(i + 1, float(k[i]), e_gen) for i in range(n)]


def interior_instance(rng: np.random.Generator):
    """Instance whose leader optimum is interior: no clamp active, purchase cap slack."""
    n = int(rng.integers(1, 26))
    p_sell = float(rng.uniform(60.0, 90.0))
    units = random_units(rng, n)
    return units, GridTariff(8.45, p_sell), 500.0


@pytest.fixture
def two_units():
    return [ResidentialUnit(1, 100.0, 10.0), ResidentialUnit(2, 120.0, 10.0)]


@pytest.fixture
def tariff60():
    return GridTariff(8.45, 60.0)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE.append((criterion, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
