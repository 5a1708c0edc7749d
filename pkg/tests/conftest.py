import pytest

from inertiamarket import uc
from inertiamarket.scenario_io import load_bundled


@pytest.fixture(scope="session")
def small():
    return load_bundled("small_system")


@pytest.fixture(scope="session")
def pipeline(small):
    """Two-step result on the small system, VI not participating."""
    return uc.two_step_pipeline(small, uc.UcVariant(frequency_constrained=True))


@pytest.fixture(scope="session")
def vi_pipeline(small):
    """VI participating at a bid low enough to displace some commitments."""
    scenario = small.with_vi_bids(0.05)
    return scenario, uc.two_step_pipeline(
        scenario, uc.UcVariant(frequency_constrained=True, vi_enabled=True)
    )


@pytest.fixture(scope="session")
def negative_vi_pipeline(small):
    """Bid above the utility value but low enough that VI still displaces a
    generator, leaving VI marginal at the gap hours with a negative price."""
    scenario = small.with_vi_bids(0.3)
    return scenario, uc.two_step_pipeline(
        scenario, uc.UcVariant(frequency_constrained=True, vi_enabled=True)
    )
