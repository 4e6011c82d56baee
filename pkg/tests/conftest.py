import pytest

from casqbm.config import derive_intensity_from_omega, read_config


@pytest.fixture(scope="session")
def cfg():
    """Bundled defaults (literal drive intensity)."""
    return read_config("default")


@pytest.fixture(scope="session")
def cfg_trap():
    """Defaults with the intensity back-solved from the 3 MHz trap frequency."""
    return derive_intensity_from_omega(read_config("default"))


@pytest.fixture(scope="session")
def equilibrium_full(cfg_trap):
    """Trap + CP + DCP equilibrium for the derived-intensity scenario (slow)."""
    from casqbm.potentials import find_equilibrium

    return find_equilibrium(cfg_trap)
