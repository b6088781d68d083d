import math

import pytest

import fluxonium_cz as fz


@pytest.fixture(scope="session")
def paper_config():
    return fz.load_paper_config()


@pytest.fixture(scope="session")
def system(paper_config):
    return fz.build_system(paper_config)


@pytest.fixture(scope="session")
def joint(system):
    return system[2]


@pytest.fixture(scope="session")
def summary(joint):
    return fz.spectrum_summary(joint)


@pytest.fixture(scope="session")
def design(joint):
    """Synchronized pulse and solution for the bundled device (target phase pi)."""
    return fz.design_pulse(joint, eps_ratio=0.9, target_phase=math.pi, t_width=15.0)


@pytest.fixture(scope="session")
def coherence(paper_config):
    return paper_config.coherence_set()
