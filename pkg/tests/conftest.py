"""
Pytest configuration and fixtures for thetaspec tests
"""
import pytest

from app.services import scattering
from app.services.spectrum import DELTA_AT_I, build_line, discrete_roots


@pytest.fixture(scope="session")
def datum():
    """Shared scattering datum with its phase table"""
    return scattering.get_datum()


@pytest.fixture(scope="session")
def zeros_a3(datum):
    """Constant-term zeros for a = 3 up to t = 100"""
    return scattering.zeros(3.0, 100.0, datum)


@pytest.fixture(scope="session")
def line_a3(datum):
    """Spectral line at a = 3, t <= 60 with the default period"""
    return build_line(3.0, 60.0, DELTA_AT_I, datum=datum)


@pytest.fixture(scope="session")
def roots_a3(line_a3):
    return discrete_roots(line_a3)


@pytest.fixture
def cache_dir(tmp_path, monkeypatch):
    """Point the zero cache at a temporary directory"""
    from app.core.config import settings

    directory = tmp_path / "zero_cache"
    monkeypatch.setattr(settings, "CACHE_DIR", directory)
    return directory
