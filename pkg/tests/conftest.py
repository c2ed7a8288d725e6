import pytest

from dkg import fixtures


@pytest.fixture(scope="session")
def guideline():
    """The bundled ALL guideline fixture graph (session-scoped; treat as
    read-only in tests)."""
    return fixtures.load_guideline()


@pytest.fixture()
def fresh_guideline():
    return fixtures.load_guideline()


@pytest.fixture(scope="session")
def dataset():
    return fixtures.load_bundled_dataset()
