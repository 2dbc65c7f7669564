import pytest

from dpsqkd.omega import omega_curve


@pytest.fixture(scope="session")
def curves():
    """Default-grid Omega curves, keyed by (n, nu), built once per session."""
    cache = {}

    def get(n, nu):
        if (n, nu) not in cache:
            cache[(n, nu)] = omega_curve(n, nu)
        return cache[(n, nu)]

    return get
