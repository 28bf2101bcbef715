import numpy as np
import pytest

from censem import ComponentSpec, MixtureModel


@pytest.fixture
def reference_mixture() -> MixtureModel:
    """The workhorse two-component model used across the suite:
    20% exponential (17 ms) + 80% Weibull (2500 ms, shape 0.57)."""
    return MixtureModel(
        [0.2, 0.8],
        [ComponentSpec.exponential(17.0), ComponentSpec.weibull(2500.0, 0.57)],
    )


def weibull_pdf_direct(x, alpha, beta):
    """Plain linear-space density for quadrature oracles."""
    x = np.asarray(x, dtype=float)
    return (beta / alpha) * (x / alpha) ** (beta - 1.0) * np.exp(-((x / alpha) ** beta))
