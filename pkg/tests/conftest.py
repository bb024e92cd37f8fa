from __future__ import annotations

import pytest

from gsvi.surface import catalog


@pytest.fixture(scope="session")
def ex1():
    """Kinked square-root shape with exp phi (alpha = 1) and theta_t = t."""
    return catalog("nonsvi_sqrt")


@pytest.fixture(scope="session")
def ex2():
    """Power shape nu = 3.5 with exp phi (alpha = 1)."""
    return catalog("nonsvi_power", nu=3.5, alpha=1.0)
