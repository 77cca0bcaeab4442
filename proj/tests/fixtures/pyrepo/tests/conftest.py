import pytest

from shopkit.catalog import Product


@pytest.fixture
def widget():
    return Product("WID-001", "Widget", 250, tags=["tools", "small"])


@pytest.fixture
def gadget():
    return Product("GAD-002", "Gadget", 1200, tags=["tools"])
