import pytest

from shopkit.catalog import Catalog, Product, load_catalog


def test_product_rejects_negative_price():
    with pytest.raises(ValueError):
        Product("X", "x", -1)


def test_product_slug(widget):
    assert widget.slug == "widget"


def test_product_price_with_tax(widget):
    assert widget.price_with_tax("south") == 263


def test_product_to_dict(widget):
    assert widget.to_dict() == {"sku": "WID-001", "name": "Widget", "price": 250, "tags": ["small", "tools"]}


def test_catalog_add_and_get(widget):
    cat = Catalog()
    cat.add(widget)
    assert cat.get("WID-001") is widget


def test_catalog_duplicate(widget):
    cat = Catalog()
    cat.add(widget)
    with pytest.raises(KeyError):
        cat.add(widget)


def test_catalog_find_by_tag(widget, gadget):
    cat = Catalog()
    cat.add(widget)
    cat.add(gadget)
    assert [p.name for p in cat.find_by_tag("tools")] == ["Gadget", "Widget"]
    assert cat.find_by_tag("small") == [widget]


def test_catalog_total_value(widget, gadget):
    cat = Catalog()
    cat.add(widget)
    cat.add(gadget)
    assert cat.total_value() == 1450


def test_catalog_cheapest(widget, gadget):
    cat = Catalog()
    assert cat.cheapest() is None
    cat.add(gadget)
    cat.add(widget)
    assert cat.cheapest() is widget
    assert cat.cheapest("tools") is widget


def test_catalog_cheapest_tie_breaks_on_sku():
    cat = Catalog()
    a = cat.add(Product("B1", "b", 5))
    cat.add(Product("C1", "c", 5))
    assert cat.cheapest() is a


def _config():
    return (
        "[bolt]\nsku = BOLT165\nprice = 15\ntags = hw,small\n"
        "[nut]\nsku = NUT273\nname = Hex Nut\nprice = 5\n"
    )


def test_load_catalog_products():
    cat = load_catalog(_config())
    assert sorted(p.name for p in cat.find_by_tag("hw")) == ["bolt"]
    assert cat.total_value() == 20


def test_load_catalog_names_default_to_section():
    cat = load_catalog(_config())
    assert cat.cheapest().name == "Hex Nut"
