import asyncio

from shopkit.cart import Cart
from shopkit.report import render_async, render_receipt, summarize


def _cart(widget, gadget):
    cart = Cart(region="north")
    cart.add_item(widget, 2)
    cart.add_item(gadget, 1)
    return cart


def test_summarize_counts(widget, gadget):
    s = summarize(_cart(widget, gadget))
    assert s["items"] == 3
    assert s["subtotal"] == 1700


def test_summarize_prices(widget, gadget):
    s = summarize(_cart(widget, gadget))
    assert s["mean_price"] == 725
    assert s["median_price"] == 725


def test_summarize_empty():
    s = summarize(Cart())
    assert s["mean_price"] == 0 and s["total"] == 0


def test_summarize_total(widget, gadget):
    assert summarize(_cart(widget, gadget))["total"] == 1836


def test_receipt_lines(widget, gadget):
    text = render_receipt(_cart(widget, gadget))
    lines = text.splitlines()
    assert lines[0].endswith("$12.00") and "Gadget" in lines[0]
    assert lines[1].endswith("$5.00")
    assert all(len(line) == 32 for line in lines[:-1])


def test_receipt_discount_line(widget, gadget):
    cart = _cart(widget, gadget)
    cart.apply_code("FLAT:100")
    assert "DISCOUNT" in render_receipt(cart)
    assert "-$1.00" in render_receipt(cart)


def test_receipt_tax_rate(widget, gadget):
    assert render_receipt(_cart(widget, gadget)).endswith("TAX RATE 8.00%")


def test_render_async(widget, gadget):
    cart = _cart(widget, gadget)
    assert asyncio.run(render_async(cart)) == render_receipt(cart)
