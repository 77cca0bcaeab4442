"""Product catalog."""

from .checks import validate_sku
from .pricing import apply_tax
from .text import parse_config, slugify


class Product:
    """A sellable item."""

    def __init__(self, sku, name, price, tags=()):
        if price < 0:
            raise ValueError("negative price")
        self.sku = sku
        self.name = name
        self.price = price
        self.tags = frozenset(tags)

    @property
    def slug(self):
        return slugify(self.name)

    def price_with_tax(self, region):
        """Shelf price including tax."""
        return apply_tax(self.price, region)

    def to_dict(self):
        return {
            "sku": self.sku,
            "name": self.name,
            "price": self.price,
            "tags": sorted(self.tags),
        }


class Catalog:
    """An in-memory product index keyed by SKU."""

    def __init__(self):
        self._items = {}

    def add(self, product):
        if product.sku in self._items:
            raise KeyError(product.sku)
        self._items[product.sku] = product
        return product

    def get(self, sku):
        return self._items[sku]

    def find_by_tag(self, tag):
        """Products carrying ``tag``, ordered by name."""
        hits = [p for p in self._items.values() if tag in p.tags]
        return sorted(hits, key=lambda p: p.name)

    def total_value(self):
        return sum(p.price for p in self._items.values())

    def cheapest(self, tag=None):
        pool = self.find_by_tag(tag) if tag else list(self._items.values())
        if not pool:
            return None
        best = pool[0]
        for product in pool[1:]:
            if product.price < best.price or (
                product.price == best.price and product.sku < best.sku
            ):
                best = product
        return best


def load_catalog(config_text):
    """Build a catalog from a config blob with one section per product."""
    catalog = Catalog()
    for section, fields in sorted(parse_config(config_text).items()):
        if not validate_sku(fields["sku"]):
            raise ValueError("bad sku in section " + section)
        tags = [t for t in fields.get("tags", "").split(",") if t]
        catalog.add(Product(fields["sku"], fields.get("name", section), int(fields["price"]), tags))
    return catalog
