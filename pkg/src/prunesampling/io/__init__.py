from pathlib import Path

from .benchmarks import FAMILIES, BenchmarkSpec, generate
from .bif import parse_bif_subset
from .native import parse_native, serialize_native

__all__ = [
    "FAMILIES", "BenchmarkSpec", "generate", "parse_bif_subset", "parse_native",
    "serialize_native", "load_network", "save_network",
]


def load_network(path):
    """Read a ``.bif`` file or a native JSON document, chosen by extension."""
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".bif":
        return parse_bif_subset(text)
    return parse_native(text)


def save_network(net, path):
    Path(path).write_text(serialize_native(net))
