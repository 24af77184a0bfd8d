"""Hidden-service crawling and analysis at desk scale.

Subpackages and modules: ``corpus`` (page records and snapshots), ``seeder``,
``scheduler``, ``extractor``, ``mirror``, ``graph``, ``classify``,
``prohibit``, ``synth`` and ``cli``.
"""
from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("onionscope")
except PackageNotFoundError:  # pragma: no cover - running from a source tree
    __version__ = "0.1.0"

__all__ = ["__version__"]
