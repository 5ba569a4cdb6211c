"""Tropical limits of statistical systems.

Submodules: ``core`` (idempotent monoids), ``filters``, ``ultrametrics``,
``nesting``, ``thermo``, ``dequantify``, ``amoeba`` and the ``cli``.
"""

from .core import NEG_INF, POS_INF, Mode, oplus, oplus_eps
from .errors import TropicaError

__version__ = "0.1.0"

__all__ = ["NEG_INF", "POS_INF", "Mode", "oplus", "oplus_eps", "TropicaError", "__version__"]
