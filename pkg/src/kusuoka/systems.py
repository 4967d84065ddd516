"""Built-in system catalogue for the command line and tests."""

from __future__ import annotations

from fractions import Fraction

from . import gasket, matsys
from .linalg import EXACT
from .matsys import MatrixSystem

__all__ = ["BUILTIN_NAMES", "get_builtin"]

BUILTIN_NAMES = ("sg", "sg3", "sg4", "sg5", "bernoulli:p1,p2,...")


def get_builtin(name: str, backend: str = EXACT) -> MatrixSystem:
    """Resolve a builtin system name.

    ``bernoulli:`` takes comma-separated symbol probabilities, each a
    fraction or decimal string; the maps carry their square roots.
    """
    if name == "sg":
        return matsys.sg_system(backend)
    if name in ("sg3", "sg4", "sg5"):
        return gasket.generate_system(int(name[2:]), backend)
    if name.startswith("bernoulli:"):
        body = name[len("bernoulli:"):]
        if not body:
            raise ValueError("bernoulli builtin needs probabilities, e.g. bernoulli:0.5,0.5")
        try:
            probs = [Fraction(tok) for tok in body.split(",")]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad bernoulli probabilities {body!r}: {exc}") from exc
        if any(p < 0 for p in probs):
            raise ValueError("bernoulli probabilities must be nonnegative")
        return matsys.bernoulli_system(probs, backend)
    raise ValueError(f"unknown builtin {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
