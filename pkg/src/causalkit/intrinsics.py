"""Registry of engine-provided intrinsic functions callable from CML.

An intrinsic bundles a type rule, a runtime implementation, and a
stochastic flag (stochastic intrinsics make a law count as random).
The quantum kit registers its numeric intrinsics here on import.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable


class IntrinsicTypeError(Exception):
    """Raised by an intrinsic's type rule on bad argument types."""


@dataclass
class CheckContext:
    """Lets a type rule inspect argument expressions (constant folding)."""

    exprs: list
    fold_expr: Callable

    def fold(self, i: int):
        """Literal value of argument i, or None if not a constant."""
        return self.fold_expr(self.exprs[i])


@dataclass(frozen=True)
class Intrinsic:
    name: str
    stochastic: bool
    check: Callable   # (arg_types: list[TypeDesc], ctx: CheckContext) -> TypeDesc
    impl: Callable    # (args: list[Value], env) -> Value


_REGISTRY: dict[str, Intrinsic] = {}


def register(intrinsic: Intrinsic) -> None:
    _REGISTRY[intrinsic.name] = intrinsic


def get(name: str) -> Intrinsic | None:
    return _REGISTRY.get(name)


def registered_names() -> list[str]:
    return sorted(_REGISTRY)
