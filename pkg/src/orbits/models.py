"""Pydantic models for solver constants, orbit bounds and membership results."""

from typing import Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from src.algebra.compose import Uniformiser


class HenselData(BaseModel):
    """Solver constants for a given f and congruence level n."""

    model_config = ConfigDict(frozen=True)

    i0: int = Field(description="Least support exponent not divisible by p")
    Nprime: int = Field(description="Ceiling bound past which the i0 term dominates")
    N: int = Field(description="Ball radius index: max(N', n + i0 - 2)")
    n: int = Field(description="Target congruence level, y in t + M^n")


class OrbitBound(BaseModel):
    """Radii for B(N; b) ∩ F((t))^(p^l) ⊆ Orb_n(b)."""

    model_config = ConfigDict(frozen=True)

    l: int = Field(description="Power content of b")
    N1: int = Field(description="Radius index for the content-free root")
    N: int = Field(description="Radius index for b itself: p^l (N1 + 1) - 1")
    n: int = Field(description="Congruence level")


class Witness(BaseModel):
    """A substitution s with act(s, a) = b below ``verified_to``."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["witness"] = "witness"
    s: Uniformiser
    verified_to: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "s": str(self.s), "verified_to": self.verified_to}


class NotInOrbit(BaseModel):
    """Certified rejection by an orbit invariant."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["not_in_orbit"] = "not_in_orbit"
    reason: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "reason": self.reason}


class Unknown(BaseModel):
    """Neither membership nor its negation could be certified."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["unknown"] = "unknown"
    reason: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "reason": self.reason}


MembershipResult = Union[Witness, NotInOrbit, Unknown]
