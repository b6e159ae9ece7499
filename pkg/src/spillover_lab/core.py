"""Binary beliefs, message vocabulary and seeded random streams."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateBelief, LengthMismatch, NonFinite, ZeroMass, ZeroVariance


@dataclass(frozen=True)
class BinaryBelief:
    """Probability distribution over a two-point state space {w0, w1}.

    Only the mass on ``w1`` is stored; the mass on ``w0`` is derived, so
    the two always sum to one.
    """

    p1: float

    def __post_init__(self):
        p = float(self.p1)
        if not math.isfinite(p):
            raise NonFinite(f"belief mass must be finite, got {self.p1!r}")
        if p < 0.0 or p > 1.0:
            raise DegenerateBelief(f"belief mass {p} outside [0, 1]")
        object.__setattr__(self, "p1", p)

    @property
    def p0(self) -> float:
        return 1.0 - self.p1

    def mass(self, state: int) -> float:
        """Mass on ``w_state`` for ``state`` in {0, 1}."""
        if state == 1:
            return self.p1
        if state == 0:
            return 1.0 - self.p1
        raise ValueError(f"state must be 0 or 1, got {state!r}")

    @property
    def full_support(self) -> bool:
        return 0.0 < self.p1 < 1.0

    def require_full_support(self, name: str = "belief") -> "BinaryBelief":
        if not self.full_support:
            raise DegenerateBelief(f"{name} must have full support, got p1={self.p1}")
        return self

    @classmethod
    def from_mass(cls, state: int, mass: float) -> "BinaryBelief":
        """Belief that puts ``mass`` on ``w_state``."""
        return cls(mass if state == 1 else 1.0 - mass)


def normalize(weights: Sequence[float]) -> BinaryBelief:
    """Turn a pair of nonnegative weights ``(w1, w0)`` into a belief.

    The first weight is the one on ``w1``.
    """
    w1, w0 = (float(w) for w in weights)
    if not (math.isfinite(w1) and math.isfinite(w0)):
        raise NonFinite(f"weights must be finite, got ({w1}, {w0})")
    if w1 < 0 or w0 < 0:
        raise ValueError(f"weights must be nonnegative, got ({w1}, {w0})")
    total = w1 + w0
    if total == 0.0:
        raise ZeroMass("both weights are zero")
    return BinaryBelief(w1 / total)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"shapes differ: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise LengthMismatch("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ZeroVariance("one of the vectors is constant")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


class Stance(enum.IntEnum):
    """Economic stance; the value doubles as the index of the favoured state."""

    ZERO = 0
    ONE = 1

    @property
    def other(self) -> "Stance":
        return Stance(1 - self.value)


class Tag(enum.Enum):
    """Cultural tag of a message.

    ``IN_GROUP``/``OUT_GROUP`` are relative to the receiver; ``SP``/``SC``
    name the socially progressive and socially conservative groups.
    """

    IN_GROUP = "in"
    OUT_GROUP = "out"
    SP = "SP"
    SC = "SC"
    NONE = "none"

    @property
    def is_absolute(self) -> bool:
        return self in (Tag.SP, Tag.SC)

    @property
    def is_relative(self) -> bool:
        return self in (Tag.IN_GROUP, Tag.OUT_GROUP)

    @property
    def opposite(self) -> "Tag":
        flip = {
            Tag.SP: Tag.SC,
            Tag.SC: Tag.SP,
            Tag.IN_GROUP: Tag.OUT_GROUP,
            Tag.OUT_GROUP: Tag.IN_GROUP,
        }
        return flip.get(self, Tag.NONE)

    def relative_to(self, group: "Tag") -> "Tag":
        """Resolve an absolute tag against the receiver's own group."""
        if not group.is_absolute:
            raise ValueError(f"receiver group must be SP or SC, got {group}")
        if self is Tag.NONE or self.is_relative:
            return self
        return Tag.IN_GROUP if self is group else Tag.OUT_GROUP


@dataclass(frozen=True)
class Message:
    """An economic stance (optionally with the belief it conveys) plus a cultural tag.

    ``same_source`` is False when the two components come from different
    senders; it only matters when both are present.
    """

    economic: Optional[Stance] = None
    payload: Optional[BinaryBelief] = None
    cultural: Tag = Tag.NONE
    same_source: bool = True

    def __post_init__(self):
        if self.economic is None and self.payload is not None:
            raise ValueError("a message without economic stance cannot carry a payload")
        if self.economic is not None:
            object.__setattr__(self, "economic", Stance(self.economic))

    @property
    def is_bundled(self) -> bool:
        return self.economic is not None and self.cultural is not Tag.NONE and self.same_source

    def relative_to(self, group: Tag) -> "Message":
        return Message(self.economic, self.payload, self.cultural.relative_to(group), self.same_source)

    def label(self) -> str:
        econ = "none" if self.economic is None else f"stance{int(self.economic)}"
        suffix = "" if self.same_source else "/separate"
        return f"({econ},{self.cultural.value}{suffix})"


@dataclass(frozen=True)
class RngStream:
    """Seeded random stream; the same ``(seed, stream_id)`` always gives the same draws."""

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = int(getattr(self, name))
            if not 0 <= value < 2**64:
                raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")
            object.__setattr__(self, name, value)

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
        return np.random.Generator(np.random.PCG64(seq))

    def child(self, stream_id: int) -> "RngStream":
        return RngStream(self.seed, stream_id)
