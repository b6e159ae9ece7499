"""Two-party electoral competition with one-sided propaganda.

Two voter groups (socially progressive SP and socially conservative SC)
have quadratic loss over a cultural policy ``x`` and an economic policy
``y``.  A uniform popularity shock on ``[-phi, phi]`` hits all voters, and
each party values its vote share through a utility curve ``v``.  Before the
election party A may broadcast one message; identity distortion turns it
into economic disagreement between the groups, which the parties then
exploit by differentiating their platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import configio as cio
from .core import BinaryBelief, Message, Stance, Tag
from .errors import ConfigError, ConfigInvalid, DegenerateUtility, InvalidPersuasionCurve
from .identity import MAX_CHI, distort_belief

SHAPE_GRID = 1001
GRID_POINTS = 201
GRID_MARGIN = 0.5

PERSUASION_CURVES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sqrt": np.sqrt,
    "log1p": np.log1p,
    "linear": lambda f: np.asarray(f, dtype=float),
}


@dataclass(frozen=True)
class VoterGroup:
    tag: Tag
    position: float
    share: float
    belief: BinaryBelief

    def __post_init__(self):
        if not self.tag.is_absolute:
            raise ConfigInvalid("voter group tag must be SP or SC")
        if not (math.isfinite(self.position) and 0.0 < self.share < 1.0):
            raise ConfigInvalid(f"bad voter group {self.tag.value}: position {self.position}, share {self.share}")


@dataclass(frozen=True)
class Platform:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ConfigInvalid("platform coordinates must be finite")

    def distance_sq(self, other: "Platform") -> float:
        return (self.x - other.x) ** 2 + (self.y - other.y) ** 2


def _grid(n: int = SHAPE_GRID) -> np.ndarray:
    return np.linspace(0.0, 1.0, n)


def is_increasing(values: np.ndarray) -> bool:
    return bool(np.all(np.diff(values) > 0))


def is_concave(values: np.ndarray, strict: bool = True, tol: float = 1e-12) -> bool:
    d2 = np.diff(values, n=2)
    return bool(np.all(d2 < 0)) if strict else bool(np.all(d2 <= tol))


def campaign_utility(s, curve: str | Callable = "sqrt", psi: float = 2.0, W: float = 1.0):
    """Expected party payoff when vote share ``s`` buys persuasion ``curve(s)``.

    Campaign spending is proportional to vote share, and a second-stage
    popularity contest with half-width ``psi`` converts persuasion into
    the prize ``W``.
    """
    pi = _persuasion(curve)
    _check_persuasion(pi, psi, W)
    s = np.asarray(s, dtype=float)
    out = (0.5 + (pi(s) - pi(1.0 - s)) / (2.0 * psi)) * W
    return float(out) if out.ndim == 0 else out


def _persuasion(curve) -> Callable[[np.ndarray], np.ndarray]:
    if callable(curve):
        return curve
    if curve in PERSUASION_CURVES:
        return PERSUASION_CURVES[curve]
    if isinstance(curve, str) and curve.startswith("power:"):
        a = float(curve.split(":", 1)[1])
        return lambda f: np.power(np.asarray(f, dtype=float), a)
    raise InvalidPersuasionCurve(f"unknown persuasion curve {curve!r}")


def _check_persuasion(pi, psi: float, W: float) -> None:
    vals = np.asarray(pi(_grid()), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise InvalidPersuasionCurve("persuasion curve is not finite on [0, 1]")
    if not is_increasing(vals):
        raise InvalidPersuasionCurve("persuasion curve must be strictly increasing")
    if not is_concave(vals, strict=False):
        raise InvalidPersuasionCurve("persuasion curve must be concave")
    if not psi > vals[-1] - vals[0]:
        raise InvalidPersuasionCurve(f"psi = {psi} must exceed the persuasion range {vals[-1] - vals[0]}")
    if not W > 0:
        raise InvalidPersuasionCurve("prize W must be positive")


@dataclass(frozen=True)
class PartyUtility:
    """Party valuation ``v`` of its vote share.

    Build with :meth:`power`, :meth:`campaign` or :meth:`from_callable`.
    """

    kind: str
    params: tuple = ()
    fn: Callable = field(default=None, compare=False, repr=False)

    @classmethod
    def power(cls, gamma: float) -> "PartyUtility":
        if not 0.0 < gamma < 1.0:
            raise ConfigInvalid(f"power utility exponent must lie in (0, 1), got {gamma}")
        return cls("power", (float(gamma),), lambda s: np.power(np.asarray(s, dtype=float), gamma))

    @classmethod
    def campaign(cls, curve: str = "sqrt", psi: float = 2.0, W: float = 1.0) -> "PartyUtility":
        pi = _persuasion(curve)
        _check_persuasion(pi, psi, W)
        return cls("campaign", (curve, float(psi), float(W)), lambda s: campaign_utility(s, pi, psi, W))

    @classmethod
    def from_callable(cls, fn: Callable, name: str = "custom") -> "PartyUtility":
        return cls(name, (), fn)

    @classmethod
    def linear(cls) -> "PartyUtility":
        return cls.from_callable(lambda s: np.asarray(s, dtype=float), "linear")

    def __call__(self, s):
        out = np.asarray(self.fn(s), dtype=float)
        return float(out) if out.ndim == 0 else out

    def normalized(self) -> "PartyUtility":
        """Affine rescaling with v(0) = 0 and v(1) = 1."""
        lo, hi = self(0.0), self(1.0)
        if not hi > lo:
            raise DegenerateUtility("utility must be increasing to be normalised")
        if lo == 0.0 and hi == 1.0:
            return self
        base = self.fn
        return PartyUtility(self.kind + "/normalized", self.params, lambda s: (np.asarray(base(s), dtype=float) - lo) / (hi - lo))

    def shape(self, n: int = SHAPE_GRID) -> tuple[bool, bool]:
        """(strictly increasing, strictly concave) on an ``n``-point grid of [0, 1]."""
        vals = np.asarray(self(_grid(n)), dtype=float)
        return is_increasing(vals), is_concave(vals)

    def to_dict(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "gamma": self.params[0]}
        if self.kind == "campaign":
            curve, psi, W = self.params
            return {"kind": "campaign", "curve": curve, "psi": psi, "W": W}
        raise ConfigError(f"utility kind {self.kind!r} is not serialisable")

    @classmethod
    def from_dict(cls, doc: dict) -> "PartyUtility":
        kind = cio.string(doc, "kind", {"power", "campaign"})
        if kind == "power":
            return cls.power(cio.number(doc, "gamma"))
        return cls.campaign(cio.string(doc, "curve"), cio.number(doc, "psi"), cio.number(doc, "W", 1.0))


@dataclass(frozen=True)
class ElectionConfig:
    """Electorate, shock width, reference belief and party A's message options.

    ``chi[G]`` is the threat intensity group ``G`` experiences when a
    message carries the other group's cultural tag.
    """

    sp: VoterGroup
    sc: VoterGroup
    phi: float
    hat_pi: BinaryBelief
    pi0: BinaryBelief
    pi1: BinaryBelief
    chi: dict
    utility: PartyUtility = field(default_factory=lambda: PartyUtility.power(0.5))

    def __post_init__(self):
        if self.sp.tag is not Tag.SP or self.sc.tag is not Tag.SC:
            raise ConfigInvalid("groups must be (SP, SC)")
        if abs(self.sp.share + self.sc.share - 1.0) > 1e-12:
            raise ConfigInvalid("group shares must sum to 1")
        if not self.sp.position > self.sc.position:
            raise ConfigInvalid("the SP ideal point must lie above the SC ideal point")
        bound = 1.0 + (self.sp.position - self.sc.position) ** 2
        if not self.phi > bound:
            raise ConfigInvalid(f"phi = {self.phi} must exceed 1 + (x_SP - x_SC)^2 = {bound}")
        for b, name in ((self.hat_pi, "hatPi"), (self.pi0, "pi0"), (self.pi1, "pi1")):
            b.require_full_support(name)
        chi = {Tag(k) if not isinstance(k, Tag) else k: float(v) for k, v in self.chi.items()}
        if set(chi) != {Tag.SP, Tag.SC}:
            raise ConfigInvalid("chi must give a threat intensity for SP and SC")
        for tag, c in chi.items():
            if not 0.0 <= c <= MAX_CHI:
                raise ConfigInvalid(f"chi[{tag.value}] = {c} outside [0, {MAX_CHI}]")
        object.__setattr__(self, "chi", chi)

    @property
    def groups(self) -> tuple[VoterGroup, VoterGroup]:
        return self.sp, self.sc

    def group(self, tag: Tag) -> VoterGroup:
        return self.sp if tag is Tag.SP else self.sc

    def with_beliefs(self, nu_sp: BinaryBelief, nu_sc: BinaryBelief) -> "ElectionConfig":
        return replace(self, sp=replace(self.sp, belief=nu_sp), sc=replace(self.sc, belief=nu_sc))

    def to_dict(self) -> dict:
        return {
            "schemaVersion": cio.SCHEMA_VERSION,
            "groups": {
                g.tag.value: {"position": g.position, "share": g.share, "belief": g.belief.p1} for g in self.groups
            },
            "phi": self.phi,
            "hatPi": self.hat_pi.p1,
            "messages": {"pi0": self.pi0.p1, "pi1": self.pi1.p1},
            "chi": {t.value: c for t, c in self.chi.items()},
            "utility": self.utility.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ElectionConfig":
        cio.check_schema(doc)
        groups = cio.section(doc, "groups")
        parsed = {}
        for tag in (Tag.SP, Tag.SC):
            g = cio.section(groups, tag.value)
            parsed[tag] = VoterGroup(tag, cio.number(g, "position"), cio.number(g, "share"), cio.belief(g, "belief", 0.5))
        msgs = cio.section(doc, "messages")
        chi = cio.section(doc, "chi")
        util = cio.section(doc, "utility", {"kind": "power", "gamma": 0.5})
        return cls(
            parsed[Tag.SP],
            parsed[Tag.SC],
            cio.number(doc, "phi"),
            cio.belief(doc, "hatPi"),
            cio.belief(msgs, "pi0"),
            cio.belief(msgs, "pi1"),
            {Tag.SP: cio.number(chi, "SP"), Tag.SC: cio.number(chi, "SC")},
            PartyUtility.from_dict(util),
        )


def _utility(x, y, position: float, nu1: float):
    return -((x - position) ** 2) - (y - nu1) ** 2 - nu1 * (1.0 - nu1)


def group_utility(g: VoterGroup, q: Platform) -> float:
    """Expected quadratic-loss utility of a group member under ``q``."""
    return float(_utility(q.x, q.y, g.position, g.belief.p1))


def vote_probability(g: VoterGroup, qA: Platform, qB: Platform, phi: float) -> float:
    """Probability that members of ``g`` vote for A."""
    delta = group_utility(g, qA) - group_utility(g, qB)
    return min(1.0, max(0.0, (delta + phi) / (2.0 * phi)))


def _payoffs(xA, yA, xB, yB, cfg: ElectionConfig, v: PartyUtility):
    # vectorised over platform arrays; returns (VA, VB)
    d_sp = _utility(xA, yA, cfg.sp.position, cfg.sp.belief.p1) - _utility(xB, yB, cfg.sp.position, cfg.sp.belief.p1)
    d_sc = _utility(xA, yA, cfg.sc.position, cfg.sc.belief.p1) - _utility(xB, yB, cfg.sc.position, cfg.sc.belief.p1)
    lo = np.minimum(d_sp, d_sc)
    hi = np.maximum(d_sp, d_sc)
    phi = cfg.phi
    below = np.clip((lo + phi) / (2.0 * phi), 0.0, 1.0)  # A wins both groups
    upto_hi = np.clip((hi + phi) / (2.0 * phi), 0.0, 1.0)
    between = upto_hi - below  # A wins only the group with the larger gain
    above = 1.0 - upto_hi
    share_hi = np.where(d_sp >= d_sc, cfg.sp.share, cfg.sc.share)
    v0, v1 = v(0.0), v(1.0)
    va = below * v1 + between * v(share_hi) + above * v0
    vb = below * v0 + between * v(1.0 - share_hi) + above * v1
    return va, vb


def expected_party_payoff(qA: Platform, qB: Platform, cfg: ElectionConfig, v: Optional[PartyUtility] = None) -> tuple[float, float]:
    """Exact expected utilities of both parties, integrating the popularity shock piecewise."""
    v = cfg.utility if v is None else v
    va, vb = _payoffs(qA.x, qA.y, qB.x, qB.y, cfg, v)
    return float(va), float(vb)


def _beliefs(cfg: ElectionConfig, beliefs) -> ElectionConfig:
    return cfg if beliefs is None else cfg.with_beliefs(*beliefs)


def equilibrium_platforms(
    cfg: ElectionConfig,
    beliefs: Optional[tuple[BinaryBelief, BinaryBelief]] = None,
    v: Optional[PartyUtility] = None,
) -> tuple[Platform, Platform]:
    """Closed-form platforms of the party courting SP and the party courting SC."""
    cfg = _beliefs(cfg, beliefs)
    v = (cfg.utility if v is None else v).normalized()
    alpha = v(cfg.sp.share)
    beta = v(cfg.sc.share)
    if alpha + beta <= 1.0 + 1e-12:
        raise DegenerateUtility(f"v(s_SP) + v(s_SC) = {alpha + beta} must exceed 1")
    xs, xc = cfg.sp.position, cfg.sc.position
    ns, nc = cfg.sp.belief.p1, cfg.sc.belief.p1
    q_sp = Platform(alpha * xs + (1 - alpha) * xc, alpha * ns + (1 - alpha) * nc)
    q_sc = Platform(beta * xc + (1 - beta) * xs, beta * nc + (1 - beta) * ns)
    return q_sp, q_sc


def equilibrium_payoff_closed_form(q_sp: Platform, q_sc: Platform, phi: float) -> float:
    return 0.5 + q_sp.distance_sq(q_sc) / (2.0 * phi)


def grid_axes(cfg: ElectionConfig, n: int = GRID_POINTS, margin: float = GRID_MARGIN) -> tuple[np.ndarray, np.ndarray]:
    """Candidate x and y coordinates for the best-response search."""
    if n < GRID_POINTS:
        raise ConfigInvalid(f"grid needs at least {GRID_POINTS} points per axis")
    pos = (cfg.sp.position, cfg.sc.position)
    bel = (cfg.sp.belief.p1, cfg.sc.belief.p1)
    xs = np.linspace(min(pos) - margin, max(pos) + margin, n)
    ys = np.linspace(min(bel) - margin, max(bel) + margin, n)
    return xs, ys


def best_response_grid(
    q_opp: Platform,
    cfg: ElectionConfig,
    v: Optional[PartyUtility] = None,
    party: str = "A",
    n: int = GRID_POINTS,
    beliefs=None,
) -> Platform:
    """Exhaustive best response to ``q_opp`` over a grid; ties go to the lowest (x, y)."""
    cfg = _beliefs(cfg, beliefs)
    v = (cfg.utility if v is None else v).normalized()
    xs, ys = grid_axes(cfg, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    if party == "A":
        vals, _ = _payoffs(gx, gy, q_opp.x, q_opp.y, cfg, v)
    elif party == "B":
        _, vals = _payoffs(q_opp.x, q_opp.y, gx, gy, cfg, v)
    else:
        raise ValueError("party must be 'A' or 'B'")
    i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)  # first maximum in (x, y) order
    return Platform(float(xs[i]), float(ys[j]))


def propaganda_beliefs(msg: Message, cfg: ElectionConfig) -> tuple[BinaryBelief, BinaryBelief]:
    """Economic beliefs of (SP, SC) after party A's message.

    Communication carries no information, so only identity moves beliefs:
    the group whose cultural tag the message carries keeps the reference
    belief, and the other group is pushed away from the message's payload.
    """
    hat = cfg.hat_pi
    if not msg.is_bundled or msg.payload is None:
        return hat, hat
    if not msg.cultural.is_absolute:
        raise ValueError("election messages carry SP or SC cultural tags")
    threatened = msg.cultural.opposite
    moved = distort_belief(hat, hat, msg.payload, cfg.chi[threatened])
    return (hat, moved) if msg.cultural is Tag.SP else (moved, hat)


def message_set(cfg: ElectionConfig) -> list[Message]:
    """The six candidate messages in tie-break order.

    Stance 1 before stance 0, SC before SP, bundles before plain messages.
    """
    bundles = [
        Message(stance, payload, cultural)
        for stance, payload in ((Stance.ONE, cfg.pi1), (Stance.ZERO, cfg.pi0))
        for cultural in (Tag.SC, Tag.SP)
    ]
    return bundles + [Message(Stance.ONE, cfg.pi1), Message(Stance.ZERO, cfg.pi0)]


def message_divergences(cfg: ElectionConfig) -> list[tuple[Message, float]]:
    out = []
    for m in message_set(cfg):
        nu_sp, nu_sc = propaganda_beliefs(m, cfg)
        out.append((m, abs(nu_sp.p1 - nu_sc.p1)))
    return out


def optimal_message(cfg: ElectionConfig) -> Message:
    """Message that maximises economic disagreement between the groups."""
    best, best_div = None, -1.0
    for m, div in message_divergences(cfg):
        if div > best_div:
            best, best_div = m, div
    return best


@dataclass(frozen=True)
class ElectionOutcome:
    message: Message
    beliefs: tuple[BinaryBelief, BinaryBelief]
    q_sp: Platform
    q_sc: Platform
    payoff: float
    divergence: float


def solve(cfg: ElectionConfig, msg: Optional[Message] = None) -> ElectionOutcome:
    """Platforms and equilibrium payoff after ``msg`` (the optimal message by default)."""
    msg = optimal_message(cfg) if msg is None else msg
    beliefs = propaganda_beliefs(msg, cfg)
    q_sp, q_sc = equilibrium_platforms(cfg, beliefs)
    payoff = equilibrium_payoff_closed_form(q_sp, q_sc, cfg.phi)
    return ElectionOutcome(msg, beliefs, q_sp, q_sc, payoff, abs(beliefs[0].p1 - beliefs[1].p1))


__all__ = [
    "VoterGroup",
    "Platform",
    "PartyUtility",
    "ElectionConfig",
    "ElectionOutcome",
    "campaign_utility",
    "group_utility",
    "vote_probability",
    "expected_party_payoff",
    "equilibrium_platforms",
    "equilibrium_payoff_closed_form",
    "grid_axes",
    "best_response_grid",
    "propaganda_beliefs",
    "message_set",
    "message_divergences",
    "optimal_message",
    "solve",
]
