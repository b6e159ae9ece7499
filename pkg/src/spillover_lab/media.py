"""Two-outlet media market: slants first, then a high/low price choice.

Two equally sized consumer groups (SP and SC) hold binary positions on
``K`` issues.  A consumer subscribes to the outlet minimising price plus
``c`` times squared distance between its position and the outlet's slant.
The more issues the groups disagree on, the more the outlets can
differentiate and the less they are tempted to undercut each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

import numpy as np

from . import configio as cio
from .core import RngStream
from .errors import ConfigInvalid, DimensionMismatch

HIGH = "High"
LOW = "Low"
MIXED = "Mixed"
OTHER = "Other"

PROFIT_TOL = 1e-12
N_PERTURBATIONS = 10


def _tie(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)


def _vec(v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"{name} must be a vector")
    return arr


@dataclass(frozen=True, eq=False)
class MediaConfig:
    """Issue space, group positions, price levels and misalignment cost.

    ``x_sp``/``x_sc`` default to the canonical layout: SP holds 1 on every
    issue and SC holds 0 on the first ``S + D_E`` issues.
    """

    K: int
    S: int
    D_E: int
    p_high: float
    p_low: float
    c: float
    x_sp: Optional[np.ndarray] = None
    x_sc: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.K > 1:
            raise ConfigInvalid("need at least two issues")
        if not 0 < self.S < self.K:
            raise ConfigInvalid(f"social disagreements S = {self.S} must lie in (0, K)")
        if not 0 <= self.D_E <= self.K - self.S:
            raise ConfigInvalid(f"economic disagreements D_E = {self.D_E} must lie in [0, K - S]")
        if not 0 < self.p_low < self.p_high < 1.5 * self.p_low:
            raise ConfigInvalid("prices must satisfy 0 < pL < pH < 1.5 pL")
        if not self.c > 0:
            raise ConfigInvalid("misalignment cost must be positive")
        x_sp = np.ones(self.K) if self.x_sp is None else _vec(self.x_sp, "xSP")
        if self.x_sc is None:
            x_sc = np.ones(self.K)
            x_sc[: self.D] = 0.0
        else:
            x_sc = _vec(self.x_sc, "xSC")
        for name, x in (("xSP", x_sp), ("xSC", x_sc)):
            if x.shape != (self.K,):
                raise DimensionMismatch(f"{name} must have length K = {self.K}")
            if not np.all((x == 0) | (x == 1)):
                raise ConfigInvalid(f"{name} must be binary")
        if int(np.sum(x_sp != x_sc)) != self.D:
            raise ConfigInvalid(f"positions must differ on exactly S + D_E = {self.D} issues")
        x_sp.setflags(write=False)
        x_sc.setflags(write=False)
        object.__setattr__(self, "x_sp", x_sp)
        object.__setattr__(self, "x_sc", x_sc)

    @property
    def D(self) -> int:
        return self.S + self.D_E

    @property
    def threshold(self) -> float:
        """Disagreement level above which the high price survives undercutting."""
        return (self.p_high - self.p_low) / self.c

    @property
    def prices(self) -> tuple[float, float]:
        return self.p_low, self.p_high

    def with_economic(self, d_e: int) -> "MediaConfig":
        return MediaConfig(self.K, self.S, d_e, self.p_high, self.p_low, self.c)

    def to_dict(self) -> dict:
        return {
            "schemaVersion": cio.SCHEMA_VERSION,
            "K": self.K,
            "S": self.S,
            "D_E": self.D_E,
            "pH": self.p_high,
            "pL": self.p_low,
            "c": self.c,
            "xSP": [int(v) for v in self.x_sp],
            "xSC": [int(v) for v in self.x_sc],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MediaConfig":
        cio.check_schema(doc)
        K = cio.integer(doc, "K")
        S = cio.integer(doc, "S")
        d_e = cio.integer(doc, "D_E", 0)
        x_sp = doc.get("xSP")
        x_sc = doc.get("xSC")
        for name, x in (("xSP", x_sp), ("xSC", x_sc)):
            if x is not None and not (isinstance(x, list) and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
                raise cio.ConfigError(f"'{name}' must be a list of numbers")
        return cls(K, S, d_e, cio.number(doc, "pH"), cio.number(doc, "pL"), cio.number(doc, "c"), x_sp, x_sc)


@dataclass(frozen=True, eq=False)
class SlantPair:
    b_a: np.ndarray
    b_b: np.ndarray

    def __post_init__(self):
        a = _vec(self.b_a, "bA")
        b = _vec(self.b_b, "bB")
        if a.shape != b.shape:
            raise DimensionMismatch("slants must have the same length")
        if np.any(a < 0) or np.any(a > 1) or np.any(b < 0) or np.any(b > 1):
            raise ConfigInvalid("slants must lie in [0, 1]^K")
        object.__setattr__(self, "b_a", a)
        object.__setattr__(self, "b_b", b)

    @classmethod
    def segmented(cls, cfg: MediaConfig) -> "SlantPair":
        return cls(cfg.x_sp, cfg.x_sc)


def consumer_choice(x, b_a, b_b, p_a: float, p_b: float, c: float) -> str:
    """'A', 'B' or 'Split' for a consumer at ``x``; exact ties split the group."""
    x, b_a, b_b = _vec(x, "x"), _vec(b_a, "bA"), _vec(b_b, "bB")
    if not (x.shape == b_a.shape == b_b.shape):
        raise DimensionMismatch("consumer position and slants must have the same length")
    cost_a = p_a + c * float(np.sum((x - b_a) ** 2))
    cost_b = p_b + c * float(np.sum((x - b_b) ** 2))
    if _tie(cost_a, cost_b):
        return "Split"
    return "A" if cost_a < cost_b else "B"


def profits(cfg: MediaConfig, slants: SlantPair, p_a: float, p_b: float) -> tuple[float, float]:
    units_a = 0.0
    for x in (cfg.x_sp, cfg.x_sc):
        choice = consumer_choice(x, slants.b_a, slants.b_b, p_a, p_b, cfg.c)
        units_a += {"A": 1.0, "B": 0.0, "Split": 0.5}[choice]
    return p_a * units_a, p_b * (2.0 - units_a)


@dataclass(frozen=True)
class PriceEquilibrium:
    p_a: Optional[float]
    p_b: Optional[float]
    profit_a: float
    profit_b: float
    prob_high_a: float
    prob_high_b: float

    @property
    def pure(self) -> bool:
        return self.p_a is not None

    @property
    def total(self) -> float:
        return self.profit_a + self.profit_b


@dataclass(frozen=True)
class PriceStage:
    """Pure equilibria of the 2x2 price game; the mixed one only when none is pure."""

    pure: tuple = ()
    mixed: Optional[PriceEquilibrium] = None

    @property
    def equilibria(self) -> tuple:
        return self.pure if self.pure else (self.mixed,)

    def best(self) -> PriceEquilibrium:
        # highest joint profit, first in enumeration order on ties
        eqs = self.equilibria
        return max(eqs, key=lambda e: (e.total, -eqs.index(e)))

    def worst_for(self, player: str) -> float:
        attr = "profit_a" if player == "A" else "profit_b"
        return min(getattr(e, attr) for e in self.equilibria)


def price_stage_equilibria(cfg: MediaConfig, slants: SlantPair) -> PriceStage:
    prices = cfg.prices
    pay = {(i, j): profits(cfg, slants, prices[i], prices[j]) for i, j in product((0, 1), repeat=2)}
    pure = []
    for i, j in product((0, 1), repeat=2):
        pa, pb = pay[(i, j)]
        if pa + PROFIT_TOL >= pay[(1 - i, j)][0] and pb + PROFIT_TOL >= pay[(i, 1 - j)][1]:
            pure.append(PriceEquilibrium(prices[i], prices[j], pa, pb, float(i), float(j)))
    if pure:
        return PriceStage(tuple(pure))
    return PriceStage((), _mixed(pay))


def _mixed(pay: dict) -> PriceEquilibrium:
    """Mixed equilibrium of a 2x2 game without pure equilibria, by indifference."""
    a = np.array([[pay[(i, j)][0] for j in (0, 1)] for i in (0, 1)])
    b = np.array([[pay[(i, j)][1] for j in (0, 1)] for i in (0, 1)])
    # q = P(B plays high) makes A indifferent; r = P(A plays high) makes B indifferent
    q = (a[0, 0] - a[1, 0]) / (a[0, 0] - a[1, 0] - a[0, 1] + a[1, 1])
    r = (b[0, 0] - b[0, 1]) / (b[0, 0] - b[0, 1] - b[1, 0] + b[1, 1])
    pa = (1 - q) * a[0, 0] + q * a[0, 1]
    pb = (1 - r) * b[0, 0] + r * b[1, 0]
    return PriceEquilibrium(None, None, float(pa), float(pb), float(r), float(q))


def regime_of(eq: PriceEquilibrium, cfg: MediaConfig) -> str:
    if not eq.pure:
        return MIXED
    if eq.p_a == cfg.p_high and eq.p_b == cfg.p_high:
        return HIGH
    if eq.p_a == cfg.p_low and eq.p_b == cfg.p_low:
        return LOW
    return OTHER


def spne_profits(cfg: MediaConfig) -> tuple[float, float, str]:
    """Equilibrium profits: both charge high iff disagreement strictly exceeds the threshold."""
    d, t = float(cfg.D), cfg.threshold
    if d > t and not _tie(d, t):
        return cfg.p_high, cfg.p_high, HIGH
    return cfg.p_low, cfg.p_low, LOW


def slant_candidates(cfg: MediaConfig, rng: RngStream | None = None, n_perturb: int = N_PERTURBATIONS) -> list[np.ndarray]:
    """Group positions, their midpoint and random perturbations of the positions."""
    gen = (rng or RngStream(0)).generator()
    cands = [cfg.x_sp, cfg.x_sc, 0.5 * (cfg.x_sp + cfg.x_sc)]
    for i in range(n_perturb):
        base = cfg.x_sp if i % 2 == 0 else cfg.x_sc
        cands.append(np.clip(base + gen.uniform(-0.3, 0.3, cfg.K), 0.0, 1.0))
    return cands


@dataclass(frozen=True, eq=False)
class SpneResult:
    slants: SlantPair
    equilibrium: PriceEquilibrium
    regime: str
    n_equilibria: int = field(default=0)


def spne_search(cfg: MediaConfig, rng: RngStream | None = None) -> SpneResult:
    """Exhaustive subgame-perfect search over a finite slant set.

    A slant pair is an equilibrium when no outlet gains by switching to
    another candidate slant, valuing a deviation at its worst price-stage
    equilibrium.  Among equilibrium pairs the one with the highest joint
    on-path profit is returned.
    """
    cands = slant_candidates(cfg, rng)
    n = len(cands)
    stage = [[price_stage_equilibria(cfg, SlantPair(cands[i], cands[j])) for j in range(n)] for i in range(n)]
    found = []
    for i, j in product(range(n), repeat=2):
        on_path = stage[i][j].best()
        dev_a = max(stage[k][j].worst_for("A") for k in range(n))
        dev_b = max(stage[i][k].worst_for("B") for k in range(n))
        if dev_a <= on_path.profit_a + PROFIT_TOL and dev_b <= on_path.profit_b + PROFIT_TOL:
            found.append((i, j, on_path))
    if not found:
        raise ConfigInvalid("no subgame-perfect equilibrium among the candidate slants")
    i, j, eq = max(found, key=lambda t: (t[2].total, -t[0], -t[1]))
    return SpneResult(SlantPair(cands[i], cands[j]), eq, regime_of(eq, cfg), len(found))


@dataclass(frozen=True)
class SweepRow:
    D_E: int
    D: int
    profit_a: float
    profit_b: float
    regime: str
    oracle_agrees: Optional[bool] = None


SWEEP_COLUMNS = ("D_E", "D", "profitA", "profitB", "regime")


def sweep(cfg: MediaConfig, verify: bool = False, rng: RngStream | None = None) -> list[SweepRow]:
    """Profits for every economic disagreement level 0..K-S."""
    rows = []
    for d_e in range(cfg.K - cfg.S + 1):
        point = cfg.with_economic(d_e)
        pa, pb, regime = spne_profits(point)
        agrees = None
        if verify:
            res = spne_search(point, rng)
            agrees = (
                res.regime == regime
                and math.isclose(res.equilibrium.profit_a, pa, abs_tol=1e-12)
                and math.isclose(res.equilibrium.profit_b, pb, abs_tol=1e-12)
            )
        rows.append(SweepRow(d_e, point.D, pa, pb, regime, agrees))
    return rows


def is_weakly_increasing(values: Sequence[float]) -> bool:
    return all(b >= a - PROFIT_TOL for a, b in zip(values, values[1:]))
