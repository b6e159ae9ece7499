"""Synthetic survey experiment on economic/cultural message bundling.

Agents are drawn from a finite mixture of types, randomised into arms that
differ in the message they read, updated by either the trust-based Bayesian
engine or the identity engine, and asked whether they support the economic
policy.  Support is a logistic draw around the final belief.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import configio as cio
from .bayes import A, M, MentalModel, choice_probability, model_from_config, posterior
from .core import BinaryBelief, Message, RngStream, Stance, Tag, pearson
from .errors import ConfigError, ConfigInvalid, ZeroVariance
from .identity import MAX_CHI, SignalModel, receiver_response

MIN_PER_ARM = 100


@dataclass(frozen=True)
class AgentSpec:
    """One agent type of the population mixture."""

    group: Tag
    weight: float = 0.5
    prior: BinaryBelief = BinaryBelief(0.5)
    hat_pi: BinaryBelief = BinaryBelief(0.5)
    chi_threat: float = 0.3
    noise_scale: float = 0.5

    def __post_init__(self):
        if not self.group.is_absolute:
            raise ConfigInvalid("agent group must be SP or SC")
        if not self.weight > 0:
            raise ConfigInvalid("agent type weight must be positive")
        if not (self.prior.full_support and self.hat_pi.full_support):
            raise ConfigInvalid("agent beliefs need full support")
        if not 0.0 <= self.chi_threat <= MAX_CHI:
            raise ConfigInvalid(f"chiThreat = {self.chi_threat} outside [0, {MAX_CHI}]")
        if not self.noise_scale > 0:
            raise ConfigInvalid("noiseScale must be positive")

    @classmethod
    def from_dict(cls, doc: dict) -> "AgentSpec":
        group = cio.string(doc, "group", {"SP", "SC"})
        return cls(
            Tag(group),
            cio.number(doc, "weight", 0.5),
            cio.belief(doc, "prior", 0.5),
            cio.belief(doc, "hatPi", 0.5),
            cio.number(doc, "chiThreat", 0.3),
            cio.number(doc, "noiseScale", 0.5),
        )

    def to_dict(self) -> dict:
        return {
            "group": self.group.value,
            "weight": self.weight,
            "prior": self.prior.p1,
            "hatPi": self.hat_pi.p1,
            "chiThreat": self.chi_threat,
            "noiseScale": self.noise_scale,
        }


ARM_KINDS = ("NoMessage", "EconOnly", "Bundled", "CultureOnly", "SeparateSources")
_ARM_RE = re.compile(r"^(\w+)(?:\((.*)\))?$")


@dataclass(frozen=True)
class ArmSpec:
    kind: str
    stance: Optional[Stance] = None
    culture: Optional[Tag] = None

    def __post_init__(self):
        needs = {
            "NoMessage": (False, False),
            "EconOnly": (True, False),
            "Bundled": (True, True),
            "CultureOnly": (False, True),
            "SeparateSources": (True, True),
        }
        if self.kind not in needs:
            raise ConfigInvalid(f"unknown arm kind {self.kind!r}")
        want_stance, want_culture = needs[self.kind]
        if (self.stance is not None) != want_stance or (self.culture is not None) != want_culture:
            raise ConfigInvalid(f"arm {self.kind} has the wrong components")
        if self.culture is not None and not self.culture.is_absolute:
            raise ConfigInvalid("arm cultural stance must be SP or SC")
        if self.stance is not None:
            object.__setattr__(self, "stance", Stance(self.stance))

    @property
    def name(self) -> str:
        parts = []
        if self.stance is not None:
            parts.append(str(int(self.stance)))
        if self.culture is not None:
            parts.append(self.culture.value)
        return self.kind + (f"({','.join(parts)})" if parts else "")

    @classmethod
    def parse(cls, text: str) -> "ArmSpec":
        """Parse names such as ``NoMessage``, ``EconOnly(1)`` or ``Bundled(0,SC)``."""
        m = _ARM_RE.match(text.replace(" ", ""))
        if not m or m.group(1) not in ARM_KINDS:
            raise ConfigError(f"cannot parse arm {text!r}")
        args = [a for a in (m.group(2) or "").split(",") if a]
        stance = culture = None
        for a in args:
            if a in ("0", "1"):
                stance = Stance(int(a))
            elif a in ("SP", "SC"):
                culture = Tag(a)
            else:
                raise ConfigError(f"bad arm argument {a!r} in {text!r}")
        try:
            return cls(m.group(1), stance, culture)
        except ConfigInvalid as exc:
            raise ConfigError(str(exc)) from exc

    def message(self, payload: Optional[BinaryBelief] = None) -> Message:
        if self.kind == "NoMessage":
            return Message()
        if self.kind == "CultureOnly":
            return Message(cultural=self.culture)
        if self.kind == "EconOnly":
            return Message(self.stance, payload)
        return Message(self.stance, payload, self.culture, same_source=self.kind == "Bundled")


DEFAULT_ARMS = tuple(
    ArmSpec.parse(a)
    for a in (
        "NoMessage",
        "EconOnly(1)",
        "EconOnly(0)",
        "Bundled(1,SP)",
        "Bundled(1,SC)",
        "Bundled(0,SP)",
        "Bundled(0,SC)",
        "CultureOnly(SP)",
        "CultureOnly(SC)",
        "SeparateSources(1,SP)",
        "SeparateSources(1,SC)",
    )
)


@dataclass(frozen=True)
class IdentityEngine:
    """Rational update on an economic signal followed by identity distortion."""

    signal: SignalModel = field(default_factory=lambda: SignalModel(((0.6, 0.4), (0.4, 0.6))))
    payload_pro: BinaryBelief = BinaryBelief(0.7)
    payload_anti: BinaryBelief = BinaryBelief(0.3)

    kind = "identity"

    def belief(self, agent: AgentSpec, arm: ArmSpec) -> BinaryBelief:
        payload = None
        if arm.stance is not None:
            payload = self.payload_pro if arm.stance is Stance.ONE else self.payload_anti
        msg = arm.message(payload).relative_to(agent.group)
        return receiver_response(agent.prior, agent.hat_pi, self.signal, agent.chi_threat, msg)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "signal": [list(r) for r in self.signal.likelihoods],
            "payloadPro": self.payload_pro.p1,
            "payloadAnti": self.payload_anti.p1,
        }


@dataclass(frozen=True)
class BayesianEngine:
    """Conditioning of a mental model rescaled to each agent's prior."""

    model: MentalModel

    kind = "bayesian"

    def belief(self, agent: AgentSpec, arm: ArmSpec) -> BinaryBelief:
        if arm.stance is None:
            return agent.prior
        model = self.model.with_prior(agent.prior)
        if arm.kind == "Bundled":
            theta = A if arm.culture is agent.group else M
            return posterior(model, arm.stance, theta)
        return posterior(model, arm.stance)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "model": {"table": [float(v) for v in self.model.table.ravel()]}}


def engine_from_dict(doc: dict):
    kind = cio.string(doc, "kind", {"identity", "bayesian"})
    if kind == "bayesian":
        return BayesianEngine(model_from_config(cio.section(doc, "model")))
    signal = doc.get("signal", [[0.6, 0.4], [0.4, 0.6]])
    try:
        sig = SignalModel(tuple(tuple(r) for r in signal))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad signal model: {exc}") from exc
    return IdentityEngine(sig, cio.belief(doc, "payloadPro", 0.7), cio.belief(doc, "payloadAnti", 0.3))


def default_population(chi_threat: float = 0.3) -> tuple[AgentSpec, ...]:
    return (AgentSpec(Tag.SP, chi_threat=chi_threat), AgentSpec(Tag.SC, chi_threat=chi_threat))


@dataclass(frozen=True)
class SimConfig:
    n_per_arm: int
    seed: int
    engine: object = field(default_factory=IdentityEngine)
    population: tuple = field(default_factory=default_population)
    arms: tuple = DEFAULT_ARMS

    def __post_init__(self):
        if self.n_per_arm < MIN_PER_ARM:
            raise ConfigInvalid(f"nPerArm must be at least {MIN_PER_ARM}")
        RngStream(self.seed)
        pop = tuple(self.population)
        if not pop:
            raise ConfigInvalid("population is empty")
        if {a.group for a in pop} != {Tag.SP, Tag.SC}:
            raise ConfigInvalid("population needs both SP and SC agents")
        if abs(sum(a.weight for a in pop) - 1.0) > 1e-9:
            raise ConfigInvalid("population weights must sum to 1")
        names = [a.name for a in self.arms]
        if len(set(names)) != len(names):
            raise ConfigInvalid("duplicate arms")
        object.__setattr__(self, "population", pop)
        object.__setattr__(self, "arms", tuple(self.arms))

    def to_dict(self) -> dict:
        return {
            "schemaVersion": cio.SCHEMA_VERSION,
            "nPerArm": self.n_per_arm,
            "seed": self.seed,
            "engine": self.engine.to_dict(),
            "population": [a.to_dict() for a in self.population],
            "arms": [a.name for a in self.arms],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "SimConfig":
        cio.check_schema(doc)
        pop_doc = doc.get("population")
        if pop_doc is None:
            population = default_population()
        elif isinstance(pop_doc, list) and all(isinstance(p, dict) for p in pop_doc):
            population = tuple(AgentSpec.from_dict(p) for p in pop_doc)
        else:
            raise ConfigError("'population' must be a list of objects")
        arms_doc = doc.get("arms")
        if arms_doc is None:
            arms = DEFAULT_ARMS
        elif isinstance(arms_doc, list) and all(isinstance(a, str) for a in arms_doc):
            arms = tuple(ArmSpec.parse(a) for a in arms_doc)
        else:
            raise ConfigError("'arms' must be a list of arm names")
        return cls(
            cio.integer(doc, "nPerArm"),
            cio.integer(doc, "seed", 0),
            engine_from_dict(cio.section(doc, "engine")),
            population,
            arms,
        )


def _se(p1: float, n1: int, p2: float, n2: int) -> float:
    return math.sqrt(p1 * (1 - p1) / n1 + p2 * (1 - p2) / n2)


def _z(est: float, se: float) -> float:
    if se > 0:
        return est / se
    return 0.0 if est == 0 else math.copysign(math.inf, est)


@dataclass(frozen=True)
class ArmResult:
    name: str
    n: int
    share: float
    se: float
    expected: float


@dataclass(frozen=True)
class Estimate:
    name: str
    estimate: float
    se: float
    z: float
    expected: float


@dataclass(frozen=True, eq=False)
class ArmRecords:
    """Per-agent data of one arm: SP indicator and support indicator."""

    sp: np.ndarray
    support: np.ndarray


@dataclass(frozen=True, eq=False)
class SimResult:
    config: SimConfig
    arms: tuple
    estimates: tuple
    records: dict = field(repr=False)
    support_prob: dict = field(repr=False)

    def arm(self, name: str) -> ArmResult:
        for a in self.arms:
            if a.name == name:
                return a
        raise KeyError(name)

    def estimate(self, name: str) -> Estimate:
        for e in self.estimates:
            if e.name == name:
                return e
        raise KeyError(name)

    def to_dict(self, correlations: bool = True) -> dict:
        out = {
            "schemaVersion": cio.SCHEMA_VERSION,
            "config": self.config.to_dict(),
            "arms": [vars(a) for a in self.arms],
            "estimates": [vars(e) for e in self.estimates],
        }
        if correlations:
            out["correlations"] = [vars(c) for c in arm_correlations(self)]
        return out


def support_probabilities(cfg: SimConfig) -> dict:
    """Exact support probability for every (arm name, agent type index)."""
    table = {}
    for arm in cfg.arms:
        for i, agent in enumerate(cfg.population):
            belief = cfg.engine.belief(agent, arm)
            table[(arm.name, i)] = choice_probability(belief, agent.noise_scale)
    return table


def _expected(probs: dict, cfg: SimConfig, arm: str, types: Optional[Sequence[int]] = None) -> float:
    idx = range(len(cfg.population)) if types is None else types
    w = np.array([cfg.population[i].weight for i in idx])
    p = np.array([probs[(arm, i)] for i in idx])
    return float(w @ p / w.sum())


def run_experiment(cfg: SimConfig) -> SimResult:
    """Simulate every arm and compute spillover, backlash and priming estimates.

    Each arm draws from its own stream keyed by (seed, arm index), so
    results do not depend on the order or number of arms evaluated before it.
    """
    probs = support_probabilities(cfg)
    weights = np.array([a.weight for a in cfg.population])
    weights = weights / weights.sum()
    is_sp = np.array([a.group is Tag.SP for a in cfg.population])
    records, arms = {}, []
    for k, arm in enumerate(cfg.arms):
        gen = RngStream(cfg.seed, k).generator()
        types = gen.choice(len(weights), size=cfg.n_per_arm, p=weights)
        p = np.array([probs[(arm.name, i)] for i in range(len(weights))])[types]
        support = gen.random(cfg.n_per_arm) < p
        records[arm.name] = ArmRecords(is_sp[types], support)
        share = float(np.count_nonzero(support)) / cfg.n_per_arm
        arms.append(ArmResult(arm.name, cfg.n_per_arm, share, math.sqrt(share * (1 - share) / cfg.n_per_arm), _expected(probs, cfg, arm.name)))
    result = SimResult(cfg, tuple(arms), (), records, probs)
    object.__setattr__(result, "estimates", tuple(_estimates(result)))
    return result


class _Pool:
    """Counts and closed-form expectation for a subset of agents across arms."""

    def __init__(self, result: SimResult):
        self.result = result
        self.n = 0
        self.yes = 0
        self.exp_mass = 0.0
        self.weight_mass = 0.0

    def add(self, arm: str, group: Optional[Tag] = None) -> "_Pool":
        cfg = self.result.config
        rec = self.result.records[arm]
        if group is None:
            mask = np.ones(rec.sp.shape, dtype=bool)
            types = range(len(cfg.population))
        else:
            mask = rec.sp if group is Tag.SP else ~rec.sp
            types = [i for i, a in enumerate(cfg.population) if a.group is group]
        self.n += int(np.count_nonzero(mask))
        self.yes += int(np.count_nonzero(rec.support & mask))
        # expectation weighted by the share of the arm that falls in the pool
        w = np.array([cfg.population[i].weight for i in types])
        p = np.array([self.result.support_prob[(arm, i)] for i in types])
        self.exp_mass += float(w @ p)
        self.weight_mass += float(w.sum())
        return self

    @property
    def share(self) -> float:
        return self.yes / self.n if self.n else math.nan

    @property
    def expected(self) -> float:
        return self.exp_mass / self.weight_mass


def _contrast(name: str, treat: _Pool, control: _Pool) -> Estimate:
    est = treat.share - control.share
    se = _se(treat.share, treat.n, control.share, control.n)
    return Estimate(name, est, se, _z(est, se), treat.expected - control.expected)


def _pool(result: SimResult, members: Sequence[tuple[str, Optional[Tag]]]) -> Optional[_Pool]:
    names = {a.name for a in result.config.arms}
    if not members or any(arm not in names for arm, _ in members):
        return None
    pool = _Pool(result)
    for arm, group in members:
        pool.add(arm, group)
    return pool if pool.n else None


def _bundled_members(stance: int, aligned: bool) -> list[tuple[str, Tag]]:
    out = []
    for culture in (Tag.SP, Tag.SC):
        group = culture if aligned else culture.opposite
        out.append((f"Bundled({stance},{culture.value})", group))
    return out


def _estimates(result: SimResult) -> list[Estimate]:
    out = []

    def add(name, treat_members, control_members):
        t = _pool(result, treat_members)
        c = _pool(result, control_members)
        if t is not None and c is not None:
            out.append(_contrast(name, t, c))

    for stance, (aligned_name, misaligned_name) in ((1, ("beta1", "beta2")), (0, ("delta1", "delta2"))):
        for aligned, name in ((True, aligned_name), (False, misaligned_name)):
            members = _bundled_members(stance, aligned)
            add(name, members, [(f"EconOnly({stance})", None)])
            add(f"backlash_{name}", members, [("NoMessage", None)])
    add("priming", [("CultureOnly(SP)", None), ("CultureOnly(SC)", None)], [("NoMessage", None)])
    add("gamma", [("SeparateSources(1,SP)", None), ("SeparateSources(1,SC)", None)], [("EconOnly(1)", None)])
    return out


@dataclass(frozen=True)
class Correlation:
    arm: str
    n: int
    r: Optional[float]
    se: Optional[float]
    flag: str = ""


def arm_correlations(result: SimResult) -> list[Correlation]:
    """Per-arm Pearson correlation between the SP indicator and support.

    Arms where either indicator is constant are flagged instead of failing.
    """
    out = []
    for arm in result.arms:
        rec = result.records[arm.name]
        if rec.sp.size < 2:
            # one observation has no spread to correlate
            out.append(Correlation(arm.name, int(rec.sp.size), None, None, "ZeroVariance"))
            continue
        try:
            r = pearson(rec.sp.astype(float), rec.support.astype(float))
        except ZeroVariance:
            out.append(Correlation(arm.name, arm.n, None, None, "ZeroVariance"))
            continue
        except ValueError as exc:
            out.append(Correlation(arm.name, arm.n, None, None, type(exc).__name__))
            continue
        se = (1 - r * r) / math.sqrt(arm.n - 1) if arm.n > 1 else None
        out.append(Correlation(arm.name, arm.n, r, se))
    return out


def separate_sources_contrast(cfg: SimConfig, same_source: bool = False) -> Estimate:
    """Pro-stance message with an out-group cultural stance vs the economic message alone.

    With ``same_source=False`` the two components come from different
    senders; with ``True`` they form one bundle and the contrast is the
    misaligned spillover.
    """
    if not isinstance(cfg.engine, IdentityEngine):
        raise ConfigInvalid("the separate-sources contrast needs the identity engine")
    result = run_experiment(cfg)
    if same_source:
        return _named(result, "beta2", "gamma_same_source")
    return _named(result, "gamma", "gamma")


def _named(result: SimResult, key: str, name: str) -> Estimate:
    try:
        e = result.estimate(key)
    except KeyError:
        raise ConfigInvalid(f"configured arms do not identify {key}") from None
    return Estimate(name, e.estimate, e.se, e.z, e.expected)


ARM_CSV_COLUMNS = ("kind", "name", "n", "value", "se", "z", "expected")


def result_rows(result: SimResult) -> list[tuple]:
    rows = [("arm", a.name, a.n, a.share, a.se, "", a.expected) for a in result.arms]
    rows += [("estimate", e.name, "", e.estimate, e.se, e.z, e.expected) for e in result.estimates]
    return rows


def correlation_rows(result: SimResult) -> list[tuple]:
    return [(c.arm, c.n, "" if c.r is None else c.r, "" if c.se is None else c.se, c.flag) for c in arm_correlations(result)]


def trace_rows(result: SimResult) -> list[tuple]:
    rows = []
    for name, rec in result.records.items():
        for i, (sp, s) in enumerate(zip(rec.sp, rec.support)):
            rows.append((name, i, "SP" if sp else "SC", int(s)))
    return rows
