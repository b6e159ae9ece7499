"""Trust-based Bayesian receiver.

A receiver's mental model is a joint table over the sender's stance ``y``,
the sender's cultural type ``theta`` (aligned ``A`` or misaligned ``M``),
the sender-relevant state and the receiver-relevant state.  Competence
(informativeness) and economic goal alignment are functionals of that
table; posteriors are obtained by conditioning it.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit

from .core import BinaryBelief, RngStream, Stance, Tag
from .errors import (
    ConfigError,
    InvalidModel,
    NonPositiveScale,
    UndefinedConditional,
    WrongTrustClass,
    ZeroProbabilityEvidence,
)

A = Tag.IN_GROUP
M = Tag.OUT_GROUP

SCHEMA_VERSION = 1
CLASSIFY_TOL = 1e-9
SAMPLE_MARGIN = 0.01

# axis order of the joint table
Y, THETA, OMEGA_S, OMEGA_R = range(4)


def _theta_index(theta: Tag) -> int:
    if theta is A:
        return 0
    if theta is M:
        return 1
    raise ValueError(f"source type must be IN_GROUP (A) or OUT_GROUP (M), got {theta}")


class TrustClass(enum.Enum):
    COMPETENCE_BASED = "CompetenceBased"
    PREFERENCE_BASED = "PreferenceBased"
    NEITHER = "Neither"


@dataclass(frozen=True, eq=False)
class MentalModel:
    """Joint distribution P(y, theta, omega_S, omega_R) as a 2x2x2x2 array.

    Axis order is (y, theta, omega_S, omega_R); along the theta axis index 0
    is the aligned type and index 1 the misaligned one.  Flattening in C
    order gives the 16-element serialisation order.
    """

    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=float).reshape(2, 2, 2, 2)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)
        self._validate()

    def _validate(self, tol: float = 1e-9):
        t = self.table
        if not np.all(np.isfinite(t)) or np.any(t < 0):
            raise InvalidModel("table entries must be finite and nonnegative")
        if abs(t.sum() - 1.0) > tol:
            raise InvalidModel(f"table sums to {t.sum()}, not 1")
        # every (y, theta, omega_R) realisation must have positive mass
        if np.any(t.sum(axis=OMEGA_S) <= 0):
            raise InvalidModel("some (y, theta, omega_R) realisation has zero probability")
        joint = t.sum(axis=(Y, OMEGA_S))  # [theta, omega_R]
        outer = np.outer(joint.sum(axis=1), joint.sum(axis=0))
        if np.max(np.abs(joint - outer)) > tol:
            raise InvalidModel("source type is not independent of the receiver state")

    def __eq__(self, other):
        return isinstance(other, MentalModel) and np.array_equal(self.table, other.table)

    __hash__ = None

    # ---- constructors -------------------------------------------------
    @classmethod
    def from_factors(cls, p_aligned, prior_r, sender_state, stance) -> "MentalModel":
        """Build a table from a chain of conditionals.

        Args:
            p_aligned: P(theta = A).
            prior_r: P(omega_R = 1).
            sender_state: ``[theta][omega_R]`` -> P(omega_S = 1 | omega_R, theta).
            stance: ``[theta][omega_S]`` -> P(y = 1 | omega_S, theta).
        """
        p_theta = np.array([p_aligned, 1.0 - p_aligned])
        p_r = np.array([1.0 - prior_r, prior_r])
        s1 = np.asarray(sender_state, dtype=float)
        y1 = np.asarray(stance, dtype=float)
        t = np.zeros((2, 2, 2, 2))
        for y in range(2):
            for th in range(2):
                for ws in range(2):
                    for wr in range(2):
                        p_ws = s1[th, wr] if ws == 1 else 1.0 - s1[th, wr]
                        p_y = y1[th, ws] if y == 1 else 1.0 - y1[th, ws]
                        t[y, th, ws, wr] = p_theta[th] * p_r[wr] * p_ws * p_y
        return cls(t)

    @classmethod
    def competence_based(cls, p_aligned, prior_r, stance) -> "MentalModel":
        """Common-interest model: the sender's state equals the receiver's."""
        return cls.from_factors(p_aligned, prior_r, [[0.0, 1.0], [0.0, 1.0]], stance)

    @classmethod
    def preference_based(cls, p_aligned, prior_r, alignment) -> "MentalModel":
        """Perfectly informed senders; ``alignment[theta][omega_R]`` is the goal alignment."""
        g = np.asarray(alignment, dtype=float)
        sender_state = [[1.0 - g[th, 0], g[th, 1]] for th in range(2)]
        return cls.from_factors(p_aligned, prior_r, sender_state, [[0.0, 1.0], [0.0, 1.0]])

    @classmethod
    def uniform(cls) -> "MentalModel":
        return cls(np.full(16, 1.0 / 16))

    def with_prior(self, prior: BinaryBelief) -> "MentalModel":
        """Same conditionals given omega_R, with the omega_R marginal replaced."""
        marg = self.table.sum(axis=(Y, THETA, OMEGA_S))
        scale = np.array([prior.p0, prior.p1]) / marg
        return MentalModel(self.table * scale)

    # ---- serialisation ------------------------------------------------
    def to_dict(self) -> dict:
        return {"schemaVersion": SCHEMA_VERSION, "table": [float(v) for v in self.table.ravel()]}

    @classmethod
    def from_dict(cls, doc: dict) -> "MentalModel":
        if doc.get("schemaVersion") != SCHEMA_VERSION:
            raise ConfigError(f"unsupported mental model schemaVersion {doc.get('schemaVersion')!r}")
        table = doc.get("table")
        if not isinstance(table, list) or len(table) != 16:
            raise ConfigError("mental model 'table' must be a list of 16 numbers")
        return cls(np.array(table, dtype=float))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "MentalModel":
        return cls.from_dict(json.loads(text))

    # ---- marginals ----------------------------------------------------
    def prior(self) -> BinaryBelief:
        marg = self.table.sum(axis=(Y, THETA, OMEGA_S))
        return BinaryBelief(float(marg[1] / marg.sum()))

    def stance_given_sender_state(self, y: int, ws: int, th: int) -> float:
        block = self.table[:, th, ws, :]
        den = block.sum()
        if den <= 0:
            raise UndefinedConditional(f"P(omega_S={ws}, theta={th}) is zero")
        return float(block[y].sum() / den)


def informativeness(model: MentalModel, y: Stance, theta: Tag) -> float:
    """Likelihood ratio P(y_k | omega^S_k, theta) / P(y_k | omega^S_-k, theta).

    Returns ``math.inf`` when the denominator is zero.
    """
    k = int(y)
    th = _theta_index(theta)
    num = model.stance_given_sender_state(k, k, th)
    den = model.stance_given_sender_state(k, 1 - k, th)
    if den == 0.0:
        return math.inf
    return float(num / den)


def goal_alignment(model: MentalModel, omega_r: int, theta: Tag) -> float:
    """P(omega^S_k | omega^R_k, theta)."""
    th = _theta_index(theta)
    block = model.table[:, th, :, omega_r]
    den = block.sum()
    if den <= 0:
        raise UndefinedConditional(f"P(omega_R={omega_r}, theta={theta.name}) is zero")
    return float(block[:, omega_r].sum() / den)


def classify(model: MentalModel, tol: float = CLASSIFY_TOL) -> TrustClass:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    g = {(w, th): goal_alignment(model, w, th) for w in (0, 1) for th in (A, M)}
    common_interest = all(abs(v - 1.0) <= tol for v in g.values())
    if common_interest:
        more_competent = all(
            informativeness(model, y, A) > informativeness(model, y, M) for y in Stance
        )
        if more_competent:
            return TrustClass.COMPETENCE_BASED
    perfectly_informed = all(
        model.stance_given_sender_state(int(y), 1 - int(y), _theta_index(th)) <= tol
        for y in Stance
        for th in (A, M)
    )
    if perfectly_informed and all(g[(w, A)] > g[(w, M)] for w in (0, 1)):
        return TrustClass.PREFERENCE_BASED
    return TrustClass.NEITHER


def posterior(model: MentalModel, y: Optional[Stance] = None, theta: Optional[Tag] = None) -> BinaryBelief:
    """Belief about omega_R after observing any subset of {stance, source type}."""
    t = model.table
    if y is not None:
        t = t[int(y) : int(y) + 1]
    if theta is not None:
        th = _theta_index(theta)
        t = t[:, th : th + 1]
    marg = t.sum(axis=(Y, THETA, OMEGA_S))
    total = marg.sum()
    if total <= 0:
        raise ZeroProbabilityEvidence("observed evidence has zero probability")
    return BinaryBelief(float(marg[1] / total))


def spillover_gaps(model: MentalModel, y: Stance) -> tuple[float, float]:
    """(agreement gap, disagreement gap) for the state matching stance ``y``.

    Gaps are measured against the posterior after the stance alone.
    """
    k = int(y)
    base = posterior(model, y).mass(k)
    aligned = posterior(model, y, A).mass(k)
    misaligned = posterior(model, y, M).mass(k)
    return aligned - base, misaligned - base


def backlash_predicate(model: MentalModel, y: Stance, theta: Tag) -> bool:
    """Whether goal misalignment is strong enough for backlash against ``(y, theta)``.

    True iff G(omega_k, theta) < 1 - G(omega_-k, theta).  Only defined for
    preference-based models.
    """
    if classify(model) is not TrustClass.PREFERENCE_BASED:
        raise WrongTrustClass("backlash predicate requires a preference-based model")
    k = int(y)
    return goal_alignment(model, k, theta) < 1.0 - goal_alignment(model, 1 - k, theta)


def sample_model(trust_class: TrustClass, rng: RngStream | np.random.Generator) -> MentalModel:
    """Draw a model of the requested class whose defining inequalities hold with margin."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    if trust_class is TrustClass.COMPETENCE_BASED:
        while True:
            p_aligned, prior = gen.uniform(0.05, 0.95, size=2)
            b_m, a_m = np.sort(gen.uniform(0.05, 0.95, size=2))
            a_a = gen.uniform(a_m, 0.99)
            b_a = gen.uniform(0.01, b_m)
            up_gap = a_a / b_a - a_m / b_m
            down_gap = (1 - b_a) / (1 - a_a) - (1 - b_m) / (1 - a_m)
            if a_m / b_m >= 1 + SAMPLE_MARGIN and min(up_gap, down_gap) >= SAMPLE_MARGIN:
                return MentalModel.competence_based(p_aligned, prior, [[b_a, a_a], [b_m, a_m]])
    if trust_class is TrustClass.PREFERENCE_BASED:
        p_aligned, prior = gen.uniform(0.05, 0.95, size=2)
        g_m = gen.uniform(0.01, 0.98 - SAMPLE_MARGIN, size=2)
        g_a = gen.uniform(g_m + SAMPLE_MARGIN, 0.99)
        return MentalModel.preference_based(p_aligned, prior, [g_a, g_m])
    raise WrongTrustClass(f"cannot sample a model of class {trust_class}")


def sample_arbitrary_model(rng: RngStream | np.random.Generator) -> MentalModel:
    """Any valid model: independent (theta, omega_R) plus a random conditional for (y, omega_S)."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    p_aligned, prior = gen.uniform(0.02, 0.98, size=2)
    p_theta = np.array([p_aligned, 1 - p_aligned])
    p_r = np.array([1 - prior, prior])
    t = np.zeros((2, 2, 2, 2))
    for th in range(2):
        for wr in range(2):
            cond = gen.dirichlet(np.ones(4)).reshape(2, 2)  # [y, omega_S]
            cond = 0.98 * cond + 0.02 / 4  # keep away from zero
            t[:, th, :, wr] = p_theta[th] * p_r[wr] * cond
    return MentalModel(t)


def choice_probability(belief: BinaryBelief, noise_scale: float) -> float:
    """Probability of expressing support under a logistic noisy-choice rule.

    Uses the symmetric utility gap 2*p1 - 1 scaled by ``noise_scale``.
    """
    if not noise_scale > 0:
        raise NonPositiveScale(f"noise scale must be positive, got {noise_scale}")
    return float(expit((2.0 * belief.p1 - 1.0) / noise_scale))


def model_from_config(doc: dict) -> MentalModel:
    """Mental model from a config section.

    Accepts either a raw ``table`` of 16 numbers or a ``kind`` of
    ``competence``/``preference``/``factors`` with the matching factor fields.
    """
    if not isinstance(doc, dict):
        raise ConfigError("mental model config must be an object")
    if "table" in doc:
        table = doc["table"]
        if not isinstance(table, list) or len(table) != 16:
            raise ConfigError("mental model 'table' must be a list of 16 numbers")
        try:
            arr = np.array(table, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"mental model table is not numeric: {exc}") from exc
        return MentalModel(arr)
    kind = doc.get("kind")
    fields = {
        "competence": ("pAligned", "priorR", "stance"),
        "preference": ("pAligned", "priorR", "alignment"),
        "factors": ("pAligned", "priorR", "senderState", "stance"),
    }
    if kind not in fields:
        raise ConfigError(f"mental model needs a 'table' or a kind in {sorted(fields)}, got {kind!r}")
    missing = [f for f in fields[kind] if f not in doc]
    if missing:
        raise ConfigError(f"mental model of kind {kind!r} is missing {missing}")
    try:
        args = [doc[f] for f in fields[kind]]
        if kind == "competence":
            return MentalModel.competence_based(*args)
        if kind == "preference":
            return MentalModel.preference_based(*args)
        return MentalModel.from_factors(*args)
    except (TypeError, IndexError) as exc:
        raise ConfigError(f"malformed mental model factors: {exc}") from exc
