"""Identity-threat belief updating.

A receiver who identifies with their cultural group distorts beliefs towards
what she perceives as typical of her in-group and away from the out-group.
Identity is only switched on by an out-group cultural message, and a
bundled message makes the receiver attribute its economic content to the
sender's cultural group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import expit

from .core import BinaryBelief, Message, Stance, Tag, normalize
from .errors import ChiOutOfRange, DegenerateBelief, NoThreshold, ZeroProbabilityEvidence

MAX_CHI = 0.499
BISECTION_UPPER = 0.5 - 1e-6
BISECTION_STEPS = 60


def identity_exponent(chi: float) -> float:
    """chi / (1 - 2 chi), the exponent of the closed-form distortion."""
    return chi / (1.0 - 2.0 * chi)


def _check_chi(chi: float) -> float:
    chi = float(chi)
    if not (0.0 <= chi <= MAX_CHI):
        raise ChiOutOfRange(f"identity intensity must lie in [0, {MAX_CHI}], got {chi}")
    return chi


def _log_ratio_gap(num: BinaryBelief, den: BinaryBelief) -> float:
    # log(num/den)(w1) - log(num/den)(w0)
    return (math.log(num.p1) - math.log(den.p1)) - (math.log(num.p0) - math.log(den.p0))


def _tilt(base: BinaryBelief, gap: float, exponent: float) -> BinaryBelief:
    logit = math.log(base.p1) - math.log(base.p0) + exponent * gap
    return BinaryBelief(float(expit(logit)))


def distort_reference(ref_in: BinaryBelief, ref_out: BinaryBelief, chi: float) -> tuple[BinaryBelief, BinaryBelief]:
    """Stereotyped in-group and out-group reference beliefs.

    Each reference is tilted away from the other by the likelihood ratio
    raised to ``chi / (1 - 2 chi)``.
    """
    ref_in.require_full_support("in-group reference")
    ref_out.require_full_support("out-group reference")
    chi = _check_chi(chi)
    if chi == 0.0 or ref_in == ref_out:
        return ref_in, ref_out
    e = identity_exponent(chi)
    gap = _log_ratio_gap(ref_in, ref_out)
    return _tilt(ref_in, gap, e), _tilt(ref_out, -gap, e)


def distort_belief(pi: BinaryBelief, ref_in: BinaryBelief, ref_out: BinaryBelief, chi: float) -> BinaryBelief:
    """Depersonalised belief: ``pi`` tilted towards the in-group reference."""
    pi.require_full_support("belief")
    ref_in.require_full_support("in-group reference")
    ref_out.require_full_support("out-group reference")
    chi = _check_chi(chi)
    if chi == 0.0 or ref_in == ref_out:
        return pi
    return _tilt(pi, _log_ratio_gap(ref_in, ref_out), identity_exponent(chi))


def fixed_point_residual(
    distorted: BinaryBelief,
    base: BinaryBelief,
    distorted_in: BinaryBelief,
    distorted_out: BinaryBelief,
    chi: float,
) -> float:
    """Sup-norm violation of the self-referential distortion equation.

    Zero when ``distorted`` is proportional to
    ``base * (distorted_in / distorted_out) ** chi``.
    """
    for name, b in (("distorted", distorted), ("base", base), ("distorted_in", distorted_in), ("distorted_out", distorted_out)):
        b.require_full_support(name)
    target = normalize(
        (
            base.p1 * (distorted_in.p1 / distorted_out.p1) ** chi,
            base.p0 * (distorted_in.p0 / distorted_out.p0) ** chi,
        )
    )
    return max(abs(distorted.p1 - target.p1), abs(distorted.p0 - target.p0))


@dataclass(frozen=True)
class SignalModel:
    """Likelihoods ``likelihoods[k][j] = P(message k | w_j)`` of the two economic messages.

    Whatever is left of each column is the probability of no message.  The
    likelihoods carry no cultural argument, so learning the sender's group
    is uninformative for a rational receiver.
    """

    likelihoods: tuple

    def __post_init__(self):
        lik = np.asarray(self.likelihoods, dtype=float).reshape(2, 2)
        if np.any(~np.isfinite(lik)) or np.any(lik < 0) or np.any(lik > 1):
            raise ValueError("likelihoods must be probabilities")
        if np.any(lik.sum(axis=0) > 1 + 1e-12):
            raise ValueError("message probabilities given a state exceed one")
        for k in (0, 1):
            if lik[k, k] < lik[k, 1 - k]:
                raise ValueError(f"message {k} would trigger rational backlash")
        object.__setattr__(self, "likelihoods", tuple(tuple(float(v) for v in row) for row in lik))

    @classmethod
    def symmetric(cls, accuracy: float) -> "SignalModel":
        return cls(((accuracy, 1 - accuracy), (1 - accuracy, accuracy)))

    @classmethod
    def uninformative(cls) -> "SignalModel":
        return cls(((0.5, 0.5), (0.5, 0.5)))

    def likelihood(self, k: int, state: int) -> float:
        return self.likelihoods[k][state]


def rational_posterior(prior: BinaryBelief, signal: SignalModel, econ: Stance | None) -> BinaryBelief:
    if econ is None:
        return prior
    k = int(econ)
    w1 = prior.p1 * signal.likelihood(k, 1)
    w0 = prior.p0 * signal.likelihood(k, 0)
    if w1 + w0 == 0.0:
        raise ZeroProbabilityEvidence(f"message {k} has zero probability under the prior")
    return normalize((w1, w0))


def apply_reference_update(msg: Message, hat_pi: BinaryBelief) -> tuple[BinaryBelief, BinaryBelief]:
    """In-group and out-group reference beliefs after ``msg``.

    Only a single-source bundle rewrites a reference: the sender's economic
    belief is attributed to the sender's cultural group.
    """
    hat_pi.require_full_support("reference belief")
    if msg.cultural.is_absolute:
        raise ValueError("resolve the message against the receiver's group first")
    if not msg.is_bundled or msg.payload is None:
        return hat_pi, hat_pi
    if msg.cultural is Tag.IN_GROUP:
        return msg.payload, hat_pi
    return hat_pi, msg.payload


@dataclass(frozen=True)
class IdentityContext:
    """Reference beliefs and threat-dependent identity intensity of one receiver."""

    ref_in: BinaryBelief
    ref_out: BinaryBelief
    chi_threat: float
    group: Tag = Tag.SP
    chi_aligned: float = 0.0

    def __post_init__(self):
        self.ref_in.require_full_support("in-group reference")
        self.ref_out.require_full_support("out-group reference")
        if self.chi_aligned != 0.0:
            raise ChiOutOfRange("identity is not active without a threat: chi_aligned must be 0")
        if not 0.0 < self.chi_threat < 0.5:
            raise ChiOutOfRange(f"threat intensity must lie in (0, 1/2), got {self.chi_threat}")
        if not self.group.is_absolute:
            raise ValueError("receiver group must be SP or SC")

    def chi_for(self, tag: Tag) -> float:
        tag = tag.relative_to(self.group)
        return self.chi_threat if tag is Tag.OUT_GROUP else self.chi_aligned


ChiSpec = Union[float, Sequence[float]]


def _threat(chi: ChiSpec) -> float:
    if isinstance(chi, (int, float)):
        return float(chi)
    aligned, threat = chi
    if aligned != 0.0:
        raise ChiOutOfRange("identity is not active without a threat: chi_aligned must be 0")
    return float(threat)


def receiver_response(
    prior: BinaryBelief,
    hat_pi: BinaryBelief,
    signal: SignalModel,
    chi: ChiSpec,
    msg: Message,
) -> BinaryBelief:
    """Final belief of a receiver after ``msg``.

    Rational update first, then reference rewriting, then depersonalisation
    with the intensity triggered by the message's cultural tag.  ``chi`` is
    either the threat intensity or the pair ``(chi_aligned, chi_threat)``.
    """
    prior.require_full_support("prior")
    nu = rational_posterior(prior, signal, msg.economic)
    ref_in, ref_out = apply_reference_update(msg, hat_pi)
    intensity = _threat(chi) if msg.cultural is Tag.OUT_GROUP else 0.0
    return distort_belief(nu, ref_in, ref_out, intensity)


def backlash_threshold(
    prior: BinaryBelief,
    rational_post: BinaryBelief,
    hat_pi: BinaryBelief,
    pi_s: BinaryBelief,
    k: int,
) -> float:
    """Threat intensity above which an out-group bundle pushes the receiver below their prior.

    Bisection on the distorted mass on ``w_k``, which decreases strictly in
    the intensity.
    """
    for name, b in (("prior", prior), ("rational posterior", rational_post), ("reference", hat_pi), ("sender belief", pi_s)):
        try:
            b.require_full_support(name)
        except DegenerateBelief as exc:
            raise NoThreshold(str(exc)) from exc
    k = int(k)
    if not pi_s.mass(k) > hat_pi.mass(k):
        raise NoThreshold("sender belief must favour w_k more than the reference belief")
    target = prior.mass(k)
    if not rational_post.mass(k) > target:
        raise NoThreshold("rational update does not move towards w_k; threshold degenerates to 0")

    gap = _log_ratio_gap(hat_pi, pi_s)

    def excess(chi: float) -> float:
        return _tilt(rational_post, gap, identity_exponent(chi)).mass(k) - target

    lo, hi = 0.0, BISECTION_UPPER
    if excess(hi) > 0:
        raise NoThreshold(f"threshold lies above {BISECTION_UPPER}")
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
