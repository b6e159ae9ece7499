"""Slow, independent re-derivations used to check the closed forms.

Nothing here shares code paths with the modules it checks: posteriors are
summed cell by cell, distortions are found by fixed-point iteration, the
threshold comes from solving for the exponent directly, and party payoffs
are integrated numerically over the popularity shock.
"""

from __future__ import annotations

import math
from typing import Optional

from scipy.integrate import quad

from .core import BinaryBelief
from .election import ElectionConfig, PartyUtility, Platform


def brute_force_posterior(model, y: Optional[int] = None, theta_index: Optional[int] = None) -> float:
    """P(omega_R = 1 | evidence) by summing the 16 joint cells one at a time."""
    t = model.table
    num = den = 0.0
    for yy in (0, 1):
        if y is not None and yy != int(y):
            continue
        for th in (0, 1):
            if theta_index is not None and th != theta_index:
                continue
            for ws in (0, 1):
                for wr in (0, 1):
                    cell = float(t[yy, th, ws, wr])
                    den += cell
                    if wr == 1:
                        num += cell
    return num / den


def _renorm(w1: float, w0: float) -> tuple[float, float]:
    s = w1 + w0
    return w1 / s, w0 / s


def iterate_distortion(
    pi: BinaryBelief,
    ref_in: BinaryBelief,
    ref_out: BinaryBelief,
    chi: float,
    tol: float = 1e-15,
    max_iter: int = 1_000_000,
) -> tuple[BinaryBelief, BinaryBelief, BinaryBelief]:
    """Solve the self-referential distortion equations by plain iteration.

    Returns (distorted belief, distorted in-group reference, distorted
    out-group reference).  The map contracts at rate ``2 chi``.
    """
    gi = (ref_in.p1, ref_in.p0)
    go = (ref_out.p1, ref_out.p0)
    for _ in range(max_iter):
        ratio1 = gi[0] / go[0]
        ratio0 = gi[1] / go[1]
        ni = _renorm(ref_in.p1 * ratio1**chi, ref_in.p0 * ratio0**chi)
        no = _renorm(ref_out.p1 * ratio1 ** (-chi), ref_out.p0 * ratio0 ** (-chi))
        done = abs(ni[0] - gi[0]) <= tol and abs(no[0] - go[0]) <= tol
        gi, go = ni, no
        if done:
            break
    d = _renorm(pi.p1 * (gi[0] / go[0]) ** chi, pi.p0 * (gi[1] / go[1]) ** chi)
    return BinaryBelief(d[0]), BinaryBelief(gi[0]), BinaryBelief(go[0])


def threshold_closed_form(
    prior: BinaryBelief,
    rational_post: BinaryBelief,
    hat_pi: BinaryBelief,
    pi_s: BinaryBelief,
    k: int,
) -> float:
    """Backlash threshold from the exponent that returns the belief exactly to the prior."""
    p = prior.mass(k)
    r = rational_post.mass(k)
    a = hat_pi.mass(k) / pi_s.mass(k)
    b = hat_pi.mass(1 - k) / pi_s.mass(1 - k)
    e = math.log(r * (1 - p) / ((1 - r) * p)) / math.log(b / a)
    return e / (1 + 2 * e)


def integrated_payoff(qA: Platform, qB: Platform, cfg: ElectionConfig, v: Optional[PartyUtility] = None) -> tuple[float, float]:
    """Expected party utilities by quadrature over the uniform shock.

    For each shock value ``eps`` a group votes A when its utility gain from
    A exceeds ``eps``; the integrand is the resulting vote-share utility.
    """
    v = cfg.utility if v is None else v
    gains = []
    for g in cfg.groups:
        ua = -((qA.x - g.position) ** 2) - (qA.y - g.belief.p1) ** 2
        ub = -((qB.x - g.position) ** 2) - (qB.y - g.belief.p1) ** 2
        gains.append((ua - ub, g.share))
    phi = cfg.phi

    def share_a(eps: float) -> float:
        return sum(s for gain, s in gains if gain > eps)

    breaks = sorted({min(max(gain, -phi), phi) for gain, _ in gains})
    opts = dict(points=breaks, limit=200, epsabs=1e-14, epsrel=1e-13)
    va = quad(lambda e: v(share_a(e)), -phi, phi, **opts)[0] / (2 * phi)
    vb = quad(lambda e: v(1.0 - share_a(e)), -phi, phi, **opts)[0] / (2 * phi)
    return va, vb
