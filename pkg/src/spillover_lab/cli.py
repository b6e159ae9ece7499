"""Command-line front end: ``lab <command> --config PATH --out DIR``.

Each command reads one JSON config (with ``schemaVersion``), writes its
results to DIR as ``<command>.json`` or one or more ``<command>*.csv``
files, and exits with 0 (ok), 2 (config error), 3 (domain error) or
4 (verification failure).
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from . import bayes, election, identity, media, oracles, simulation
from . import configio as cio
from .core import BinaryBelief, Message, RngStream, Stance, Tag
from .errors import ConfigError, ModelError, VerificationError

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_VERIFY = 0, 2, 3, 4


@dataclass
class Output:
    data: dict
    tables: dict = field(default_factory=dict)  # file stem -> (header, rows)
    checks: list = field(default_factory=list)  # (name, ok, detail)

    def check(self, name: str, ok: bool, detail: str = "") -> None:
        self.checks.append((name, bool(ok), detail))


# ---------------------------------------------------------------- bayes


def _model_report(model: bayes.MentalModel) -> dict:
    cls = bayes.classify(model)
    post = {"none": bayes.posterior(model).p1}
    for y in Stance:
        post[f"y{int(y)}"] = bayes.posterior(model, y).p1
        for th, name in ((bayes.A, "aligned"), (bayes.M, "misaligned")):
            post[f"y{int(y)}_{name}"] = bayes.posterior(model, y, th).p1
    gaps = {f"y{int(y)}": list(bayes.spillover_gaps(model, y)) for y in Stance}
    backlash = None
    if cls is bayes.TrustClass.PREFERENCE_BASED:
        backlash = {
            f"y{int(y)}_{name}": bayes.backlash_predicate(model, y, th)
            for y in Stance
            for th, name in ((bayes.A, "aligned"), (bayes.M, "misaligned"))
        }
    return {
        "classification": cls.value,
        "posterior": post,
        "spilloverGaps": gaps,
        "backlash": backlash,
        "informativeness": {f"y{int(y)}_{n}": bayes.informativeness(model, y, th) for y in Stance for th, n in ((bayes.A, "aligned"), (bayes.M, "misaligned"))},
        "goalAlignment": {f"w{w}_{n}": bayes.goal_alignment(model, w, th) for w in (0, 1) for th, n in ((bayes.A, "aligned"), (bayes.M, "misaligned"))},
    }


def _verify_model(out: Output, model: bayes.MentalModel, label: str) -> None:
    worst = 0.0
    for y in (None, 0, 1):
        for th in (None, 0, 1):
            if y is None and th is not None:
                continue
            fast = bayes.posterior(model, None if y is None else Stance(y), None if th is None else (bayes.A, bayes.M)[th]).p1
            worst = max(worst, abs(fast - oracles.brute_force_posterior(model, y, th)))
    out.check(f"{label}: posterior vs cell-by-cell sum", worst <= 1e-12, f"max abs diff {worst:.3e}")


def cmd_bayes(doc: dict, seed: Optional[int], verify: bool) -> Output:
    if "model" in doc:
        model = bayes.model_from_config(cio.section(doc, "model"))
        out = Output({"model": _model_report(model)})
        out.tables["bayes"] = (
            ("quantity", "key", "value"),
            [("posterior", k, v) for k, v in out.data["model"]["posterior"].items()]
            + [(f"gap_{which}", k, v[i]) for k, v in out.data["model"]["spilloverGaps"].items() for i, which in enumerate(("aligned", "misaligned"))]
            + [("classification", "", out.data["model"]["classification"])],
        )
        if verify:
            _verify_model(out, model, "model")
        return out
    sampler = cio.section(doc, "sampler")
    cls_name = cio.string(sampler, "class", {"CompetenceBased", "PreferenceBased", "Arbitrary"})
    count = cio.integer(sampler, "count", 1)
    if count < 1:
        raise ConfigError("sampler count must be positive")
    gen = RngStream(cio.integer(doc, "seed", 0) if seed is None else seed).generator()
    reports, rows = [], []
    out = Output({})
    for i in range(count):
        if cls_name == "Arbitrary":
            model = bayes.sample_arbitrary_model(gen)
        else:
            model = bayes.sample_model(bayes.TrustClass(cls_name), gen)
        rep = _model_report(model)
        rep["table"] = [float(v) for v in model.table.ravel()]
        reports.append(rep)
        p = rep["posterior"]
        rows.append((i, rep["classification"], p["none"], p["y1"], p["y1_aligned"], p["y1_misaligned"], p["y0"], p["y0_aligned"], p["y0_misaligned"]))
        if verify:
            _verify_model(out, model, f"sample {i}")
    out.data = {"sampler": {"class": cls_name, "count": count}, "models": reports}
    out.tables["bayes"] = (("index", "classification", "prior", "y1", "y1_aligned", "y1_misaligned", "y0", "y0_aligned", "y0_misaligned"), rows)
    return out


# ---------------------------------------------------------------- identity


def _message(doc: dict) -> Message:
    stance = doc.get("stance")
    if stance not in (None, 0, 1):
        raise ConfigError("message stance must be 0, 1 or null")
    tag = cio.string(doc, "tag", {"in", "out", "none"}, "none")
    payload = cio.belief(doc, "payload") if "payload" in doc else None
    same = doc.get("sameSource", True)
    if not isinstance(same, bool):
        raise ConfigError("'sameSource' must be a boolean")
    return Message(None if stance is None else Stance(stance), payload, Tag(tag), same)


def cmd_identity(doc: dict, seed: Optional[int], verify: bool) -> Output:
    data, rows = {}, []
    out = Output(data)
    if "distortion" in doc:
        d = cio.section(doc, "distortion")
        pi, ref_in, ref_out = cio.belief(d, "belief"), cio.belief(d, "refIn"), cio.belief(d, "refOut")
        chi = cio.number(d, "chi")
        belief = identity.distort_belief(pi, ref_in, ref_out, chi)
        d_in, d_out = identity.distort_reference(ref_in, ref_out, chi)
        residual = identity.fixed_point_residual(belief, pi, d_in, d_out, chi)
        data["distortion"] = {"belief": belief.p1, "refIn": d_in.p1, "refOut": d_out.p1, "residual": residual}
        rows += [("distortion", "belief", belief.p1), ("distortion", "refIn", d_in.p1), ("distortion", "refOut", d_out.p1), ("distortion", "residual", residual)]
        if verify:
            it, _, _ = oracles.iterate_distortion(pi, ref_in, ref_out, chi)
            out.check("distortion: closed form vs iteration", abs(it.p1 - belief.p1) <= 1e-9, f"{belief.p1} vs {it.p1}")
            out.check("distortion: fixed-point residual", residual <= 1e-12, f"{residual:.3e}")
    if "response" in doc:
        r = cio.section(doc, "response")
        sig = r.get("signal", [[0.6, 0.4], [0.4, 0.6]])
        try:
            signal = identity.SignalModel(tuple(tuple(row) for row in sig))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad signal model: {exc}") from exc
        msg = _message(cio.section(r, "message"))
        belief = identity.receiver_response(cio.belief(r, "prior"), cio.belief(r, "hatPi"), signal, cio.number(r, "chi"), msg)
        data["response"] = {"belief": belief.p1, "message": msg.label()}
        rows.append(("response", msg.label(), belief.p1))
    if "threshold" in doc:
        t = cio.section(doc, "threshold")
        args = (cio.belief(t, "prior"), cio.belief(t, "rationalPosterior"), cio.belief(t, "hatPi"), cio.belief(t, "senderBelief"), cio.integer(t, "k", 1))
        chi_star = identity.backlash_threshold(*args)
        data["threshold"] = {"chiStar": chi_star}
        rows.append(("threshold", "chiStar", chi_star))
        if verify:
            ref = oracles.threshold_closed_form(*args)
            out.check("threshold: bisection vs closed form", abs(chi_star - ref) <= 1e-6, f"{chi_star} vs {ref}")
    if not data:
        raise ConfigError("identity config needs at least one of 'distortion', 'response', 'threshold'")
    out.tables["identity"] = (("block", "key", "value"), rows)
    return out


# ---------------------------------------------------------------- election


def _platform_row(label, nu_sp, nu_sc, q_sp, q_sc, payoff, optimal):
    return (label, nu_sp, nu_sc, abs(nu_sp - nu_sc), q_sp.x, q_sp.y, q_sc.x, q_sc.y, payoff, optimal)


def cmd_election(doc: dict, seed: Optional[int], verify: bool) -> Output:
    cfg = election.ElectionConfig.from_dict(doc)
    q_sp, q_sc = election.equilibrium_platforms(cfg)
    base_payoff = election.equilibrium_payoff_closed_form(q_sp, q_sc, cfg.phi)
    rows = [_platform_row("given-beliefs", cfg.sp.belief.p1, cfg.sc.belief.p1, q_sp, q_sc, base_payoff, "")]
    best = election.optimal_message(cfg)
    messages = []
    for m in election.message_set(cfg):
        res = election.solve(cfg, m)
        flag = "yes" if m == best else ""
        rows.append(_platform_row(m.label(), res.beliefs[0].p1, res.beliefs[1].p1, res.q_sp, res.q_sc, res.payoff, flag))
        messages.append(
            {
                "message": m.label(),
                "beliefs": [res.beliefs[0].p1, res.beliefs[1].p1],
                "divergence": res.divergence,
                "qSP": [res.q_sp.x, res.q_sp.y],
                "qSC": [res.q_sc.x, res.q_sc.y],
                "payoff": res.payoff,
            }
        )
    out = Output(
        {
            "givenBeliefs": {"qSP": [q_sp.x, q_sp.y], "qSC": [q_sc.x, q_sc.y], "payoff": base_payoff},
            "messages": messages,
            "optimalMessage": best.label(),
        }
    )
    out.tables["election"] = (("scenario", "nuSP", "nuSC", "divergence", "qSP_x", "qSP_y", "qSC_x", "qSC_y", "payoff", "optimal"), rows)
    if verify:
        va, vb = oracles.integrated_payoff(q_sp, q_sc, cfg, cfg.utility.normalized())
        rel = max(abs(va - base_payoff), abs(vb - base_payoff)) / base_payoff
        out.check("election: closed-form payoff vs quadrature", rel <= 1e-9, f"relative error {rel:.3e}")
        xs, ys = election.grid_axes(cfg)
        step_x, step_y = xs[1] - xs[0], ys[1] - ys[0]
        for label, target, opp in (("SP", q_sp, q_sc), ("SC", q_sc, q_sp)):
            br = election.best_response_grid(opp, cfg)
            ok = abs(br.x - target.x) <= step_x * (1 + 1e-9) and abs(br.y - target.y) <= step_y * (1 + 1e-9)
            out.check(f"election: grid best response reaches q{label}", ok, f"grid ({br.x}, {br.y}) vs ({target.x}, {target.y})")
    return out


# ---------------------------------------------------------------- media


def cmd_media(doc: dict, seed: Optional[int], verify: bool) -> Output:
    cfg = media.MediaConfig.from_dict(doc)
    rng = RngStream(cio.integer(doc, "seed", 0) if seed is None else seed)
    rows = media.sweep(cfg, verify=verify, rng=rng)
    out = Output(
        {
            "threshold": cfg.threshold,
            "sweep": [{"D_E": r.D_E, "D": r.D, "profitA": r.profit_a, "profitB": r.profit_b, "regime": r.regime} for r in rows],
        }
    )
    out.tables["media"] = (media.SWEEP_COLUMNS, [(r.D_E, r.D, r.profit_a, r.profit_b, r.regime) for r in rows])
    if verify:
        for r in rows:
            out.check(f"media: D_E={r.D_E} threshold rule vs SPNE search", r.oracle_agrees)
        out.check("media: profits weakly increasing", media.is_weakly_increasing([r.profit_a for r in rows]))
    return out


# ---------------------------------------------------------------- simulate

VERIFY_SIGMAS = 5.0


def cmd_simulate(doc: dict, seed: Optional[int], verify: bool) -> Output:
    if seed is not None:
        doc = dict(doc, seed=seed)
    cfg = simulation.SimConfig.from_dict(doc)
    result = simulation.run_experiment(cfg)
    out = Output(result.to_dict())
    out.tables["simulate"] = (simulation.ARM_CSV_COLUMNS, simulation.result_rows(result))
    out.tables["simulate_correlations"] = (("arm", "n", "r", "se", "flag"), simulation.correlation_rows(result))
    trace = doc.get("trace", False)
    if not isinstance(trace, bool):
        raise ConfigError("'trace' must be a boolean")
    if trace:
        out.tables["simulate_trace"] = (("arm", "agent", "group", "support"), simulation.trace_rows(result))
    if verify:
        for a in result.arms:
            se = math.sqrt(a.expected * (1 - a.expected) / a.n)
            dev = abs(a.share - a.expected)
            out.check(f"simulate: {a.name} share vs closed form", dev <= VERIFY_SIGMAS * se + 1e-15, f"{a.share} vs {a.expected} ({dev / se if se else 0:.2f} SE)")
    return out


# ---------------------------------------------------------------- driver

COMMANDS: dict[str, Callable[[dict, Optional[int], bool], Output]] = {
    "bayes": cmd_bayes,
    "identity": cmd_identity,
    "election": cmd_election,
    "media": cmd_media,
    "simulate": cmd_simulate,
}

HELP = {
    "bayes": "posteriors, spillover gaps, backlash and trust class of a mental model (or of sampled models). "
    "CSV columns: quantity,key,value (single model) or index,classification,prior,y1,y1_aligned,y1_misaligned,y0,y0_aligned,y0_misaligned (sampler).",
    "identity": "identity distortion, receiver response and backlash threshold. CSV columns: block,key,value.",
    "election": "propaganda beliefs, equilibrium platforms and payoffs per message. "
    "CSV columns: scenario,nuSP,nuSC,divergence,qSP_x,qSP_y,qSC_x,qSC_y,payoff,optimal.",
    "media": "SPNE profits across economic disagreement levels. CSV columns: D_E,D,profitA,profitB,regime.",
    "simulate": "synthetic experiment. simulate.csv columns: kind,name,n,value,se,z,expected; "
    "simulate_correlations.csv columns: arm,n,r,se,flag; optional simulate_trace.csv: arm,agent,group,support.",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lab", description="Opinion spillover toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        p.add_argument("--config", required=True, help="JSON config with a schemaVersion field")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--verify", action="store_true", help="run oracle checks; exit 4 on disagreement")
    return parser


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([cio.fmt(v) for v in row])
    return buf.getvalue()


def write_output(out: Output, command: str, out_dir: Path, fmt: str) -> list[Path]:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        if fmt == "json":
            payload = dict(out.data)
            if out.checks:
                payload["verification"] = [{"check": n, "ok": ok, "detail": d} for n, ok, d in out.checks]
            path = out_dir / f"{command}.json"
            path.write_text(cio.dumps(payload), encoding="utf-8")
            written.append(path)
        else:
            for stem, (header, rows) in out.tables.items():
                path = out_dir / f"{stem}.csv"
                path.write_text(_csv_text(header, rows), encoding="utf-8")
                written.append(path)
        return written
    except OSError as exc:
        raise ConfigError(f"cannot write to {out_dir}: {exc}") from exc


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        doc = cio.load_json(args.config)
        cio.check_schema(doc)
        out = COMMANDS[args.command](doc, args.seed, args.verify)
        write_output(out, args.command, Path(args.out), args.format)
        failed = [c for c in out.checks if not c[1]]
        for name, ok, detail in out.checks:
            print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip(), file=sys.stderr)
        if failed:
            raise VerificationError(f"{len(failed)} verification check(s) failed")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelError as exc:
        print(f"domain error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (TypeError, ValueError, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
