"""Command-line driver.

Config and report documents share one JSON format tagged with ``schema``.
A report is a config plus ``command`` and ``result``, so reports written by
``containers`` can be fed back to ``verify``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from itertools import product
from pathlib import Path
from typing import Any

from . import lattice
from .containers import branching_run, verify_coverage
from .critical import check_probability_vector, omega_crit
from .enumeration import expected_valid_count, exponent_estimate, middle_band, mu_valid
from .errors import ChainAvoidError, InvariantViolation, ParameterError
from .hypergraph import recompute_codegrees
from .patterns import (
    ForbiddenFamily,
    augment_with_all_chains,
    colors_of,
    longest_valid_length,
    sparsity_report,
)
from .supersat import (
    audit_blocked_extensions,
    bound_constant_Q,
    build_balanced,
    chain_stats,
    check_average_witness,
    check_top_bound,
    check_pointwise,
    constants,
)
from .templates import Template, best_anchor, check_beta, layered_template, mu_contained_closed_form, omega, template_is_valid

CONFIG_SCHEMA = "chainavoid/config/1"
REPORT_SCHEMA = "chainavoid/report/1"
COMMANDS = (
    "check", "lcg", "omega-crit", "extremal", "count", "expect",
    "sample", "supersat", "balanced", "containers", "verify",
)

log = logging.getLogger("chainavoid")


@dataclass
class ProblemConfig:
    m: int
    patterns: list[list[int]]
    beta: list | None = None
    p: list | None = None
    n: int | None = None
    seed: int = 0
    alpha: float | None = None
    delta: float | None = None
    tau: float | None = None
    samples: int | None = None
    band: list[int] | None = None

    @property
    def family(self) -> ForbiddenFamily:
        return ForbiddenFamily(self.m, tuple(tuple(p) for p in self.patterns))

    def to_dict(self) -> dict:
        return {k: _jsonable(v) for k, v in asdict(self).items() if v is not None}


_FIELDS = {f.name for f in fields(ProblemConfig)}


def _number(v, name):
    if isinstance(v, bool):
        raise ParameterError(f"{name}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            pass
    raise ParameterError(f"{name}: expected a number, got {v!r}")


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def config_from_dict(doc: Any) -> ProblemConfig:
    if not isinstance(doc, dict):
        raise ParameterError("malformed document: top level must be an object")
    schema = doc.get("schema", CONFIG_SCHEMA)
    allowed = set(_FIELDS) | {"schema"}
    if schema == REPORT_SCHEMA:
        allowed |= {"command", "result"}
    elif schema != CONFIG_SCHEMA:
        raise ParameterError(f"schema: unsupported schema {schema!r}")
    unknown = sorted(set(doc) - allowed)
    if unknown:
        raise ParameterError(f"{unknown[0]}: unknown field")
    if "m" not in doc or "patterns" not in doc:
        raise ParameterError(f"{'m' if 'm' not in doc else 'patterns'}: required field missing")
    m = doc["m"]
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ParameterError(f"m: expected a positive integer, got {m!r}")
    pats = doc["patterns"]
    if not isinstance(pats, list) or not all(
        isinstance(p, list) and all(isinstance(c, int) and not isinstance(c, bool) for c in p) for p in pats
    ):
        raise ParameterError("patterns: expected a list of integer lists")
    cfg = ProblemConfig(m=m, patterns=[list(p) for p in pats])
    cfg.family  # validates colors, lengths, duplicates
    for name in ("beta", "p"):
        if doc.get(name) is not None:
            vals = doc[name]
            if not isinstance(vals, list):
                raise ParameterError(f"{name}: expected a list")
            vals = [_number(v, name) for v in vals]
            if name == "beta":
                check_beta(vals, m)
            else:
                check_probability_vector(vals, m)
            setattr(cfg, name, vals)
    for name, kind in (("n", int), ("seed", int), ("samples", int)):
        if doc.get(name) is not None:
            v = doc[name]
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ParameterError(f"{name}: expected a non-negative integer, got {v!r}")
            setattr(cfg, name, v)
    for name in ("alpha", "delta", "tau"):
        if doc.get(name) is not None:
            v = doc[name]
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0:
                raise ParameterError(f"{name}: expected a positive real, got {v!r}")
            setattr(cfg, name, float(v))
    if doc.get("band") is not None:
        b = doc["band"]
        if not (isinstance(b, list) and len(b) == 2 and all(isinstance(x, int) for x in b)):
            raise ParameterError("band: expected [lo, hi]")
        cfg.band = list(b)
    return cfg


def parse_config(path) -> ProblemConfig:
    return config_from_dict(_load(path))


def _load(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParameterError(f"config: cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"malformed document: {exc}") from exc


def emit_config(cfg: ProblemConfig) -> str:
    return json.dumps({"schema": CONFIG_SCHEMA, **cfg.to_dict()}, indent=2, sort_keys=True) + "\n"


def emit_report(cfg: ProblemConfig, command: str, result: dict) -> str:
    doc = {"schema": REPORT_SCHEMA, **cfg.to_dict(), "command": command, "result": result}
    return json.dumps(doc, indent=2, sort_keys=True, default=_default) + "\n"


def _default(o):
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def fmt(x) -> str:
    if isinstance(x, int):
        return str(x)
    if isinstance(x, Fraction):
        return f"{x} (~{float(x):.12g})"
    return f"{x:.12g}"


def template_to_json(T: Template) -> list:
    return [[x, list(colors_of(T.sets[x]))] for x in T.support()]


def template_from_json(n: int, doc) -> Template:
    return Template.from_mapping(n, {int(x): [int(c) for c in cs] for x, cs in doc})


def _profiles_json(profiles):
    return [[list(colors_of(s)) for s in p] for p in profiles]


# -- commands ------------------------------------------------------------------


def _need_n(cfg):
    if cfg.n is None:
        raise ParameterError("n: required for this command (--n)")
    return cfg.n


def _band(cfg):
    return tuple(cfg.band) if cfg.band is not None else None


def cmd_check(cfg, args, out):
    fam = cfg.family
    rep = sparsity_report(fam)
    res = {"sparse": rep.is_sparse, "missing_colors": rep.missing_colors, "k": fam.k, "patterns": len(fam)}
    if rep.is_sparse:
        res["L"] = longest_valid_length(fam) + 1
    out(f"sparse: {rep.is_sparse}" + ("" if rep.is_sparse else f" (no monochromatic pattern for {rep.missing_colors})"))
    if rep.is_sparse:
        out(f"L: {res['L']}")
    return res


def cmd_lcg(cfg, args, out):
    longest = longest_valid_length(cfg.family)
    out(f"longest valid color sequence: {longest}")
    out(f"L: {longest + 1}")
    return {"longest_valid_length": longest, "L": longest + 1}


def cmd_omega_crit(cfg, args, out):
    r = omega_crit(cfg.family, cfg.beta)
    out(f"omega_crit: {fmt(r.omega_crit)}")
    for p in r.format_profiles():
        out(f"optimal profile: {p}")
    return {
        "omega_crit": r.omega_crit,
        "profiles": _profiles_json(r.optimal_profiles),
        "L": r.L,
        "truncated": r.truncated,
    }


def cmd_extremal(cfg, args, out):
    n = _need_n(cfg)
    fam = cfg.family
    beta = check_beta(cfg.beta, fam.m)
    r = omega_crit(fam, beta)
    rows = []
    for prof in r.optimal_profiles:
        if len(prof) > n + 1:
            continue
        anchor, w = best_anchor(prof, n, beta)
        T = layered_template(prof, n, anchor)
        rows.append({
            "profile": [list(colors_of(s)) for s in prof],
            "anchor": anchor,
            "omega": w,
            "mu_closed_form": mu_contained_closed_form(T, beta),
            "valid": template_is_valid(T, fam),
        })
        out(f"profile {rows[-1]['profile']}: anchor={anchor} omega={fmt(w)} mu={fmt(rows[-1]['mu_closed_form'])}")
    scale = r.omega_crit * lattice.middle_binomial(n)
    out(f"omega_crit*C(n,n/2): {fmt(scale)}")
    return {"omega_crit": r.omega_crit, "scaled": scale, "templates": rows}


def cmd_count(cfg, args, out):
    n = _need_n(cfg)
    r = mu_valid(n, cfg.family, cfg.beta, _band(cfg))
    out(f"mu: {fmt(r.mu)}")
    est = exponent_estimate(r.mu, n) if n > 0 else None
    if est is not None:
        out(f"log(mu)/C(n,n/2): {fmt(est)}")
    return {"mu": r.mu, "exact": r.exact, "nodes": r.nodes, "prunes": r.prunes, "exponent_estimate": est}


def cmd_expect(cfg, args, out):
    n = _need_n(cfg)
    if cfg.p is None:
        raise ParameterError("p: required for expect")
    samples = cfg.samples or 0
    if args.mode == "exact":
        samples = 0
    rng = lattice.make_rng(cfg.seed)
    r = expected_valid_count(n, cfg.family, cfg.p, samples=samples, rng=rng)
    wc = omega_crit(cfg.family, cfg.p).omega_crit
    out(f"E(V) exact: {fmt(r.exact)}")
    out(f"omega_crit(p): {fmt(wc)}")
    res = {"exact": r.exact, "omega_crit_p": wc}
    if r.mc_mean is not None:
        out(f"E(V) Monte Carlo: {fmt(r.mc_mean)} +- {fmt(r.mc_stderr)} ({r.samples} samples)")
        res.update(mc_mean=r.mc_mean, mc_stderr=r.mc_stderr, samples=r.samples, within_3_sigma=r.within(3))
    return res


def _band_template(cfg, n):
    lo, hi = _band(cfg) or (0, n)
    return Template.full(n, cfg.m, (lo, hi))


def cmd_sample(cfg, args, out):
    n = _need_n(cfg)
    T = _band_template(cfg, n)
    exact = args.mode == "exact" or (args.mode is None and not cfg.samples)
    s = chain_stats(T, cfg.family, cfg.beta, samples=None if exact else (cfg.samples or 1000), rng=lattice.make_rng(cfg.seed))
    out(f"E X = {fmt(s.x_mean)} (se {fmt(s.x_stderr)}), E Y = {fmt(s.y_mean)} (se {fmt(s.y_stderr)}), {s.samples} chains{' exact' if s.exact else ''}")
    return asdict(s)


def cmd_supersat(cfg, args, out):
    n = _need_n(cfg)
    fam = cfg.family
    beta = check_beta(cfg.beta, fam.m)
    aug = augment_with_all_chains(fam)
    K = constants(fam, beta)
    Q = bound_constant_Q(aug, n)
    out(f"C1={fmt(K.C1)} C2={fmt(K.C2)} C3={fmt(K.C3)} C4={fmt(K.C4)} Q={Q} omega_crit={fmt(K.omega_crit)}")
    T = _band_template(cfg, n)
    rng = lattice.make_rng(cfg.seed)
    exact = factorial_ok(n)
    samples = None if exact else (cfg.samples or 1000)
    worst, bad, count = check_pointwise(T, fam, beta, samples=samples, rng=rng, wc=K.omega_crit)
    res = {
        "constants": {"C1": K.C1, "C2": K.C2, "C3": K.C3, "C4": K.C4, "Q": Q, "omega_crit": K.omega_crit},
        "pointwise": {"max": worst, "chains": count, "violations": len(bad)},
    }
    out(f"max X-C3*Y over {count} chains: {fmt(worst)} (bound {fmt(K.omega_crit)})")
    alpha = cfg.alpha if cfg.alpha is not None else 0.5 * min(K.C2, max(omega(T, beta) / lattice.middle_binomial(n) - K.omega_crit, 0))
    need = (K.omega_crit + alpha) * lattice.middle_binomial(n)
    if alpha > 0 and alpha < K.C2 and omega(T, beta) >= need:
        rep = check_average_witness(T, fam, beta, alpha, chain_samples=samples, rng=rng)
        res["witness"] = {"alpha": alpha, "witness": rep.witness, "value": rep.witness_value, "threshold": rep.threshold}
        out(f"E Y^x >= C1*alpha={fmt(rep.threshold)} at x={rep.witness} (value {fmt(rep.witness_value) if rep.witness is not None else 'none'})")
        if rep.witness is None:
            bad.append({"witness": "no witness"})
    else:
        res["witness"] = {"alpha": alpha, "skipped": "hypothesis not met"}
        out("witness search: hypothesis not met for this template")
    worst_slack, checked = -math.inf, 0
    for x in lattice.canonical_order(n):
        if x.bit_count() > 5:
            continue
        for i in range(1, min(aug.k, x.bit_count() + 1, 3) + 1):
            for cols in product(range(1, fam.m + 1), repeat=i):
                br = check_top_bound(T, aug, x, cols, Q=Q)
                worst_slack = max(worst_slack, br.max_slack)
                checked += br.chains_checked
                bad.extend(br.violations)
    res["top_bound"] = {"max_slack": worst_slack, "chains": checked}
    out(f"max Z-(Q+Y^x) over {checked} chain checks: {fmt(worst_slack)}")
    res["violations"] = len(bad)
    if bad:
        raise InvariantViolation(f"{len(bad)} supersaturation counterexamples", bad[:5])
    return res


def factorial_ok(n):
    return math.factorial(n) <= 10**5


def cmd_balanced(cfg, args, out):
    n = _need_n(cfg)
    fam = cfg.family
    aug = augment_with_all_chains(fam)
    if cfg.band is not None:
        lo, hi = cfg.band
    else:
        lo, hi = -(-n // 3), 2 * n // 3
    T = Template.full(n, cfg.m, (lo, hi))
    delta = cfg.delta if cfg.delta is not None else 0.3
    res = build_balanced(T, aug, delta, alpha=cfg.alpha, beta=cfg.beta, strict=cfg.band is None)
    audit = recompute_codegrees(res.H.all_edges())
    violations = [
        {"ell": ell, "j": j, "codegree": d, "cap": res.caps[(ell, j)]}
        for (ell, j), d in sorted(audit.items())
        if d > res.caps[(ell, j)] + 1e-9
    ]
    blocked = audit_blocked_extensions(res, T)
    kmax = max(res.H.uniformities(), default=2)
    table = [
        {"ell": ell, "j": j, "codegree": d, "cap": res.caps[(ell, j)]}
        for (ell, j), d in sorted(res.codegrees.items())
    ]
    for row in table:
        out(f"Delta_{row['j']}(H_{row['ell']}) = {row['codegree']} <= {fmt(row['cap'])}")
    edges = {str(ell): res.H.num_edges(ell) for ell in res.H.uniformities()}
    out(f"edges: {edges}; success uniformity: {res.success_ell}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ell", "j", "codegree", "cap"])
            for row in table:
                w.writerow([row["ell"], row["j"], row["codegree"], repr(row["cap"])])
    result = {
        "delta": delta,
        "edges": edges,
        "targets": {str(k): v for k, v in res.targets.items()},
        "success_ell": res.success_ell,
        "codegrees": table,
        "saturated_singletons": [list(v) for v in res.saturated_singletons],
        "candidates": res.candidates,
        "blocked_extensions_max": blocked,
        "blocked_extensions_bound": kmax * delta * n * 2**kmax,
        "suggested_delta": res.suggested_delta,
        "audit_violations": len(violations),
    }
    if violations:
        raise InvariantViolation("codegree cap violated", violations)
    return result


def cmd_containers(cfg, args, out):
    n = _need_n(cfg)
    fam = cfg.family
    beta = check_beta(cfg.beta, fam.m)
    run = branching_run(
        n, fam, beta,
        alpha=cfg.alpha if cfg.alpha is not None else 0.5,
        delta=cfg.delta if cfg.delta is not None else 0.5,
        tau=cfg.tau,
        band=_band(cfg),
    )
    for line in run.log_lines:
        out(line)
    count = mu_valid(n, fam, beta, _band(cfg)).mu
    covered = verify_coverage(run.containers, n, fam, _band(cfg), rng=lattice.make_rng(cfg.seed))
    out(f"containers: {run.total}; union bound {fmt(run.union_bound)} vs mu {fmt(count)}; coverage {covered}")
    result = {
        "containers": [template_to_json(t) for t in run.containers],
        "threshold": run.threshold,
        "omega_crit": run.omega_crit,
        "tau": run.tau,
        "band": list(run.band),
        "union_bound": run.union_bound,
        "mu": count,
        "coverage": covered,
        "forced_splits": run.forced_splits,
        "max_container_omega": run.max_container_omega,
        "rounds": [asdict(r) for r in run.rounds],
    }
    if not covered or run.union_bound < count:
        raise InvariantViolation("container family fails coverage or union bound")
    return result


def cmd_verify(cfg, args, out, doc=None):
    n = _need_n(cfg)
    result = (doc or {}).get("result") or {}
    if "containers" not in result:
        raise ParameterError("result: verify needs a containers report")
    conts = [template_from_json(n, t) for t in result["containers"]]
    ok = verify_coverage(conts, n, cfg.family, _band(cfg), rng=lattice.make_rng(cfg.seed))
    out(f"coverage: {ok} ({len(conts)} containers)")
    if not ok:
        raise InvariantViolation("some valid colored subset is not covered")
    return {"coverage": ok, "containers": len(conts)}


HANDLERS = {
    "check": cmd_check,
    "lcg": cmd_lcg,
    "omega-crit": cmd_omega_crit,
    "extremal": cmd_extremal,
    "count": cmd_count,
    "expect": cmd_expect,
    "sample": cmd_sample,
    "supersat": cmd_supersat,
    "balanced": cmd_balanced,
    "containers": cmd_containers,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="chainavoid", description="Colored chain avoidance in the Boolean lattice")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="config (or report) JSON document")
    ap.add_argument("--out", help="write the machine-readable report here")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--n", type=int)
    ap.add_argument("--alpha", type=float)
    ap.add_argument("--delta", type=float)
    ap.add_argument("--tau", type=float)
    ap.add_argument("--samples", type=int)
    ap.add_argument("--band", help="LO,HI rank interval (inclusive)")
    ap.add_argument("--threads", type=int, default=1, help="worker cap (computations run single-threaded)")
    mode = ap.add_mutually_exclusive_group()
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--sample", dest="mode", action="store_const", const="sample")
    ap.add_argument("--csv", help="codegree table CSV (balanced)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")

    def out(line):
        print(line, file=stdout)

    try:
        doc = _load(args.config)
        cfg = config_from_dict(doc)
        overrides = {k: getattr(args, k) for k in ("seed", "n", "alpha", "delta", "tau", "samples")}
        if args.band:
            try:
                overrides["band"] = [int(v) for v in args.band.split(",")]
            except ValueError:
                raise ParameterError(f"band: expected LO,HI, got {args.band!r}")
        merged = {**cfg.to_dict(), **{k: v for k, v in overrides.items() if v is not None}}
        merged.pop("schema", None)
        cfg = config_from_dict(merged)
        handler = HANDLERS[args.command]
        result = handler(cfg, args, out, doc) if args.command == "verify" else handler(cfg, args, out)
    except ChainAvoidError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    if args.out:
        Path(args.out).write_text(emit_report(cfg, args.command, result))
    return 0


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
