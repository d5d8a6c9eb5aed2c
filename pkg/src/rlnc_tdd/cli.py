"""Command-line entry point: analyze, optimize, sweep, bound, simulate, compare."""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from pathlib import Path
from typing import Iterable, Sequence

from . import baselines, markov, model, policy as pol, sim
from .galois import FieldSpec

METHODS = ("optimal", "worst_link", "combined", "rr_full_duplex", "rr_tdd", "simulate")
DEFAULT_SEED = 20090101


def fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.9g}"
    return str(x)


def emit(pairs: Iterable[tuple[str, object]], out) -> None:
    for k, v in pairs:
        print(f"{k}: {fmt(v)}", file=out)


def parse_report(text: str) -> dict[str, str]:
    """Inverse of ``emit`` for tests and downstream scripts."""
    out = {}
    for line in text.splitlines():
        if ": " in line:
            k, v = line.split(": ", 1)
            out[k] = v
    return out


# ------------------------------------------------------------ library-level reports

def analyze_report(p: model.SystemParams, policy: pol.Policy, per_state: bool = False):
    if policy.M != p.M:
        raise ValueError(f"policy file is for M={policy.M} but config has M={p.M}")
    res = markov.mean_completion_time(policy, p)
    rows = [("M", p.M), ("N", p.N),
            ("T_p", model.packet_duration(p)),
            ("T_ack", model.ack_duration(p)),
            ("T_w", model.wait_time(p)),
            ("policy", " ".join(map(str, policy.bursts))),
            ("mean_completion_time", res.mean_time)]
    rows += [(f"round_cost[{i}]", model.round_duration(p, policy.burst(i)))
             for i in range(1, p.M + 1)]
    if per_state:
        for idx, s in enumerate(markov.all_states(p.M, p.N)[:-1]):
            rows.append((f"T{tuple(s)}".replace(" ", ""), float(res.per_state_times[idx])))
    return rows


def optimize_policy(p: model.SystemParams, method: str):
    """Return (policy, objective, search seconds) for one of the three methods."""
    t0 = time.perf_counter()
    if method == "exact":
        result = pol.optimize_exact(p)
        policy, objective = result.policy, result.objective
    else:
        policy = pol.heuristic_worst_link(p) if method == "worst-link" else pol.heuristic_combined(p)
        objective = markov.mean_completion_time(policy, p).mean_time
    return policy, objective, time.perf_counter() - t0


def bound_report(p: model.SystemParams, policy: pol.Policy, epsilon: float):
    b = markov.lemma1_bound(policy, p, epsilon)
    rows = [("epsilon", epsilon), ("lambda2_magnitude", b.lambda2_magnitude),
            ("eigen_distinct", b.eigen_distinct)]
    if b.eigen_distinct:
        rows += [("G", b.G), ("aleph_bound", b.aleph_bound)]
    rows.append(("aleph_empirical", b.aleph_empirical))
    return rows


def compare_report(p: model.SystemParams, gamma: str = "both", literal_tdd: bool = False):
    try:
        rp = baselines.RRParams(p, baselines.GammaMode.BOTH)
    except ValueError as exc:
        raise ValueError(f"{exc}; the Round-Robin baselines are only defined for "
                         "symmetric channels without ACK erasures") from None
    opt = pol.optimize_exact(p).objective
    wl = markov.mean_completion_time(pol.heuristic_worst_link(p), p).mean_time
    tdd = baselines.rr_tdd(rp, literal=literal_tdd)
    lo, hi = baselines.rr_full_duplex(rp)
    rows = [("pe", rp.pe), ("nc_optimal", opt), ("nc_worst_link", wl), ("rr_tdd", tdd)]
    if gamma in ("lower", "both"):
        rows.append(("rr_full_duplex_lower", lo))
    if gamma in ("upper", "both"):
        rows.append(("rr_full_duplex_upper", hi))
    rows += [(f"ratio_{k}", v / opt) for k, v in list(rows[2:])]
    if rp.pe == 0.0:
        rows.append(("rr_tdd_adjusted", True))
    return rows


# --------------------------------------------------------------------- sweep

SWEEP_COLUMNS = ("variable", "value", "method", "mean_time", "stderr_time",
                 "bound_lower", "bound_upper", "error")


def sweep_values(start: float, stop: float, step: float) -> list[float]:
    if step <= 0 or start > stop:
        raise ValueError("sweep needs step > 0 and start <= stop")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def _sweep_point(kv: dict, variable: str, value: float, method: str,
                 runs: int, seed: int) -> dict:
    row = {"variable": variable, "value": fmt(value), "method": method}
    kv = dict(kv)
    if variable in ("pe", "pe_ack", "t_rt"):
        for k in [k for k in kv if k.startswith(variable + "[")]:
            del kv[k]
    kv[variable] = str(int(value)) if variable in ("M", "N", "g") else repr(value)
    p = model.params_from_mapping(kv)
    if method in ("optimal", "worst_link", "combined", "simulate"):
        if method in ("optimal", "simulate"):
            policy = pol.optimize_exact(p).policy
        elif method == "worst_link":
            policy = pol.heuristic_worst_link(p)
        else:
            policy = pol.heuristic_combined(p)
        for i, n_i in enumerate(policy.bursts, 1):
            row[f"N_{i}"] = str(n_i)
        if method == "simulate":
            s = sim.run_batch(sim.SimConfig(p, policy, runs=runs, seed=seed))
            row["mean_time"] = fmt(s.completion_time.mean)
            row["stderr_time"] = fmt(s.completion_time.stderr)
        else:
            row["mean_time"] = fmt(markov.mean_completion_time(policy, p).mean_time)
    else:
        rp = baselines.RRParams(p)
        if method == "rr_tdd":
            row["mean_time"] = fmt(baselines.rr_tdd(rp))
        else:
            lo, hi = baselines.rr_full_duplex(rp)
            row.update(mean_time=fmt(hi), bound_lower=fmt(lo), bound_upper=fmt(hi))
    return row


def sweep_rows(kv: dict, variable: str, values: Sequence[float], methods: Sequence[str],
               runs: int = 1000, seed: int = DEFAULT_SEED) -> list[dict]:
    """One row per (value, method), ordered by value then by ``METHODS`` order.

    A failing point yields a row whose ``error`` cell holds the message.
    """
    ordered = [m for m in METHODS if m in methods]
    rows = []
    for v in values:
        for m in ordered:
            try:
                rows.append(_sweep_point(kv, variable, v, m, runs, seed))
            except Exception as exc:  # recorded in the CSV, sweep carries on
                rows.append({"variable": variable, "value": fmt(v), "method": m,
                             "error": f"{type(exc).__name__}: {exc}"})
    return rows


def write_csv(rows: list[dict], columns: Sequence[str], out) -> None:
    w = csv.DictWriter(out, fieldnames=list(columns), restval="", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


# ----------------------------------------------------------------------- CLI

def _config_kv(args) -> dict:
    kv = model.parse_config_text(Path(args.config).read_text())
    for item in args.set or ():
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if k in ("pe", "pe_ack", "t_rt"):
            for old in [o for o in kv if o.startswith(k + "[")]:
                del kv[old]
        kv[k] = v
    if getattr(args, "pe", None) is not None:
        for old in [o for o in kv if o.startswith("pe[")]:
            del kv[old]
        kv["pe"] = repr(args.pe)
    return kv


def _params(args) -> model.SystemParams:
    return model.params_from_mapping(_config_kv(args))


def _policy(args, p) -> pol.Policy:
    if args.policy:
        policy = pol.Policy.load(args.policy)
        if policy.M != p.M:
            raise ValueError(f"policy file is for M={policy.M} but config has M={p.M}")
        return policy
    return pol.optimize_exact(p).policy


def cmd_analyze(args, out) -> None:
    p = _params(args)
    policy = _policy(args, p)
    emit(analyze_report(p, policy, args.per_state), out)
    if args.dump_matrix:
        markov.build_matrix(policy, p).to_csv(args.dump_matrix)


def cmd_optimize(args, out) -> None:
    p = _params(args)
    policy, objective, secs = optimize_policy(p, args.method)
    if args.out:
        policy.save(args.out)
    else:
        out.write(policy.to_text())
    emit([("method", args.method), ("objective", objective),
          ("search_time_s", secs), ("policy", " ".join(map(str, policy.bursts)))], out)


def cmd_sweep(args, out) -> None:
    kv = _config_kv(args)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    unknown = set(methods) - set(METHODS)
    if not methods or unknown:
        raise ValueError(f"methods must be a non-empty subset of {', '.join(METHODS)}")
    print(f"# seed: {args.seed}", file=sys.stderr)
    values = sweep_values(args.start, args.stop, args.step)
    rows = sweep_rows(kv, args.variable, values, methods, args.runs, args.seed)
    width = max((int(k[2:]) for r in rows for k in r if k.startswith("N_")), default=0)
    columns = list(SWEEP_COLUMNS[:5]) + [f"N_{i}" for i in range(1, width + 1)] + list(SWEEP_COLUMNS[5:])
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, columns, fh)
    else:
        write_csv(rows, columns, out)


def cmd_bound(args, out) -> None:
    p = _params(args)
    emit(bound_report(p, _policy(args, p), args.epsilon), out)


def cmd_simulate(args, out) -> None:
    p = _params(args)
    policy = _policy(args, p)
    field = FieldSpec.default(args.g_field) if args.g_field else None
    cfg = sim.SimConfig(p, policy, field=field, runs=args.runs, seed=args.seed,
                        ideal_field=args.ideal_field, round_cap=args.round_cap)
    s = sim.run_batch(cfg)
    buf = io.StringIO()
    write_csv([s.csv_row()], sim.CSV_COLUMNS, buf)
    if args.out:
        Path(args.out).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    analytic = markov.mean_completion_time(policy, p).mean_time
    z = (s.completion_time.mean - analytic) / s.completion_time.stderr if s.runs > 1 else float("nan")
    emit([("generator", s.generator), ("seed", s.seed), ("ideal_field", args.ideal_field),
          ("analytic_mean_time", analytic), ("simulated_mean_time", s.completion_time.mean),
          ("z_score", z)], out)


def cmd_compare(args, out) -> None:
    emit(compare_report(_params(args), args.gamma, args.rr_tdd_literal), out)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="rlnc-tdd", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp, needs_policy=False):
        sp.add_argument("--config", required=True, help="flat key = value parameter file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
        sp.add_argument("--pe", type=float, help="common data erasure probability")
        if needs_policy:
            sp.add_argument("--policy", help="policy table file (default: exact optimum)")

    sp = sub.add_parser("analyze", help="mean completion time of a policy")
    common(sp, True)
    sp.add_argument("--per-state", action="store_true")
    sp.add_argument("--dump-matrix", metavar="CSV")
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("optimize", help="compute a burst-length table")
    common(sp)
    sp.add_argument("--method", choices=("exact", "worst-link", "combined"), default="exact")
    sp.add_argument("--out", help="write the policy table here")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", help="CSV of completion times over a parameter range")
    common(sp)
    sp.add_argument("--variable", default="pe")
    sp.add_argument("--start", type=float, required=True)
    sp.add_argument("--stop", type=float, required=True)
    sp.add_argument("--step", type=float, required=True)
    sp.add_argument("--methods", default="optimal,worst_link,combined")
    sp.add_argument("--runs", type=int, default=1000, help="replications for 'simulate'")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("bound", help="rounds needed to finish with probability 1 - epsilon")
    common(sp, True)
    sp.add_argument("--epsilon", type=float, default=0.01)
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("simulate", help="Monte Carlo batch with real or ideal coding")
    common(sp, True)
    sp.add_argument("--runs", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--ideal-field", action=argparse.BooleanOptionalAction, default=True)
    sp.add_argument("--g-field", type=int, help="field size in bits (default: config g)")
    sp.add_argument("--round-cap", type=int, default=sim.DEFAULT_ROUND_CAP)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("compare", help="network coding against Round-Robin baselines")
    common(sp)
    sp.add_argument("--gamma", choices=("lower", "upper", "both"), default="both")
    sp.add_argument("--rr-tdd-literal", action="store_true",
                    help="use E[max X] passes instead of 1 + E[max X]")
    sp.set_defaults(func=cmd_compare)
    return ap


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        args.func(args, out)
    except (ValueError, ArithmeticError, sim.RoundCapExceeded, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
