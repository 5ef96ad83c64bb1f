"""Experiment runner CLI.

Subcommands:
    run <spec>            execute an experiment spec file
    verify <suite>        run a named verification suite end to end
    kernel --t --m-max    exact half-line kernel table to CSV (+ figure)
    oracle --N --d        exhaustive small-scale law, JSON records

Exit codes: 0 ok, 2 parse error, 3 precondition violation, 4 resource gate,
5 horizon-overrun rate exceeded.  Outputs are written atomically
(temp + rename) and every JSON payload embeds the fully resolved spec,
including defaulted values and the seed, so any run can be reproduced
bit-exactly from its own artifact.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_PRECONDITION = 3
EXIT_RESOURCE = 4
EXIT_OVERRUN = 5


def _atomic_write_text(path: str, text: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(payload: dict, json_path: str | None):
    text = json.dumps(payload, sort_keys=True, indent=1)
    if json_path:
        _atomic_write_text(json_path, text)
        print(f"wrote {json_path}")
    else:
        print(text)


def _cmd_run(args) -> int:
    from . import engine, estimators
    from .runspec import PreconditionError, SpecError, parse_spec

    try:
        spec = parse_spec(args.spec)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION

    payload = {"resolved_spec": spec.resolved(), "records": []}
    cfg = spec.config
    p = spec.params
    try:
        if spec.kind in ("window_hit", "tau_hist", "green"):
            x = p["x"]
            panel = engine.run_lerw_panel(cfg, 0, cfg.replica_count, targets=[x])
            if spec.kind == "window_hit":
                est = estimators.estimate_window_hit(panel, cfg, x, 0, p["n"])
                payload["records"].append(est.record())
            elif spec.kind == "tau_hist":
                hist = estimators.estimate_tau_histogram(
                    panel, cfg, x, 0, [int(e) for e in p["n_grid"]]
                )
                payload["records"].append({
                    "quantity": "tau_histogram", "x": list(hist.x),
                    "bin_edges": list(hist.bin_edges),
                    "counts": list(hist.counts), "miss": hist.miss,
                    "replicas": hist.replicas, "bias_bound": hist.bias_bound,
                    "seed": hist.seed, "method": "mc",
                })
            else:
                rep = estimators.estimate_green(panel, cfg, x, 0)
                payload["records"].append(rep.record())
        elif spec.kind == "annealed":
            from . import halfline
            from .panels import _position_horizon

            x = p["x"]
            ts = p.get("t_grid", [p["t"]])
            panel = engine.run_lerw_panel(cfg, 0, cfg.replica_count, targets=[x])
            half = cfg.replica_count // 2
            jump = engine.direct_jump_positions(cfg, half, cfg.replica_count, ts)
            for ti, t in enumerate(ts):
                row = halfline.q_row(0, float(t), _position_horizon(float(t), 1e-12))
                rb = estimators.estimate_annealed_rao_blackwell(
                    panel, cfg, x, 0, t, row, replica_slice=slice(0, half)
                )
                direct = estimators.estimate_annealed_direct(
                    panel, cfg, x, 0, t, jump[:, ti],
                    replica_slice=slice(half, None),
                )
                payload["records"] += [rb.record(), direct.record()]
        elif spec.kind == "displacement":
            from . import report
            from .halfline import q_row
            from .panels import _position_horizon

            ts = p["t_grid"]
            horizon = max(_position_horizon(float(t), 1e-6) for t in ts)
            rows = np.zeros((len(ts), horizon + 1))
            for i, t in enumerate(ts):
                r = q_row(0, float(t), horizon)
                rows[i, : len(r)] = r
            panel = engine.run_lerw_panel(
                cfg, 0, cfg.replica_count, kernel_rows=rows
            )
            rep = estimators.estimate_displacement_exponent(panel, cfg, ts)
            payload["records"].append({
                "quantity": "displacement", "method": "rao_blackwell",
                "t_grid": list(rep.t_values), "mean_disp": list(rep.mean_disp),
                "value": rep.slope, "ci_lo": rep.slope_ci[0],
                "ci_hi": rep.slope_ci[1], "r2": rep.r2,
                "control_slope": rep.control_slope,
                "replicas": rep.replicas, "seed": cfg.seed,
                "bias_bound": cfg.bias_bound(),
            })
            if spec.output_csv:
                from .report import write_collapse_csv

                write_collapse_csv(
                    spec.output_csv,
                    [(float(np.log(t)), m, m - 1.96 * s, m + 1.96 * s)
                     for t, m, s in zip(rep.t_values, rep.mean_disp, rep.se)],
                )
                report.render_displacement(
                    os.path.splitext(spec.output_csv)[0] + ".png", rep
                )
        elif spec.kind == "kernel_table":
            from . import report
            from .halfline import build_kernel_table

            tab = build_kernel_table(p["t"], p["m_max"], p.get("tol", 1e-12))
            payload["records"].append({
                "quantity": "kernel_table", "t": tab.t, "a_max": tab.a_max,
                "m_max": tab.m_max, "k_max": tab.k_max,
                "truncation_error": tab.truncation_error, "method": "exact",
            })
            if spec.output_csv:
                tab.to_csv(spec.output_csv)
                report.render_kernel_table(
                    os.path.splitext(spec.output_csv)[0] + ".png", tab
                )
        elif spec.kind == "oracle":
            from .oracle import enumerate_le_law

            law = enumerate_le_law(
                p["functional_n"], cfg.d, p["functional"],
                p.get("x"), (1, 2),
            )
            payload["records"].append({
                "quantity": f"oracle_{law.functional}", "method": "exact",
                "horizon": law.horizon, "d": law.d, "total": law.total,
                "support": {str(k): v for k, v in law.support.items()},
                "seed": cfg.seed, "bias_bound": 0.0,
            })
        elif spec.kind == "envelope":
            return _run_envelope(spec, payload)
    except estimators.ConfigurationError as exc:
        msg = str(exc)
        print(f"configuration error: {msg}", file=sys.stderr)
        return EXIT_OVERRUN if "overrun" in msg or "resolve" in msg else EXIT_PRECONDITION
    except (ResourceWarning,) as exc:
        print(f"resource gate: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except Exception as exc:  # resource gate errors carry their own type
        from .engine import ResourceGateError

        if isinstance(exc, ResourceGateError):
            print(f"resource gate: {exc}", file=sys.stderr)
            return EXIT_RESOURCE
        raise
    _emit(payload, spec.output_json)
    return EXIT_OK


def _run_envelope(spec, payload) -> int:
    from . import bounds, engine, estimators, report

    cfg = spec.config
    p = spec.params
    x_max = int(p.get("x_max", 4))
    targets = [(k,) + (0,) * (cfg.d - 1) for k in range(2, x_max + 1)]
    panel = engine.run_lerw_panel(cfg, 0, cfg.replica_count, targets=targets)
    import math

    ests = []
    for idx, x in enumerate(targets):
        k = abs(x[0])
        n_cap = math.floor((cfg.r_in / 2.0) ** 2 / 2.0)
        ns = sorted(set(int(round(v)) for v in np.exp(np.linspace(
            math.log(max(1, k * k // 4)), math.log(min(8 * k * k, n_cap)), 8))))
        for n in ns:
            ests.append(estimators.estimate_window_hit(panel, cfg, x, idx, n))
    tmap = {tuple(t): i for i, t in enumerate(targets)}

    def lower_est(x, n, lo, hi):
        return estimators.estimate_window_hit(
            panel, cfg, x, tmap[tuple(x)], n, window=(lo, hi))

    fit = bounds.fit_thm1_envelopes(ests, cfg.d, lower_window_estimator=lower_est)
    payload["records"].append({
        "quantity": "envelope_fit", "theorem": fit.theorem,
        "constants": fit.constants, "feasible": fit.feasible,
        "collapse_slope": fit.collapse_slope, "collapse_r2": fit.collapse_r2,
        "seed": cfg.seed, "method": "fit",
    })
    if spec.output_csv:
        from .lattice import norm

        rows = [
            (norm(e.x) ** 2 / e.n, e.estimate * e.n ** (cfg.d / 2),
             e.ci95[0] * e.n ** (cfg.d / 2), e.ci95[1] * e.n ** (cfg.d / 2))
            for e in ests
        ]
        report.write_collapse_csv(spec.output_csv, rows)
        report.render_collapse(
            os.path.splitext(spec.output_csv)[0] + ".png", rows,
            xlabel="|x|^2 / n", title="window-law scaling collapse",
            slope=fit.collapse_slope,
        )
    _emit(payload, spec.output_json)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .suites import SUITES, run_suite, suite_payload

    if args.suite not in SUITES:
        print(f"unknown suite {args.suite!r}; available: {', '.join(sorted(SUITES))}",
              file=sys.stderr)
        return EXIT_PARSE
    results = run_suite(args.suite, scale=args.scale)
    all_ok = True
    for r in results:
        mark = "PASS" if r.passed else "FAIL"
        print(f"[{mark}] {r.name}: {r.detail}")
        all_ok &= r.passed
    if args.payload_out:
        _atomic_write_text(args.payload_out, suite_payload(results))
    return EXIT_OK if all_ok else 1


def _cmd_kernel(args) -> int:
    from .halfline import build_kernel_table
    from .report import render_kernel_table

    if not 0 < args.tol <= 1e-6:
        print("tol must lie in (0, 1e-6]", file=sys.stderr)
        return EXIT_PRECONDITION
    tab = build_kernel_table(args.t, args.m_max, args.tol)
    out = args.csv or f"kernel_t{args.t:g}.csv"
    tab.to_csv(out)
    render_kernel_table(os.path.splitext(out)[0] + ".png", tab)
    print(f"wrote {out} (k_max={tab.k_max}, truncation_error={tab.truncation_error:g})")
    return EXIT_OK


def _cmd_oracle(args) -> int:
    from .engine import ResourceGateError
    from .oracle import FUNCTIONALS, enumerate_le_law

    if args.functional not in FUNCTIONALS:
        print(f"functional must be one of {FUNCTIONALS}", file=sys.stderr)
        return EXIT_PARSE
    try:
        law = enumerate_le_law(args.N, args.d, args.functional)
    except ResourceGateError as exc:
        print(f"resource gate: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    payload = {
        "quantity": f"oracle_{law.functional}", "method": "exact",
        "horizon": law.horizon, "d": law.d, "total": law.total,
        "support": {str(k): v for k, v in sorted(law.support.items(), key=str)},
    }
    _emit(payload, args.json)
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="lerwlab",
        description="simulation laboratory for the high-dimensional "
        "loop-erased walk and the walk on its trace",
    )
    sub = ap.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="execute an experiment spec file")
    p_run.add_argument("spec")
    p_run.set_defaults(fn=_cmd_run)

    p_ver = sub.add_parser("verify", help="run a named verification suite")
    p_ver.add_argument("suite")
    p_ver.add_argument("--scale", choices=("desk", "pilot"), default="desk")
    p_ver.add_argument("--payload-out", default=None,
                       help="write the canonical JSON payload here")
    p_ver.set_defaults(fn=_cmd_verify)

    p_k = sub.add_parser("kernel", help="exact half-line kernel table")
    p_k.add_argument("--t", type=float, required=True)
    p_k.add_argument("--m-max", type=int, required=True)
    p_k.add_argument("--tol", type=float, default=1e-12)
    p_k.add_argument("--csv", default=None)
    p_k.set_defaults(fn=_cmd_kernel)

    p_o = sub.add_parser("oracle", help="exhaustive small-scale law")
    p_o.add_argument("--N", type=int, required=True)
    p_o.add_argument("--d", type=int, required=True)
    p_o.add_argument("--functional", default="endpoint")
    p_o.add_argument("--json", default=None)
    p_o.set_defaults(fn=_cmd_oracle)

    args = ap.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
