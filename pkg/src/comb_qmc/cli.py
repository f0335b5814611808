"""Command-line interface.

Subcommands: params, solve, evaluate, correlate, sweep, verify.  Flags
override values from an optional JSON config file.  Tabular output is CSV
with a stable column order and 17 significant digits; JSON carries the
same payloads structured.  Files are written atomically (temp + rename).
Exit status is 0 when all requested checks pass, 1 when verify fails a
criterion, 2 on invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile

from . import acceptance
from .boundary_solver import BoundaryField, branch_report_json, enumerate_branches
from .ising_kernels import ModelParams, model_params
from .qmc_engine import Observable, clustering_report, evaluate_report


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def _emit_csv(header: list[str], rows: list[list]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buffer.getvalue()


def _write_output(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    directory = os.path.dirname(os.path.abspath(output))
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".comb-qmc-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp_path, output)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def _emit(payload, header, rows, fmt: str, output: str | None) -> None:
    if fmt == "json":
        _write_output(json.dumps(payload, indent=2, sort_keys=True), output)
    else:
        _write_output(_emit_csv(header, rows), output)


def _parse_grid(spec: str) -> list[float]:
    try:
        parts = [float(x) for x in spec.split(":")]
    except ValueError:
        parts = []
    if len(parts) != 3:
        raise ValueError(f"grid spec must be a:b:step, got {spec!r}")
    lo, hi, step = parts
    if step <= 0 or hi < lo:
        raise ValueError(f"grid spec must have step > 0 and b >= a, got {spec!r}")
    values = []
    count = 0
    while True:
        value = lo + count * step
        if value > hi + 1e-9:
            break
        values.append(round(value, 12))
        count += 1
    return values


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    with open(path) as handle:
        data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    return data


def _setting(args, config: dict, name: str, default=None):
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _require_params(args, config) -> ModelParams:
    beta = _setting(args, config, "beta")
    coupling = _setting(args, config, "J")
    if beta is None or coupling is None:
        raise ValueError("--beta and --J are required")
    return model_params(float(beta), float(coupling))


def _cmd_params(args, config) -> int:
    p = _require_params(args, config)
    fmt = _setting(args, config, "format", "csv")
    _emit(p.to_json(), list(ModelParams.CSV_COLUMNS), [p.csv_row()],
          fmt, _setting(args, config, "output"))
    return 0


def _cmd_solve(args, config) -> int:
    p = _require_params(args, config)
    branches = enumerate_branches(p)
    fmt = _setting(args, config, "format", "json")
    header = ["beta", "J", "tag", "h11", "h12", "h21", "h22",
              "satisfies_l1", "satisfies_l2", "positive", "residual_norm"]
    rows = []
    for b in branches:
        h = b.to_json()["h"]
        rows.append([p.beta, p.J, b.tag.value, h[0], h[1], h[2], h[3],
                     b.satisfies_l1, b.satisfies_l2, b.positive, b.residual_norm])
    _emit(branch_report_json(p, branches), header, rows,
          fmt, _setting(args, config, "output"))
    return 0


def _cmd_evaluate(args, config) -> int:
    p = _require_params(args, config)
    observable_path = _setting(args, config, "observable")
    if observable_path is None:
        raise ValueError("--observable FILE is required for evaluate")
    with open(observable_path) as handle:
        a = Observable.from_json(json.load(handle))
    n = _setting(args, config, "n")
    n = a.max_level if n is None else int(n)
    report = evaluate_report(a, n, p, with_oracle=bool(_setting(args, config, "oracle", False)))
    fmt = _setting(args, config, "format", "json")
    header = ["beta", "J", "n", "iterative_re", "iterative_im",
              "product_re", "product_im", "oracle_re", "oracle_im",
              "max_cross_residual"]
    vo = report.value_oracle
    rows = [[p.beta, p.J, n,
             report.value_iterative.real, report.value_iterative.imag,
             report.value_product.real, report.value_product.imag,
             None if vo is None else vo.real, None if vo is None else vo.imag,
             report.max_cross_residual]]
    _emit(report.to_json(), header, rows, fmt, _setting(args, config, "output"))
    return 0


def _cmd_correlate(args, config) -> int:
    p = _require_params(args, config)
    d_max = int(_setting(args, config, "d-max", 6))
    report = clustering_report(p, d_max=d_max)
    fmt = _setting(args, config, "format", "csv")
    header = ["d", "correlation", "defect", "ratio"]
    rows = []
    for i in range(d_max):
        ratio = report.ratios[i - 1] if 1 <= i <= len(report.ratios) else None
        rows.append([i + 1, report.correlations[i], report.defects[i], ratio])
    _emit(report.to_json(), header, rows, fmt, _setting(args, config, "output"))
    return 0


def _cmd_sweep(args, config) -> int:
    grid_beta = _setting(args, config, "grid-beta")
    grid_j = _setting(args, config, "grid-J")
    if grid_beta is None or grid_j is None:
        raise ValueError("--grid-beta and --grid-J are required for sweep")
    betas = _parse_grid(grid_beta)
    couplings = _parse_grid(grid_j)
    d_max = int(_setting(args, config, "d-max", 6))

    header = ["beta", "J", "theta", "tau1", "tau2", "tau3", "alpha",
              "disordered_admissible", "ordered_exists", "ordered_admissible",
              "lambda_star", "matched_candidate"]
    rows = []
    payload = []
    for beta in betas:
        for coupling in couplings:
            p = model_params(beta, coupling)
            branches = enumerate_branches(p)
            disordered = branches[0]
            ordered = branches[1] if len(branches) > 1 else None
            report = clustering_report(p, d_max=d_max)
            row = [p.beta, p.J, p.theta, p.tau1, p.tau2, p.tau3, p.alpha,
                   disordered.admissible,
                   ordered is not None,
                   bool(ordered.admissible) if ordered is not None else False,
                   report.lambda_star, report.matched_candidate]
            rows.append(row)
            payload.append(dict(zip(header, row)))
    fmt = _setting(args, config, "format", "csv")
    _emit(payload, header, rows, fmt, _setting(args, config, "output"))
    return 0


def _cmd_verify(args, config) -> int:
    max_n = int(_setting(args, config, "n", 3))
    results = acceptance.run_all(max_n=max_n)
    for result in results:
        print(result.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comb-qmc",
        description="Quantum Markov chain states of the comb-graph Ising model",
    )
    parser.add_argument("--config", help="JSON config file; flags override it")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_model=True):
        if with_model:
            p.add_argument("--beta", type=float, help="inverse temperature, >= 0")
            p.add_argument("--J", type=float, help="transverse coupling, >= 0")
        p.add_argument("--output", help="write here instead of stdout (atomic)")
        p.add_argument("--format", choices=["json", "csv"], help="output format")

    p_params = sub.add_parser("params", help="model scalars at one coupling point")
    add_common(p_params)

    p_solve = sub.add_parser("solve", help="boundary fixed-point branches")
    add_common(p_solve)

    p_eval = sub.add_parser("evaluate", help="evaluate the state on an observable")
    add_common(p_eval)
    p_eval.add_argument("--n", type=int, help="ball radius (defaults to the observable's)")
    p_eval.add_argument("--observable", help="observable JSON file")
    p_eval.add_argument("--oracle", action="store_true", default=None,
                        help="also run the brute-force oracle")

    p_corr = sub.add_parser("correlate", help="spine two-point decay table")
    add_common(p_corr)
    p_corr.add_argument("--d-max", type=int, help="largest spine distance (default 6)")

    p_sweep = sub.add_parser("sweep", help="coupling-grid summary table")
    add_common(p_sweep, with_model=False)
    p_sweep.add_argument("--grid-beta", help="beta grid as a:b:step")
    p_sweep.add_argument("--grid-J", help="J grid as a:b:step")
    p_sweep.add_argument("--d-max", type=int, help="clustering depth per point")

    p_verify = sub.add_parser("verify", help="run the acceptance battery")
    p_verify.add_argument("--n", type=int, help="deepest volume exercised (default 3)")

    return parser


COMMANDS = {
    "params": _cmd_params,
    "solve": _cmd_solve,
    "evaluate": _cmd_evaluate,
    "correlate": _cmd_correlate,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        return COMMANDS[args.command](args, config)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
