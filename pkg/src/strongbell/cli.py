"""Command-line front end.

Commands: ``evaluate``, ``simulate``, ``verify-theorem``, ``optimize``,
``compare``. Options can also be supplied through ``--config FILE`` with one
``key = value`` pair per line (flag names without the leading dashes,
dashes as underscores); explicit flags win over the file, the file wins over
built-in defaults. Every output embeds the fully resolved configuration.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .core import (
    CHSH_DEFAULT_ANGLES,
    AngleConfig,
    OutcomePdf,
    three_axes_config,
)
from .errors import InvalidInputError, StrongbellError
from .inequalities import (
    INEQUALITY_NAMES,
    LhvSource,
    QuantumSource,
    TableSource,
    estimate_from_batches,
    evaluate_by_name,
    statistic_for,
)
from .lhv import BUILTIN_MODELS, CountTally, make_model, simulate_tallies
from .optimizer import OBJECTIVES, SearchSpec, optimize
from .quantum import QuantumModel
from .reporting import (
    SCHEMA_VERSION,
    report_record,
    resolve_output_path,
    write_record,
)
from .theorem import corrupted_z, verify_theorem

_BASE = {"seed": 0, "format": "json", "out": None}
_APPARATUS = {"eta": 1.0, "omega": math.pi, "theta": math.pi}
_SOURCE = {"source": "quantum", "method": "quadrature", "nodes": 4096,
           "samples": 1_000_000, "workers": 1, "model_seed": 0, "model_terms": 3}
_ANGLES = {"angles": None, "phi": 22.5, "sigma": 3.0}

_DEFAULTS = {
    "evaluate": {**_BASE, **_APPARATUS, **_SOURCE, **_ANGLES, "inequality": None},
    "simulate": {**_BASE, **_ANGLES, "inequality": "ardehali29", "model": "sign",
                 "emissions": 1_000_000, "batches": 64, "workers": 1,
                 "model_seed": 0, "model_terms": 3},
    "verify-theorem": {**_BASE, "grid": "0,0.5,1,2", "random": 100_000,
                       "case_samples": 10_000, "corrupt_z": False},
    "optimize": {**_BASE, **_APPARATUS, **_SOURCE, "objective": "ardehali29",
                 "grid_step": 5.0, "refine": 6},
    "compare": {**_BASE, **_APPARATUS},
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strongbell",
        description="Strong Bell inequalities for two-channel polarizer experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None,
                       help="key=value file supplying defaults for this command")
        p.add_argument("--out", type=str, help="output path (relative paths go "
                       "to $STRONGBELL_OUTPUT_DIR)")
        p.add_argument("--format", choices=["json", "csv"], dest="format")
        p.add_argument("--seed", type=int)
        p.add_argument("--eta", type=float, help="detector efficiency in (0, 1]")
        p.add_argument("--omega", type=float, help="aperture solid angle, steradians")
        p.add_argument("--theta", type=float, help="detector separation angle, radians")

    def add_source(p: argparse.ArgumentParser) -> None:
        p.add_argument("--source", type=str,
                       help="quantum | lhv:<model> | table:<file.json>")
        p.add_argument("--method", choices=["quadrature", "mc"])
        p.add_argument("--nodes", type=int, help="quadrature nodes")
        p.add_argument("--samples", type=int, help="Monte Carlo samples per pair")
        p.add_argument("--workers", type=int)
        p.add_argument("--model-seed", type=int, dest="model_seed")
        p.add_argument("--model-terms", type=int, dest="model_terms")

    def add_angles(p: argparse.ArgumentParser) -> None:
        p.add_argument("--angles", type=str,
                       help="comma-separated axes: 5 values (a,b,a',b',r) or 4 for chsh")
        p.add_argument("--phi", type=float, help="CH comparator angle, degrees")
        p.add_argument("--sigma", type=float,
                       help="standard errors required to call a violation")

    p_eval = sub.add_parser("evaluate", help="evaluate one inequality")
    p_eval.add_argument("--inequality", choices=list(INEQUALITY_NAMES), required=True)
    add_source(p_eval)
    add_angles(p_eval)
    add_common(p_eval)

    p_sim = sub.add_parser("simulate", help="finite-N coincidence counting")
    p_sim.add_argument("--inequality", choices=list(INEQUALITY_NAMES))
    p_sim.add_argument("--model", choices=sorted(BUILTIN_MODELS))
    p_sim.add_argument("--emissions", type=int)
    p_sim.add_argument("--batches", type=int)
    p_sim.add_argument("--workers", type=int)
    p_sim.add_argument("--model-seed", type=int, dest="model_seed")
    p_sim.add_argument("--model-terms", type=int, dest="model_terms")
    add_angles(p_sim)
    add_common(p_sim)

    p_ver = sub.add_parser("verify-theorem", help="brute-force the box inequality")
    p_ver.add_argument("--grid", type=str, help="comma-separated U/V values")
    p_ver.add_argument("--random", type=int, help="random interior points")
    p_ver.add_argument("--case-samples", type=int, dest="case_samples")
    p_ver.add_argument("--corrupt-z", action="store_const", const=True,
                       dest="corrupt_z", help="fail-injection self test")
    add_common(p_ver)

    p_opt = sub.add_parser("optimize", help="grid search for the largest violation")
    p_opt.add_argument("--objective", choices=list(OBJECTIVES))
    p_opt.add_argument("--grid-step", type=float, dest="grid_step")
    p_opt.add_argument("--refine", type=int)
    add_source(p_opt)
    add_common(p_opt)

    p_cmp = sub.add_parser("compare", help="quantum violations of every inequality")
    add_common(p_cmp)

    return parser


def _load_config_file(path: str) -> dict:
    values = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidInputError(f"config line is not key=value: {raw!r}")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _coerce(value, default):
    if not isinstance(value, str):
        return value
    if isinstance(default, bool):
        if value.lower() in ("true", "1", "yes"):
            return True
        if value.lower() in ("false", "0", "no"):
            return False
        raise InvalidInputError(f"expected a boolean, got {value!r}")
    if isinstance(default, int):
        return int(value)
    if isinstance(default, float):
        return float(value)
    return value


def _resolve(args: argparse.Namespace) -> dict:
    """flag > config file > built-in default, with the full result echoed."""
    defaults = _DEFAULTS[args.command]
    file_values = _load_config_file(args.config) if args.config else {}
    resolved = {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_values:
            resolved[key] = _coerce(file_values[key], default)
        else:
            resolved[key] = default
    return resolved


def _parse_angles(text: str | None, n: int, fallback: tuple) -> tuple:
    if text is None:
        return fallback
    parts = [float(x) for x in text.split(",") if x.strip() != ""]
    if len(parts) != n:
        raise InvalidInputError(f"--angles needs {n} comma-separated values, got {len(parts)}")
    return tuple(parts)


def _make_source(cfg: dict):
    spec = cfg["source"]
    if spec == "quantum":
        model = QuantumModel.from_omega(eta=cfg["eta"], omega=cfg["omega"],
                                        theta=cfg["theta"])
        return QuantumSource(model)
    if spec.startswith("lhv:"):
        model = _make_lhv_model(spec[4:], cfg)
        return LhvSource(model, method=cfg["method"], n_nodes=cfg["nodes"],
                         n_samples=cfg["samples"], seed=cfg["seed"],
                         n_workers=cfg["workers"])
    if spec.startswith("table:"):
        raw = json.loads(Path(spec[6:]).read_text(encoding="utf-8"))
        entries = {float(k): OutcomePdf(**v) for k, v in raw.items()}
        return TableSource(entries)
    raise InvalidInputError(
        f"unknown source {spec!r}; use quantum, lhv:<model> or table:<file>"
    )


def _make_lhv_model(name: str, cfg: dict):
    if name == "random_fourier":
        return make_model(name, seed=cfg["model_seed"], n_terms=cfg["model_terms"])
    return make_model(name)


def _angle_inputs(cfg: dict, inequality: str):
    config = None
    chsh_angles = None
    if inequality in ("weak17", "strong23"):
        vals = _parse_angles(cfg["angles"], 5, three_axes_config().as_tuple())
        config = AngleConfig(*vals)
    elif inequality == "chsh":
        chsh_angles = _parse_angles(cfg["angles"], 4, CHSH_DEFAULT_ANGLES)
    return config, chsh_angles


def _default_out(cfg: dict, stem: str) -> Path:
    name = cfg["out"] or f"{stem}.{cfg['format']}"
    return resolve_output_path(name)


def _cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    source = _make_source(cfg)
    config, chsh_angles = _angle_inputs(cfg, cfg["inequality"])
    report = evaluate_by_name(cfg["inequality"], source, config=config,
                              phi_deg=cfg["phi"], chsh_angles=chsh_angles,
                              sigma=cfg["sigma"])
    echo = {**cfg, "resolved_source": source.describe()}
    record = report_record("evaluate", report, echo)
    path = _default_out(cfg, f"evaluate_{cfg['inequality']}")
    write_record(path, record, cfg["format"])
    print(f"{report.name}: lhs = {report.lhs:.9g} (bound {report.bound}, "
          f"violated = {report.violated}) -> {path}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    config, chsh_angles = _angle_inputs(cfg, cfg["inequality"])
    spec = statistic_for(cfg["inequality"], config=config, phi_deg=cfg["phi"],
                         chsh_angles=chsh_angles)
    model = _make_lhv_model(cfg["model"], cfg)
    batches = simulate_tallies(model, list(spec.pairs), cfg["emissions"],
                               cfg["seed"], n_batches=cfg["batches"],
                               n_workers=cfg["workers"])
    tallies = [CountTally.merge(a, b, parts, cfg["emissions"])
               for (a, b), parts in zip(spec.pairs, batches)]
    report = estimate_from_batches(spec, batches, cfg["emissions"],
                                   sigma=cfg["sigma"])

    echo = {**cfg, "resolved_model": model.describe()}
    record = report_record("simulate", report, echo)
    path = _default_out(cfg, f"simulate_{cfg['inequality']}")
    write_record(path, record, cfg["format"])

    counts_rows = [{
        "pair_index": i, "a": t.a, "b": t.b, "n_emitted": t.n_emitted,
        "n_pp": t.n_pp, "n_pm": t.n_pm, "n_mp": t.n_mp, "n_mm": t.n_mm,
        "n1_plus": t.n1_plus, "n1_minus": t.n1_minus,
        "n2_plus": t.n2_plus, "n2_minus": t.n2_minus,
        "seed": cfg["seed"],
    } for i, t in enumerate(tallies)]
    counts_path = path.with_name(path.stem + ".counts.csv")
    write_record(counts_path, counts_rows, "csv")
    print(f"{report.name}: estimate = {report.lhs:.9g} +- {report.stderr:.3g} "
          f"(N = {cfg['emissions']}) -> {path}, counts -> {counts_path}")
    return 0


def _cmd_verify_theorem(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    grid = tuple(float(x) for x in str(cfg["grid"]).split(",") if x.strip() != "")
    result = verify_theorem(grid=grid, n_random=cfg["random"],
                            n_case_samples=cfg["case_samples"], seed=cfg["seed"],
                            z_fn=corrupted_z if cfg["corrupt_z"] else None)
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": "verify-theorem",
        "passed": result.passed,
        "summary": result.summary(),
        "n_vertex_checks": result.n_vertex_checks,
        "n_random_checks": result.n_random_checks,
        "n_case_checks": result.n_case_checks,
        "min_vertex_z": result.min_vertex_z,
        "min_random_z": result.min_random_z,
        "max_multilinearity_defect": result.max_multilinearity_defect,
        "max_case_excess": result.max_case_excess,
        "cases_seen": list(result.cases_seen),
        "counterexamples": result.counterexamples,
        "config": cfg,
    }
    path = _default_out(cfg, "verify_theorem")
    write_record(path, record, cfg["format"])
    print(result.summary() + f" -> {path}")
    return 0 if result.passed else 1


def _cmd_optimize(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    if cfg["method"] == "mc":
        raise InvalidInputError("optimization requires an analytic source; use "
                                "--method quadrature")
    source = _make_source(cfg)
    spec = SearchSpec(objective=cfg["objective"], source=source,
                      grid_step=cfg["grid_step"], refine_iterations=cfg["refine"])
    result = optimize(spec)
    echo = {**cfg, "resolved_source": source.describe()}
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": "optimize",
        "objective": cfg["objective"],
        "optimum": dict(zip(("a", "b", "a_prime", "b_prime", "r"),
                            result.config.as_tuple())),
        "objective_value": result.objective_value,
        "report": report_record("optimize", result.report, echo),
        "trace": result.trace,
        "config": echo,
    }
    path = _default_out(cfg, f"optimize_{cfg['objective']}")
    if cfg["format"] == "csv":
        rows = [{
            "stage": t["stage"], "step": t["step"],
            "a": t["config"][0], "b": t["config"][1], "a_prime": t["config"][2],
            "b_prime": t["config"][3], "r": t["config"][4], "value": t["value"],
        } for t in result.trace]
        write_record(path, rows, "csv")
    else:
        write_record(path, record, "json")
    print(f"optimize {cfg['objective']}: value = {result.objective_value:.9g} at "
          f"{result.config.as_tuple()} -> {path}")
    return 0


# Distinct detection-probability settings each test needs, where the
# inequality's construction pins that number.
_SETTINGS_REQUIRED = {"ardehali29": 2, "rt32": 2, "fc31": 3, "ch30": 5, "chsh": 5}


def _cmd_compare(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    source = QuantumSource(QuantumModel.from_omega(
        eta=cfg["eta"], omega=cfg["omega"], theta=cfg["theta"]))
    rows = []
    reports = {}
    for name in ("ardehali29", "rt32", "strong23", "weak17", "ch30", "fc31", "chsh"):
        rep = evaluate_by_name(name, source)
        reports[name] = rep
        rows.append({
            "inequality": name,
            "lhs": rep.lhs,
            "bound": rep.bound,
            "direction": rep.direction,
            "violated": rep.violated,
            "violation_factor": rep.violation_factor,
            "settings_required": _SETTINGS_REQUIRED.get(name),
        })
    f_new = reports["ardehali29"].violation_factor
    f_old = reports["chsh"].violation_factor
    improvements = {
        "baseline": "chsh",
        "factor_new": f_new,
        "factor_old": f_old,
        # Two conventions: ratio of bound-excesses and ratio of factors.
        "excess_over_bound_pct": ((f_new - 1.0) / (f_old - 1.0) - 1.0) * 100.0,
        "factor_ratio_pct": (f_new / f_old - 1.0) * 100.0,
    }
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": "compare",
        "rows": rows,
        "improvements": improvements,
        "config": {**cfg, "resolved_source": source.describe()},
    }
    path = _default_out(cfg, "compare")
    if cfg["format"] == "csv":
        csv_rows = []
        for row in rows:
            extra = improvements if row["inequality"] == "ardehali29" else {}
            csv_rows.append({**row,
                             "excess_over_bound_pct": extra.get("excess_over_bound_pct"),
                             "factor_ratio_pct": extra.get("factor_ratio_pct")})
        write_record(path, csv_rows, "csv")
    else:
        write_record(path, record, "json")
    print(f"compare: improvement {improvements['excess_over_bound_pct']:.3f}% "
          f"(excess convention) / {improvements['factor_ratio_pct']:.3f}% "
          f"(factor convention) -> {path}")
    return 0


_HANDLERS = {
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
    "verify-theorem": _cmd_verify_theorem,
    "optimize": _cmd_optimize,
    "compare": _cmd_compare,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except StrongbellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
