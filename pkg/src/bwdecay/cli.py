"""Command-line front end.

    bwdecay amp        [--config run.json] [--out FILE] [--format csv|json]
    bwdecay compare    ...
    bwdecay casestudy  taylor|scully ...
    bwdecay scan       --param E_R|Gamma --values v1,v2,... [--threads N]
    bwdecay selftest

Exit codes: 0 success, 1 invalid input (config, domain, admissibility,
branch cut), 2 numerical failure.  Errors are reported as one line on
stderr; nothing is written to ``--out`` unless the whole run succeeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Literal, Optional, Union

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict, Field

from . import __version__
from . import formfactor as ff
from .amplitudes import amplitude_series
from .analysis import deviation_report
from .casestudies import (
    ScullyParams,
    TaylorParams,
    causality_scan,
    scully_profile,
    taylor_causality,
    taylor_profile,
)
from .core import (
    MODEL_TAGS,
    AmplitudeSeries,
    EngineError,
    ErrorKind,
    Resonance,
    TimeGrid,
    ValidationError,
    as_complex,
)
from .quadrature import QuadratureConfig

AMP_HEADER = ["t", "model", "re", "im", "abs2", "est_error"]
COMPARE_HEADER = AMP_HEADER + ["rel_dev", "ratio_re", "ratio_im"]
CASE_HEADER = ["tau", "model", "re", "im", "abs2", "est_error"]
SCAN_HEADER = ["param", "value"] + AMP_HEADER
SCAN_PARAMS = ("E_R", "Gamma")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


# ------------------------------------------------------------------ config


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", strict=True)


ComplexIn = Union[float, tuple[float, float]]


class ResonanceSection(_Strict):
    E_R: float = 1.0
    Gamma: float = 0.1


class TimeGridSection(_Strict):
    start: float = 1.0
    stop: float = 1000.0
    points: int = 61
    spacing: Literal["linear", "logarithmic"] = "logarithmic"


class TauGridSection(_Strict):
    """Linear retarded-time grid; tau = 0 must not be a sample."""

    start: float
    stop: float
    points: int = Field(ge=2)


class QuadratureSection(_Strict):
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 40
    max_evals: int = 1_000_000


class OutputSection(_Strict):
    format: Literal["csv", "json"] = "csv"
    path: Optional[str] = None


class TaylorSection(_Strict):
    prefactor: ComplexIn = 1.0
    # default: -5/Gamma .. 5/Gamma, 100 points
    tau_grid: Optional[TauGridSection] = None


class ScullySection(_Strict):
    omega: float = 1.0
    Gamma: float = 0.01
    delta_r: float = 50.0
    c: float = 1.0
    prefactor: ComplexIn = 1.0
    # default: -0.9 dr/c .. 5/Gamma, 100 points
    tau_grid: Optional[TauGridSection] = None


class CaseStudySection(_Strict):
    taylor: TaylorSection = TaylorSection()
    scully: ScullySection = ScullySection()


class ScanSection(_Strict):
    parameter: Literal["E_R", "Gamma"]
    values: list[float] = Field(min_length=1)


class RunConfig(_Strict):
    resonance: ResonanceSection = ResonanceSection()
    form_factor: dict[str, Any] = Field(default_factory=lambda: {"kind": "constant", "value": 1.0})
    time_grid: TimeGridSection = TimeGridSection()
    models: list[str] = Field(default_factory=lambda: ["bw_halfline", "bw_fullline", "complex_delta"],
                              min_length=1)
    strategy: Literal["rotation", "direct_oracle", "auto"] = "auto"
    quadrature: QuadratureSection = QuadratureSection()
    output: OutputSection = OutputSection()
    casestudy: CaseStudySection = CaseStudySection()
    scan: Optional[ScanSection] = None


@dataclass(frozen=True)
class Plan:
    """Everything a subcommand needs, validated before any computation."""

    config: RunConfig
    resonance: Resonance
    form_factor: ff.FormFactor
    grid: TimeGrid
    quadrature: QuadratureConfig


def _pydantic_error(err: pydantic.ValidationError) -> ValidationError:
    first = err.errors()[0]
    where = ".".join(str(p) for p in first["loc"]) or "<root>"
    return ValidationError(f"config: {first['msg']}", field=where, problems=err.error_count())


def load_config(path: Optional[str], overrides: dict[str, Any]) -> RunConfig:
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ValidationError("cannot read config", path=path, reason=exc.strerror) from None
        except json.JSONDecodeError as exc:
            raise ValidationError("config is not valid JSON", path=path, line=exc.lineno) from None
        if not isinstance(raw, dict):
            raise ValidationError("config must be a JSON object", path=path)
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = raw
        *parents, leaf = dotted.split(".")
        for key in parents:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ValidationError("config section must be an object", field=key)
            node = child
        node[leaf] = value
    try:
        return RunConfig.model_validate(raw)
    except pydantic.ValidationError as exc:
        raise _pydantic_error(exc) from None


def make_plan(cfg: RunConfig) -> Plan:
    R = Resonance(cfg.resonance.E_R, cfg.resonance.Gamma)
    f = ff.from_json(cfg.form_factor)
    g = cfg.time_grid
    grid = TimeGrid(g.start, g.stop, g.points, g.spacing)
    q = cfg.quadrature
    quad = QuadratureConfig(q.rel_tol, q.abs_tol, q.max_depth, q.max_evals)
    for m in cfg.models:
        if m not in MODEL_TAGS:
            raise ValidationError("unknown model tag", model=m, allowed=list(MODEL_TAGS))
    if len(set(cfg.models)) != len(cfg.models):
        raise ValidationError("models are listed more than once", models=cfg.models)
    return Plan(cfg, R, f, grid, quad)


# ------------------------------------------------------------------ output


def _num(x: float) -> str:
    # shortest round-trip decimal
    return repr(float(x))


def _json_safe(obj: Any) -> Any:
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _json_safe(obj.tolist())
    if isinstance(obj, np.generic):
        return _json_safe(obj.item())
    return obj


def dump_json(obj: Any) -> str:
    return json.dumps(_json_safe(obj), indent=2, allow_nan=False) + "\n"


def dump_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def series_json(s: AmplitudeSeries) -> dict:
    errors = s.errors if s.errors is not None else np.zeros(len(s))
    return {"model": s.model, "t": s.times, "re": s.values.real, "im": s.values.imag,
            "abs2": s.abs2, "est_error": errors}


def series_rows(series: list[AmplitudeSeries]) -> list[list[Any]]:
    """One row per (t, model): time-major, models in request order."""
    rows = []
    for i in range(len(series[0])):
        for s in series:
            v = complex(s.values[i])
            e = float(s.errors[i]) if s.errors is not None else 0.0
            rows.append([float(s.times[i]), s.model, v.real, v.imag, float(s.abs2[i]), e])
    return rows


def write_output(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bwdecay-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------- subcommands


def _params_echo(plan: Plan) -> dict:
    return plan.config.model_dump(mode="json", exclude={"output"})


def _models_for(plan: Plan) -> list[AmplitudeSeries]:
    return [amplitude_series(m, plan.form_factor, plan.resonance, plan.grid, plan.quadrature,
                             plan.config.strategy)
            for m in plan.config.models]


def run_amp(plan: Plan, fmt: str) -> str:
    series = _models_for(plan)
    if fmt == "json":
        return dump_json({"params": _params_echo(plan), "series": [series_json(s) for s in series]})
    return dump_csv(AMP_HEADER, series_rows(series))


def run_compare(plan: Plan, fmt: str) -> str:
    rep = deviation_report(plan.form_factor, plan.resonance, plan.grid, plan.quadrature)
    if fmt == "json":
        out = rep.to_json()
        out["params"] = _params_echo(plan)
        return dump_json(out)
    rows = []
    h = rep.halfline
    for i in range(len(h)):
        v = complex(h.values[i])
        r = complex(rep.ratio_to_delta[i])
        rows.append([float(h.times[i]), h.model, v.real, v.imag, float(h.abs2[i]), float(h.errors[i]),
                     float(rep.rel_dev[i]), r.real, r.imag])
    return dump_csv(COMPARE_HEADER, rows)


def _tau_samples(section: Optional[TauGridSection], start: float, stop: float) -> np.ndarray:
    if section is None:
        return np.linspace(start, stop, 100)
    return np.linspace(section.start, section.stop, section.points)


def case_inputs(plan: Plan, which: str):
    cs = plan.config.casestudy
    if which == "taylor":
        R = plan.resonance
        taus = _tau_samples(cs.taylor.tau_grid, -5.0 / R.Gamma, 5.0 / R.Gamma)
        return TaylorParams(R, as_complex(cs.taylor.prefactor, "prefactor"), taus)
    s = cs.scully
    p = ScullyParams(s.omega, s.Gamma, s.delta_r, s.c, as_complex(s.prefactor, "prefactor"))
    taus = _tau_samples(s.tau_grid, -0.9 * p.transit_time, 5.0 / p.Gamma)
    if np.any(taus == 0) or np.any(~np.isfinite(taus)):
        raise ValidationError("tau grid must be finite and must not contain tau = 0")
    if np.any(taus <= -p.transit_time):
        raise ValidationError("tau must exceed -dr/c (lab time t > 0)", transit_time=p.transit_time)
    return p, taus


def run_casestudy(plan: Plan, which: str, fmt: str) -> str:
    q = plan.quadrature
    if which == "taylor":
        p = case_inputs(plan, which)
        exact = taylor_profile(p, "exact", q, plan.config.strategy)
        wwa = taylor_profile(p, "wwa")
        report = taylor_causality(p, q) if np.any(p.tau_grid < 0) else None
    else:
        p, taus = case_inputs(plan, which)
        exact = scully_profile(p, taus, "exact", q)
        wwa = scully_profile(p, taus, "wwa")
        report = causality_scan(p, taus, q) if np.any(taus < 0) else None
    if fmt == "json":
        return dump_json({
            "case": which,
            "params": _params_echo(plan)["casestudy"][which],
            "exact": series_json(exact),
            "wwa": series_json(wwa),
            "causality": report.to_json() if report is not None else None,
        })
    return dump_csv(CASE_HEADER, series_rows([exact, wwa]))


def _scan_point(plan: Plan, parameter: str, value: float) -> list[AmplitudeSeries]:
    R = plan.resonance
    R = Resonance(value, R.Gamma) if parameter == "E_R" else Resonance(R.E_R, value)
    return [amplitude_series(m, plan.form_factor, R, plan.grid, plan.quadrature, plan.config.strategy)
            for m in plan.config.models]


def run_scan(plan: Plan, fmt: str, threads: int) -> str:
    sc = plan.config.scan
    if sc is None:
        raise ValidationError("scan needs --param/--values or a 'scan' config section")
    # validate every sweep point before computing any of them
    for v in sc.values:
        Resonance(v, plan.resonance.Gamma) if sc.parameter == "E_R" else Resonance(plan.resonance.E_R, v)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        # map() yields in input order whatever the completion order
        results = list(pool.map(lambda v: _scan_point(plan, sc.parameter, v), sc.values))
    if fmt == "json":
        return dump_json({"params": _params_echo(plan), "parameter": sc.parameter,
                          "results": [{"value": v, "series": [series_json(s) for s in res]}
                                      for v, res in zip(sc.values, results)]})
    rows = []
    for v, res in zip(sc.values, results):
        rows.extend([sc.parameter, float(v)] + r for r in series_rows(res))
    return dump_csv(SCAN_HEADER, rows)


def run_selftest(fmt: str, echo) -> tuple[str, bool]:
    from .selftest import run_all

    results = run_all(echo)
    # byte-identical output for an identical config
    plan = make_plan(RunConfig(time_grid=TimeGridSection(start=1.0, stop=500.0, points=12)))
    same = run_amp(plan, "csv") == run_amp(plan, "csv")
    echo(f"[{'PASS' if same else 'FAIL'}] cli: identical config gives byte-identical CSV")
    ok = all(r.passed for r in results) and same
    if fmt == "json":
        payload = {"passed": ok, "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
             "seconds": r.seconds, "budget": r.budget} for r in results],
            "cli_deterministic": same}
        return dump_json(payload), ok
    lines = ["criterion,passed,seconds"] + [f"{r.number},{str(r.passed).lower()},{r.seconds:.3f}" for r in results]
    return "\n".join(lines) + "\n", ok


# ----------------------------------------------------------------- parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        err = ValidationError(f"usage: {message}")
        self.exit(EXIT_INPUT, err.one_line() + "\n")


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="run configuration (JSON)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default from config, else csv)")
    common.add_argument("--threads", type=_positive_int, default=1, help="worker threads for scan")
    common.add_argument("--er", type=float, help="override resonance.E_R")
    common.add_argument("--gamma", type=float, help="override resonance.Gamma")
    common.add_argument("--tmin", type=float, help="override time_grid.start")
    common.add_argument("--tmax", type=float, help="override time_grid.stop")
    common.add_argument("--points", type=int, help="override time_grid.points")

    p = _Parser(prog="bwdecay", description="Half-line Breit-Wigner decay amplitudes.")
    p.add_argument("--version", action="version", version=f"bwdecay {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("amp", parents=[common], help="amplitude series for each configured model")
    sub.add_parser("compare", parents=[common], help="half-line vs full-line vs complex-delta report")
    cs = sub.add_parser("casestudy", parents=[common], help="wavefront or two-atom correlation profiles")
    cs.add_argument("case", choices=("taylor", "scully"))
    sc = sub.add_parser("scan", parents=[common], help="sweep E_R or Gamma, long-format table")
    sc.add_argument("--param", choices=SCAN_PARAMS)
    sc.add_argument("--values", type=_float_list)
    sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    return p


def _overrides(args) -> dict[str, Any]:
    ov = {
        "resonance.E_R": args.er,
        "resonance.Gamma": args.gamma,
        "time_grid.start": args.tmin,
        "time_grid.stop": args.tmax,
        "time_grid.points": args.points,
        "output.format": args.format,
        "output.path": args.out,
    }
    if getattr(args, "param", None) is not None or getattr(args, "values", None) is not None:
        ov["scan"] = {"parameter": args.param, "values": args.values}
    return ov


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors (exit 1 from _Parser), --help and --version (exit 0)
        return int(exc.code or 0)
    try:
        if args.command == "selftest":
            fmt = args.format or "csv"
            text, ok = run_selftest(fmt, lambda line: print(line, file=sys.stderr))
            write_output(text, args.out)
            return EXIT_OK if ok else EXIT_NUMERIC
        cfg = load_config(args.config, _overrides(args))
        plan = make_plan(cfg)
        fmt = cfg.output.format
        if args.command == "amp":
            text = run_amp(plan, fmt)
        elif args.command == "compare":
            text = run_compare(plan, fmt)
        elif args.command == "casestudy":
            text = run_casestudy(plan, args.case, fmt)
        else:
            text = run_scan(plan, fmt, args.threads)
        write_output(text, cfg.output.path)
        return EXIT_OK
    except EngineError as exc:
        print(exc.one_line(), file=sys.stderr)
        return EXIT_NUMERIC if exc.kind is ErrorKind.QUADRATURE_NONCONVERGENCE else EXIT_INPUT
    except (ArithmeticError, FloatingPointError) as exc:
        print(f"error kind=numerical message={str(exc)!r}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
