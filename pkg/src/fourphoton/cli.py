"""Command-line front end: each subcommand writes deterministic CSV/JSON artifacts.

Every run writes its data files plus ``<command>.manifest.json`` into the
output directory.  Settings come from built-in defaults, then an optional
flat JSON ``--config`` file, then command-line flags (highest precedence).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import re
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .classical import classical_optimal_success, restricted_inputs, score_strategy
from .fock import (
    apply_beam_splitters,
    ghz_epr_decompose,
    postselect_one_per_mode,
    spdc_second_order,
)
from .io import SAMPLE_COLUMNS, dumps_csv, dumps_json, write_text
from .polarimetry import (
    PM_SYMBOLS,
    AnalyzerSetting,
    correlation,
    correlation_expectation,
    correlation_scan,
    fit_sinusoid,
    fringe_scan_linear,
    mixed_visibility,
    sample_counts,
)
from .qccs import average_success, case_report, table_one, two_epr_state
from .qstate import (
    HV_BASIS,
    PM_BASIS,
    born_distribution,
    exact_computational_probabilities,
    mix_with_white_noise,
)

COMMANDS = ("state", "coincidences", "fringe", "correlation-scan", "qccs", "classical-bound")
FRINGE_COMMANDS = ("fringe", "correlation-scan")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int = 0
    trials: int = 0
    noise: float = 1.0  # weight of the pure state; 1 = noiseless
    out: str = "out"
    format: str = "csv"
    start: float | None = None
    stop: float | None = None
    points: int = 24
    basis: str = "hv"
    phases: list | None = None
    mode: str | None = None
    case: str = "all"
    source: str = "fourphoton"
    restrict: list | None = None
    workers: int = 1
    strict: bool = True

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise UsageError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if not isinstance(self.trials, int) or self.trials < 0:
            raise UsageError(f"trials must be a non-negative integer, got {self.trials!r}")
        if not 0.0 <= float(self.noise) <= 1.0:
            raise UsageError(f"noise weight must lie in [0, 1], got {self.noise!r}")
        if self.format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.format!r}")
        if self.command in FRINGE_COMMANDS and self.points < 4:
            raise UsageError(f"fringe grids need at least 4 points, got {self.points}")
        if self.basis not in ("hv", "pm", "custom"):
            raise UsageError(f"basis must be hv, pm or custom, got {self.basis!r}")
        if self.basis == "custom" and (self.phases is None or len(self.phases) != 4):
            raise UsageError("custom basis needs four phases (modes c, d, e, f)")
        if self.source not in ("fourphoton", "two-epr"):
            raise UsageError(f"source must be fourphoton or two-epr, got {self.source!r}")
        if self.workers < 1:
            raise UsageError("workers must be at least 1")
        return self


_PI_ANGLE = re.compile(r"([+-]?(?:\d+(?:\.\d*)?|\.\d+)?)\*?pi(?:/(\d+(?:\.\d*)?))?")


def parse_angle(text) -> float:
    """``"1.5"``, ``"pi"``, ``"pi/2"``, ``"3pi/4"``, ``"-2*pi"`` -> radians."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    s = str(text).strip().lower().replace(" ", "")
    try:
        return float(s)
    except ValueError:
        pass
    m = _PI_ANGLE.fullmatch(s)
    if m is None:
        raise UsageError(f"cannot parse angle {text!r}")
    coef = m.group(1)
    value = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef, None)
    value = (float(coef) if value is None else value) * math.pi
    if m.group(2):
        value /= float(m.group(2))
    return value


def _parse_list(text, item: Callable):
    if isinstance(text, (list, tuple)):
        return [item(t) for t in text]
    return [item(t) for t in str(text).split(",") if t.strip()]


def _config_fields() -> dict:
    return {f.name: f for f in dataclasses.fields(RunConfig)}


def load_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise UsageError(f"config {path} must hold a flat JSON object")
    unknown = set(raw) - set(_config_fields())
    if unknown:
        raise UsageError(f"config {path} has unknown fields {sorted(unknown)}")
    return raw


def _normalise(values: dict) -> dict:
    out = dict(values)
    for key in ("start", "stop"):
        if out.get(key) is not None:
            out[key] = parse_angle(out[key])
    if out.get("phases") is not None:
        out["phases"] = _parse_list(out["phases"], parse_angle)
    if out.get("restrict") is not None:
        out["restrict"] = _parse_list(out["restrict"], str.strip)
    for key in ("seed", "trials", "points", "workers"):
        if key in out and not isinstance(out[key], bool):
            try:
                out[key] = int(out[key])
            except (TypeError, ValueError):
                raise UsageError(f"{key} must be an integer, got {out[key]!r}") from None
    if "noise" in out:
        out["noise"] = float(out["noise"])
    if isinstance(out.get("strict"), str):
        out["strict"] = out["strict"].lower() in ("1", "true", "yes")
    return out


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--seed", default=S, help="64-bit RNG seed (default 0)")
    p.add_argument("--trials", default=S, help="Monte Carlo events/rounds; 0 = analytic only")
    p.add_argument("--noise", default=S, help="weight of the pure state in the white-noise mixture (default 1)")
    p.add_argument("--out", default=S, help="output directory (default ./out)")
    p.add_argument("--format", default=S, choices=("csv", "json"))
    p.add_argument("--config", default=S, help="flat JSON file with any of these settings")
    p.add_argument("--workers", default=S, help="worker threads for the classical search")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="fourphoton", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _add_common(parser)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("state", help="derived four-photon state and GHZ/EPR overlaps")
    _add_common(p)

    p = sub.add_parser("coincidences", help="16-outcome coincidence table")
    _add_common(p)
    p.add_argument("--basis", default=S, choices=("hv", "pm", "custom"))
    p.add_argument("--phases", default=S, help="four analyser phases for modes c,d,e,f, e.g. 0,pi/2,0,0")
    p.add_argument("--source", default=S, choices=("fourphoton", "two-epr"))

    for name, help_text in (
        ("fringe", "fourfold fringe vs the linear analyser angle in mode f"),
        ("correlation-scan", "correlation function vs one analyser phase"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.add_argument("--start", default=S, help="first grid angle (accepts pi, pi/2, ...)")
        p.add_argument("--stop", default=S, help="grid end, excluded")
        p.add_argument("--points", default=S, help="number of grid points (>= 4)")
        p.add_argument("--source", default=S, choices=("fourphoton", "two-epr"))
        if name == "correlation-scan":
            p.add_argument("--mode", default=S, help="mode whose phase varies (default c)")

    p = sub.add_parser("qccs", help="per-case protocol success probabilities")
    _add_common(p)
    p.add_argument("--case", default=S, help='low-bit pattern such as 0101, or "all"')
    p.add_argument("--source", default=S, choices=("fourphoton", "two-epr"))
    p.add_argument("--strict", default=S, help="enforce the even-sum promise (default true)")

    p = sub.add_parser("classical-bound", help="exhaustive classical one-bit-broadcast search")
    _add_common(p)
    p.add_argument("--restrict", default=S, help="comma-separated low-bit patterns to restrict inputs to")
    return parser


def resolve_config(argv=None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    config_path = ns.pop("config", None)
    values: dict = {}
    if config_path:
        file_values = load_config_file(config_path)
        if file_values.get("command", command) != command:
            raise UsageError(f"config is for command {file_values['command']!r}, not {command!r}")
        values.update(file_values)
    values.update(ns)
    values["command"] = command
    return RunConfig(**_normalise(values)).validate()


def _source_state(cfg: RunConfig):
    if cfg.source == "two-epr":
        pure = two_epr_state()
    else:
        pure = postselect_one_per_mode(apply_beam_splitters(spdc_second_order())).state
    return pure if cfg.noise == 1.0 else mix_with_white_noise(pure, cfg.noise)


def _grid(cfg: RunConfig, default_stop: float) -> np.ndarray:
    start = 0.0 if cfg.start is None else cfg.start
    stop = default_stop if cfg.stop is None else cfg.stop
    if not stop > start:
        raise UsageError("grid stop must exceed start")
    return np.linspace(start, stop, cfg.points, endpoint=False)


def _emit(cfg: RunConfig, stem: str, header, rows, extra: dict | None = None) -> dict:
    if cfg.format == "csv":
        return {f"{stem}.csv": dumps_csv(header, rows)}
    payload = {"columns": list(header), "rows": [{k: r.get(k) for k in header} for r in rows]}
    payload.update(extra or {})
    return {f"{stem}.json": dumps_json(payload)}


def cmd_state(cfg: RunConfig) -> dict:
    sel = postselect_one_per_mode(apply_beam_splitters(spdc_second_order()))
    state = sel.state
    exact_p = exact_computational_probabilities(state)
    symbols = ("H", "V")
    rows = []
    for idx, amp in enumerate(state.amplitudes):
        label = "".join(symbols[int(b)] for b in format(idx, "04b"))
        rows.append(
            {
                "outcome": label,
                "amplitude_re": float(amp.real),
                "amplitude_im": float(amp.imag),
                "probability": float(abs(amp) ** 2),
                "probability_exact": exact_p[idx],
                "unnormalised_amplitude": state.exact.amplitudes[idx].re,
            }
        )
    dec = ghz_epr_decompose(state)
    summary = {
        "mode_order": list(state.mode_order),
        "postselection_weight": sel.weight,
        "unnormalised_norm_squared": state.exact.norm_squared(),
        "overlaps": {
            "ghz": dec.ghz_amplitude.real,
            "epr": dec.epr_amplitude.real,
            "ghz_imag": dec.ghz_amplitude.imag,
            "epr_imag": dec.epr_amplitude.imag,
            "residual": dec.residual_norm,
        },
    }
    header = ("outcome", "amplitude_re", "amplitude_im", "probability", "probability_exact", "unnormalised_amplitude")
    if cfg.format == "csv":
        return {"state.csv": dumps_csv(header, rows), "state_summary.json": dumps_json(summary)}
    return {"state.json": dumps_json({**summary, "amplitudes": rows})}


def cmd_coincidences(cfg: RunConfig) -> dict:
    state = _source_state(cfg)
    if cfg.basis == "hv":
        dist = born_distribution(state, HV_BASIS, symbols=("H", "V"))
    elif cfg.basis == "pm":
        dist = born_distribution(state, PM_BASIS, symbols=PM_SYMBOLS)
    else:
        bases = [AnalyzerSetting(p).basis() for p in cfg.phases]
        dist = born_distribution(state, bases, symbols=PM_SYMBOLS)
    counts = errors = None
    if cfg.trials:
        sample = sample_counts(dist, cfg.trials, cfg.seed)
        counts, errors = sample.counts, sample.std_error
    rows = []
    for i, (label, p) in enumerate(zip(dist.labels(), dist.probabilities)):
        rows.append(
            {
                "angle_or_outcome": label,
                "value": float(p),
                "count": None if counts is None else int(counts[i]),
                "std_error": None if errors is None else float(errors[i]),
            }
        )
    return _emit(cfg, "coincidences", SAMPLE_COLUMNS, rows, {"basis": cfg.basis, "mode_order": list(dist.mode_order)})


def _curve_rows(curve, cfg: RunConfig) -> list[dict]:
    counts = errors = None
    if cfg.trials and curve.kind == "probability":
        rng = np.random.default_rng(cfg.seed)
        counts = rng.binomial(cfg.trials, np.clip(curve.values, 0.0, 1.0))
        errors = np.sqrt(counts)
    rows = []
    for i, (a, v) in enumerate(zip(curve.angles, curve.values)):
        rows.append(
            {
                "angle_or_outcome": float(a),
                "value": float(v),
                "count": None if counts is None else int(counts[i]),
                "std_error": None if errors is None else float(errors[i]),
            }
        )
    return rows


def cmd_fringe(cfg: RunConfig) -> dict:
    state = _source_state(cfg)
    grid = _grid(cfg, math.pi)
    curve = fringe_scan_linear(state, grid)
    fit = fit_sinusoid(curve, harmonic=2)
    pure = state.pure if hasattr(state, "pure") else state
    pure_fit = fit_sinusoid(fringe_scan_linear(pure, grid), harmonic=2)
    fit_info = {
        **fit.as_dict(),
        "noise": cfg.noise,
        "predicted_visibility": mixed_visibility(pure_fit, cfg.noise),
        "synthetic_noise_model": "white-noise admixture" if cfg.noise < 1 else "none",
    }
    out = _emit(cfg, "fringe", SAMPLE_COLUMNS, _curve_rows(curve, cfg))
    out["fringe_fit.json"] = dumps_json(fit_info)
    return out


def cmd_correlation_scan(cfg: RunConfig) -> dict:
    state = _source_state(cfg)
    grid = _grid(cfg, 2 * math.pi)
    mode = cfg.mode or "c"
    curve = correlation_scan(state, mode, grid)
    fit = fit_sinusoid(curve, harmonic=1)
    fit_info = {
        **fit.as_dict(),
        "mode": mode,
        "noise": cfg.noise,
        "E_all_zero": correlation(state),
        "E_all_zero_operator": correlation_expectation(state),
    }
    out = _emit(cfg, "correlation-scan", SAMPLE_COLUMNS, _curve_rows(curve, cfg))
    out["correlation-scan_fit.json"] = dumps_json(fit_info)
    return out


QCCS_COLUMNS = (
    "pattern", "rotations", "f0", "p_exact_num", "p_exact_den", "p", "p_mc", "p_mc_err", "components", "support",
)


def cmd_qccs(cfg: RunConfig) -> dict:
    state = _source_state(cfg)
    if cfg.case == "all":
        reports = table_one(state, cfg.trials, cfg.seed, strict=cfg.strict)
    else:
        reports = [case_report(cfg.case, state, cfg.trials, cfg.seed, strict=cfg.strict)]
    rows = [r.as_row() for r in reports]
    extra = {"source": cfg.source, "noise": cfg.noise}
    if cfg.case == "all":
        avg = average_success(state)
        avg_row = {"pattern": "average", "p": float(avg)}
        if hasattr(avg, "numerator"):
            avg_row.update(p_exact_num=avg.numerator, p_exact_den=avg.denominator)
        mc = [r.mc_rate for r in reports if r.mc_rate is not None]
        if len(mc) == len(reports):
            avg_row["p_mc"] = float(np.mean(mc))
            avg_row["p_mc_err"] = float(np.sqrt(np.sum(np.square([r.mc_error for r in reports]))) / len(reports))
        rows.append(avg_row)
        extra["average"] = avg
    return _emit(cfg, "qccs", QCCS_COLUMNS, rows, extra)


def cmd_classical_bound(cfg: RunConfig) -> dict:
    inputs = restricted_inputs(cfg.restrict) if cfg.restrict else None
    result = classical_optimal_success(inputs, workers=cfg.workers)
    rescored = {rule: score_strategy(w, inputs)[rule] for rule, w in result.witnesses.items()}
    payload = {
        "headline_rule": "all",
        "max_probability": result.best,
        "max_probability_float": {k: float(v) for k, v in result.best.items()},
        "rescored_witness": rescored,
        "search_size": result.visited,
        "n_inputs": result.n_inputs,
        "restrict": cfg.restrict or [],
        "witness": {rule: w.as_dict() for rule, w in result.witnesses.items()},
    }
    if cfg.format == "json":
        return {"classical-bound.json": dumps_json(payload)}
    rows = [
        {
            "rule": rule,
            "max_probability": result.best[rule],
            "max_probability_float": float(result.best[rule]),
            "rescored_witness": rescored[rule],
            "witness_index": result.witnesses[rule].index,
            "search_size": result.visited,
        }
        for rule in ("all", "worst")
    ]
    header = ("rule", "max_probability", "max_probability_float", "rescored_witness", "witness_index", "search_size")
    return {
        "classical-bound.csv": dumps_csv(header, rows),
        "classical-bound_witness.json": dumps_json(payload["witness"]),
    }


HANDLERS = {
    "state": cmd_state,
    "coincidences": cmd_coincidences,
    "fringe": cmd_fringe,
    "correlation-scan": cmd_correlation_scan,
    "qccs": cmd_qccs,
    "classical-bound": cmd_classical_bound,
}


def run(cfg: RunConfig) -> dict:
    """Execute one command; returns ``{filename: sha256}`` of the data files written."""
    t0 = time.perf_counter()
    files = HANDLERS[cfg.command](cfg)
    out_dir = Path(cfg.out)
    digests = {name: write_text(out_dir / name, text) for name, text in sorted(files.items())}
    manifest = {
        "config": dataclasses.asdict(cfg),
        "version": __version__,
        "duration_s": time.perf_counter() - t0,
        "outputs": digests,
    }
    write_text(out_dir / f"{cfg.command}.manifest.json", dumps_json(manifest))
    return digests


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
    except UsageError as exc:
        print(f"usage-error: {exc}", file=sys.stderr)
        return 2
    try:
        digests = run(cfg)
    except UsageError as exc:
        print(f"usage-error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    for name in digests:
        print(Path(cfg.out) / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
