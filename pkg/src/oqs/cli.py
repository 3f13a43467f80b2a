"""Command-line experiment runner.

``oqs <command> --config run.ini [--workers N] [--seed S] [--out PREFIX] [--set sec.key=val]``

The config is an INI file with one section per concern (``system``, ``bath``,
``perturbed_bath``, ``dyson``, ``truncation``, ``check``, ``output``). Every
key is validated; unknown keys are errors. Each run writes
``<prefix>_summary.json`` and, where per-order data exists, ``<prefix>_orders.csv``.

Exit codes: 0 success, 1 usage/config error, 2 numerical acceptance failure.
"""
from __future__ import annotations

import argparse
import ast
import configparser
import datetime as _dt
import json
import math
import os
import platform
import re
import sys
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy

from . import __version__
from .bathcorr import (ConstantCorrelation, CorrelationFn, DiscreteModeCorrelation,
                       TabulatedCorrelation, as_correlation, discretize_spectral_density)
from .bounds import (check_identity, comb_identity_check, corollary_bound_spin_boson,
                     first_order_check, observable_error_bound)
from .dyson import DysonResult, convergence_bound, envelope_term, observable
from .model import (BathSpec, DysonConfig, PerturbationSpec, SystemSpec, is_spin_boson_coupling,
                    operator_norm, spin_boson_system)
from .oracle import (FockTruncation, TruncationError, default_memory_ceiling, direct_bath_trace,
                     exact_observable_report, random_time_sequence, wick_verification)

COMMANDS = ("observable", "bound", "check-wick", "check-comb", "check-identity", "oracle",
            "convergence")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# value parsers


def _float(lo=None, hi=None, lo_open=False):
    def parse(raw: str) -> float:
        v = float(raw)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        if lo is not None and (v <= lo if lo_open else v < lo):
            raise ValueError(f"must be {'>' if lo_open else '>='} {lo}")
        if hi is not None and v > hi:
            raise ValueError(f"must be <= {hi}")
        return v
    return parse


def _int(lo=None, hi=None):
    def parse(raw: str) -> int:
        v = int(raw)
        if lo is not None and v < lo:
            raise ValueError(f"must be >= {lo}")
        if hi is not None and v > hi:
            raise ValueError(f"must be <= {hi}")
        return v
    return parse


def _choice(*options):
    def parse(raw: str) -> str:
        v = raw.strip()
        if v not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return v
    return parse


def _floats(raw: str) -> tuple[float, ...]:
    vals = tuple(float(x) for x in re.split(r"[,\s]+", raw.strip()) if x)
    if not vals or not all(math.isfinite(v) for v in vals):
        raise ValueError("must be a non-empty list of finite numbers")
    return vals


def _ints(raw: str) -> tuple[int, ...]:
    vals = tuple(int(x) for x in re.split(r"[,\s]+", raw.strip()) if x)
    if not vals:
        raise ValueError("must be a non-empty list of integers")
    return vals


def _modes(raw: str) -> tuple[tuple[float, float], ...]:
    """``omega:c`` pairs separated by commas, e.g. ``1.0:0.2, 2.0:0.1``."""
    out = []
    for item in (x.strip() for x in raw.split(",")):
        if not item:
            continue
        try:
            w, c = item.split(":")
            out.append((float(w), float(c)))
        except ValueError:
            raise ValueError(f"mode {item!r} is not of the form omega:c") from None
    if not out:
        raise ValueError("needs at least one omega:c pair")
    return tuple(out)


def _matrix(raw: str) -> np.ndarray:
    try:
        value = ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        raise ValueError("must be a nested list literal such as [[1, 0], [0, -1]]") from None
    arr = np.array(value, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError("must be a square matrix")
    return arr


def _bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError("must be true or false")


def _str(raw: str) -> str:
    return raw.strip()


_BATH_KEYS: dict[str, tuple[Callable, Any]] = {
    "modes": (_modes, None),
    "beta": (_float(0, lo_open=True), None),
    "tabulated": (_str, None),
    "spectral_density": (_choice("ohmic", "drude"), None),
    "alpha": (_float(0), 0.1),
    "omega_c": (_float(0, lo_open=True), 1.0),
    "omega_max": (_float(0, lo_open=True), 10.0),
    "n_modes": (_int(1, 4), 1),
}

SCHEMA: dict[str, dict[str, tuple[Callable, Any]]] = {
    "system": {
        "preset": (_choice("spin_boson", "explicit"), "spin_boson"),
        "epsilon": (_float(), 1.0),
        "delta": (_float(), 0.0),
        "observable": (_choice("sigma_z", "sigma_x", "identity"), "sigma_z"),
        "initial_state": (_choice("up", "down", "plus", "minus"), "up"),
        "h_s": (_matrix, None),
        "w_s": (_matrix, None),
        "o_s": (_matrix, None),
        "rho_s": (_matrix, None),
    },
    "bath": dict(_BATH_KEYS),
    "perturbed_bath": dict(_BATH_KEYS),
    "dyson": {
        "t": (_float(0), 1.0),
        "max_order": (_int(0, 14), 8),
        "integrator": (_choice("gauss", "monte_carlo"), "gauss"),
        "samples_per_order": (_int(1), 200_000),
        "gauss_points": (_int(1, 512), 32),
        "seed": (_int(0, 2**64 - 1), 0),
        "tol_herm": (_float(0, lo_open=True), 1e-10),
        "tol_psd": (_float(0, lo_open=True), 1e-10),
        "tol_trace": (_float(0, lo_open=True), 1e-10),
        "tol_imag": (_float(0, lo_open=True), 1e-8),
    },
    "truncation": {
        "n_max": (_int(1), None),
        "memory_ceiling": (_int(1), None),
    },
    "check": {
        "m": (_ints, None),
        "samples": (_int(1), None),
        "times": (_floats, None),
        "interval": (_floats, None),
        "constant_b": (_float(), None),
        "method": (_choice("auto", "gauss", "monte_carlo"), "auto"),
        "tolerance": (_float(0, lo_open=True), None),
        "quad_points": (_int(2, 512), 32),
        "epsilons": (_floats, None),
        "first_order": (_bool, True),
        "identity_order": (_int(2, 8), 4),
    },
    "output": {
        "prefix": (_str, "oqs_run"),
    },
}


@dataclass
class RunConfig:
    command: str
    system: SystemSpec | None
    bath: BathSpec | CorrelationFn | None
    perturbed_bath: BathSpec | CorrelationFn | None
    dyson: DysonConfig
    truncation: FockTruncation | None
    check: dict[str, Any]
    output: str
    workers: int = 1
    effective: dict[str, dict[str, Any]] = field(default_factory=dict)


def _key_lines(text: str) -> dict[tuple[str, str], int]:
    lines: dict[tuple[str, str], int] = {}
    section = ""
    for no, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            lines[(section, "")] = no
        elif "=" in s and not s.startswith(("#", ";")):
            lines[(section, s.split("=", 1)[0].strip().lower())] = no
    return lines


def _where(lines, section, key) -> str:
    no = lines.get((section, key))
    return f"line {no}: " if no else ""


def parse_config(path: str | os.PathLike | None = None, command: str | None = None,
                 overrides: list[str] | None = None, text: str | None = None) -> RunConfig:
    """Read, validate and build a :class:`RunConfig`.

    ``overrides`` are ``section.key=value`` strings applied after the file.
    Errors name the key path (and line, when it came from the file).
    """
    if text is None:
        if path is None:
            text = ""
        else:
            try:
                text = Path(path).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=str(path or "<config>"))
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    lines = _key_lines(text)
    raw: dict[str, dict[str, str]] = {s: dict(parser[s]) for s in parser.sections()}
    if "run" in raw:
        run = raw.pop("run")
        for key in run:
            if key != "command":
                raise ConfigError(f"{_where(lines, 'run', key)}unknown key 'run.{key}'")
        command = command or run.get("command")
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        lhs, value = item.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        raw.setdefault(section, {})[key.strip().lower()] = value
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {command!r}")

    values: dict[str, dict[str, Any]] = {}
    for section, entries in raw.items():
        if section not in SCHEMA:
            raise ConfigError(f"{_where(lines, section, '')}unknown section [{section}]")
        for key in entries:
            if key not in SCHEMA[section]:
                raise ConfigError(f"{_where(lines, section, key)}unknown key '{section}.{key}'")
    for section, schema in SCHEMA.items():
        present = section in raw
        values[section] = {}
        for key, (conv, default) in schema.items():
            if present and key in raw[section]:
                try:
                    values[section][key] = conv(raw[section][key])
                except ValueError as exc:
                    raise ConfigError(f"{_where(lines, section, key)}{section}.{key}: {exc}") from None
            else:
                values[section][key] = default
        values[section]["_present"] = present
    try:
        return _build(command, values, lines)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _build(command: str, v: dict[str, dict[str, Any]], lines) -> RunConfig:
    d = v["dyson"]
    if d["max_order"] % 2:
        raise ConfigError(f"{_where(lines, 'dyson', 'max_order')}max_order must be even")
    dyson = DysonConfig(
        t=d["t"], max_order=d["max_order"], integrator=d["integrator"],
        samples_per_order=d["samples_per_order"], gauss_points=d["gauss_points"], seed=d["seed"],
        tol_herm=d["tol_herm"], tol_psd=d["tol_psd"], tol_trace=d["tol_trace"], tol_imag=d["tol_imag"],
    )
    needs_system = command in ("observable", "bound", "check-identity", "oracle", "convergence")
    system = _build_system(v["system"], dyson, lines) if needs_system else None
    needs_bath = command != "check-comb" or v["bath"]["_present"]
    bath = _build_bath("bath", v["bath"], dyson.t, lines) if needs_bath else None
    perturbed = None
    if command in ("bound", "check-identity"):
        if not v["perturbed_bath"]["_present"]:
            raise ConfigError(f"command {command} requires a [perturbed_bath] section")
        perturbed = _build_bath("perturbed_bath", v["perturbed_bath"], dyson.t, lines)
    if command in ("check-wick", "check-identity", "oracle") and not isinstance(bath, BathSpec):
        raise ConfigError(f"command {command} needs a discrete-mode [bath] (modes + beta)")
    trunc = None
    if isinstance(bath, BathSpec):
        tv = v["truncation"]
        trunc = FockTruncation(
            n_max=tv["n_max"] if tv["n_max"] is not None else (20 if bath.n_modes == 1 else 8),
            memory_ceiling=tv["memory_ceiling"] or default_memory_ceiling(),
        )
    check = {k: val for k, val in v["check"].items() if k != "_present"}
    effective = {s: {k: _jsonable(val) for k, val in sec.items() if k != "_present"}
                 for s, sec in v.items()}
    effective["dyson"] = _jsonable(asdict(dyson))
    if trunc is not None:
        effective["truncation"] = _jsonable(asdict(trunc))
    return RunConfig(command, system, bath, perturbed, dyson, trunc, check,
                     v["output"]["prefix"], effective=effective)


def _build_system(s: dict[str, Any], dyson: DysonConfig, lines) -> SystemSpec:
    states = {"up": [1, 0], "down": [0, 1], "plus": [1, 1], "minus": [1, -1]}
    if s["preset"] == "spin_boson":
        psi = np.array(states[s["initial_state"]], dtype=complex)
        psi /= np.linalg.norm(psi)
        rho = s["rho_s"] if s["rho_s"] is not None else np.outer(psi, psi.conj())
        return spin_boson_system(s["epsilon"], s["delta"], s["observable"], rho_s=rho)
    missing = [k for k in ("h_s", "w_s", "o_s", "rho_s") if s[k] is None]
    if missing:
        raise ConfigError(f"explicit system is missing system.{missing[0]}")
    try:
        return SystemSpec(s["h_s"], s["w_s"], s["o_s"], s["rho_s"],
                          tol_herm=dyson.tol_herm, tol_psd=dyson.tol_psd, tol_trace=dyson.tol_trace)
    except ValueError as exc:
        raise ConfigError(f"{_where(lines, 'system', 'preset')}system: {exc}") from None


def _build_bath(name: str, b: dict[str, Any], t: float, lines):
    where = _where(lines, name, "")
    if b["tabulated"] is not None:
        if b["modes"] is not None or b["spectral_density"] is not None:
            raise ConfigError(f"{where}[{name}] gives both a table and modes")
        return TabulatedCorrelation.from_csv(b["tabulated"], pivot=t)
    if b["beta"] is None:
        raise ConfigError(f"{where}{name}.beta is required")
    if b["spectral_density"] is not None:
        wc, alpha = b["omega_c"], b["alpha"]
        j = {"ohmic": lambda w: alpha * w * math.exp(-w / wc),
             "drude": lambda w: alpha * wc * w / (w * w + wc * wc)}[b["spectral_density"]]
        grid = np.linspace(0.0, b["omega_max"], b["n_modes"] + 1)
        return discretize_spectral_density(j, grid, b["beta"])
    if b["modes"] is None:
        raise ConfigError(f"{where}{name} needs modes, spectral_density or tabulated")
    return BathSpec(b["modes"], b["beta"])


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


# ---------------------------------------------------------------------------
# commands


def _corr(source, t: float) -> CorrelationFn:
    return as_correlation(source, t)


def _dyson_record(result: DysonResult) -> dict:
    return {
        "value": _jsonable(result.value),
        "stderr": result.stderr,
        "truncation_tail_bound": result.truncation_tail_bound,
        "sup_b": result.sup_b,
        "per_order": [
            {"m": c.m, "value": _jsonable(c.value), "stderr": c.stderr, "method": c.method}
            for c in result.per_order
        ],
    }


def cmd_observable(cfg: RunConfig):
    res = observable(cfg.system, _corr(cfg.bath, cfg.dyson.t), _dyson_cfg(cfg))
    ok = abs(res.value.imag) <= cfg.dyson.tol_imag + 3 * res.total_stderr
    print(res.summary_line())
    return {"observable": _dyson_record(res), "hermiticity_ok": ok}, res.to_csv(), ok


def cmd_convergence(cfg: RunConfig):
    res = observable(cfg.system, _corr(cfg.bath, cfg.dyson.t), _dyson_cfg(cfg))
    o, w = operator_norm(cfg.system.o_s), operator_norm(cfg.system.w_s)
    length = 2 * cfg.dyson.t
    env = convergence_bound(cfg.system, res.sup_b, length)
    abs_sum = sum(abs(c.value) for c in res.per_order)
    rows = []
    ok = abs_sum <= env + 3 * res.total_stderr
    for c in res.per_order:
        term = envelope_term(c.m, o, w, res.sup_b, length)
        within = abs(c.value) <= term + 3 * c.stderr
        ok = ok and within
        rows.append({"m": c.m, "abs_contribution": abs(c.value), "envelope_term": term,
                     "within": within})
    print(f"sum |contribution_m| = {abs_sum:.6g} <= envelope {env:.6g}: {ok}")
    return ({"observable": _dyson_record(res), "envelope": env, "abs_sum": abs_sum,
             "orders": rows, "ok": ok}, res.to_csv(), ok)


def cmd_bound(cfg: RunConfig):
    times = cfg.check["times"] or (cfg.dyson.t,)
    qp = cfg.check["quad_points"]
    records, ok = [], True
    for t in times:
        p = PerturbationSpec(cfg.bath, cfg.perturbed_bath)
        rep = observable_error_bound(cfg.system, p, t, qp)
        rec = {"t": t, "bound": rep.bound_value, "integral_abs_db": rep.integral_abs_db,
               "integral_error": rep.integral_error}
        if is_spin_boson_coupling(cfg.system):
            rec["corollary_bound"] = corollary_bound_spin_boson(cfg.system, p, t, qp).bound_value
        if isinstance(cfg.bath, BathSpec) and isinstance(cfg.perturbed_bath, BathSpec):
            try:
                a = exact_observable_report(cfg.system, cfg.bath, cfg.truncation, t)
                b = exact_observable_report(cfg.system, cfg.perturbed_bath,
                                            cfg.truncation, t)
            except TruncationError as exc:
                rec["oracle_error"] = str(exc)
            else:
                delta = b.value - a.value
                slack = (a.cutoff_delta or 0.0) + (b.cutoff_delta or 0.0)
                rec["observed_delta"] = delta
                rec["satisfied"] = abs(delta) <= rep.bound_value + slack
                ok = ok and rec["satisfied"]
        records.append(rec)
        print(f"t={t:g}: bound {rep.bound_value:.6g}"
              + (f", observed |dO| {abs(rec['observed_delta']):.6g}" if "observed_delta" in rec else ""))
    return {"bounds": records, "ok": ok}, None, ok


def cmd_check_wick(cfg: RunConfig):
    t = cfg.dyson.t
    ms = cfg.check["m"] or (1, 2, 3, 4, 5)
    samples = cfg.check["samples"] or 50
    tol = cfg.check["tolerance"] or 1e-6
    rng = np.random.default_rng(cfg.dyson.seed)
    records, ok = [], True
    for m in ms:
        if m % 2 == 0:
            dev = wick_verification(m, cfg.bath, cfg.truncation, t, samples, cfg.dyson.seed)
            passed = dev < tol
            records.append({"m": m, "max_relative_deviation": dev, "passed": passed})
        else:
            worst = max(abs(direct_bath_trace(random_time_sequence(rng, m, t), cfg.bath,
                                              cfg.truncation, t)) for _ in range(samples))
            passed = worst < 1e-10
            records.append({"m": m, "max_abs_trace": worst, "passed": passed})
        ok = ok and passed
        print(f"m={m}: {'pass' if passed else 'FAIL'}")
    return {"wick": records, "ok": ok}, None, ok


def cmd_check_comb(cfg: RunConfig):
    t = cfg.dyson.t
    if cfg.check["constant_b"] is not None:
        corr = ConstantCorrelation(cfg.check["constant_b"], t)
    elif cfg.bath is not None:
        corr = _corr(cfg.bath, t)
    else:
        raise ConfigError("check-comb needs [bath] or check.constant_b")
    interval = cfg.check["interval"] or (0.0, 2 * t)
    if len(interval) != 2 or interval[1] <= interval[0]:
        raise ConfigError("check.interval must be two increasing numbers")
    records, ok = [], True
    for m in cfg.check["m"] or (4,):
        res = comb_identity_check(m, corr, tuple(interval), cfg.check["method"],
                                  cfg.check["samples"] or cfg.dyson.samples_per_order,
                                  cfg.dyson.seed, workers=cfg.workers)
        tol = cfg.check["tolerance"] or 1e-10
        limit = 3 * res.stderr if res.method == "monte_carlo" else tol * max(1.0, abs(res.rhs))
        passed = res.discrepancy <= limit
        ok = ok and passed
        records.append({"m": m, "lhs": _jsonable(res.lhs), "rhs": _jsonable(res.rhs),
                        "discrepancy": res.discrepancy, "stderr": res.stderr,
                        "method": res.method, "passed": passed})
        print(f"m={m}: lhs {res.lhs.real:.12g} rhs {res.rhs.real:.12g} "
              f"|diff| {res.discrepancy:.3g} ({'pass' if passed else 'FAIL'})")
    return {"comb": records, "ok": ok}, None, ok


def cmd_check_identity(cfg: RunConfig):
    t = cfg.dyson.t
    order = cfg.check["identity_order"]
    p = PerturbationSpec(cfg.bath, cfg.perturbed_bath)
    dcfg = _dyson_cfg(cfg)
    chk = check_identity(cfg.system, p, t, order, dcfg, cfg.truncation)
    ok = chk.within_budget
    out = {
        "lhs": _jsonable(chk.lhs.value), "rhs": _jsonable(chk.rhs.value),
        "lhs_stderr": chk.lhs.stderr, "rhs_stderr": chk.rhs.stderr,
        "lhs_tail_bound": chk.lhs.tail_bound, "rhs_tail_bound": chk.rhs.tail_bound,
        "fock_diagnostic": chk.fock_diagnostic, "discrepancy": chk.discrepancy,
        "budget": chk.budget, "within_budget": ok,
    }
    print(f"lhs {chk.lhs.value.real:.10g} rhs {chk.rhs.value.real:.10g} "
          f"|diff| {chk.discrepancy:.3g} budget {chk.budget:.3g}")
    if cfg.check["first_order"]:
        direction = 2 * DiscreteModeCorrelation.from_bath(cfg.bath, t)
        eps = cfg.check["epsilons"] or (1e-2, 1e-3)
        fo = first_order_check(cfg.system, cfg.bath, direction, t, order, dcfg, cfg.truncation, eps)
        fo_ok = abs(fo.richardson_ratio - 1) <= 0.1 and all(abs(r - 1) <= 0.1 for r in fo.ratios)
        out["first_order"] = {"epsilons": list(fo.epsilons), "ratios": _jsonable(fo.ratios),
                              "richardson_ratio": _jsonable(fo.richardson_ratio),
                              "target": _jsonable(fo.target), "passed": fo_ok}
        print(f"first-order Richardson ratio {fo.richardson_ratio.real:.6g}")
        ok = ok and fo_ok
    rows = "m,re,im,stderr\n" + "".join(
        f"{m},{v.real:.17g},{v.imag:.17g},{e:.17g}\n" for m, v, e in chk.lhs.per_order)
    return out, rows, ok


def cmd_oracle(cfg: RunConfig):
    times = cfg.check["times"] or (cfg.dyson.t,)
    records = []
    for t in times:
        rep = exact_observable_report(cfg.system, cfg.bath, cfg.truncation, t)
        records.append(_jsonable(asdict(rep)) | {"t": t})
        print(f"t={t:g}: <O> = {rep.value:.15g} (cutoff delta {rep.cutoff_delta})")
    return {"oracle": records, "ok": True}, None, True


HANDLERS = {
    "observable": cmd_observable, "convergence": cmd_convergence, "bound": cmd_bound,
    "check-wick": cmd_check_wick, "check-comb": cmd_check_comb,
    "check-identity": cmd_check_identity, "oracle": cmd_oracle,
}


def _dyson_cfg(cfg: RunConfig) -> DysonConfig:
    return replace(cfg.dyson, workers=cfg.workers)


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; write the summary (and orders CSV) and return the exit code."""
    try:
        results, orders_csv, ok = HANDLERS[cfg.command](cfg)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        results, orders_csv, ok = {"error": str(exc)}, None, False
    prefix = Path(cfg.output)
    if prefix.parent != Path("."):
        prefix.parent.mkdir(parents=True, exist_ok=True)
    if orders_csv is not None:
        Path(f"{prefix}_orders.csv").write_text(orders_csv)
    summary = {
        "command": cfg.command,
        "inputs": cfg.effective,
        "seed": cfg.dyson.seed,
        "workers": cfg.workers,
        "versions": {"oqs": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
        "results": _jsonable(results),
        "passed": bool(ok),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(),
    }
    Path(f"{prefix}_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if ok else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="oqs", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="INI config file")
    ap.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output prefix")
    ap.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override a config value (repeatable)")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.seed is not None:
        overrides.append(f"dyson.seed={args.seed}")
    if args.out is not None:
        overrides.append(f"output.prefix={args.out}")
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = parse_config(args.config, args.command, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg.workers = args.workers
    cfg.effective["run"] = {"command": cfg.command, "workers": cfg.workers}
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
