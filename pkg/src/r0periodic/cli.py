"""Command-line surface: JSON config in, CSV tables and a JSON summary out.

Subcommands: r0, spectrum, eigenfunction, convergence, mom, sweep, averaged,
paper-repro.  Every run is driven by a single JSON config (schema-validated,
unknown keys rejected) optionally patched by --override key=value pairs; the
emitted summary embeds the fully resolved config, so re-running from a
summary reproduces the outputs byte for byte (wall-clock timings live in the
summary's "timing" section, which is informational and excluded from that
guarantee).

Exit codes: 0 success, 2 configuration errors (reported with the offending
field path), 3 numerical failures (reported as a structured JSON diagnostic
on stderr).

All rates in configs follow the model factories: SIR rates are per year,
vector-host rates per day (converted internally); periods are in years.
Numbers in CSV files carry 17 significant digits and re-parse to the
identical double.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, pencil, studies
from .errors import NumericalError
from .models import (
    Contact,
    SirParams,
    VectorHostParams,
    sampled_model,
    sir_model,
    vector_host_model,
)

TOOL_NAME = "r0periodic"

TASK_KINDS = ("r0", "spectrum", "eigenfunction", "convergence", "mom",
              "sweep", "averaged")
_SCHEMELESS_TASKS = ("mom", "averaged")


class ConfigError(Exception):
    """Configuration problem, reported with a field path and mapped to exit 2."""

    def __init__(self, path: str, message: str):
        super().__init__(f"config error at {path}: {message}")
        self.path = path


# --------------------------------------------------------------------------
# schema

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_UNIT_HALF_OPEN = {"type": "number", "minimum": 0, "exclusiveMaximum": 1}
_UNIT_CLOSED = {"type": "number", "minimum": 0, "maximum": 1}

_TOP_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["model", "task"],
    "properties": {
        "model": {"type": "object"},
        "scheme": {"type": "object"},
        "task": {"type": "object"},
        "output": {"type": "object"},
    },
}

_MODEL_SCHEMAS = {
    "sir": {
        "type": "object",
        "additionalProperties": False,
        "required": ["family"],
        "properties": {
            "family": {"const": "sir"},
            "d": {"type": "integer", "minimum": 1},
            "q": _UNIT_HALF_OPEN,
            "gamma": _POSITIVE,
            "mu": _POSITIVE,
            "population": _POSITIVE,
            "period": _POSITIVE,
            "contact": {
                "type": "object",
                "additionalProperties": False,
                "required": ["choice"],
                "properties": {
                    "choice": {"enum": ["F1", "F2", "F3"]},
                    "amplitude": _UNIT_HALF_OPEN,
                    "phase": _UNIT_HALF_OPEN,
                },
            },
        },
    },
    "vector-host": {
        "type": "object",
        "additionalProperties": False,
        "required": ["family"],
        "properties": {
            "family": {"const": "vector-host"},
            "seasonality": _UNIT_HALF_OPEN,
            "splitting": {"enum": ["r0", "host-type", "vector-type"]},
            "biting_rate": _POSITIVE,
            "q_host_from_vector": _UNIT_CLOSED,
            "q_vector_from_host": _UNIT_CLOSED,
            "latency_exit_host": _POSITIVE,
            "latency_exit_vector": _POSITIVE,
            "symptomatic_fraction": _UNIT_CLOSED,
            "recovery": _POSITIVE,
            "vector_mortality": _POSITIVE,
            "vector_host_ratio": _POSITIVE,
            "period": _POSITIVE,
        },
    },
    "custom-samples": {
        "type": "object",
        "additionalProperties": False,
        "required": ["family", "d", "period", "pieces"],
        "properties": {
            "family": {"const": "custom-samples"},
            "d": {"type": "integer", "minimum": 1},
            "period": _POSITIVE,
            "smoothness": {"type": "string"},
            "pieces": {
                "type": "array",
                "minItems": 1,
                "items": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["start", "end", "samples"],
                    "properties": {
                        "start": _NUMBER,
                        "end": _NUMBER,
                        "samples": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "additionalProperties": False,
                                "required": ["t", "B", "M"],
                                "properties": {
                                    "t": _NUMBER,
                                    "B": {"type": "array"},
                                    "M": {"type": "array"},
                                },
                            },
                        },
                    },
                },
            },
        },
    },
}

_SCHEME_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["method"],
    "properties": {
        "method": {"enum": ["fourier", "chebyshev", "chebyshev-piecewise"]},
        "N": {"type": "integer", "minimum": 2},
        "n_list": {
            "type": "array",
            "minItems": 2,
            "items": {"type": "integer", "minimum": 2},
        },
        "breakpoints": {
            "type": "array",
            "minItems": 2,
            "items": _NUMBER,
        },
        "strategy": {"enum": ["full-spectrum", "power-fast-path"]},
        "allow_even": {"type": "boolean"},
    },
}

_TASK_SCHEMAS = {
    "r0": {"properties": {}},
    "spectrum": {"properties": {}},
    "eigenfunction": {
        "properties": {"grid_points": {"type": "integer", "minimum": 2}},
    },
    "convergence": {"properties": {}},
    "mom": {
        "properties": {
            "rtol_ode": _POSITIVE,
            "atol_ode": _POSITIVE,
            "tol_root": _POSITIVE,
        },
    },
    "sweep": {
        "required": ["parameter", "values"],
        "properties": {
            "parameter": {"enum": ["seasonality", "amplitude", "phase", "q"]},
            "values": {"type": "array", "minItems": 1, "items": _NUMBER},
        },
    },
    "averaged": {"properties": {}},
}

_OUTPUT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "directory": {"type": "string"},
        "basename": {"type": "string", "minLength": 1},
    },
}


def _check(instance, schema, root: str):
    validator = jsonschema.Draft202012Validator(schema)
    error = jsonschema.exceptions.best_match(validator.iter_errors(instance))
    if error is not None:
        path = root + "".join(
            f".{p}" if isinstance(p, str) else f"[{p}]" for p in error.absolute_path
        )
        raise ConfigError(path, error.message)


def validate_config(config) -> dict:
    """Schema-validate a raw config and fill in all defaults.

    Returns the fully resolved config (every known key explicit), which is
    what the summary embeds.
    """
    if not isinstance(config, dict):
        raise ConfigError("$", "config must be a JSON object")
    _check(config, _TOP_SCHEMA, "$")
    model = config["model"]
    family = model.get("family")
    if family not in _MODEL_SCHEMAS:
        raise ConfigError("$.model.family",
                          f"must be one of {sorted(_MODEL_SCHEMAS)}, got {family!r}")
    _check(model, _MODEL_SCHEMAS[family], "$.model")

    task = config["task"]
    kind = task.get("kind")
    if kind not in TASK_KINDS:
        raise ConfigError("$.task.kind",
                          f"must be one of {list(TASK_KINDS)}, got {kind!r}")
    task_schema = {
        "type": "object",
        "additionalProperties": False,
        "required": ["kind"] + list(_TASK_SCHEMAS[kind].get("required", [])),
        "properties": {"kind": {"const": kind},
                       **_TASK_SCHEMAS[kind]["properties"]},
    }
    _check(task, task_schema, "$.task")

    scheme = config.get("scheme")
    if scheme is None and kind not in _SCHEMELESS_TASKS:
        raise ConfigError("$.scheme", f"required for task {kind!r}")
    if scheme is not None:
        _check(scheme, _SCHEME_SCHEMA, "$.scheme")
        if kind == "convergence":
            if "n_list" not in scheme:
                raise ConfigError("$.scheme.n_list", "required for task 'convergence'")
            if sorted(set(scheme["n_list"])) != list(scheme["n_list"]):
                raise ConfigError("$.scheme.n_list", "must be strictly increasing")
        elif kind not in _SCHEMELESS_TASKS and "N" not in scheme:
            raise ConfigError("$.scheme.N", f"required for task {kind!r}")
    if "output" in config:
        _check(config["output"], _OUTPUT_SCHEMA, "$.output")
    if family != "vector-host" and kind == "sweep" \
            and task["parameter"] == "seasonality":
        raise ConfigError("$.task.parameter",
                          "'seasonality' applies to the vector-host family only")
    if family == "vector-host" and kind == "sweep" \
            and task["parameter"] != "seasonality":
        raise ConfigError("$.task.parameter",
                          "vector-host sweeps vary 'seasonality'")
    return _resolve_defaults(config, family, kind)


def _resolve_defaults(config, family, kind) -> dict:
    resolved = copy.deepcopy(config)
    model = resolved["model"]
    if family == "sir":
        params = SirParams()
        for key in ("d", "q", "gamma", "mu", "population", "period"):
            model.setdefault(key, getattr(params, key))
        contact = model.setdefault("contact", {"choice": params.contact.kind})
        contact.setdefault("choice", params.contact.kind)
        if contact["choice"] == "F1":
            contact.setdefault("amplitude", params.contact.amplitude)
            contact.setdefault("phase", params.contact.phase)
    elif family == "vector-host":
        params = VectorHostParams()
        for field in dataclasses.fields(VectorHostParams):
            model.setdefault(field.name, getattr(params, field.name))
    else:
        model.setdefault("smoothness", "smooth")
    if "scheme" in resolved and resolved["scheme"] is not None:
        resolved["scheme"].setdefault("strategy", "full-spectrum")
        resolved["scheme"].setdefault("allow_even", False)
    task = resolved["task"]
    if kind == "eigenfunction":
        task.setdefault("grid_points", 501)
    elif kind == "mom":
        task.setdefault("rtol_ode", 1e-10)
        task.setdefault("tol_root", 1e-8)
        task.setdefault("atol_ode", max(1e-14, 1e-2 * task["rtol_ode"]))
    output = resolved.setdefault("output", {})
    output.setdefault("directory", ".")
    output.setdefault("basename", kind)
    return resolved


# --------------------------------------------------------------------------
# builders

def build_params(model_config):
    family = model_config["family"]
    if family == "sir":
        contact_config = model_config["contact"]
        contact = Contact(
            kind=contact_config["choice"],
            amplitude=contact_config.get("amplitude", 0.6),
            phase=contact_config.get("phase", 0.2),
        )
        return SirParams(
            d=model_config["d"], q=model_config["q"], gamma=model_config["gamma"],
            mu=model_config["mu"], population=model_config["population"],
            contact=contact, period=model_config["period"],
        )
    if family == "vector-host":
        kwargs = {f.name: model_config[f.name]
                  for f in dataclasses.fields(VectorHostParams)}
        return VectorHostParams(**kwargs)
    pieces = [(p["start"], p["end"],
               [(s["t"], s["B"], s["M"]) for s in p["samples"]])
              for p in model_config["pieces"]]
    return {"d": model_config["d"], "period": model_config["period"],
            "pieces": pieces, "smoothness": model_config["smoothness"]}


def build_model(model_config):
    params = build_params(model_config)
    family = model_config["family"]
    try:
        if family == "sir":
            return sir_model(params)
        if family == "vector-host":
            return vector_host_model(params)
        return sampled_model(**params)
    except ValueError as exc:
        raise ConfigError("$.model", str(exc)) from exc


# --------------------------------------------------------------------------
# emission

def format_number(value) -> str:
    """Full-precision text: re-parses to the identical double."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def emit_csv(path: Path, header, rows) -> None:
    """Plain CSV: header row, LF line endings, 17-significant-digit numbers."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_number(v) if not isinstance(v, str) else v
                              for v in row) + "\n")


def _plain(obj):
    """Recursively convert numpy scalars/arrays for JSON emission."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    return obj


def emit_summary(path: Path, summary: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(_plain(summary), fh, indent=2, sort_keys=True)
        fh.write("\n")


# --------------------------------------------------------------------------
# task runners

def _scheme_args(config):
    scheme = config["scheme"]
    return {
        "method": scheme["method"],
        "strategy": scheme["strategy"],
        "breakpoints": scheme.get("breakpoints"),
        "allow_even": scheme["allow_even"],
    }


def _solve(config, model, n):
    args = _scheme_args(config)
    return studies.solve_on_mesh(model, args["method"], n, args["strategy"],
                                 args["breakpoints"], args["allow_even"])


def _run_r0(config, model, out_dir, base):
    solution = _solve(config, model, config["scheme"]["N"])
    csv_name = f"{base}_r0.csv"
    emit_csv(out_dir / csv_name, ["n", "r0"],
             [(config["scheme"]["N"], solution.r0)])
    results = {
        "r0": solution.r0,
        "residual": solution.residual,
        "dominance_gap": solution.dominance_gap,
        "n": config["scheme"]["N"],
        "strategy": solution.strategy,
    }
    return results, [csv_name]


def _run_spectrum(config, model, out_dir, base):
    solution = _solve(config, model, config["scheme"]["N"])
    values = solution.spectrum.values if solution.spectrum is not None else \
        np.array([solution.r0], dtype=complex)
    order = sorted(range(len(values)),
                   key=lambda i: (-abs(values[i]), -values[i].real, -values[i].imag))
    csv_name = f"{base}_spectrum.csv"
    emit_csv(out_dir / csv_name, ["re", "im"],
             [(values[i].real, values[i].imag) for i in order])
    results = {"r0": solution.r0, "n_eigenvalues": len(values),
               "max_modulus": float(np.max(np.abs(values)))}
    return results, [csv_name]


def _run_eigenfunction(config, model, out_dir, base):
    solution = _solve(config, model, config["scheme"]["N"])
    points = config["task"]["grid_points"]
    ts = np.linspace(0.0, model.period, points)
    d = model.d
    rows = []
    for t in ts:
        phi_t, psi_t = pencil.eigenfunction_at(solution, float(t))
        rows.append((t, *phi_t, *psi_t))
    header = (["t"] + [f"phi_{j + 1}" for j in range(d)]
              + [f"psi_{j + 1}" for j in range(d)])
    csv_name = f"{base}_eigenfunction.csv"
    emit_csv(out_dir / csv_name, header, rows)
    results = {"r0": solution.r0, "grid_points": points}
    return results, [csv_name]


def _run_convergence(config, model, out_dir, base):
    args = _scheme_args(config)
    report = studies.convergence_study(
        model, args["method"], config["scheme"]["n_list"],
        strategy=args["strategy"], breakpoints=args["breakpoints"],
    )
    csv_name = f"{base}_convergence.csv"
    emit_csv(out_dir / csv_name, ["n", "r0", "abs_error", "dominant_real"],
             [(r.n, r.r0, r.abs_error, r.dominant_real) for r in report.rows])
    results = {
        "reference": report.reference,
        "reference_source": report.reference_source,
        "rows": [{"n": r.n, "r0": r.r0, "abs_error": r.abs_error,
                  "dominant_real": r.dominant_real} for r in report.rows],
        "fit": dataclasses.asdict(report.fit) if report.fit else None,
    }
    timing = {"per_n_seconds": {str(r.n): r.runtime for r in report.rows}}
    return results, [csv_name], timing


def _run_mom(config, model, out_dir, base):
    from .mom import mom_solve  # deferred: scipy.integrate is heavier
    task = config["task"]
    report = mom_solve(model, rtol_ode=task["rtol_ode"],
                       tol_root=task["tol_root"], atol_ode=task["atol_ode"])
    csv_name = f"{base}_mom.csv"
    emit_csv(out_dir / csv_name, ["bracket_lo", "bracket_hi", "g_lo", "g_hi"],
             list(report.bracket_history))
    results = {
        "r0": report.r0,
        "evaluations": report.evaluations,
        "residual": report.residual,
        "rtol_ode": report.rtol_ode,
        "atol_ode": report.atol_ode,
        "tol_root": report.tol_root,
    }
    return results, [csv_name]


def _run_sweep(config, model, out_dir, base):
    task = config["task"]
    n = config["scheme"]["N"]
    strategy = config["scheme"]["strategy"]
    family = config["model"]["family"]
    params = build_params(config["model"])
    csv_name = f"{base}_sweep.csv"
    if family == "vector-host":
        rows = studies.vector_host_sweep(params, task["values"], n, strategy)
        header = ["delta", "r0", "r0_squared", "t_h", "t_v", "averaged_r0",
                  "averaged_r0_squared", "averaged_t_h", "averaged_t_v"]
        emit_csv(out_dir / csv_name, header,
                 [(r.value, r.results["r0"], r.results["r0_squared"],
                   r.results["t_h"], r.results["t_v"], r.results["averaged_r0"],
                   r.results["averaged_r0_squared"], r.results["averaged_t_h"],
                   r.results["averaged_t_v"]) for r in rows])
    else:
        rows = studies.sir_sweep(params, task["parameter"], task["values"], n,
                                 method=config["scheme"]["method"],
                                 strategy=strategy)
        header = [task["parameter"], "r0", "averaged_r0", "closed_form"]
        emit_csv(out_dir / csv_name, header,
                 [(r.value, r.results["r0"], r.results["averaged_r0"],
                   r.results["closed_form"]) for r in rows])
    results = {"parameter": task["parameter"],
               "rows": [{"value": r.value, **r.results} for r in rows]}
    return results, [csv_name]


def _run_averaged(config, model, out_dir, base):
    b_bar, m_bar = pencil.period_average(model)
    value = pencil.averaged_r0(model)
    csv_name = f"{base}_averaged.csv"
    rows = [(i, j, b_bar[i, j], m_bar[i, j])
            for i in range(model.d) for j in range(model.d)]
    emit_csv(out_dir / csv_name, ["row", "col", "b_avg", "m_avg"], rows)
    results = {"averaged_r0": value, "b_avg": b_bar, "m_avg": m_bar}
    return results, [csv_name]


_RUNNERS = {
    "r0": _run_r0,
    "spectrum": _run_spectrum,
    "eigenfunction": _run_eigenfunction,
    "convergence": _run_convergence,
    "mom": _run_mom,
    "sweep": _run_sweep,
    "averaged": _run_averaged,
}


def run_config(config: dict, out_dir=None) -> dict:
    """Validate, execute and emit one run; returns the summary dict.

    ``out_dir`` overrides the config's output directory.  The summary (and
    its file) embeds the resolved config; re-running from it reproduces the
    CSV artifacts byte for byte.
    """
    resolved = validate_config(config)
    kind = resolved["task"]["kind"]
    out_dir = Path(out_dir) if out_dir is not None \
        else Path(resolved["output"]["directory"])
    out_dir.mkdir(parents=True, exist_ok=True)
    base = resolved["output"]["basename"]
    model = build_model(resolved["model"])

    started = time.perf_counter()
    outcome = _RUNNERS[kind](resolved, model, out_dir, base)
    elapsed = time.perf_counter() - started
    if len(outcome) == 3:
        results, csv_names, timing = outcome
    else:
        results, csv_names = outcome
        timing = {}
    timing["task_seconds"] = elapsed

    summary = {
        "tool": TOOL_NAME,
        "version": __version__,
        "task": kind,
        "model_label": model.label,
        "config": resolved,
        "results": results,
        "artifacts": {"csv": csv_names, "summary": f"{base}_summary.json"},
        "timing": timing,
    }
    emit_summary(out_dir / f"{base}_summary.json", summary)
    return summary


# --------------------------------------------------------------------------
# bundled reproduction runs

def paper_repro_configs() -> dict:
    """Configs reproducing the benchmark tables and figure data sets."""
    def sir(kind, scheme, contact="F1", d=1, task_extra=None, name=None):
        config = {
            "model": {"family": "sir", "d": d, "contact": {"choice": contact}},
            "scheme": scheme,
            "task": {"kind": kind, **(task_extra or {})},
        }
        return config

    fourier_ns = [11, 15, 19, 23, 27, 31, 35]
    cheb_ns = [20, 40, 60, 80]
    configs = {
        "sir_f1_r0_n35": sir("r0", {"method": "fourier", "N": 35}),
        "sir_f1_errors_d10": sir("convergence",
                                 {"method": "fourier", "n_list": [25, 35]}, d=10),
        "sir_f1_errors_d50": sir("convergence",
                                 {"method": "fourier", "n_list": [25, 35]}, d=50),
        "sir_f1_fourier_convergence": sir(
            "convergence", {"method": "fourier", "n_list": fourier_ns}),
        "sir_f2_fourier_convergence": sir(
            "convergence", {"method": "fourier", "n_list": fourier_ns},
            contact="F2"),
        "sir_f1_chebyshev_convergence": sir(
            "convergence", {"method": "chebyshev", "n_list": cheb_ns}),
        "sir_f2_chebyshev_convergence": sir(
            "convergence", {"method": "chebyshev", "n_list": cheb_ns},
            contact="F2"),
        "sir_f3_piecewise_convergence": sir(
            "convergence",
            {"method": "chebyshev-piecewise", "n_list": [8, 16, 24, 32]},
            contact="F3"),
        "sir_f1_spectrum_n501": sir("spectrum", {"method": "fourier", "N": 501}),
        "sir_f1_eigenfunction_n35": sir("eigenfunction",
                                        {"method": "fourier", "N": 35}),
        "sir_f1_mom_d10": {
            "model": {"family": "sir", "d": 10, "contact": {"choice": "F1"}},
            "task": {"kind": "mom", "rtol_ode": 1e-8, "tol_root": 1e-8},
        },
        "vector_host_table": {
            "model": {"family": "vector-host", "seasonality": 0.8},
            "scheme": {"method": "fourier", "N": 25},
            "task": {"kind": "sweep", "parameter": "seasonality",
                     "values": [0.8]},
        },
        "vector_host_r0_convergence": {
            "model": {"family": "vector-host", "seasonality": 0.8,
                      "splitting": "r0"},
            "scheme": {"method": "fourier",
                       "n_list": [11, 15, 19, 23, 27, 31, 35, 41]},
            "task": {"kind": "convergence"},
        },
        "vector_host_th_convergence": {
            "model": {"family": "vector-host", "seasonality": 0.8,
                      "splitting": "host-type"},
            "scheme": {"method": "fourier",
                       "n_list": [11, 15, 19, 23, 27, 31, 35, 41]},
            "task": {"kind": "convergence"},
        },
        "vector_host_tv_convergence": {
            "model": {"family": "vector-host", "seasonality": 0.8,
                      "splitting": "vector-type"},
            "scheme": {"method": "fourier",
                       "n_list": [11, 15, 19, 23, 27, 31, 35, 41]},
            "task": {"kind": "convergence"},
        },
        "vector_host_delta_sweep": {
            "model": {"family": "vector-host"},
            "scheme": {"method": "fourier", "N": 25},
            "task": {"kind": "sweep", "parameter": "seasonality",
                     "values": [round(0.1 * k, 1) for k in range(10)]},
        },
    }
    for name, config in configs.items():
        config.setdefault("output", {})["basename"] = name
    return configs


def run_paper_repro(out_dir) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    runs = {}
    started = time.perf_counter()
    for name, config in paper_repro_configs().items():
        summary = run_config(config, out_dir / name)
        runs[name] = {
            "directory": name,
            "results": summary["results"],
            "artifacts": summary["artifacts"],
        }
    master = {
        "tool": TOOL_NAME,
        "version": __version__,
        "task": "paper-repro",
        "runs": runs,
        "timing": {"task_seconds": time.perf_counter() - started},
    }
    emit_summary(out_dir / "paper_repro_summary.json", master)
    return master


# --------------------------------------------------------------------------
# argv handling

def apply_overrides(config: dict, overrides) -> dict:
    """Apply dotted-path key=value overrides to a raw config dict.

    Values parse as JSON when possible and fall back to plain strings, so
    ``scheme.N=41`` yields an integer and ``model.family=sir`` a string.
    """
    patched = copy.deepcopy(config)
    for item in overrides:
        if "=" not in item:
            raise ConfigError("$", f"override {item!r} is not of the form key=value")
        dotted, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        keys = dotted.split(".")
        target = patched
        for key in keys[:-1]:
            target = target.setdefault(key, {})
            if not isinstance(target, dict):
                raise ConfigError("$." + dotted, "override path crosses a non-object")
        target[keys[-1]] = value
    return patched


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=TOOL_NAME,
        description="Reproduction numbers of periodic compartmental models "
                    "by spectral collocation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in TASK_KINDS:
        p = sub.add_parser(kind, help=f"run the {kind} task from a config")
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--out", default=None, help="output directory override")
        p.add_argument("--override", nargs="+", action="extend", default=[],
                       metavar="KEY=VALUE", help="dotted-path config overrides")
    p = sub.add_parser("paper-repro",
                       help="run the bundled benchmark-reproduction configs")
    p.add_argument("--out", default="paper-repro-out", help="output directory")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "paper-repro":
            run_paper_repro(args.out)
            return 0
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                config = json.load(fh)
        except OSError as exc:
            raise ConfigError("$", f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError("$", f"config is not valid JSON: {exc}") from exc
        if not isinstance(config, dict):
            raise ConfigError("$", "config must be a JSON object")
        config = apply_overrides(config, args.override)
        config.setdefault("task", {}).setdefault("kind", args.command)
        if config["task"]["kind"] != args.command:
            raise ConfigError("$.task.kind",
                              f"config says {config['task']['kind']!r} but the "
                              f"subcommand is {args.command!r}")
        summary = run_config(config, args.out)
        print(f"{summary['task']}: wrote "
              f"{', '.join(summary['artifacts']['csv'])} and "
              f"{summary['artifacts']['summary']}")
        return 0
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        diagnostic = {"error": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "band"):
            diagnostic["dominance_band"] = [
                {"re": float(v.real), "im": float(v.imag)} for v in exc.band
            ]
        if hasattr(exc, "history"):
            diagnostic["bracket_history"] = [list(map(float, h))
                                             for h in exc.history]
        print(json.dumps(diagnostic, indent=2), file=sys.stderr)
        return 3


def entry_point() -> None:
    sys.exit(main())
