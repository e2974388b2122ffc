"""Deterministic command-line front end.

Scenarios are described by a flat INI config (section headers, key=value
pairs, no nesting).  Every run writes the requested data file plus a JSON
manifest recording all resolved parameters and component versions; the
manifest's SHA-256 is stamped into a header comment of each output so a
data file can always be traced to the exact run that produced it.  All
floats are rendered with 17 significant digits and LF endings, and the
package uses no random numbers anywhere, so identical configs produce
byte-identical outputs; ``--seedless`` makes the run verify that claim by
rendering everything twice and comparing bytes.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import sys
from dataclasses import dataclass

import numpy as np
import scipy

from . import __version__
from .bosons import (
    distribution_rows,
    emission_distribution,
    equal_fill_even_distribution,
    one_well_distribution,
    retained_state_split,
    rotate_fock,
)
from .dynamics import (
    SingleParticleState,
    Trajectory,
    asymptotic_probs,
    dwell_time,
    evolve_master,
    fit_decay_rate,
    format_float,
    master_trajectory,
)
from .fermions import (
    branches_to_json,
    three_electron_asymptotic,
    two_electron_asymptotic,
    two_electron_parallel_asymptotic,
)
from .model import ParallelWellPair, WellPair, derive
from .oracle import convergence_report, single_particle_trajectory
from .rotation import dark_state

__all__ = ["ConfigError", "Scenario", "RunResult", "load_config", "render", "run", "main"]

KINDS = (
    "evolve",
    "asymptotic",
    "dwell",
    "oracle-compare",
    "fermions",
    "bosons",
    "sweep",
)

FORMATS = ("csv", "json")

# Every key the config may contain, by section; anything else is a typo
# and gets reported with its full key path.
_ALLOWED_KEYS = {
    "scenario": {"kind"},
    "model": {
        "gamma1",
        "gamma2",
        "y",
        "epsilon",
        "eta",
        "e1",
        "e2",
        "omega1",
        "omega2",
        "rho",
        "lambda_cutoff",
        "yprime",
        "u",
    },
    "initial": {"b1", "b2"},
    "grid": {"t_max", "n_points"},
    "output": {"path", "format"},
    "oracle": {"n_levels", "cutoff", "method"},
    "fermions": {"op", "y", "eta"},
    "bosons": {"law", "n1", "n2", "y", "eta", "n", "n_retained"},
    "sweep": {"axis", "values", "axis2", "values2", "report", "max_points", "t_max"},
}

_SWEEP_AXES = ("y", "epsilon", "gamma1", "gamma2", "yprime", "u")
_SWEEP_REPORTS = ("sigma11_asymptotic", "p_trapped", "fitted_tau", "fitted_rate")
_FERMION_OPS = ("two_electron", "two_electron_parallel", "three_electron")
_BOSON_LAWS = ("emission", "equal_fill", "one_well", "retained_split")


class ConfigError(ValueError):
    """Configuration problem, message prefixed with the offending key path."""


@dataclass(frozen=True)
class Scenario:
    """A fully parsed run request: kind plus raw config sections."""

    kind: str
    sections: dict
    out: str
    fmt: str
    seedless: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"scenario.kind: unknown kind {self.kind!r}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"output.format: unknown format {self.fmt!r}")
        for section, keys in self.sections.items():
            allowed = _ALLOWED_KEYS.get(section)
            if allowed is None:
                raise ConfigError(f"{section}: unknown section")
            for key in keys:
                if key not in allowed:
                    raise ConfigError(f"{section}.{key}: unknown key")


@dataclass(frozen=True)
class RunResult:
    """Rendered outputs: manifest dict, its hash, and file contents."""

    manifest: dict
    manifest_sha256: str
    files: dict


def load_config(path: str) -> dict:
    """Parse a flat INI config into {section: {key: raw string}}."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config: {exc}") from exc
    return {
        section: dict(parser.items(section)) for section in parser.sections()
    }


def _parse_number(sections, section, key, default=None, kind=float, required=False):
    sec = sections.get(section, {})
    if key not in sec:
        if required:
            raise ConfigError(f"{section}.{key}: required key is missing")
        return default
    raw = sec[key].strip()
    try:
        if kind is int:
            return int(raw)
        if kind is complex:
            return complex(raw)
        value = float(raw)
    except ValueError:
        raise ConfigError(
            f"{section}.{key}: cannot parse {raw!r} as {kind.__name__}"
        ) from None
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key}: value must be finite, got {raw!r}")
    return value


def _parse_choice(sections, section, key, choices, default):
    sec = sections.get(section, {})
    value = sec.get(key, default)
    if value not in choices:
        raise ConfigError(
            f"{section}.{key}: expected one of {', '.join(choices)}, got {value!r}"
        )
    return value


def _parse_eta(sections, section, key="eta"):
    eta = _parse_number(sections, section, key, default=1, kind=int)
    if eta not in (1, -1):
        raise ConfigError(f"{section}.{key}: eta must be 1 or -1, got {eta}")
    return eta


def _width_kwargs(sections) -> dict:
    """Width-style model keys with defaults; sweep axes override these."""
    sec = sections.get("model", {})
    if "gamma2" in sec and "y" in sec:
        raise ConfigError("model.y: give either gamma2 or y, not both")
    for key in ("e1", "e2"):
        if key in sec:
            raise ConfigError(
                f"model.{key}: level energies go with the omega "
                "parameterization; width style sets alignment through epsilon"
            )
    kwargs = {
        "gamma1": _parse_number(sections, "model", "gamma1", default=1.0),
        "epsilon": _parse_number(sections, "model", "epsilon", default=0.0),
        "eta": _parse_eta(sections, "model"),
        "rho": _parse_number(sections, "model", "rho", default=None),
        "lambda_cutoff": _parse_number(sections, "model", "lambda_cutoff", default=None),
        "yprime": _parse_number(sections, "model", "yprime", default=None),
        "u": _parse_number(sections, "model", "u", default=0.0),
    }
    if "y" in sec:
        kwargs["y"] = _parse_number(sections, "model", "y")
    else:
        kwargs["gamma2"] = _parse_number(
            sections, "model", "gamma2", default=kwargs["gamma1"]
        )
    return kwargs


def _model_from_width_kwargs(kwargs):
    """Build the model and the resolved-parameter record from width keys."""
    gamma1 = kwargs["gamma1"]
    gamma2 = kwargs.get("gamma2")
    if gamma2 is None:
        gamma2 = kwargs["y"] * gamma1
    try:
        extra = {}
        if kwargs.get("rho") is not None:
            extra["rho"] = kwargs["rho"]
        pair = WellPair.from_widths(
            gamma1,
            gamma2,
            eta=kwargs["eta"],
            epsilon=kwargs["epsilon"],
            lambda_cutoff=kwargs.get("lambda_cutoff"),
            **extra,
        )
        model = pair
        if kwargs.get("yprime") is not None:
            model = ParallelWellPair(base=pair, yprime=kwargs["yprime"], U=kwargs["u"])
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc
    resolved = {
        "model.E1": pair.E1,
        "model.E2": pair.E2,
        "model.omega1": pair.omega1,
        "model.omega2": pair.omega2,
        "model.rho": pair.rho,
        "model.gamma1": pair.gamma1,
        "model.gamma2": pair.gamma2,
        "model.epsilon": pair.epsilon,
    }
    if pair.lambda_cutoff is not None:
        resolved["model.lambda_cutoff"] = pair.lambda_cutoff
    if isinstance(model, ParallelWellPair):
        resolved["model.yprime"] = model.yprime
        resolved["model.U"] = model.U
    return model, resolved


def _resolve_model(sections):
    """Build the model from [model], accepting width or coupling style."""
    sec = sections.get("model", {})
    if "omega1" in sec or "omega2" in sec:
        mixed = {"gamma1", "gamma2", "y"} & set(sec)
        if mixed:
            raise ConfigError(
                f"model.{sorted(mixed)[0]}: cannot mix width (gamma/y) and "
                "coupling (omega) parameterizations"
            )
        try:
            pair = WellPair(
                E1=_parse_number(sections, "model", "e1", default=0.0),
                E2=_parse_number(sections, "model", "e2", default=0.0),
                omega1=_parse_number(sections, "model", "omega1", required=True),
                omega2=_parse_number(sections, "model", "omega2", required=True),
                **(
                    {"rho": _parse_number(sections, "model", "rho")}
                    if "rho" in sec
                    else {}
                ),
                lambda_cutoff=_parse_number(sections, "model", "lambda_cutoff", default=None),
            )
            model = pair
            yprime = _parse_number(sections, "model", "yprime", default=None)
            if yprime is not None:
                model = ParallelWellPair(
                    base=pair,
                    yprime=yprime,
                    U=_parse_number(sections, "model", "u", default=0.0),
                )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"model: {exc}") from exc
        resolved = {
            "model.E1": pair.E1,
            "model.E2": pair.E2,
            "model.omega1": pair.omega1,
            "model.omega2": pair.omega2,
            "model.rho": pair.rho,
            "model.gamma1": pair.gamma1,
            "model.gamma2": pair.gamma2,
            "model.epsilon": pair.epsilon,
        }
        if pair.lambda_cutoff is not None:
            resolved["model.lambda_cutoff"] = pair.lambda_cutoff
        if isinstance(model, ParallelWellPair):
            resolved["model.yprime"] = model.yprime
            resolved["model.U"] = model.U
        return model, resolved
    return _model_from_width_kwargs(_width_kwargs(sections))


def _single_particle_model(sections):
    model, resolved = _resolve_model(sections)
    if isinstance(model, ParallelWellPair):
        raise ConfigError(
            "model.yprime: this scenario takes a single-particle model "
            "(no parallel levels)"
        )
    return model, resolved


def _resolve_initial(sections):
    b1 = _parse_number(sections, "initial", "b1", default=complex(1.0), kind=complex)
    b2 = _parse_number(sections, "initial", "b2", default=complex(0.0), kind=complex)
    norm = abs(b1) ** 2 + abs(b2) ** 2
    if abs(norm - 1.0) > 1e-9:
        raise ConfigError(f"initial.b1: amplitudes must be normalized, |b|^2 = {norm}")
    resolved = {
        "initial.b1": [b1.real, b1.imag],
        "initial.b2": [b2.real, b2.imag],
    }
    return (b1, b2), resolved


def _resolve_grid(sections, default_t_max):
    t_max = _parse_number(sections, "grid", "t_max", default=default_t_max)
    n_points = _parse_number(sections, "grid", "n_points", default=200, kind=int)
    if t_max <= 0.0:
        raise ConfigError(f"grid.t_max: must be positive, got {t_max}")
    if n_points < 2:
        raise ConfigError(f"grid.n_points: need at least 2 points, got {n_points}")
    times = np.linspace(0.0, t_max, n_points)
    resolved = {"grid.t_max": t_max, "grid.n_points": n_points}
    return times, resolved


def _trajectory_rows(traj: Trajectory):
    columns = ["t", "sigma11", "sigma22", "re_sigma12", "im_sigma12", "sigma00"]
    rows = [
        [
            float(traj.times[k]),
            float(traj.sigma11[k]),
            float(traj.sigma22[k]),
            float(traj.sigma12[k].real),
            float(traj.sigma12[k].imag),
            float(traj.sigma00[k]),
        ]
        for k in range(len(traj.times))
    ]
    return columns, rows


def _run_evolve(scenario):
    pair, resolved = _single_particle_model(scenario.sections)
    (b1, b2), res_init = _resolve_initial(scenario.sections)
    times, res_grid = _resolve_grid(scenario.sections, default_t_max=10.0 / pair.gamma1)
    resolved.update(res_init)
    resolved.update(res_grid)
    initial = SingleParticleState.from_amplitudes(b1, b2)
    traj = master_trajectory(pair, initial, times)
    columns, rows = _trajectory_rows(traj)
    return columns, rows, resolved, {}


def _run_asymptotic(scenario):
    pair, resolved = _single_particle_model(scenario.sections)
    (b1, b2), res_init = _resolve_initial(scenario.sections)
    resolved.update(res_init)
    p0, p1 = asymptotic_probs(pair, (b1, b2))
    dark = dark_state(pair)
    overlap = dark[0] * b1 + dark[1] * b2
    state = SingleParticleState.from_amplitudes(
        overlap * dark[0], overlap * dark[1], t=math.inf
    )
    columns = [
        "p_trapped",
        "p_emitted",
        "sigma11",
        "sigma22",
        "re_sigma12",
        "im_sigma12",
        "sigma00",
    ]
    rows = [
        [
            p0,
            p1,
            state.sigma11,
            state.sigma22,
            state.sigma12.real,
            state.sigma12.imag,
            state.sigma00,
        ]
    ]
    return columns, rows, resolved, {}


def _run_dwell(scenario):
    pair, resolved = _single_particle_model(scenario.sections)
    tau = dwell_time(pair)
    columns = ["tau", "rate"]
    rows = [[tau, 1.0 / tau]]
    return columns, rows, resolved, {}


def _run_oracle_compare(scenario):
    pair, resolved = _single_particle_model(scenario.sections)
    (b1, b2), res_init = _resolve_initial(scenario.sections)
    times, res_grid = _resolve_grid(scenario.sections, default_t_max=8.0 / (pair.gamma1 + pair.gamma2))
    resolved.update(res_init)
    resolved.update(res_grid)
    n_levels = _parse_number(scenario.sections, "oracle", "n_levels", default=2000, kind=int)
    cutoff = _parse_number(scenario.sections, "oracle", "cutoff", default=None)
    method = _parse_choice(
        scenario.sections, "oracle", "method", ("auto", "dense", "chebyshev"), "auto"
    )
    resolved.update({"oracle.n_levels": n_levels, "oracle.method": method})
    if cutoff is not None:
        resolved["oracle.cutoff"] = cutoff
    initial = SingleParticleState.from_amplitudes(b1, b2)
    reference = master_trajectory(pair, initial, times)
    oracle_run = single_particle_trajectory(
        pair, (b1, b2), times, n_levels=n_levels, cutoff=cutoff, method=method
    )
    err = np.abs(oracle_run.trajectory.sigma11 - reference.sigma11)
    columns = ["t", "sigma11_reference", "sigma11_oracle", "abs_error"]
    rows = [
        [
            float(times[k]),
            float(reference.sigma11[k]),
            float(oracle_run.trajectory.sigma11[k]),
            float(err[k]),
        ]
        for k in range(len(times))
    ]
    extra = {"oracle": convergence_report(oracle_run)}
    extra["oracle"]["max_abs_error_sigma11"] = float(err.max())
    return columns, rows, resolved, extra


def _run_fermions(scenario):
    op = _parse_choice(scenario.sections, "fermions", "op", _FERMION_OPS, "two_electron")
    resolved = {"fermions.op": op}
    if op == "two_electron":
        y = _parse_number(scenario.sections, "fermions", "y", default=1.0)
        eta = _parse_eta(scenario.sections, "fermions")
        resolved.update({"fermions.y": y, "fermions.eta": eta})
        branches = two_electron_asymptotic(y, eta=eta)
    else:
        model, res_model = _resolve_model(scenario.sections)
        if not isinstance(model, ParallelWellPair):
            raise ConfigError(
                f"model.yprime: fermions op {op!r} needs a parallel-level model"
            )
        resolved.update(res_model)
        if op == "two_electron_parallel":
            branches = two_electron_parallel_asymptotic(model)
        else:
            branches = [three_electron_asymptotic(model)]
    payload = branches_to_json(branches)
    columns = [
        "reservoir_count",
        "probability",
        "occupation",
        "re_amplitude",
        "im_amplitude",
    ]
    rows = []
    for branch in payload:
        for term in branch["terms"]:
            rows.append(
                [
                    branch["reservoir_count"],
                    branch["probability"],
                    "".join(str(bit) for bit in term["occupation"]),
                    term["amplitude"][0],
                    term["amplitude"][1],
                ]
            )
    return columns, rows, resolved, {"branches": payload}


def _run_bosons(scenario):
    law = _parse_choice(scenario.sections, "bosons", "law", _BOSON_LAWS, "emission")
    resolved = {"bosons.law": law}
    if law == "emission":
        n1 = _parse_number(scenario.sections, "bosons", "n1", default=1, kind=int)
        n2 = _parse_number(scenario.sections, "bosons", "n2", default=1, kind=int)
        y = _parse_number(scenario.sections, "bosons", "y", default=1.0)
        eta = _parse_eta(scenario.sections, "bosons")
        resolved.update({"bosons.n1": n1, "bosons.n2": n2, "bosons.y": y, "bosons.eta": eta})
        dist = emission_distribution(rotate_fock(n1, n2, y, eta=eta))
    elif law == "equal_fill":
        n = _parse_number(scenario.sections, "bosons", "n", default=1, kind=int)
        resolved["bosons.n"] = n
        dist = equal_fill_even_distribution(n)
    elif law == "one_well":
        n = _parse_number(scenario.sections, "bosons", "n", default=1, kind=int)
        y = _parse_number(scenario.sections, "bosons", "y", default=1.0)
        resolved.update({"bosons.n": n, "bosons.y": y})
        dist = one_well_distribution(n, y)
    else:
        n_retained = _parse_number(
            scenario.sections, "bosons", "n_retained", default=1, kind=int
        )
        y = _parse_number(scenario.sections, "bosons", "y", default=1.0)
        resolved.update({"bosons.n_retained": n_retained, "bosons.y": y})
        dist = retained_state_split(n_retained, y)
    columns = ["m", "probability"]
    rows = [[m, p] for m, p in distribution_rows(dist)]
    return columns, rows, resolved, {}


def _sweep_values(sections, key):
    sec = sections.get("sweep", {})
    if key not in sec:
        return None
    raw = [item.strip() for item in sec[key].split(",") if item.strip()]
    if not raw:
        raise ConfigError(f"sweep.{key}: empty sweep axis")
    try:
        return [float(item) for item in raw]
    except ValueError:
        raise ConfigError(f"sweep.{key}: cannot parse {sec[key]!r} as floats") from None


def _sweep_point_model(base_kwargs, assignments):
    kwargs = dict(base_kwargs)
    for axis, value in assignments:
        if axis == "y":
            kwargs.pop("gamma2", None)
            kwargs["y"] = value
        elif axis == "u":
            kwargs["u"] = value
        else:
            kwargs[axis] = value
    model, _ = _model_from_width_kwargs(kwargs)
    return model


def _sweep_report(pair, report, sections):
    d = derive(pair)
    total = d.gamma1 + d.gamma2
    if report == "sigma11_asymptotic":
        t_long = _parse_number(sections, "sweep", "t_max", default=60.0 / total)
        state = evolve_master(pair, SingleParticleState.from_amplitudes(1.0, 0.0), t_long)
        return state.sigma11
    if report == "p_trapped":
        return asymptotic_probs(pair, (1.0, 0.0))[0]
    # Decay fit: sample the occupation after the fast bright transient has
    # died (12 / Gamma'2) over two predicted lifetimes and fit a single
    # exponential.  The prediction fixes only the fit window, not the value.
    tau_pred = dwell_time(pair)
    t0 = 12.0 / total
    times = np.linspace(t0, t0 + 2.0 * tau_pred, 48)
    traj = master_trajectory(pair, SingleParticleState.from_amplitudes(1.0, 0.0), times)
    rate = fit_decay_rate(times, traj.occupation)
    return 1.0 / rate if report == "fitted_tau" else rate


def _run_sweep(scenario):
    sections = scenario.sections
    sec = sections.get("sweep", {})
    if "axis" not in sec:
        raise ConfigError("sweep.axis: required key is missing")
    axis1 = _parse_choice(sections, "sweep", "axis", _SWEEP_AXES, None)
    values1 = _sweep_values(sections, "values")
    if values1 is None:
        raise ConfigError("sweep.values: required key is missing")
    axis2 = None
    values2 = None
    if "axis2" in sec or "values2" in sec:
        axis2 = _parse_choice(sections, "sweep", "axis2", _SWEEP_AXES, None)
        values2 = _sweep_values(sections, "values2")
        if values2 is None:
            raise ConfigError("sweep.values2: required key is missing")
        if axis2 == axis1:
            raise ConfigError("sweep.axis2: both axes name the same parameter")
    report = _parse_choice(sections, "sweep", "report", _SWEEP_REPORTS, "sigma11_asymptotic")
    max_points = _parse_number(sections, "sweep", "max_points", default=64, kind=int)
    n_points = len(values1) * (len(values2) if values2 else 1)
    if n_points > max_points:
        raise ConfigError(
            f"sweep.values: {n_points} grid points exceed the cap of {max_points}"
        )
    base_kwargs = _width_kwargs(sections)
    if base_kwargs.get("yprime") is not None and axis1 != "yprime" and axis2 != "yprime":
        raise ConfigError("model.yprime: sweeps run single-particle models only")
    resolved = {
        "sweep.axis": axis1,
        "sweep.values": values1,
        "sweep.report": report,
        "sweep.max_points": max_points,
    }
    if axis2 is not None:
        resolved["sweep.axis2"] = axis2
        resolved["sweep.values2"] = values2
    columns = [axis1] + ([axis2] if axis2 else []) + [report]
    rows = []
    for v1 in values1:
        inner = values2 if values2 else [None]
        for v2 in inner:
            assignments = [(axis1, v1)]
            if axis2 is not None:
                assignments.append((axis2, v2))
            model = _sweep_point_model(base_kwargs, assignments)
            if isinstance(model, ParallelWellPair):
                raise ConfigError("sweep.axis: parallel-level sweeps are not supported")
            value = _sweep_report(model, report, sections)
            row = [v1] + ([v2] if axis2 is not None else []) + [float(value)]
            rows.append(row)
    return columns, rows, resolved, {}


_RUNNERS = {
    "evolve": _run_evolve,
    "asymptotic": _run_asymptotic,
    "dwell": _run_dwell,
    "oracle-compare": _run_oracle_compare,
    "fermions": _run_fermions,
    "bosons": _run_bosons,
    "sweep": _run_sweep,
}


def _format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return format_float(float(value))


def _render_csv(digest: str, columns, rows) -> bytes:
    lines = [f"# manifest-sha256 {digest}", ",".join(columns)]
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    return ("\n".join(lines) + "\n").encode()


def _json_safe(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_json_safe(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, (int, float, str)):
        return value
    return str(value)


def _render_json(digest: str, manifest, columns, rows, extra) -> bytes:
    payload = {
        "manifest_sha256": digest,
        "manifest": manifest,
        "columns": columns,
        "rows": _json_safe(rows),
    }
    for key, value in extra.items():
        payload[key] = _json_safe(value)
    return (json.dumps(payload, indent=2, sort_keys=True) + "\n").encode()


def render(scenario: Scenario) -> RunResult:
    """Compute a scenario's outputs in memory without touching the disk."""
    runner = _RUNNERS[scenario.kind]
    try:
        columns, rows, resolved, extra = runner(scenario)
    except ConfigError:
        raise
    except (ValueError, RuntimeError) as exc:
        raise RuntimeError(f"scenario {scenario.kind!r}: {exc}") from exc
    manifest = {
        "kind": scenario.kind,
        "format": scenario.fmt,
        "output": scenario.out,
        "parameters": _json_safe(resolved),
        "versions": {
            "darkwells": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
    }
    for key, value in extra.items():
        manifest[key] = _json_safe(value)
    manifest_bytes = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode()
    digest = hashlib.sha256(manifest_bytes).hexdigest()
    if scenario.fmt == "csv":
        data = _render_csv(digest, columns, rows)
    else:
        data = _render_json(digest, manifest, columns, rows, extra)
    files = {
        scenario.out: data,
        scenario.out + ".manifest.json": manifest_bytes,
    }
    return RunResult(manifest=manifest, manifest_sha256=digest, files=files)


def run(scenario: Scenario) -> RunResult:
    """Render a scenario and write its files.

    With ``seedless`` set, everything is computed twice and the two byte
    streams must match exactly; any mismatch means hidden nondeterminism
    and aborts before anything is written.
    """
    result = render(scenario)
    if scenario.seedless:
        again = render(scenario)
        if again.files != result.files:
            raise RuntimeError(
                "seedless check failed: two renders of the same scenario "
                "produced different bytes"
            )
    for path, content in result.files.items():
        with open(path, "wb") as fh:
            fh.write(content)
    return result


def build_scenario(kind, config, out=None, fmt=None, seedless=False) -> Scenario:
    """Merge a parsed config with command-line overrides."""
    config_kind = config.get("scenario", {}).get("kind")
    if config_kind is not None and config_kind != kind:
        raise ConfigError(
            f"scenario.kind: config says {config_kind!r} but the command line "
            f"asked for {kind!r}"
        )
    out_sec = config.get("output", {})
    out_path = out if out is not None else out_sec.get("path", f"{kind}.csv")
    fmt_value = fmt if fmt is not None else out_sec.get("format", "csv")
    return Scenario(
        kind=kind, sections=config, out=out_path, fmt=fmt_value, seedless=seedless
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="darkwells",
        description="Deterministic simulations of two wells coupled through "
        "a common reservoir: trapped dark states, emission statistics, and "
        "a brute-force discretized oracle.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        p = sub.add_parser(kind, help=f"run a {kind} scenario")
        p.add_argument("--config", help="INI scenario file")
        p.add_argument("--out", help="output data file path")
        p.add_argument("--format", choices=FORMATS, help="output format")
        p.add_argument(
            "--seedless",
            action="store_true",
            help="assert full determinism by computing everything twice",
        )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else {}
        scenario = build_scenario(
            args.kind, config, out=args.out, fmt=args.format, seedless=args.seedless
        )
        result = run(scenario)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in sorted(result.files):
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
