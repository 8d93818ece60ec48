"""Batch scenarios: JSON config in, CSV data and a JSON summary out."""

from __future__ import annotations

import csv
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from revdis import effective as eff
from revdis import engine
from revdis.elimination import born_markov_rates
from revdis.errors import ConfigurationError, RevdisError
from revdis.operators import HilbertDims, thermal_tail
from revdis.params import SpectrumSeries, SystemParams
from revdis.thermometry import fit_lorentzian, infer_from_fit, infer_temperature

SCHEMA = "revdis.config/v1"
SCENARIOS = ("fig1", "fig2", "fig3", "fig4", "fig5", "compare", "spectrum", "thermometry")
TOP_LEVEL_KEYS = {"schema", "scenario", "params", "grids", "dims", "output_dir", "seed"}
REQUIRED_KEYS = ("schema", "scenario")
SPECTRUM_MODELS = ("effective_quadratic", "effective_linear", "full_quadratic", "full_linear")


class ConfigError(ConfigurationError):
    """Invalid scenario configuration; ``errors`` lists every violation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


def _lin(lo, hi, n):
    return {"min": lo, "max": hi, "count": n}


def _vals(*v):
    return {"values": list(v)}


# per-scenario parameter defaults; keys outside these tables are rejected
PARAM_DEFAULTS = {
    "fig1": {"omega_m": 1.0, "g0_quad": 5e-7, "kappa": 0.0025},
    "fig2": {"n_bar_o": 1.0, "include_critical": True},
    "fig3": {"kappa": 0.0025, "n_bar_o": 1.0, "C2": 1.0, "delta_c": -2.0,
             "spectrum_method": "closed_form"},
    "fig4": {"kappa": 1.0, "C1": 1.0},
    "fig5": {"n_bar_o": 1.0},
    "compare": {"coupling": "quadratic", "C": 1.0, "kappa": 1.0, "n_bar_o": 1.0, "n_bar_m": 0.5,
                "alpha": 100.0},
    "spectrum": {"model": "effective_quadratic", "C": 1.0, "kappa": 0.0025, "gamma_over_kappa": 100.0,
                 "n_bar_o": 1.0, "n_bar_m": 0.5, "delta_c": -2.0, "alpha": 100.0},
    "thermometry": {"kappa": 0.0025, "C2": 1.0, "n_bar_o": 1.0, "delta_c": -2.0,
                    "omega_m_si": 2 * math.pi * 1e6, "noise_rel": 0.0, "n_repeats": 1,
                    "n_points": 400, "span_fwhm": 10.0, "spectrum_method": "resolvent"},
}

GRID_DEFAULTS = {
    "fig1": {"delta_c": _lin(-3.0, -1.5, 151), "eta": _lin(0.0, 1000.0, 201)},
    "fig2": {"n_bar_m": _lin(0.0, 5.0, 101), "C2": {"min": 0.1, "max": 10.0, "count": 41, "scale": "log"}},
    "fig3": {"n_bar_m": _vals(0.0, 0.5, 2.414, 3.6), "omega": _lin(-2.1, -1.9, 801),
             "n_bar_m_inset": _lin(0.0, 5.0, 101)},
    "fig4": {"n_bar_m": _lin(0.0, 5.0, 101), "C2": _vals(0.1, 0.5, 1.0)},
    "fig5": {"n_bar_m": _lin(0.0, 5.0, 101), "C1": {"min": 0.1, "max": 10.0, "count": 41, "scale": "log"}},
    "compare": {"gamma_over_kappa": _vals(10.0, 100.0, 1000.0)},
    "spectrum": {"detuning": _lin(-0.05, 0.05, 201)},
    "thermometry": {"n_bar_m": _vals(0.5, 1.0, 2.414, 3.6)},
}

DIMS_DEFAULTS = {
    "fig3": {"n_cav": 60, "n_mech": 2},
    "compare": {"n_cav": 8, "n_mech": 30},
    "spectrum": {"n_cav": 8, "n_mech": 30},
    "thermometry": {"n_cav": 60, "n_mech": 2},
}

_CHOICES = {
    "spectrum_method": ("closed_form", "resolvent"),
    "coupling": ("quadratic", "linear"),
    "model": SPECTRUM_MODELS,
}
_POSITIVE = {"omega_m", "kappa", "omega_m_si", "gamma_over_kappa", "alpha", "span_fwhm"}
_INTEGER = {"n_repeats": 1, "n_points": 8}
_BOOLEAN = {"include_critical"}


@dataclass
class ScenarioConfig:
    scenario: str
    params: dict
    grids: dict
    dims: HilbertDims | None
    output_dir: Path
    seed: int = 0
    schema: str = SCHEMA

    def axis(self, name):
        return grid_values(self.grids[name])

    def echo(self):
        return {
            "schema": self.schema,
            "scenario": self.scenario,
            "params": dict(self.params),
            "grids": {k: dict(v) for k, v in self.grids.items()},
            "dims": None if self.dims is None else {"n_cav": self.dims.n_cav, "n_mech": self.dims.n_mech},
            "seed": self.seed,
        }


@dataclass
class RunSummary:
    scenario: str
    parameters: dict
    derived: dict
    files: list
    wall_time_s: float
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {"scenario": self.scenario, "parameters": self.parameters, "derived": self.derived,
                "files": self.files, "wall_time_s": self.wall_time_s, "warnings": self.warnings}


def grid_values(spec):
    if "values" in spec:
        return np.array(spec["values"], dtype=float)
    if spec.get("scale", "linear") == "log":
        return np.geomspace(spec["min"], spec["max"], spec["count"])
    return np.linspace(spec["min"], spec["max"], spec["count"])


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _check_grid(name, spec, errors):
    where = f"grids.{name}"
    if not isinstance(spec, dict):
        errors.append(f"{where}: must be an object")
        return
    if "values" in spec:
        extra = set(spec) - {"values"}
        if extra:
            errors.append(f"{where}: unknown keys {sorted(extra)} alongside 'values'")
        vals = spec["values"]
        if not isinstance(vals, list) or not vals or not all(_is_number(v) for v in vals):
            errors.append(f"{where}.values: must be a non-empty list of finite numbers")
        return
    extra = set(spec) - {"min", "max", "count", "scale"}
    if extra:
        errors.append(f"{where}: unknown keys {sorted(extra)}")
    for key in ("min", "max"):
        if not _is_number(spec.get(key)):
            errors.append(f"{where}.{key}: required finite number")
    count = spec.get("count")
    if not isinstance(count, int) or isinstance(count, bool) or count < 2:
        errors.append(f"{where}.count: must be an integer >= 2")
    scale = spec.get("scale", "linear")
    if scale not in ("linear", "log"):
        errors.append(f"{where}.scale: must be 'linear' or 'log'")
    if _is_number(spec.get("min")) and _is_number(spec.get("max")):
        if spec["max"] <= spec["min"]:
            errors.append(f"{where}: max must exceed min")
        if scale == "log" and spec["min"] <= 0:
            errors.append(f"{where}.min: must be > 0 for a log grid")


_GRID_MIN = {"n_bar_m": 0.0, "n_bar_m_inset": 0.0, "C2": 0.0, "C1": 0.0, "eta": 0.0,
             "gamma_over_kappa": 0.0}


def _check_grid_range(name, values, errors):
    lo = _GRID_MIN.get(name)
    if lo is None:
        return
    strict = name in ("gamma_over_kappa",)
    bad = values <= lo if strict else values < lo
    if np.any(bad):
        op = ">" if strict else ">="
        errors.append(f"grids.{name}: values must be {op} {lo:g}")


def _check_param(name, value, errors):
    where = f"params.{name}"
    if name in _CHOICES:
        if value not in _CHOICES[name]:
            errors.append(f"{where}: must be one of {list(_CHOICES[name])}, got {value!r}")
        return
    if name in _BOOLEAN:
        if not isinstance(value, bool):
            errors.append(f"{where}: must be true or false")
        return
    if name in _INTEGER:
        if not isinstance(value, int) or isinstance(value, bool) or value < _INTEGER[name]:
            errors.append(f"{where}: must be an integer >= {_INTEGER[name]}")
        return
    if not _is_number(value):
        errors.append(f"{where}: must be a finite number, got {value!r}")
        return
    if name in _POSITIVE and value <= 0:
        errors.append(f"{where}: must be > 0, got {value!r}")
    elif name not in _POSITIVE and name != "delta_c" and value < 0:
        errors.append(f"{where}: must be >= 0, got {value!r}")


def build_config(data, scenario=None, output_dir=None):
    """Validate a parsed config mapping; raises :class:`ConfigError` listing all problems."""
    errors = []
    if not isinstance(data, dict):
        raise ConfigError([f"config must be a JSON object; required fields: {', '.join(REQUIRED_KEYS)}"])
    for key in REQUIRED_KEYS:
        if key not in data:
            errors.append(f"missing required field '{key}'")
    for key in sorted(set(data) - TOP_LEVEL_KEYS):
        errors.append(f"unknown key '{key}'")
    if "schema" in data and data["schema"] != SCHEMA:
        errors.append(f"schema: expected '{SCHEMA}', got {data['schema']!r}")
    name = data.get("scenario", scenario)
    if scenario is not None and "scenario" in data and data["scenario"] != scenario:
        errors.append(f"scenario: config says {data['scenario']!r} but {scenario!r} was requested")
    if name not in SCENARIOS:
        if name is not None:
            errors.append(f"scenario: must be one of {list(SCENARIOS)}, got {name!r}")
        raise ConfigError(errors)

    params = dict(PARAM_DEFAULTS[name])
    raw_params = data.get("params", {})
    if not isinstance(raw_params, dict):
        errors.append("params: must be an object")
        raw_params = {}
    for key, value in raw_params.items():
        if key not in params:
            errors.append(f"params.{key}: unknown parameter for scenario {name}")
            continue
        _check_param(key, value, errors)
        params[key] = value
    if name == "thermometry" and _is_number(params["C2"]) and params["C2"] <= 0:
        errors.append("params.C2: must be > 0 for thermometry")

    grids = {k: dict(v) for k, v in GRID_DEFAULTS[name].items()}
    raw_grids = data.get("grids", {})
    if not isinstance(raw_grids, dict):
        errors.append("grids: must be an object")
        raw_grids = {}
    for key, spec in raw_grids.items():
        if key not in grids:
            errors.append(f"grids.{key}: unknown axis for scenario {name}")
            continue
        n_before = len(errors)
        _check_grid(key, spec, errors)
        if len(errors) == n_before:
            grids[key] = dict(spec)
    for key, spec in grids.items():
        try:
            _check_grid_range(key, grid_values(spec), errors)
        except (TypeError, ValueError):
            pass

    dims = None
    if name in DIMS_DEFAULTS:
        raw_dims = dict(DIMS_DEFAULTS[name])
        given = data.get("dims", {})
        if not isinstance(given, dict):
            errors.append("dims: must be an object")
            given = {}
        for key, value in given.items():
            if key not in raw_dims:
                errors.append(f"dims.{key}: unknown key")
            elif not isinstance(value, int) or isinstance(value, bool) or value < 2:
                errors.append(f"dims.{key}: must be an integer >= 2")
            else:
                raw_dims[key] = value
        try:
            dims = HilbertDims(raw_dims["n_cav"], raw_dims["n_mech"])
        except RevdisError as exc:
            errors.append(f"dims: {exc}")
    elif "dims" in data:
        errors.append(f"dims: not used by scenario {name}")

    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        errors.append("seed: must be a non-negative integer")

    out = output_dir if output_dir is not None else data.get("output_dir", ".")
    if not isinstance(out, (str, Path)):
        errors.append("output_dir: must be a path string")
        out = "."
    out = Path(out)
    if out.exists() and not out.is_dir():
        errors.append(f"output_dir: {out} exists and is not a directory")

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(name, params, grids, dims, out, seed, data["schema"])


def validate_config(path, scenario=None, output_dir=None):
    """Read, default and range-check a JSON config file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    if not text.strip():
        raise ConfigError([f"config {path} is empty; required fields: {', '.join(REQUIRED_KEYS)}"])
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config {path} is not valid JSON: {exc}"]) from exc
    return build_config(data, scenario, output_dir)


def _fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


class _Run:
    def __init__(self, config, threads):
        self.cfg = config
        self.p = config.params
        self.threads = max(1, int(threads))
        self.out = config.output_dir
        self.files = []
        self.derived = {}
        self.warnings = []

    def csv(self, name, header, rows):
        path = self.out / name
        write_csv(path, header, rows)
        self.files.append(name)

    def map(self, fn, items):
        if self.threads > 1:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                return list(pool.map(fn, items))
        return [fn(x) for x in items]

    def fig1(self):
        p = self.p
        dc = self.cfg.axis("delta_c")
        eta = self.cfg.axis("eta")
        rows = []
        for e in eta:
            alpha = np.abs(eff.cavity_amplitude(e, dc, p["kappa"]))
            rows.extend((d, e, a) for d, a in zip(dc, alpha))
        self.csv("fig1.csv", ["delta_c(omega_m)", "eta(omega_m)", "abs_alpha(1)"], rows)

        res_rows = []
        worst = 0.0
        for e in eta:
            sp = SystemParams(omega_m=p["omega_m"], g0_quad=p["g0_quad"], kappa=p["kappa"], eta=e)
            root = eff.resonance_detuning(sp)
            resid = abs(np.polyval(eff.resonance_polynomial(sp), root))
            worst = max(worst, resid)
            alpha = abs(eff.cavity_amplitude(e, root, p["kappa"]))
            omega_prime = p["omega_m"] + 2 * p["g0_quad"] * alpha**2
            res_rows.append((e, root, alpha, omega_prime, resid))
        self.csv("fig1_resonance.csv",
                 ["eta(omega_m)", "delta_c(omega_m)", "abs_alpha(1)", "omega_m_prime(omega_m)",
                  "residual(omega_m^3)"], res_rows)
        self.derived["max_resonance_residual"] = worst
        self.derived["resonance_detuning_range"] = [res_rows[0][1], res_rows[-1][1]]

    def fig2(self):
        p = self.p
        crit = eff.n_m_crit_quad(p["n_bar_o"])
        nm = self.cfg.axis("n_bar_m")
        if p["include_critical"]:
            nm = np.unique(np.append(nm, crit))
        C2 = self.cfg.axis("C2")
        rows = [(n, c, eff.n_ss_quad(p["n_bar_o"], c, n)) for c in C2 for n in nm]
        self.csv("fig2.csv", ["n_bar_m(quanta)", "C2(1)", "n_ss(quanta)"], rows)
        self.derived["n_m_crit"] = crit
        self.derived["n_m_star"] = {format(c, ".6g"): eff.n_m_star(p["n_bar_o"], c) for c in C2 if c > 0}

    def fig3(self):
        p = self.p
        omega = self.cfg.axis("omega")
        rows, kappas, fitted = [], [], []
        for n in self.cfg.axis("n_bar_m"):
            c = eff.quad_coeffs_c(p["kappa"], p["n_bar_o"], p["C2"], n)
            if p["spectrum_method"] == "resolvent":
                model = engine.build_effective_cavity_model(c.d_e, c.d_a, p["delta_c"], self.cfg.dims.n_cav)
                series = engine.spectrum(model, omega, threads=self.threads)
            else:
                series = eff.lorentzian_spectrum(c, p["delta_c"], omega)
            rows.extend((n, w, s) for w, s in zip(series.omega_grid, series.values))
            kappas.append(c.kappa_eff)
            fitted.append(fit_lorentzian(series).fwhm)
        self.csv("fig3.csv", ["n_bar_m(quanta)", "omega(omega_m_prime)", "S(1/omega_m_prime)"], rows)
        inset = self.cfg.axis("n_bar_m_inset")
        self.csv("fig3_inset.csv", ["n_bar_m(quanta)", "n_ss(quanta)"],
                 [(n, eff.n_ss_quad(p["n_bar_o"], p["C2"], n)) for n in inset])
        self.derived.update(kappa_eff=kappas, fitted_fwhm=fitted,
                            n_m_star=eff.n_m_star(p["n_bar_o"], p["C2"]),
                            n_m_crit=eff.n_m_crit_quad(p["n_bar_o"]))

    def fig4(self):
        p = self.p
        nm = self.cfg.axis("n_bar_m")
        rows = [(n, "linear", p["C1"], k / p["kappa"])
                for n, k in zip(nm, eff.kappa_eff_lin(p["kappa"], p["C1"], nm))]
        slopes = {}
        for c in self.cfg.axis("C2"):
            ks = eff.kappa_eff_quad(p["kappa"], c, nm)
            rows.extend((n, "quadratic", c, k / p["kappa"]) for n, k in zip(nm, ks))
            slopes[format(c, ".6g")] = 2 * p["kappa"] * c
        self.csv("fig4.csv", ["n_bar_m(quanta)", "coupling", "cooperativity(1)", "kappa_eff(kappa)"], rows)
        self.derived["quadratic_slope"] = slopes
        self.derived["linear_kappa_eff"] = p["kappa"] * (1 + p["C1"])

    def fig5(self):
        p = self.p
        nm = self.cfg.axis("n_bar_m")
        rows = [(n, c, eff.n_ss_lin(p["n_bar_o"], c, n)) for c in self.cfg.axis("C1") for n in nm]
        self.csv("fig5.csv", ["n_bar_m(quanta)", "C1(1)", "n_ss(quanta)"], rows)
        self.derived["n_m_crit"] = eff.n_m_crit_lin(p["n_bar_o"])

    def _full_model(self, coupling, C, kappa, gamma, n_bar_o, n_bar_m):
        p = self.p
        if coupling == "quadratic":
            sp, alpha = engine.quadratic_rwa_params(C, kappa, gamma, n_bar_o, n_bar_m, alpha=p["alpha"])
            return engine.build_full_rwa_model(sp, self.cfg.dims, alpha)
        sp = engine.linear_rwa_params(C, kappa, gamma, n_bar_o, n_bar_m)
        return engine.build_linear_rwa_model(sp, self.cfg.dims)

    def _closed_and_kernel(self, coupling, C, kappa, gamma, n_bar_o, n_bar_m):
        if coupling == "quadratic":
            closed = eff.quad_coeffs_c(kappa, n_bar_o, C, n_bar_m)
            g = math.sqrt(C * gamma * kappa / 8)
            emit, absorb = born_markov_rates(g, gamma, n_bar_m)
        else:
            closed = eff.lin_coeffs_c(kappa, n_bar_o, C, n_bar_m)
            g = math.sqrt(C * gamma * kappa / 4)
            emit, absorb = born_markov_rates(g, gamma, n_bar_m, order=1)
        kernel = (kappa * (n_bar_o + 1) + emit, kappa * n_bar_o + absorb)
        return g, closed, kernel[1] / (kernel[0] - kernel[1])

    def compare(self):
        p = self.p
        ratios = self.cfg.axis("gamma_over_kappa")

        def one(r):
            gamma = r * p["kappa"]
            model = self._full_model(p["coupling"], p["C"], p["kappa"], gamma, p["n_bar_o"], p["n_bar_m"])
            rho = engine.steady_state(model)
            a = model.cavity_op
            n_full = float(np.real(np.trace(a.conj().T @ a @ rho)))
            g, closed, n_kernel = self._closed_and_kernel(p["coupling"], p["C"], p["kappa"], gamma,
                                                          p["n_bar_o"], p["n_bar_m"])
            trunc = engine.truncation_report(model, rho)
            return (r, g, n_full, closed.n_ss, abs(n_full - closed.n_ss) / closed.n_ss,
                    n_kernel, abs(n_full - n_kernel) / n_kernel,
                    trunc["cavity_top_population"]), model.info["warnings"] + trunc["warnings"]

        results = self.map(one, ratios)
        rows = [r for r, _ in results]
        for _, w in results:
            self.warnings.extend(w)
        self.csv("compare.csv",
                 ["gamma_over_kappa(1)", "coupling_g(kappa)", "n_ss_full(quanta)", "n_ss_closed_form(quanta)",
                  "rel_err_closed_form(1)", "n_ss_born_markov(quanta)", "rel_err_born_markov(1)",
                  "cavity_top_population(1)"], rows)
        errs = [r[4] for r in rows]
        self.derived["rel_err_closed_form"] = errs
        self.derived["rel_err_born_markov"] = [r[6] for r in rows]
        self.derived["closed_form_error_decreasing"] = bool(np.all(np.diff(errs) < 0))
        self.derived["mech_thermal_tail"] = thermal_tail(p["n_bar_m"], self.cfg.dims.n_mech)

    def spectrum(self):
        p = self.p
        kappa = p["kappa"]
        gamma = p["gamma_over_kappa"] * kappa
        kind = p["model"]
        quad = kind.endswith("quadratic")
        if quad:
            closed = eff.quad_coeffs_c(kappa, p["n_bar_o"], p["C"], p["n_bar_m"])
        else:
            closed = eff.lin_coeffs_c(kappa, p["n_bar_o"], p["C"], p["n_bar_m"])
        if kind.startswith("effective"):
            center = p["delta_c"]
            model = engine.build_effective_cavity_model(closed.d_e, closed.d_a, center, self.cfg.dims.n_cav)
        else:
            # RWA frames rotate the cavity line to zero frequency
            center = 0.0
            model = self._full_model("quadratic" if quad else "linear", p["C"], kappa, gamma,
                                     p["n_bar_o"], p["n_bar_m"])
            self.warnings.extend(model.info["warnings"])
        omega = center + self.cfg.axis("detuning")
        rho = engine.steady_state(model)
        self.warnings.extend(engine.truncation_report(model, rho)["warnings"])
        series = engine.spectrum(model, omega, rho_ss=rho, threads=self.threads)
        reference = eff.lorentzian(series.omega_grid, center, closed.kappa_eff, closed.n_ss)
        self.csv("spectrum.csv", ["omega(omega_m_prime)", "S_resolvent(1/omega_m_prime)",
                                  "S_closed_form(1/omega_m_prime)"],
                 zip(series.omega_grid, series.values, reference))
        self.derived.update(n_ss=series.meta["n_ss"], area=series.area(), kappa_eff_closed_form=closed.kappa_eff,
                            skipped=series.meta["skipped"])
        try:
            self.derived["fitted_fwhm"] = fit_lorentzian(series).fwhm
        except RevdisError as exc:
            self.warnings.append({"kind": "fit_failed", "message": str(exc)})

    def thermometry(self):
        p = self.p
        rng_seeds = [self.cfg.seed + k for k in range(p["n_repeats"])]
        rows = []
        for n_true in self.cfg.axis("n_bar_m"):
            c = eff.quad_coeffs_c(p["kappa"], p["n_bar_o"], p["C2"], n_true)
            half = p["span_fwhm"] * c.kappa_eff
            omega = np.linspace(p["delta_c"] - half, p["delta_c"] + half, p["n_points"])
            if p["spectrum_method"] == "resolvent":
                model = engine.build_effective_cavity_model(c.d_e, c.d_a, p["delta_c"], self.cfg.dims.n_cav)
                clean = engine.spectrum(model, omega, threads=self.threads)
            else:
                clean = eff.lorentzian_spectrum(c, p["delta_c"], omega)
            t_true = infer_temperature(n_true, p["omega_m_si"])
            for seed in rng_seeds:
                values = clean.values
                if p["noise_rel"] > 0:
                    rng = np.random.default_rng(seed)
                    values = values * (1 + p["noise_rel"] * rng.standard_normal(values.size))
                fit = fit_lorentzian(SpectrumSeries(clean.omega_grid, values))
                n_est = infer_from_fit(fit, p["kappa"], p["C2"])
                rel = abs(n_est - n_true) / n_true if n_true > 0 else abs(n_est)
                rows.append((n_true, seed, fit.fwhm, fit.fwhm_stderr, n_est, rel, t_true,
                             infer_temperature(n_est, p["omega_m_si"])))
        self.csv("thermometry.csv",
                 ["n_bar_m_true(quanta)", "seed", "fwhm_fit(omega_m_prime)", "fwhm_stderr(omega_m_prime)",
                  "n_bar_m_inferred(quanta)", "rel_err(1)", "T_true(K)", "T_inferred(K)"], rows)
        self.derived["median_rel_err"] = float(np.median([r[5] for r in rows]))
        self.derived["max_rel_err"] = float(max(r[5] for r in rows))


def run(config: ScenarioConfig, threads=1) -> RunSummary:
    """Execute one scenario and write ``<scenario>.csv`` plus ``<scenario>_summary.json``."""
    start = time.perf_counter()
    config.output_dir.mkdir(parents=True, exist_ok=True)
    job = _Run(config, threads)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        getattr(job, config.scenario)()
    for w in caught:
        job.warnings.append({"kind": w.category.__name__, "message": str(w.message)})
    summary_name = f"{config.scenario}_summary.json"
    summary = RunSummary(config.scenario, config.echo(), job.derived, job.files + [summary_name],
                         time.perf_counter() - start, job.warnings)
    path = config.output_dir / summary_name
    path.write_text(json.dumps(_jsonable(summary.to_dict()), indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
    return summary
