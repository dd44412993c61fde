"""Command-line front end: config ingestion, scenario presets and tabular output.

Every subcommand reads an optional JSON config (``--config``), validates it
completely before computing anything, and writes its outputs only after
all computation succeeded.  Tables go to CSV (or JSON with
``--format json``) with a header row and 17 significant digits; every run
also writes ``summary.json``, in which each number carries a unit and the
module that produced it.

Exit codes: 0 success, 2 invalid config, 3 numeric failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import copy
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from . import chemshift, diffusion, pulse_filter, spin_bath
from .core import FieldConfig, NvSensor, SampleModel, nucleus
from .correlation import CorrelationConfig, synthesize_timeseries
from .sampling import (
    GENERATOR_PLAN,
    PROTON_PLAN,
    SamplingPlan,
    alias_frequency,
    max_fold_index,
    valid_rate_interval,
)
from .spectral import FitError, TimeSeries, fit_exp_envelope, fit_line, periodogram

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

COMMANDS = ("filter", "correlate", "bath", "plan", "spectrum", "chemshift", "diffusion-fit", "scenario")

# blocks a subcommand cannot run without
REQUIRED = {
    "filter": ("pulse",),
    "plan": ("sampling",),
    "correlate": ("signal", "sampling"),
    "spectrum": ("spectrum",),
    "bath": ("bath",),
    "chemshift": ("chemshift",),
    "diffusion-fit": ("diffusion",),
    "scenario": ("scenario",),
}

DEFAULT_SENSOR = {"depth_nm": 5.0, "t1_ms": 1.7, "t2_us": 10.0}

PRESETS = {
    "fig2-generator": {
        "sensor": {"depth_nm": 5.0, "t1_ms": 1.7, "t2_us": 10.0},
        "signal": {"freq_hz": 1.7e6, "amplitude": 1.0, "noise_sigma": 0.0},
        "sampling": dict(GENERATOR_PLAN, duration_us=30000.0),
        "spectrum": {"zero_pad": 8, "model": "lorentzian", "envelope": True},
    },
    "fig3-chemshift": {
        "chemshift": {
            "molecules": [
                {"name": m, "nucleus": n}
                for m in ("acetic acid", "methyl formate") for n in ("1H", "13C")
            ],
            "fields_tesla": [5.0, 1.0],
            "resolutions_hz": [470.0, 110e3],
            "lineshape": "lorentzian",
        },
    },
    "fig4-proton": {
        "sensor": {"depth_nm": 5.0, "t1_ms": 2.1, "t2_us": 10.0},
        "sample": {"nucleus": "1H", "density_per_nm3": 50.0, "diffusion_nm2_per_us": 0.19,
                   "intrinsic_linewidth_hz": 40.0},
        "field": {"b_gauss": 400.0},
        "pulse": {"repeats": 4, "tau_us": pulse_filter.DEFAULT_TAU_US},
        "sampling": dict(PROTON_PLAN, n_samples=64),
        "bath": {"n_pairs": 3000, "dt_us": 0.1, "t_max_us": 2000.0, "workers": 1},
        "diffusion": {
            "synthetic": {"D": 0.15, "depths_nm": [2, 3, 4, 5, 7, 10], "rel_noise": 0.2},
            "floor_hz": 5e3,
            "censoring": "upper-bound",
        },
    },
    "custom": {},
}

# order in which a custom scenario runs the blocks it contains
_CUSTOM_ORDER = ("plan", "filter", "correlate", "spectrum", "bath", "chemshift", "diffusion-fit")
_SCENARIO_STEPS = {
    "fig2-generator": ("plan", "correlate", "spectrum"),
    "fig3-chemshift": ("chemshift",),
    "fig4-proton": ("plan", "filter", "bath", "diffusion-fit", "budget"),
}


class ConfigError(ValueError):
    """Invalid configuration; ``errors`` lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class Bundle:
    """In-memory result of a run: tables, JSON documents and summary quantities."""

    tables: dict = field(default_factory=dict)  # name -> (columns, 2-D array)
    documents: dict = field(default_factory=dict)  # name -> JSON-able object
    quantities: dict = field(default_factory=dict)  # name -> {value, unit, source}
    notes: dict = field(default_factory=dict)

    def quantity(self, name, value, unit, source):
        v = None if value is None or not math.isfinite(value) else value
        if isinstance(v, (np.integer, np.floating)):
            v = v.item()
        self.quantities[name] = {"value": v, "unit": unit, "source": source}
        if v is None and value is not None:
            self.notes[f"{name}_nonfinite"] = repr(float(value))

    def merge(self, other):
        self.tables.update(other.tables)
        self.documents.update(other.documents)
        self.quantities.update(other.quantities)
        self.notes.update(other.notes)
        return self


# ---------------------------------------------------------------- serialisation

def _fmt(x):
    return format(x, ".17g")


def dumps(obj, indent=2, _level=0):
    """JSON text with floats at 17 significant digits; non-finite floats become null."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj)) if math.isfinite(obj) else "null"
    if obj is None:
        return "null"
    return json.dumps(obj)


def _csv_text(columns, data):
    buf = io.StringIO()
    np.savetxt(buf, np.asarray(data, dtype=float), fmt="%.17g", delimiter=",",
               header=",".join(columns), comments="")
    return buf.getvalue()


def _table_json(columns, data):
    return dumps({"columns": list(columns), "data": np.asarray(data, dtype=float).tolist()}) + "\n"


def render_bundle(bundle: Bundle, command, scenario=None, fmt="csv"):
    """Map file names to their text content; nothing touches the disk."""
    files = {}
    for name, (cols, data) in bundle.tables.items():
        if fmt == "csv":
            files[f"{name}.csv"] = _csv_text(cols, data)
        else:
            files[f"{name}.json"] = _table_json(cols, data)
    for name, doc in bundle.documents.items():
        files[f"{name}.json"] = dumps(doc) + "\n"
    summary = {"command": command}
    if scenario:
        summary["scenario"] = scenario
    summary["files"] = sorted(files) + ["summary.json"]
    summary["quantities"] = dict(sorted(bundle.quantities.items()))
    if bundle.notes:
        summary["notes"] = dict(sorted(bundle.notes.items()))
    jsonschema.validate(json.loads(dumps(summary)), load_schema("summary"))
    files["summary.json"] = dumps(summary) + "\n"
    return files


def write_files(files, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for name, text in files.items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def load_schema(name):
    text = resources.files("nvcorr").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


# ---------------------------------------------------------------- config blocks

def _sensor(cfg):
    return NvSensor(**{**DEFAULT_SENSOR, **cfg.get("sensor", {})})


def _sample(cfg):
    s = dict(cfg.get("sample", {}))
    nuc = nucleus(s.pop("nucleus", "1H"))
    return SampleModel(nucleus=nuc, **s)


def _field(cfg):
    f = cfg.get("field", {})
    if "b_tesla" in f and "b_gauss" in f:
        raise ValueError("give either b_gauss or b_tesla, not both")
    if "b_tesla" in f:
        return FieldConfig.from_tesla(f["b_tesla"])
    return FieldConfig(f.get("b_gauss", 400.0))


def _pulse(cfg):
    p = cfg["pulse"]
    return pulse_filter.PulseSequence(p.get("repeats", 4), p.get("tau_us", pulse_filter.DEFAULT_TAU_US))


def _plan(cfg):
    s = dict(cfg["sampling"])
    if "duration_us" in s:
        if "n_samples" in s:
            raise ValueError("give either n_samples or duration_us, not both")
        return SamplingPlan.for_duration(
            s["f_low_hz"], s["f_high_hz"], s["fold_index"], s["duration_us"],
            s.get("fs_hz"), s.get("t0_us", 0.0),
        )
    s.setdefault("n_samples", 1024)
    return SamplingPlan.from_dict(s)


def _signal(cfg, seed):
    s = cfg["signal"]
    decay = s.get("bath_decay_us")
    return CorrelationConfig(
        _sensor(cfg), s.get("freq_hz", 1.7e6),
        bath_decay_us=math.inf if decay is None else decay,
        amplitude=s.get("amplitude", 1.0), noise_sigma=s.get("noise_sigma", 0.0), seed=seed,
    )


def _bath(cfg, seed):
    b = {k: v for k, v in cfg["bath"].items() if k != "workers"}
    return spin_bath.BathConfig(_sample(cfg), sensor_depth_nm=_sensor(cfg).depth_nm, seed=seed, **b)


def _molecules(cfg):
    out = []
    for m in cfg["chemshift"].get("molecules", []):
        if "lines" in m:
            out.append(chemshift.MoleculeSpec.from_dict(m))
        else:
            out.append(chemshift.molecule(m["name"], m["nucleus"]))
    if not out:
        raise ValueError("at least one molecule is required")
    return out


def _points(cfg, seed):
    d = cfg["diffusion"]
    sources = [k for k in ("input", "points", "synthetic") if k in d]
    if len(sources) != 1:
        raise ValueError("give exactly one of input, points or synthetic")
    if "points" in d:
        return [diffusion.DepthBroadeningPoint(**p) for p in d["points"]]
    if "input" in d:
        return read_points_csv(d["input"])
    s = d["synthetic"]
    rng = np.random.default_rng(seed)
    return diffusion.synthetic_points(
        s.get("D", 0.15), s.get("depths_nm", [2, 3, 4, 5, 7, 10]), s.get("rel_noise", 0.0), rng,
        d.get("convention", "ordinary"),
    )


def read_points_csv(path):
    """Depth-scan data: columns depth_nm, broadening_hz[, broadening_err_hz] with a header."""
    data = np.atleast_2d(np.loadtxt(path, delimiter=",", skiprows=1))
    pts = []
    for row in data:
        err = float(row[2]) if len(row) > 2 and np.isfinite(row[2]) else None
        pts.append(diffusion.DepthBroadeningPoint(float(row[0]), float(row[1]), err))
    return pts


def read_timeseries_csv(path):
    """Time series with columns t_us, value and a header row."""
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    return TimeSeries(data[:, 0], data[:, 1])


_BUILDERS = {
    "sensor": lambda c, s: _sensor(c),
    "sample": lambda c, s: _sample(c),
    "field": lambda c, s: _field(c),
    "pulse": lambda c, s: _pulse(c),
    "sampling": lambda c, s: _plan(c),
    "signal": _signal,
    "bath": _bath,
    "chemshift": lambda c, s: _molecules(c),
}


def merged_config(cfg):
    """Scenario preset with the user's blocks laid over it."""
    scenario = cfg.get("scenario", "custom")
    base = copy.deepcopy(PRESETS.get(scenario, {}))
    for k, v in cfg.items():
        if isinstance(v, dict) and isinstance(base.get(k), dict):
            base[k] = {**base[k], **v}
        else:
            base[k] = copy.deepcopy(v)
    return base


def validate_config(cfg, command="scenario"):
    """Every problem with ``cfg`` as a list of messages; empty means valid.

    Pure: nothing is computed beyond constructing the parameter objects,
    and nothing is written.
    """
    if not isinstance(cfg, dict):
        return ["config: must be a JSON object"]
    errors = []
    validator = jsonschema.Draft202012Validator(load_schema("config"))
    for e in sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path)):
        where = ".".join(str(p) for p in e.absolute_path) or "config"
        errors.append(f"{where}: {e.message}")
    if errors:
        return errors
    if command == "scenario":
        if "scenario" not in cfg:
            return ["scenario: required (one of " + ", ".join(PRESETS) + ")"]
        cfg = merged_config(cfg)
    for block in REQUIRED.get(command, ()):
        if block not in cfg:
            errors.append(f"{block}: required for '{command}'")
    seed = cfg.get("seed", 0)
    for block, build in _BUILDERS.items():
        if block not in cfg and block not in ("sensor", "sample", "field"):
            continue
        try:
            build(cfg, seed)
        except (ValueError, KeyError, TypeError) as exc:
            msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
            errors.append(f"{block}: {msg}")
    if "diffusion" in cfg:
        d = cfg["diffusion"]
        try:
            _points(cfg, seed)
            diffusion._scale(d.get("convention", "ordinary"))
            if not 0 < d.get("confidence", 0.95) < 1:
                raise ValueError("confidence must be in (0, 1)")
        except (ValueError, KeyError, TypeError, OSError) as exc:
            errors.append(f"diffusion: {exc}")
    if "spectrum" in cfg and "input" not in cfg["spectrum"]:
        for block in ("signal", "sampling"):
            if block not in cfg:
                errors.append(f"spectrum: needs 'input' or a '{block}' block to synthesise from")
    if "chemshift" in cfg:
        c = cfg["chemshift"]
        if any(not b > 0 for b in c.get("fields_tesla", [5.0])):
            errors.append("chemshift.fields_tesla: fields must be positive")
        if any(not w > 0 for w in c.get("resolutions_hz", [470.0])):
            errors.append("chemshift.resolutions_hz: resolutions must be positive")
    return errors


# ---------------------------------------------------------------- steps

def step_plan(cfg, seed):
    b = Bundle()
    plan = _plan(cfg)
    lo, hi = valid_rate_interval(plan.f_low_hz, plan.f_high_hz, plan.fold_index)
    src = "sampling"
    b.quantity("fs", plan.fs_hz, "Hz", src)
    b.quantity("sample_period", plan.period_us, "us", src)
    b.quantity("n_samples", plan.n_samples, "1", src)
    b.quantity("fold_index", plan.fold_index, "1", src)
    b.quantity("max_fold_index", max_fold_index(plan.f_low_hz, plan.f_high_hz), "1", src)
    b.quantity("fs_interval_low", lo, "Hz", src)
    b.quantity("fs_interval_high", hi, "Hz", src)
    b.quantity("folded_band_low", alias_frequency(plan.f_low_hz, plan.fs_hz), "Hz", src)
    b.quantity("folded_band_high", alias_frequency(plan.f_high_hz, plan.fs_hz), "Hz", src)
    b.documents["plan"] = plan.to_dict()
    return b


def step_filter(cfg, seed):
    b = Bundle()
    seq = _pulse(cfg)
    p = cfg["pulse"]
    sensor = _sensor(cfg)
    f_c = seq.center_frequency_hz
    width = 1.0 / (seq.n_pulses * seq.tau_us * 1e-6)
    f = np.linspace(p.get("f_min_hz", max(f_c - 5 * width, 0.0)), p.get("f_max_hz", f_c + 5 * width),
                    p.get("n_points", 2001))
    b.tables["filter"] = (("f_hz", "filter", "filter_t2"),
                          np.column_stack([f, pulse_filter.filter_function(seq, f),
                                           pulse_filter.filter_function(seq, f, sensor.t2_us)]))
    f_pk, fwhm = pulse_filter.filter_peak(seq)
    src = "pulse_filter"
    b.quantity("filter_center", f_c, "Hz", src)
    b.quantity("filter_peak", f_pk, "Hz", src)
    b.quantity("filter_fwhm", fwhm, "Hz", src)
    b.quantity("effective_linewidth", pulse_filter.effective_linewidth(seq, sensor), "Hz", src)
    b.quantity("n_pulses", seq.n_pulses, "1", src)
    if "sample" in cfg:
        b.quantity("brms_at_depth", pulse_filter.brms_at_depth(_sample(cfg), sensor.depth_nm), "G", src)
    return b


def step_correlate(cfg, seed):
    b = Bundle()
    sig = _signal(cfg, seed)
    plan = _plan(cfg)
    ts = synthesize_timeseries(sig, plan)
    b.tables["timeseries"] = (("t_us", "signal"), np.column_stack([ts.t_us, ts.values]))
    b.quantity("signal_frequency", sig.signal_freq_hz, "Hz", "correlation")
    b.quantity("folded_frequency", alias_frequency(sig.signal_freq_hz, plan.fs_hz), "Hz", "sampling")
    b.quantity("fs", plan.fs_hz, "Hz", "sampling")
    return b


def step_spectrum(cfg, seed):
    b = Bundle()
    s = cfg["spectrum"]
    if "input" in s:
        ts = read_timeseries_csv(s["input"])
    else:
        ts = synthesize_timeseries(_signal(cfg, seed), _plan(cfg))
        b.tables["timeseries"] = (("t_us", "signal"), np.column_stack([ts.t_us, ts.values]))
    spec = periodogram(ts, s.get("zero_pad", 1))
    b.tables["spectrum"] = (("f_hz", "power"), np.column_stack([spec.f_hz, spec.power]))
    fit = fit_line(spec, s.get("model", "lorentzian"))
    doc = {"line": fit.to_dict(), "bin_width_hz": periodogram(ts).df_hz}
    src = "spectral"
    b.quantity("folded_peak", fit.f0_hz, "Hz", src)
    b.quantity("fwhm", fit.fwhm_hz, "Hz", src)
    b.quantity("bin_width", doc["bin_width_hz"], "Hz", src)
    if "sampling" in cfg:
        f_true = _dealias(fit.f0_hz, _plan(cfg))
        doc["dealiased_hz"] = f_true
        b.quantity("dealiased_frequency", f_true, "Hz", "sampling")
    if s.get("envelope", False):
        tau = fit_exp_envelope(ts)
        doc["envelope_decay_ms"] = tau
        b.quantity("envelope_decay", tau, "ms", src)
    b.documents["fit"] = doc
    return b


def _dealias(f_folded, plan):
    """Frequency in the plan's Nyquist zone that folds to ``f_folded``.

    A fitted centre is off the true alias by a fraction of a bin, so it is
    mapped through the known zone rather than by exact pre-image search.
    Odd zones keep the orientation of the spectrum, even zones reverse it.
    """
    n, fs = plan.fold_index, plan.fs_hz
    if n % 2:
        return (n - 1) / 2 * fs + f_folded
    return n / 2 * fs - f_folded


def step_bath(cfg, seed):
    b = Bundle()
    bc = _bath(cfg, seed)
    workers = cfg["bath"].get("workers", 1)
    trace = spin_bath.simulate_bath(bc, workers=workers)
    src = "spin_bath"
    b.tables["trace"] = (("t_us", "b_gauss"), np.column_stack([trace.t_us, trace.values]))
    try:
        acf = spin_bath.autocorrelation(trace)
    except spin_bath.DegenerateTraceError as exc:
        b.notes["autocorrelation"] = str(exc)
    else:
        b.tables["autocorr"] = (("t_us", "c"), np.column_stack([acf.t_us, acf.values]))
        b.quantity("autocorr_decay_time", spin_bath.decay_time(acf), "us", src)
    D = bc.sample.diffusion_nm2_per_us
    b.quantity("msd_decay_time", spin_bath.msd_decay_time(D, bc.sensor_depth_nm), "us", src)
    brms = pulse_filter.brms_at_depth(bc.sample, bc.sensor_depth_nm)
    var = trace.ensemble_variance()
    b.quantity("brms_analytic", brms, "G", "pulse_filter")
    b.quantity("brms_simulated", math.sqrt(var), "G", src)
    b.quantity("variance_ratio", var / brms**2, "1", src)
    b.quantity("diffusion", D, "nm^2/us", "core_model")
    b.quantity("sensor_depth", bc.sensor_depth_nm, "nm", "core_model")
    return b


def step_chemshift(cfg, seed):
    b = Bundle()
    c = cfg["chemshift"]
    shape = c.get("lineshape", "lorentzian")
    matrix = []
    for mol in _molecules(cfg):
        for bt in c.get("fields_tesla", [5.0]):
            fc = FieldConfig.from_tesla(bt)
            lines = chemshift.line_frequencies(mol, fc)
            for w in c.get("resolutions_hz", [470.0]):
                spec = chemshift.synth_spectrum(mol, fc, w, shape)
                tag = f"chemshift_{mol.name.replace(' ', '-')}_{mol.nucleus.name}_{_fmt(bt)}T_{_fmt(w)}Hz"
                b.tables[tag] = (("f_hz", "intensity"), np.column_stack([spec.f_hz, spec.power]))
                pairs = chemshift.resolvable(mol, fc, w, shape)
                matrix.append({
                    "molecule": mol.name, "nucleus": mol.nucleus.name, "field_tesla": bt,
                    "resolution_hz": w, "line_hz": [f for f, _ in lines],
                    "pairs": [{"i": i, "j": j, "resolved": r} for (i, j), r in pairs.items()],
                    "resolved": all(pairs.values()) if pairs else False,
                    "maxima": chemshift.count_maxima(spec),
                })
                key = f"{mol.name}|{mol.nucleus.name}|{_fmt(bt)}T|{_fmt(w)}Hz"
                b.notes[f"resolved:{key}"] = matrix[-1]["resolved"]
    b.documents["resolvability"] = {"shift_table_version": chemshift.SHIFT_TABLE_VERSION, "entries": matrix}
    b.quantity("n_spectra", len(matrix), "1", "chemshift")
    return b


def step_diffusion(cfg, seed):
    b = Bundle()
    d = cfg["diffusion"]
    pts = _points(cfg, seed)
    fit = diffusion.fit_diffusion(
        pts, floor_hz=d.get("floor_hz", 0.0), censoring=d.get("censoring", "upper-bound"),
        convention=d.get("convention", "ordinary"), n_boot=d.get("n_boot", 1000),
        confidence=d.get("confidence", 0.95), seed=seed, bootstrap=d.get("bootstrap", "parametric"),
    )
    b.tables["depth_scan"] = (
        ("depth_nm", "broadening_hz", "model_hz"),
        np.array([[p.depth_nm, p.broadening_hz, diffusion.broadening(fit.D, p.depth_nm, fit.convention)]
                  for p in pts]),
    )
    b.documents["diffusion_fit"] = fit.to_dict()
    src = "diffusion"
    b.quantity("D", fit.D, "nm^2/us", src)
    b.quantity("D_ci_low", fit.ci_low, "nm^2/us", src)
    b.quantity("D_ci_high", fit.ci_high, "nm^2/us", src)
    b.quantity("n_censored", fit.n_censored, "1", src)
    b.notes["convention"] = fit.convention
    b.notes["censoring"] = fit.censoring
    return b


def step_budget(cfg, seed):
    b = Bundle()
    sensor, sample = _sensor(cfg), _sample(cfg)
    budget = diffusion.combined_linewidth(sensor, sample)
    for k, v in budget.to_dict().items():
        b.quantity(f"linewidth_{k[:-3]}", v, "Hz", "diffusion")
    if "pulse" in cfg:
        tau = _pulse(cfg).tau_us
        for n in (4, 8):
            b.quantity(f"xy8_{n}_linewidth",
                       pulse_filter.effective_linewidth(pulse_filter.PulseSequence(n, tau), sensor),
                       "Hz", "pulse_filter")
    return b


STEPS = {
    "plan": step_plan,
    "filter": step_filter,
    "correlate": step_correlate,
    "spectrum": step_spectrum,
    "bath": step_bath,
    "chemshift": step_chemshift,
    "diffusion-fit": step_diffusion,
    "budget": step_budget,
}

_BLOCK_OF = {"plan": "sampling", "filter": "pulse", "correlate": "signal", "spectrum": "spectrum",
             "bath": "bath", "chemshift": "chemshift", "diffusion-fit": "diffusion"}


def run_command(command, cfg):
    """Validate ``cfg`` and run one subcommand; returns a :class:`Bundle`."""
    errors = validate_config(cfg, command)
    if errors:
        raise ConfigError(errors)
    seed = cfg.get("seed", 0)
    if command == "scenario":
        return run_scenario(cfg)
    return STEPS[command](cfg, seed)


def run_scenario(cfg):
    """Run a preset (or custom) scenario; deterministic for a fixed config and seed."""
    errors = validate_config(cfg, "scenario")
    if errors:
        raise ConfigError(errors)
    scenario = cfg["scenario"]
    full = merged_config(cfg)
    seed = full.get("seed", 0)
    if scenario == "custom":
        steps = [s for s in _CUSTOM_ORDER if _BLOCK_OF[s] in full]
        if "spectrum" in steps and "correlate" in steps:
            steps.remove("correlate")
    else:
        steps = _SCENARIO_STEPS[scenario]
    bundle = Bundle()
    for s in steps:
        bundle.merge(STEPS[s](full, seed))
    bundle.quantity("seed", seed, "1", "cli")
    return bundle


# ---------------------------------------------------------------- entry point

def build_parser():
    p = argparse.ArgumentParser(prog="nvcorr", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "filter": "XY8 filter function, peak and linewidth",
        "correlate": "synthesise an under-sampled correlation signal",
        "bath": "Monte Carlo field of a diffusing spin bath",
        "plan": "check an under-sampling plan",
        "spectrum": "periodogram and line fit of a time series",
        "chemshift": "chemical-shift spectra and resolvability",
        "diffusion-fit": "fit D to broadening-vs-depth data",
        "scenario": "run a preset or a custom scenario",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=helps[name])
        s.add_argument("--config", help="JSON config file")
        s.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
        s.add_argument("--out", help="output directory (default: current directory)")
        s.add_argument("--format", choices=("csv", "json"), help="table format (default csv)")
        if name == "scenario":
            s.add_argument("name", nargs="?", choices=tuple(PRESETS), help="preset (overrides the config)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if isinstance(cfg, dict):
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                print("error: --seed must be an unsigned 64-bit integer", file=sys.stderr)
                return EXIT_CONFIG
            cfg["seed"] = args.seed
        if getattr(args, "name", None):
            cfg["scenario"] = args.name
    fmt = args.format or (cfg.get("format", "csv") if isinstance(cfg, dict) else "csv")
    out = args.out or (cfg.get("out") if isinstance(cfg, dict) else None) or "."
    try:
        bundle = run_command(args.command, cfg)
        files = render_bundle(bundle, args.command, cfg.get("scenario"), fmt)
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (FitError, diffusion.UnfittableError, spin_bath.DegenerateTraceError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        write_files(files, out)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    print(os.path.join(out, "summary.json"))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
