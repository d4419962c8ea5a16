"""Batch command-line driver: JSON scenario configs in, CSV tables out.

    cavityscan run <config.json | preset-name> [--set key=value]...
                   [--seed N] [--out DIR]

A config selects one scenario kind (snr-curve, scan-rate, network-scaling,
gkp-compare, jpa-noise, convert-units), a parameter block for that kind and
a single sweep axis.  Output is a CSV with a header row plus a manifest
JSON recording the tool version, the config hash and the seed, so reruns
with the same config and seed are byte-identical.  Exit codes: 0 success,
1 config validation error, 2 numeric failure.

Sweep points are dispatched to a worker pool (size from the
CAVITYSCAN_WORKERS environment variable, default 1); rows are always
written in sweep order.  Packaged presets: fig4, fig5, fig6, fig7, fig8,
fig10 (see presets/ for the config text; `--set` works on presets too).
"""

import argparse
import csv
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np

from . import __version__
from .cavity import CavityParams, chi_mm_sq, chi_ms_sq, mixing_angles
from .gkp import (GkpParams, error_revised_rate_factor, optimal_coupling_gkp,
                  scan_rate_ratio_gkp, snr_gkp_gaussian)
from .jpa import JpaParams, mc_pump_fluctuation_excess, variance_with_pump_offset
from .network import (NetworkConfig, network_scan_rate, network_snr,
                      optimize_weights, uniform_weights)
from .radiometry import (IntegrationError, optimal_coupling_squeezed, scan_rate,
                         scan_rate_ratio_squeezed, visibility)
from .units import (PhysicalParams, signal_power_classical, signal_power_quantum,
                    to_model_params)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERIC = 0, 1, 2

KINDS = ("snr-curve", "scan-rate", "network-scaling", "gkp-compare",
         "jpa-noise", "convert-units")

SNR_CURVE_QUANTITIES = ("visibility_ql", "visibility_squeezed", "visibility_gkp",
                        "visibility_jpa", "chi_mm_sq", "chi_ms_sq",
                        "sin_theta_mm", "sin_theta_ms", "network_snr_sq")

SWEEP_AXES = {
    "snr-curve": ("omega",),
    "scan-rate": ("beta",),
    "network-scaling": ("m",),
    "gkp-compare": ("s_db",),
    "jpa-noise": ("sigma_c",),
    "convert-units": ("temperature", "omega_c", "b_field", "beta", "q_intrinsic"),
}


class ValidationError(ValueError):
    """Config rejected; message carries the offending field path."""


def _fail(field, message):
    raise ValidationError(f"{field}: {message}")


# ---------------------------------------------------------------------------
# Config loading and validation
# ---------------------------------------------------------------------------

def load_config(spec):
    """Load a config from a JSON file path or a packaged preset name."""
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            return json.load(fh)
    preset = resources.files("cavityscan").joinpath(f"presets/{spec}.json")
    if preset.is_file():
        return json.loads(preset.read_text(encoding="utf-8"))
    raise ValidationError(f"config: no such file or preset {spec!r}")


def apply_overrides(config, assignments):
    """Apply ``--set dotted.path=json_value`` assignments in order."""
    for item in assignments:
        if "=" not in item:
            _fail("--set", f"expected key=value, got {item!r}")
        path, _, raw = item.partition("=")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node = config
        keys = path.split(".")
        for key in keys[:-1]:
            if isinstance(node, list):
                node = node[int(key)]
            else:
                node = node.setdefault(key, {})
        if isinstance(node, list):
            node[int(keys[-1])] = value
        else:
            node[keys[-1]] = value
    return config


def _require(mapping, field, key, types):
    if key not in mapping:
        _fail(f"{field}.{key}", "missing required field")
    value = mapping[key]
    if not isinstance(value, types):
        _fail(f"{field}.{key}", f"expected {types}, got {type(value).__name__}")
    return value


def validate(config):
    if not isinstance(config, dict):
        _fail("config", "must be a JSON object")
    version = config.get("schema_version")
    if version != 1:
        _fail("schema_version", f"unsupported schema version {version!r}")
    kind = _require(config, "config", "kind", str)
    if kind not in KINDS:
        _fail("kind", f"must be one of {KINDS}")
    params = _require(config, "config", "params", dict)
    sweep = _require(config, "config", "sweep", dict)
    name = _require(sweep, "sweep", "name", str)
    if name not in SWEEP_AXES[kind]:
        _fail("sweep.name", f"kind {kind!r} sweeps over one of {SWEEP_AXES[kind]}")
    for key in ("min", "max"):
        _require(sweep, "sweep", key, (int, float))
    count = _require(sweep, "sweep", "count", int)
    if count < 2:
        _fail("sweep.count", "must be >= 2")
    spacing = sweep.get("spacing", "linear")
    if spacing not in ("linear", "log"):
        _fail("sweep.spacing", "must be 'linear' or 'log'")
    if spacing == "log" and sweep["min"] <= 0:
        _fail("sweep.min", "log spacing requires min > 0")
    if sweep["max"] <= sweep["min"]:
        _fail("sweep.max", "must exceed sweep.min")
    output = _require(config, "config", "output", str)
    if not output:
        _fail("output", "must be a nonempty path")
    seed = config.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        _fail("seed", "must be a nonnegative integer")
    _validate_params(kind, params)
    return config


def _validate_cavity(field, block):
    if not isinstance(block, dict):
        _fail(field, "must be an object")
    cleaned = dict(block)
    try:
        return CavityParams(**cleaned)
    except (TypeError, ValueError) as exc:
        _fail(field, str(exc))


def _validate_params(kind, params):
    field = "params"
    if kind == "snr-curve":
        curves = _require(params, field, "curves", list)
        if not curves:
            _fail("params.curves", "must be nonempty")
        for i, curve in enumerate(curves):
            cfield = f"params.curves[{i}]"
            if not isinstance(curve, dict):
                _fail(cfield, "must be an object")
            _require(curve, cfield, "label", str)
            quantity = _require(curve, cfield, "quantity", str)
            if quantity not in SNR_CURVE_QUANTITIES:
                _fail(f"{cfield}.quantity", f"must be one of {SNR_CURVE_QUANTITIES}")
            if quantity == "network_snr_sq":
                lws = _require(curve, cfield, "linewidths", list)
                if len(lws) < 2:
                    _fail(f"{cfield}.linewidths", "needs at least two cavities")
                weights = curve.get("weights", "near_optimal")
                if weights not in ("uniform", "near_optimal", "optimal_per_frequency",
                                   "optimal_frequency_independent"):
                    _fail(f"{cfield}.weights", "unknown weight strategy")
        if any(c["quantity"] != "network_snr_sq" for c in curves):
            _validate_cavity("params.cavity", params.get("cavity", {}))
    elif kind == "scan-rate":
        curves = _require(params, field, "curves", list)
        if not curves:
            _fail("params.curves", "must be nonempty")
        for i, curve in enumerate(curves):
            cfield = f"params.curves[{i}]"
            _require(curve, cfield, "label", str)
            scheme = _require(curve, cfield, "scheme", str)
            if scheme not in ("quantum_limited", "squeezed", "gkp", "squeezed_numeric"):
                _fail(f"{cfield}.scheme", "unknown scheme")
            if scheme != "quantum_limited":
                gain_db = _require(curve, cfield, "gain_db", (int, float))
                if gain_db < 0:
                    _fail(f"{cfield}.gain_db", "must be >= 0")
    elif kind == "network-scaling":
        gains = _require(params, field, "gains", list)
        if not gains or any(not isinstance(g, (int, float)) or g < 1 for g in gains):
            _fail("params.gains", "must be a list of gains >= 1")
        _require(params, field, "zeta_snr", (int, float))
    elif kind == "gkp-compare":
        eps = params.get("epsilon_s", 1e-3)
        if not isinstance(eps, (int, float)) or not 0 < eps < 0.5:
            _fail("params.epsilon_s", "must lie in (0, 0.5)")
    elif kind == "jpa-noise":
        _validate_cavity("params.cavity", params.get("cavity", {}))
        r = _require(params, field, "r", (int, float))
        if r < 0:
            _fail("params.r", "must be >= 0")
        _require(params, field, "omega", (int, float))
        n = params.get("n_samples", 100_000)
        if not isinstance(n, int) or n < 1000:
            _fail("params.n_samples", "must be an integer >= 1000")
    elif kind == "convert-units":
        block = _require(params, field, "physical", dict)
        try:
            PhysicalParams(**block)
        except (TypeError, ValueError) as exc:
            _fail("params.physical", str(exc))


def sweep_values(config):
    sweep = config["sweep"]
    lo, hi, count = sweep["min"], sweep["max"], sweep["count"]
    if sweep.get("spacing", "linear") == "log":
        values = np.geomspace(lo, hi, count)
    else:
        values = np.linspace(lo, hi, count)
    if sweep["name"] == "m":
        ints = np.rint(values).astype(int)
        if len(set(ints.tolist())) != len(ints):
            _fail("sweep", "sensor-count sweep produced duplicate integers; "
                           "use count = max - min + 1")
        return ints
    return values


# ---------------------------------------------------------------------------
# Row computation (top-level so a process pool can pickle the work)
# ---------------------------------------------------------------------------

def _cavity_from(params, beta=None):
    block = dict(params.get("cavity", {}))
    if beta is not None:
        block["gamma_m"] = beta * block.get("gamma_ell", 1.0)
    return CavityParams(**block)


def _network_from_curve(curve, n_s=1.0, n_t_bar=0.0, delta_a=1.0, gamma_s=1e-9):
    gain = float(curve.get("gain", 1.0))
    factor = float(curve.get("coupling_factor", 2.0 * gain))
    cavities = tuple(
        CavityParams(gamma_ell=gl, gamma_m=factor * gl, gamma_s=gamma_s,
                     n_t_bar=n_t_bar, n_s=n_s, delta_a=delta_a)
        for gl in curve["linewidths"]
    )
    return NetworkConfig(cavities=cavities, gain=gain)


def _snr_curve_context(config):
    """Precompute frequency-independent optimized weights where requested."""
    context = {}
    omegas = sweep_values(config)
    for curve in config["params"]["curves"]:
        if curve["quantity"] != "network_snr_sq":
            continue
        if curve.get("weights", "near_optimal") == "optimal_frequency_independent":
            net = _network_from_curve(curve)
            result = optimize_weights(net.cavities, net.gain,
                                      "frequency_independent", omegas)
            context[curve["label"]] = (result.combiner, result.divider)
    return context


def _snr_curve_value(curve, params, omega, context):
    quantity = curve["quantity"]
    if quantity == "network_snr_sq":
        net = _network_from_curve(curve)
        strategy = curve.get("weights", "near_optimal")
        if strategy == "uniform":
            w = uniform_weights(net.n_cavities)
            return network_snr(net.cavities, net.gain, omega, (w, w)) ** 2
        if strategy == "near_optimal":
            return network_snr(net.cavities, net.gain, omega) ** 2
        if strategy == "optimal_per_frequency":
            result = optimize_weights(net.cavities, net.gain, "per_frequency", [omega])[0]
            return result.objective
        w, wp = context[curve["label"]]
        return network_snr(net.cavities, net.gain, omega, (w, wp)) ** 2
    cavity = _cavity_from(params, curve.get("beta"))
    gain = float(curve.get("gain", 1.0))
    if quantity == "visibility_ql":
        return visibility(cavity, 1.0, omega, "quantum_limited")
    if quantity == "visibility_squeezed":
        return visibility(cavity, gain, omega, "squeezed")
    if quantity == "visibility_gkp":
        return snr_gkp_gaussian(cavity, GkpParams(gain=gain, anc_gain=1e12), omega)
    if quantity == "visibility_jpa":
        return 2.0 * visibility(cavity, gain, omega, "squeezed")
    if quantity == "chi_mm_sq":
        return float(chi_mm_sq(cavity, omega))
    if quantity == "chi_ms_sq":
        return float(chi_ms_sq(cavity, omega))
    theta_mm, theta_ms = mixing_angles(cavity, omega)
    return float(np.sin(theta_mm if quantity == "sin_theta_mm" else theta_ms))


def compute_row(config, seed, index, value, context):
    kind = config["kind"]
    params = config["params"]
    if kind == "snr-curve":
        return [value] + [_snr_curve_value(c, params, float(value), context)
                          for c in params["curves"]]
    if kind == "scan-rate":
        x = float(value)
        row = [x]
        for curve in params["curves"]:
            scheme = curve["scheme"]
            gain = 10.0 ** (float(curve.get("gain_db", 0.0)) / 10.0)
            if scheme == "quantum_limited":
                row.append(27.0 * x**2 / (4.0 * (x + 1.0) ** 3))
            elif scheme == "squeezed":
                row.append(float(scan_rate_ratio_squeezed(x, gain)))
            elif scheme == "gkp":
                row.append(float(scan_rate_ratio_gkp(x, gain)))
            else:  # squeezed_numeric: quadrature over the visibility
                cavity = _cavity_from(params, beta=x)
                result = scan_rate(lambda w: visibility(cavity, gain, w, "squeezed"),
                                   1.0, cavity.delta_a, scale_hint=cavity.gamma)
                peak = 2.0 * cavity.delta_a * cavity.n_s**2 * cavity.gamma_s**2 \
                    / (cavity.n_t**2 * cavity.gamma_ell) * 4.0 / 27.0
                row.append(result.rate / peak)
        return row
    if kind == "network-scaling":
        m = int(value)
        from .network import spread_network

        lw = params.get("linewidth", {})
        zeta = float(params["zeta_snr"])
        row = [m]
        for gain in params["gains"]:
            net = spread_network(m, float(gain),
                                 coupling_factor=params.get("coupling_factor"),
                                 low=float(lw.get("low", 1.0)),
                                 high=float(lw.get("high", 3.0)),
                                 midpoint=bool(lw.get("midpoint", True)),
                                 gamma_s=float(params.get("gamma_s", 1e-9)),
                                 n_s=float(params.get("n_s", 1.0)),
                                 n_t_bar=float(params.get("n_t_bar", 0.0)),
                                 delta_a=float(params.get("delta_a", 1.0)))
            row.append(network_scan_rate(net, zeta, "coherent").rate)
            row.append(network_scan_rate(net, zeta, "independent").rate)
        return row
    if kind == "gkp-compare":
        s_db = float(value)
        gain = 10.0 ** (s_db / 10.0)
        eps = float(params.get("epsilon_s", 1e-3))
        gkp_opt = float(scan_rate_ratio_gkp(optimal_coupling_gkp(gain), gain))
        sq_opt = float(scan_rate_ratio_squeezed(optimal_coupling_squeezed(gain), gain))
        gaussian_ratio = gkp_opt / sq_opt
        return [s_db, gaussian_ratio,
                error_revised_rate_factor(gain, eps) * gaussian_ratio]
    if kind == "jpa-noise":
        sigma_c = float(value)
        cavity = _cavity_from(params)
        jpa = JpaParams(r=float(params["r"]), sigma_c=sigma_c)
        omega = float(params["omega"])
        n_samples = int(params.get("n_samples", 100_000))
        mean_excess, std_error = mc_pump_fluctuation_excess(
            cavity, jpa, omega, n_samples, seed, task_index=index)
        var_at_sigma = float(variance_with_pump_offset(cavity, jpa, omega, sigma_c))
        return [sigma_c, mean_excess, std_error, var_at_sigma]
    # convert-units
    block = dict(params["physical"])
    block[config["sweep"]["name"]] = float(value)
    phys = PhysicalParams(**block)
    model = to_model_params(phys)
    return [float(value), model.gamma_ell, model.gamma_m, model.gamma_s,
            model.n_t_bar, model.n_s, model.delta_a,
            signal_power_quantum(phys), signal_power_classical(phys)]


def columns_for(config):
    kind = config["kind"]
    params = config["params"]
    sweep_name = config["sweep"]["name"]
    if kind in ("snr-curve", "scan-rate"):
        return [sweep_name] + [c["label"] for c in params["curves"]]
    if kind == "network-scaling":
        cols = ["m"]
        for gain in params["gains"]:
            cols += [f"coherent_G{gain:g}", f"independent_G{gain:g}"]
        return cols
    if kind == "gkp-compare":
        return ["s_db", "gaussian_ratio", "error_revised_ratio"]
    if kind == "jpa-noise":
        return ["sigma_c", "mc_mean_excess", "mc_std_error", "variance_at_sigma"]
    return [sweep_name, "gamma_ell", "gamma_m", "gamma_s", "n_t_bar", "n_s",
            "delta_a", "signal_power_quantum_w", "signal_power_classical_w"]


def _pool_task(args):
    return compute_row(*args)


def compute_rows(config, seed):
    values = sweep_values(config)
    context = _snr_curve_context(config) if config["kind"] == "snr-curve" else {}
    tasks = [(config, seed, i, v, context) for i, v in enumerate(values)]
    workers = int(os.environ.get("CAVITYSCAN_WORKERS", "1"))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_pool_task, tasks))
    return [compute_row(*task) for task in tasks]


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def canonical_json(config):
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def write_outputs(config, seed, columns, rows, out_dir=None):
    out_path = config["output"]
    if out_dir is not None:
        out_path = os.path.join(out_dir, os.path.basename(out_path))
    os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        writer.writerows(rows)
    digest = hashlib.sha256(canonical_json(config).encode("utf-8")).hexdigest()
    manifest = {
        "tool": "cavityscan",
        "version": __version__,
        "config_sha256": digest,
        "seed": seed,
        "columns": columns,
        "rows": len(rows),
    }
    manifest_path = out_path + ".manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return out_path, manifest_path


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def run(config_spec, overrides=(), seed=None, out_dir=None):
    try:
        config = load_config(config_spec)
        apply_overrides(config, overrides)
        if seed is not None:
            config["seed"] = seed
        validate(config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (json.JSONDecodeError, OSError, KeyError, IndexError, TypeError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        columns = columns_for(config)
        rows = compute_rows(config, config.get("seed", 0))
        out_path, manifest_path = write_outputs(config, config.get("seed", 0),
                                                columns, rows, out_dir)
    except IntegrationError as exc:
        print(f"error: numeric failure: {exc}; diagnostics: {exc.diagnostics}",
              file=sys.stderr)
        return EXIT_NUMERIC
    except FloatingPointError as exc:
        print(f"error: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {out_path} ({len(rows)} rows) and {manifest_path}")
    return EXIT_OK


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cavityscan",
        description="Batch scenario runner for the cavity scan-rate toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    runner = sub.add_parser("run", help="execute a scenario config or preset")
    runner.add_argument("config", help="path to a JSON config or a preset name")
    runner.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="KEY=VALUE", help="override a config field (dotted path)")
    runner.add_argument("--seed", type=int, default=None, help="override the RNG seed")
    runner.add_argument("--out", dest="out_dir", default=None,
                        help="directory for the output files")
    args = parser.parse_args(argv)
    return run(args.config, args.overrides, args.seed, args.out_dir)


if __name__ == "__main__":
    sys.exit(main())
