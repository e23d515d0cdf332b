r"""Command-line front end: sectioned config files, sweeps, CSV artifacts.

The config format is sectioned ``key = value`` text::

    [geometry]
    radius = 97000          # nm
    period = 574.7          # nm
    amplitude_plate = 85.4  # nm
    amplitude_imprint = 13.7
    separation = 124.7      # nm, single-point commands
    separation_range = 120:180:4   # start:stop:count, inclusive
    phase = 1.5707963267948966     # rad
    phase_grid = 0:6.283185307179586:64
    temperature = 300       # K

    [material]
    data = builtin:au_plasma.dat   # or a path relative to this file

    [numerics]              # any NumericsConfig field
    n_orders = 10

    [electrostatics]
    voltage = 0.1           # V
    residual_potential = -0.0396
    coefficients = builtin:sphere_plate_coeffs.dat

    [output]
    directory = runs
    precision = 17

Unknown sections or keys are rejected with their line number; referenced
files must exist at parse time.  ``builtin:NAME`` resolves against the
packaged data directory.  Artifacts are CSV with the full resolved
config embedded in ``#`` header lines, numbers at a fixed significant
precision so identical configs and seeds give bit-identical files.
Interrupted sweeps are flushed with a ``#INCOMPLETE`` trailer.
"""

import argparse
import dataclasses
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__
from .calibration import (DeflectionSignal, fit_kben_z0,
                          fit_residual_potential, combine_errors,
                          synthesize_signal)
from .casimir_forces import (ForceEngine, PfaEngine, SphereGratingGeometry,
                             max_lateral_force, pfa_lateral_force)
from .electrostatics import (ElectrostaticConfig, lateral_electrostatic_force,
                             load_coefficient_file,
                             normal_electrostatic_force)
from .errors import CasgratingError, ConfigError, ConvergenceError, \
    PropagationError
from .grating_scatter import GratingProfile
from .materials import load_material_file
from .numerics import NumericsConfig

COMMANDS = ("force-phase", "force-z", "pfa-compare", "electro",
            "calibrate-demo", "convergence")

_GEOMETRY_KEYS = {"radius", "period", "amplitude_plate", "amplitude_imprint",
                  "separation", "separation_range", "phase", "phase_grid",
                  "temperature"}
_REQUIRED_GEOMETRY = ("radius", "period", "amplitude_plate",
                      "amplitude_imprint", "temperature")
_MATERIAL_KEYS = {"data", "model"}
_ELECTRO_KEYS = {"voltage", "residual_potential", "coefficients"}
_OUTPUT_KEYS = {"directory", "precision"}
_NUMERICS_KEYS = {f.name for f in dataclasses.fields(NumericsConfig)}


class RunConfig:
    """Validated run configuration with the resolved item list kept for
    embedding into artifact headers."""

    def __init__(self):
        self.geometry = {}
        self.material = None
        self.material_path = ""
        self.numerics = NumericsConfig()
        self.electro = {}
        self.out_dir = "."
        self.precision = 17
        self.resolved = []  # (section, key, value) in stable order


def _resolve_path(value, base_dir):
    if value.startswith("builtin:"):
        name = value.split(":", 1)[1]
        ref = resources.files("casgrating").joinpath("data", name)
        with resources.as_file(ref) as concrete:
            return str(concrete)
    if os.path.isabs(value):
        return value
    return os.path.normpath(os.path.join(base_dir, value))


def _parse_float(value, path, line, key):
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"bad numeric value for {key}: {value!r}",
                          path=path, line=line) from None


def _parse_range(value, path, line, key):
    parts = value.split(":")
    if len(parts) != 3:
        raise ConfigError(f"{key} must be start:stop:count, got {value!r}",
                          path=path, line=line)
    start = _parse_float(parts[0], path, line, key)
    stop = _parse_float(parts[1], path, line, key)
    try:
        count = int(parts[2])
    except ValueError:
        raise ConfigError(f"bad count in {key}: {parts[2]!r}",
                          path=path, line=line) from None
    if count < 1:
        raise ConfigError(f"{key} range is empty", path=path, line=line)
    if count == 1:
        return np.array([start])
    return np.linspace(start, stop, count)


def parse_config(path):
    """Parse and validate a sectioned config file into a RunConfig."""
    if not os.path.isfile(path):
        raise ConfigError("config file not found", path=str(path))
    base_dir = os.path.dirname(os.path.abspath(path))
    cfg = RunConfig()
    raw = {}       # section -> key -> (value, line)
    section = None
    with open(path) as fh:
        for ln, rawline in enumerate(fh, 1):
            line = rawline.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                section = line[1:-1].strip()
                if section not in ("geometry", "material", "numerics",
                                   "electrostatics", "output"):
                    raise ConfigError(f"unknown section [{section}]",
                                      path=path, line=ln)
                raw.setdefault(section, {})
                continue
            if section is None:
                raise ConfigError("key outside of any [section]",
                                  path=path, line=ln)
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"expected key = value, got {line!r}",
                                  path=path, line=ln)
            key = key.strip()
            value = value.strip()
            known = {"geometry": _GEOMETRY_KEYS, "material": _MATERIAL_KEYS,
                     "numerics": _NUMERICS_KEYS,
                     "electrostatics": _ELECTRO_KEYS,
                     "output": _OUTPUT_KEYS}[section]
            if key not in known:
                raise ConfigError(f"unknown key {key!r} in [{section}]",
                                  path=path, line=ln)
            if key in raw[section]:
                raise ConfigError(f"duplicate key {key!r}", path=path,
                                  line=ln)
            raw[section][key] = (value, ln)

    geo = raw.get("geometry", {})
    for key in _REQUIRED_GEOMETRY:
        if key not in geo:
            raise ConfigError(f"missing required geometry field {key!r}",
                              path=path)
    if "separation" not in geo and "separation_range" not in geo:
        raise ConfigError("geometry needs separation or separation_range",
                          path=path)
    for key, (value, ln) in geo.items():
        if key == "separation_range":
            cfg.geometry[key] = _parse_range(value, path, ln, key)
        elif key == "phase_grid":
            cfg.geometry[key] = _parse_range(value, path, ln, key)
        else:
            val = _parse_float(value, path, ln, key)
            if key in ("radius", "period", "temperature") and val <= 0:
                raise ConfigError(f"{key} must be positive", path=path,
                                  line=ln)
            cfg.geometry[key] = val

    mat = raw.get("material", {})
    if "data" not in mat:
        raise ConfigError("missing required material field 'data'",
                          path=path)
    value, ln = mat["data"]
    mat_path = _resolve_path(value, base_dir)
    if not os.path.isfile(mat_path):
        raise ConfigError(f"material file not found: {mat_path}",
                          path=path, line=ln)
    cfg.material = load_material_file(mat_path)
    cfg.material_path = mat_path
    if "model" in mat:
        value, ln = mat["model"]
        got = type(cfg.material).__name__
        want = {"ideal_metal": "IdealMetal", "plasma": "Plasma",
                "generalized_plasma": "GeneralizedPlasma",
                "vacuum": "Vacuum"}.get(value)
        if want is None:
            raise ConfigError(f"unknown material model {value!r}",
                              path=path, line=ln)
        if want != got:
            raise ConfigError(
                f"material model {value!r} does not match data file "
                f"({got})", path=path, line=ln)

    updates = {}
    for key, (value, ln) in raw.get("numerics", {}).items():
        field = {f.name: f for f in dataclasses.fields(NumericsConfig)}[key]
        try:
            if key in ("matsubara_sampling",):
                updates[key] = value
            elif key in ("zp_panel_nodes", "zp_panel_edges"):
                toks = value.split(",")
                conv = int if key == "zp_panel_nodes" else float
                updates[key] = tuple(conv(tk) for tk in toks)
            elif field.type is int or isinstance(field.default, int):
                updates[key] = int(value)
            else:
                updates[key] = float(value)
        except ValueError:
            raise ConfigError(f"bad value for numerics.{key}: {value!r}",
                              path=path, line=ln) from None
    if "n_orders" in raw.get("numerics", {}) and \
            raw["numerics"]["n_orders"][0] != "auto":
        updates["n_orders"] = int(raw["numerics"]["n_orders"][0])
    try:
        cfg.numerics = NumericsConfig().updated(**updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid numerics block: {exc}",
                          path=path) from None

    ele = raw.get("electrostatics", {})
    for key in ("voltage", "residual_potential", "coefficients"):
        if key not in ele:
            raise ConfigError(
                f"missing required electrostatics field {key!r}", path=path)
    cfg.electro["voltage"] = _parse_float(ele["voltage"][0], path,
                                          ele["voltage"][1], "voltage")
    cfg.electro["residual_potential"] = _parse_float(
        ele["residual_potential"][0], path, ele["residual_potential"][1],
        "residual_potential")
    value, ln = ele["coefficients"]
    cpath = _resolve_path(value, base_dir)
    if not os.path.isfile(cpath):
        raise ConfigError(f"coefficient file not found: {cpath}",
                          path=path, line=ln)
    cfg.electro["coefficients"] = load_coefficient_file(cpath)
    cfg.electro["coefficients_path"] = cpath

    out = raw.get("output", {})
    if "directory" in out:
        cfg.out_dir = os.path.normpath(
            os.path.join(base_dir, out["directory"][0]))
    if "precision" in out:
        value, ln = out["precision"]
        try:
            cfg.precision = int(value)
        except ValueError:
            raise ConfigError(f"bad precision: {value!r}", path=path,
                              line=ln) from None
        if not (1 <= cfg.precision <= 17):
            raise ConfigError("precision must be in 1..17", path=path,
                              line=ln)

    # stable resolved view for artifact headers
    for key in sorted(cfg.geometry):
        val = cfg.geometry[key]
        if isinstance(val, np.ndarray):
            val = ":".join(f"{v:.17g}" for v in val[:3]) + \
                (f"...n={len(val)}" if len(val) > 3 else "")
        cfg.resolved.append(("geometry", key, val))
    cfg.resolved.append(("material", "data", mat_path))
    cfg.resolved.append(("material", "model", type(cfg.material).__name__))
    for f in dataclasses.fields(NumericsConfig):
        cfg.resolved.append(("numerics", f.name,
                             getattr(cfg.numerics, f.name)))
    cfg.resolved.append(("electrostatics", "voltage",
                         cfg.electro["voltage"]))
    cfg.resolved.append(("electrostatics", "residual_potential",
                         cfg.electro["residual_potential"]))
    cfg.resolved.append(("electrostatics", "coefficients",
                         cfg.electro["coefficients_path"]))
    cfg.resolved.append(("output", "directory", cfg.out_dir))
    cfg.resolved.append(("output", "precision", cfg.precision))
    return cfg


# ----------------------------------------------------------------------
# artifact writing
# ----------------------------------------------------------------------

class _CsvSink:
    """Streaming CSV writer that marks interrupted sweeps."""

    def __init__(self, path, cfg, columns, extra_meta=()):
        self.path = path
        self.prec = cfg.precision
        self.fh = open(path, "w")
        self.fh.write(f"# casgrating {__version__}\n")
        for section, key, value in cfg.resolved:
            self.fh.write(f"# cfg.{section}.{key}={value}\n")
        for key, value in extra_meta:
            self.fh.write(f"# {key}={value}\n")
        self.fh.write(",".join(columns) + "\n")
        self.complete = False

    def row(self, *values):
        cells = []
        for v in values:
            if isinstance(v, str):
                cells.append(v)
            else:
                cells.append(f"{v:.{self.prec}g}")
        self.fh.write(",".join(cells) + "\n")
        self.fh.flush()

    def close(self):
        if not self.complete:
            self.fh.write("#INCOMPLETE\n")
        self.fh.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        self.complete = exc_type is None
        self.close()
        return False


def _geometry(cfg, separation, phase=0.0):
    g = cfg.geometry
    plate = GratingProfile(period=g["period"], amplitude=g["amplitude_plate"],
                           material=cfg.material)
    imprint = GratingProfile(period=g["period"],
                             amplitude=g["amplitude_imprint"],
                             material=cfg.material)
    return SphereGratingGeometry(radius=g["radius"], separation=separation,
                                 phase=phase, temperature=g["temperature"],
                                 plate=plate, imprint=imprint)


def _phases(cfg):
    if "phase_grid" in cfg.geometry:
        return np.asarray(cfg.geometry["phase_grid"])
    if "phase" in cfg.geometry:
        return np.array([cfg.geometry["phase"]])
    raise ConfigError("this command needs phase or phase_grid in "
                      "[geometry]", category="config")


def _separations(cfg):
    if "separation_range" in cfg.geometry:
        return np.asarray(cfg.geometry["separation_range"])
    return np.array([cfg.geometry["separation"]])


def _single_separation(cfg):
    if "separation" in cfg.geometry:
        return cfg.geometry["separation"]
    return float(_separations(cfg)[0])


def cmd_force_phase(cfg, out_dir, seed):
    z = _single_separation(cfg)
    phis = _phases(cfg)
    geom = _geometry(cfg, z)
    engine = ForceEngine(geom, cfg.numerics, z_candidates=[z])
    path = os.path.join(out_dir, "force_phase.csv")
    with _CsvSink(path, cfg, ("phi_rad", "force_n"),
                  (("separation_nm", z),)) as sink:
        forces = engine.lateral_force_vector(z, phis)
        for p, f in zip(phis, forces):
            sink.row(p, f)
    return [path]


def cmd_force_z(cfg, out_dir, seed):
    zs = _separations(cfg)
    geom = _geometry(cfg, float(zs[0]))
    engine = ForceEngine(geom, cfg.numerics, z_candidates=list(zs))
    path = os.path.join(out_dir, "force_z.csv")
    with _CsvSink(path, cfg,
                  ("z_nm", "max_force_n", "phi_star_rad")) as sink:
        for z in zs:
            fmax, phi_star = engine.max_lateral_force(float(z))
            sink.row(z, fmax, phi_star)
    return [path]


def cmd_pfa_compare(cfg, out_dir, seed):
    zs = _separations(cfg)
    geom = _geometry(cfg, float(zs[0]))
    engine = ForceEngine(geom, cfg.numerics, z_candidates=list(zs))
    pfa = PfaEngine(geom, cfg.numerics, z_max=float(zs.max()))
    path = os.path.join(out_dir, "pfa_compare.csv")
    with _CsvSink(path, cfg, ("z_nm", "max_force_exact_n",
                              "max_force_pfa_n", "deviation")) as sink:
        for z in zs:
            f_ex, _ = engine.max_lateral_force(float(z))
            f_pfa, _ = pfa.max_lateral_force(float(z))
            # deviation of the additive approximation above the exact
            # result: |F_pfa|/|F_exact| - 1
            sink.row(z, f_ex, f_pfa, abs(f_pfa) / abs(f_ex) - 1.0)
    return [path]


def cmd_electro(cfg, out_dir, seed):
    z = _single_separation(cfg)
    phis = _phases(cfg)
    g = cfg.geometry
    path = os.path.join(out_dir, "electro.csv")
    with _CsvSink(path, cfg, ("phi_rad", "normal_force_n",
                              "lateral_force_n"),
                  (("separation_nm", z),)) as sink:
        for p in phis:
            ecfg = ElectrostaticConfig(
                radius=g["radius"], separation=z, phase=float(p),
                a1=g["amplitude_plate"], a2=g["amplitude_imprint"],
                period=g["period"], voltage=cfg.electro["voltage"],
                residual_potential=cfg.electro["residual_potential"],
                coeffs=cfg.electro["coefficients"])
            sink.row(p, normal_electrostatic_force(ecfg),
                     lateral_electrostatic_force(ecfg))
    return [path]


def cmd_calibrate_demo(cfg, out_dir, seed):
    g = cfg.geometry
    truth_k, truth_z0 = 1.27, 117.3
    base = ElectrostaticConfig(
        radius=g["radius"], separation=150.0, phase=0.0,
        a1=g["amplitude_plate"], a2=g["amplitude_imprint"],
        period=g["period"], voltage=cfg.electro["voltage"],
        residual_potential=cfg.electro["residual_potential"],
        coeffs=cfg.electro["coefficients"])

    def model(z, phases, volt):
        return np.array([1e9 * lateral_electrostatic_force(
            dataclasses.replace(base, separation=float(z), phase=float(p),
                                voltage=float(volt)))
            for p in np.atleast_1d(phases)])

    rng = np.random.default_rng(seed)
    signals = []
    for i, (d, volt) in enumerate([(30.0, 0.10), (60.0, 0.15),
                                   (90.0, 0.10), (120.0, 0.20)]):
        phis = np.linspace(0.0, 2.0 * math.pi, 128, endpoint=False)
        f = model(truth_z0 + d, phis, volt)
        noise = rng.normal(0.0, 0.01 * np.abs(f).max(), len(f))
        signals.append(DeflectionSignal(phis, (f + noise) / truth_k,
                                        separation=d, voltage=volt,
                                        seed=seed + i))
    result = fit_kben_z0(signals, model, start=(1.0, 100.0))

    vsigs = []
    for j, volt in enumerate((-0.1, -0.05, 0.0, 0.05, 0.1)):
        phis = np.linspace(0.0, 2.0 * math.pi, 128, endpoint=False)
        f = model(truth_z0 + 60.0, phis, volt)
        noise = rng.normal(0.0, 0.01 * max(np.abs(f).max(), 1e-12), len(f))
        vsigs.append(DeflectionSignal(phis, f + noise, separation=60.0,
                                      voltage=volt, seed=seed + 100 + j))
    v0, v0_err = fit_residual_potential(vsigs)

    path = os.path.join(out_dir, "calibrate_demo.csv")
    with _CsvSink(path, cfg, ("quantity", "fitted", "truth",
                              "half_width_95"),
                  (("seed", seed),)) as sink:
        sink.row("k_ben_nn_per_unit", result.k_ben, truth_k,
                 result.k_ben_err)
        sink.row("z0_nm", result.z0, truth_z0, result.z0_err)
        sink.row("v0_volt", v0, cfg.electro["residual_potential"], v0_err)
        sink.row("z0_total_err_nm",
                 combine_errors(result.z0_err, 1.0), 0.0, 0.0)
    return [path]


def cmd_convergence(cfg, out_dir, seed):
    z = _single_separation(cfg)
    base_n = cfg.numerics.n_orders
    if base_n is None:
        geom = _geometry(cfg, z)
        from .grating_scatter import default_orders
        base_n = default_orders(geom.plate)
    path = os.path.join(out_dir, "convergence.csv")
    with _CsvSink(path, cfg, ("n_orders", "force_n", "delta_prev"),
                  (("separation_nm", z),)) as sink:
        prev = None
        for n in (base_n, base_n + 2, base_n + 4):
            numerics = cfg.numerics.updated(n_orders=n)
            geom = _geometry(cfg, z)
            engine = ForceEngine(geom, numerics, z_candidates=[z])
            f = float(engine.lateral_force_vector(
                z, np.array([0.5 * math.pi]))[0])
            sink.row(n, f, "" if prev is None else abs(f - prev))
            prev = f
    return [path]


_DISPATCH = {"force-phase": cmd_force_phase, "force-z": cmd_force_z,
             "pfa-compare": cmd_pfa_compare, "electro": cmd_electro,
             "calibrate-demo": cmd_calibrate_demo,
             "convergence": cmd_convergence}

_EXIT_CODES = {"config": 2, "convergence": 3, "propagation": 4,
               "domain": 5, "internal": 1}


def run(command, cfg, out_dir=None, seed=42):
    """Dispatch one command; returns the process exit code."""
    out = out_dir or cfg.out_dir
    try:
        os.makedirs(out, exist_ok=True)
        paths = _DISPATCH[command](cfg, out, seed)
        for p in paths:
            print(p)
        return 0
    except ConfigError as exc:
        print(f"error: category=config {exc}", file=sys.stderr)
        return _EXIT_CODES["config"]
    except ConvergenceError as exc:
        print(f"error: category=convergence {exc}", file=sys.stderr)
        return _EXIT_CODES["convergence"]
    except PropagationError as exc:
        print(f"error: category=propagation {exc}", file=sys.stderr)
        return _EXIT_CODES["propagation"]
    except ValueError as exc:
        print(f"error: category=domain {exc}", file=sys.stderr)
        return _EXIT_CODES["domain"]
    except CasgratingError as exc:
        print(f"error: category=internal {exc}", file=sys.stderr)
        return _EXIT_CODES["internal"]


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="casgrating",
        description="Casimir and electrostatic forces for a sphere with a "
                    "sinusoidal imprint above a corrugated plate.")
    parser.add_argument("--config", required=True, help="config file path")
    parser.add_argument("--command", required=True, choices=COMMANDS)
    parser.add_argument("--out", default=None,
                        help="output directory (overrides [output])")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads for the reflection solver "
                             "(0 = library default)")
    parser.add_argument("--seed", type=int, default=42,
                        help="seed for synthetic-signal commands")
    args = parser.parse_args(argv)
    if args.threads > 0:
        try:
            import numba
            numba.set_num_threads(
                min(args.threads, numba.config.NUMBA_NUM_THREADS))
        except (ImportError, ValueError):
            pass
    try:
        cfg = parse_config(args.config)
    except ConfigError as exc:
        print(f"error: category=config {exc}", file=sys.stderr)
        return _EXIT_CODES["config"]
    return run(args.command, cfg, out_dir=args.out, seed=args.seed)
