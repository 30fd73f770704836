"""Batch front end.

A run is described by one TOML file::

    gamma = 1.0
    experiment = "evolve"

    [quadrature]
    rel_tol = 1e-12

    [[functions]]
    name = "b"
    kind = "bump"
    lo = 1.0
    hi = 2.0

    [evolve]
    function = "b"
    t = [0.0, 0.5, 1.0, 2.0]
    N = 10
    epsilon = 0.1

Every experiment writes ``report.json`` (entries, summary, environment) to
the output directory, plus its CSV tables.  Exit status: 0 success, 1 a
check failed, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, dynamics, eigen, hardy, quad, spectral, verify
from .dist import Side
from .errors import ConfigError, RHSError
from .testfn import from_spec

EXPERIMENTS = ("verify", "expand", "evolve", "reconstruct", "residues", "hardy", "classical")

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

HEADERS = {
    "expand": ["n", "re_c", "im_c"],
    "decay": ["t", "n", "abs_c", "ratio", "expected"],
    "concentration": ["t", "concentration"],
    "reconstruct": ["family", "x", "re_value", "im_value", "re_target", "im_target",
                    "abs_err", "tail"],
    "residues": ["family", "branch", "n", "re_contour", "im_contour", "re_closed",
                 "im_closed", "abs_err"],
    "hardy": ["family", "branch", "classification", "decay_fit_upper", "decay_fit_lower",
              "halfline_mass_ratio", "envelope_slope"],
    "classical": ["t", "x", "p"],
}

# defaults of the experiment sections; the type of each default is enforced
SECTION_DEFAULTS = {
    "expand": {"function": None, "basis": "minus", "N": 30},
    "evolve": {"function": None, "t": [0.0, 0.5, 1.0, 2.0, 3.0, 4.0], "N": 10, "epsilon": 0.1},
    "reconstruct": {"function": None, "E_max": 120.0, "E_nodes": 2400,
                    "x": [0.5, 0.8, 1.2, 1.3, 1.5], "family": "both", "tolerance": 1e-4},
    "residues": {"function": None, "n_max": 5, "radius": 0.25, "branch": "both",
                 "tolerance": 1e-8},
    "hardy": {"function": None, "E_max": 60.0, "samples": 1024, "branch": "plus"},
    "classical": {"x0": 1.0, "p0": 1.0, "t": [1.0], "steps": 1000, "tolerance": 1e-8},
}


# ---------------------------------------------------------------------------
# configuration


class _Lines:
    """Line lookup for keys of the raw TOML text (for error messages)."""

    def __init__(self, text):
        self.lines = text.splitlines()

    def of(self, section, key):
        current = None
        for i, raw in enumerate(self.lines, 1):
            s = raw.strip()
            if s.startswith("["):
                current = s.strip("[]").strip()
                continue
            if "=" in s and s.split("=", 1)[0].strip() == key and current == section:
                return i
        return None


def _fail(lines, section, key, message):
    where = f"{section}.{key}" if section else key
    ln = lines.of(section, key) if lines else None
    at = f" (line {ln})" if ln else ""
    raise ConfigError(f"config field '{where}'{at}: {message}")


@dataclass
class RunConfig:
    gamma: float = 1.0
    experiment: str = "verify"
    quadrature: quad.QuadratureConfig = field(default_factory=quad.QuadratureConfig)
    functions: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def section(self, name=None):
        return self.params[name or self.experiment]

    def function(self, name):
        if name not in self.functions:
            raise ConfigError(f"config field '{self.experiment}.function': unknown function {name!r}")
        return from_spec(self.functions[name])

    @property
    def model(self):
        return eigen.ModelParams(self.gamma)


def _number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _coerce(value, default, lines, section, key):
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = _number(value)
        value = float(value) if ok else value
    elif isinstance(default, str):
        ok = isinstance(value, str)
    elif isinstance(default, list):
        if _number(value):
            value = [value]
        ok = isinstance(value, list) and all(_number(v) for v in value) and len(value) > 0
        value = [float(v) for v in value] if ok else value
    else:
        ok = True
    if not ok:
        _fail(lines, section, key, f"expected {type(default).__name__}, got {value!r}")
    return value


def _validate_section(name, raw, lines, functions):
    defaults = SECTION_DEFAULTS[name]
    for key in raw:
        if key not in defaults:
            _fail(lines, name, key, "unknown key")
    out = {}
    for key, default in defaults.items():
        out[key] = _coerce(raw[key], default, lines, name, key) if key in raw else default
    fn = out.get("function", "absent")
    if fn is None:
        if not functions:
            _fail(lines, name, "function", "no [[functions]] are defined")
        out["function"] = next(iter(functions))
    elif fn != "absent" and fn not in functions:
        _fail(lines, name, "function", f"unknown function {fn!r}")

    def need(key, ok, what):
        if not ok:
            _fail(lines, name, key, what)

    if "N" in out:
        need("N", 0 <= out["N"] <= 32, "must be an integer in [0, 32]")
    if name == "expand":
        need("basis", out["basis"] in ("plus", "minus"), "must be 'plus' or 'minus'")
    if name == "evolve":
        need("epsilon", out["epsilon"] > 0, "must be positive")
        need("t", all(math.isfinite(t) for t in out["t"]), "times must be finite")
    if name == "reconstruct":
        need("E_max", out["E_max"] > 0, "must be positive")
        need("E_nodes", out["E_nodes"] >= 16, "must be >= 16")
        need("x", all(x != 0 for x in out["x"]), "sample points must avoid x = 0")
        need("family", out["family"] in ("psi", "fourier_psi", "both"),
             "must be 'psi', 'fourier_psi' or 'both'")
    if name == "residues":
        need("n_max", 0 <= out["n_max"] <= 20, "must be an integer in [0, 20]")
        need("radius", 0 < out["radius"] < 0.5, "must lie in (0, 1/2) in units of gamma")
        need("branch", out["branch"] in ("plus", "minus", "both"), "must be plus, minus or both")
    if name == "hardy":
        need("E_max", out["E_max"] > 0, "must be positive")
        need("samples", out["samples"] >= hardy.MIN_SAMPLES,
             f"must be >= {hardy.MIN_SAMPLES}")
        need("branch", out["branch"] in ("plus", "minus"), "must be plus or minus")
    if name == "classical":
        need("t", all(t >= 0 and math.isfinite(t) for t in out["t"]), "times must be >= 0")
        need("steps", out["steps"] >= 1, "must be >= 1")
    for key in ("tolerance",):
        if key in out:
            need(key, out[key] > 0, "must be positive")
    return out


def parse_config(text: str, experiment: str | None = None) -> RunConfig:
    """Parse and validate TOML text; errors name the field and its line.

    ``experiment`` overrides the file's ``experiment`` key.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from None
    lines = _Lines(text)
    top = {"gamma", "experiment", "quadrature", "functions", *SECTION_DEFAULTS}
    for key in raw:
        if key not in top:
            _fail(lines, None, key, "unknown key")
    gamma = raw.get("gamma", 1.0)
    if not _number(gamma) or not gamma > 0 or not math.isfinite(gamma):
        _fail(lines, None, "gamma", "must be a positive real")
    experiment = experiment or raw.get("experiment", "verify")
    if experiment not in EXPERIMENTS:
        _fail(lines, None, "experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    qraw = raw.get("quadrature", {})
    if not isinstance(qraw, dict):
        _fail(lines, None, "quadrature", "must be a table")
    try:
        qc = quad.QuadratureConfig(**qraw)
    except TypeError as exc:
        raise ConfigError(f"config field 'quadrature': {exc}") from None
    except RHSError as exc:
        raise ConfigError(f"config field 'quadrature': {exc}") from None
    functions = {}
    flist = raw.get("functions", [])
    if not isinstance(flist, list):
        _fail(lines, None, "functions", "must be an array of tables [[functions]]")
    for i, rec in enumerate(flist):
        rec = dict(rec)
        name = rec.pop("name", None)
        if not isinstance(name, str) or not name:
            _fail(lines, "functions", "name", f"entry {i} needs a non-empty 'name'")
        if name in functions:
            _fail(lines, "functions", "name", f"duplicate function name {name!r}")
        try:
            from_spec(rec)
        except (RHSError, KeyError, TypeError, ValueError) as exc:
            _fail(lines, "functions", "kind", f"function {name!r} is invalid: {exc}")
        functions[name] = rec
    params = {}
    for name in SECTION_DEFAULTS:
        sec = raw.get(name, {})
        if not isinstance(sec, dict):
            _fail(lines, None, name, "must be a table")
        if name == experiment or name in raw:
            params[name] = _validate_section(name, sec, lines, functions)
    return RunConfig(float(gamma), experiment, qc, functions, params)


def load_config(path, experiment=None) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, experiment)


# ---------------------------------------------------------------------------
# serialisation


def _finite(v):
    v = float(v)
    return v if math.isfinite(v) else None


def complex_json(z):
    z = complex(z)
    return {"re": _finite(z.real), "im": _finite(z.imag)}


def entry_json(e: verify.CheckResult):
    target = complex_json(e.target)
    target["provenance"] = e.provenance
    return {
        "check_id": e.check_id,
        "paper_anchor": e.anchor,
        "target": target,
        "computed": complex_json(e.computed),
        "abs_err": _finite(e.abs_err),
        "rel_err": _finite(e.rel_err),
        "tolerance": _finite(e.tolerance),
        "pass": bool(e.passed),
        "note": e.note,
    }


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    now = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
           else _dt.datetime.now(_dt.timezone.utc))
    return now.replace(microsecond=0).isoformat()


def build_report(entries, seed, extra=None):
    entries = sorted(entries, key=lambda e: e.check_id)
    passed = sum(1 for e in entries if e.passed)
    report = {
        "entries": [entry_json(e) for e in entries],
        "summary": {"total": len(entries), "passed": passed, "failed": len(entries) - passed},
        "environment": {"version": __version__, "seed": int(seed), "timestamp": _timestamp()},
    }
    if extra:
        report["results"] = extra
    return report


def _fmt(v):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


# ---------------------------------------------------------------------------
# experiments


def emit_decay_table(phi, t_grid, N, p=eigen.ModelParams(), cfg=None):
    """Rows ``(t, n, |c_n(t)|, |c_n(t)|/|c_n(0)|, e^{-gamma(n+1/2)t})`` of the
    MinusBasis (moment) expansion of a class-D function.

    ``c_n(t)`` are the moment coefficients of the evolved function
    ``U(t) phi`` computed directly, not by scaling ``c_n(0)``.
    """
    c0 = spectral.moment_expand(phi, N, p, cfg).coeffs
    rows = []
    for t in t_grid:
        ct = spectral.moment_expand(dynamics.evolve(phi, t, p), N, p, cfg).coeffs
        for n in range(N + 1):
            a0, at = abs(c0[n]), abs(ct[n])
            ratio = at / a0 if a0 > 0 else (1.0 if at == 0 else math.inf)
            rows.append((float(t), n, at, ratio, math.exp(-p.gamma * (n + 0.5) * t)))
    return rows


def _exp_verify(rc, out, args):
    entries = verify.run_suite(args.tolerance_scale, args.seed, rc.model, args.jobs)
    return entries, None


def _exp_expand(rc, out, args):
    s = rc.section()
    phi = rc.function(s["function"])
    if s["basis"] == "plus":
        e = spectral.taylor_expand(phi, s["N"], rc.model)
    else:
        e = spectral.moment_expand(phi, s["N"], rc.model, rc.quadrature)
    write_csv(out / "expand.csv", HEADERS["expand"],
              [(n, c.real, c.imag) for n, c in enumerate(e.coeffs)])
    return [], {"basis": e.basis.value, "N": e.N}


def _exp_evolve(rc, out, args):
    s = rc.section()
    phi = rc.function(s["function"])
    p = rc.model
    rows = emit_decay_table(phi, s["t"], s["N"], p, rc.quadrature)
    write_csv(out / "decay.csv", HEADERS["decay"], rows)
    conc = [(t, dynamics.concentration_probability(phi, t, s["epsilon"], p, rc.quadrature))
            for t in s["t"]]
    write_csv(out / "concentration.csv", HEADERS["concentration"], conc)
    tol = 1e-10 * args.tolerance_scale
    entries = [verify._entry(f"evolve.decay_t{t:g}_n{n}", "moment coefficients of U(t)phi",
                             exp, ratio, tol, "closed_form")
               for t, n, _, ratio, exp in rows if math.isfinite(ratio)]
    return entries, None


def _exp_reconstruct(rc, out, args):
    s = rc.section()
    phi = rc.function(s["function"])
    cfg = spectral.ReconstructionConfig(s["E_max"], s["E_nodes"], tuple(s["x"]))
    tol = s["tolerance"] * args.tolerance_scale
    rows, entries = [], []
    runs = {"psi": spectral.reconstruct_continuum,
            "fourier_psi": spectral.reconstruct_continuum_fourier}
    fams = list(runs) if s["family"] == "both" else [s["family"]]
    for fam in fams:
        r = runs[fam](phi, cfg, rc.model, rc.quadrature)
        for x, v, t, err, tail in zip(r.x, r.values, r.target, r.abs_err, r.tail):
            rows.append((fam, x, v.real, v.imag, t.real, t.imag, err, tail))
            entries.append(verify._entry(f"reconstruct.{fam}.x{x:g}", "continuum completeness",
                                         t, v, tol, "closed_form", "abs"))
    write_csv(out / "reconstruct.csv", HEADERS["reconstruct"], rows)
    return entries, None


def _exp_residues(rc, out, args):
    s = rc.section()
    phi = rc.function(s["function"])
    p = rc.model
    radius = s["radius"] * p.gamma
    tol = s["tolerance"] * args.tolerance_scale
    branches = [Side.PLUS, Side.MINUS] if s["branch"] == "both" else [Side(s["branch"])]
    rows, entries = [], []
    for fam in ("psi", "fpsi"):
        for br in branches:
            for n in range(s["n_max"] + 1):
                if fam == "psi":
                    got = eigen.residue_psi_pairing(phi, n, br, p, rc.quadrature, radius)
                    ref = eigen.residue_psi_closed_form(phi, n, br, p)
                else:
                    got = eigen.residue_F_psi_pairing(phi, n, br, p, rc.quadrature, radius)
                    ref = eigen.residue_F_psi_closed_form(phi, n, br, p, rc.quadrature)
                got, ref = complex(got), complex(ref)
                rows.append((fam, br.value, n, got.real, got.imag, ref.real, ref.imag,
                             abs(got - ref)))
                # closed forms vanish identically for some (phi, branch); compare absolutely there
                mode = "rel" if abs(ref) > 1e-300 else "abs"
                entries.append(verify._entry(f"residues.{fam}.{br.value}.n{n}",
                                             "residue theorem at complex eigenvalues",
                                             ref, got, tol, "closed_form", mode))
    write_csv(out / "residues.csv", HEADERS["residues"], rows)
    return entries, None


def _envelope_slope(E, samples):
    """Least-squares slope of ``log|f|`` against ``log|E|`` over ``|E| >= 1``."""
    a = np.abs(samples)
    sel = (np.abs(E) >= 1.0) & (a > 0)
    if np.count_nonzero(sel) < 8:
        return None
    return float(np.polyfit(np.log(np.abs(E[sel])), np.log(a[sel]), 1)[0])


def _exp_hardy(rc, out, args):
    s = rc.section()
    phi = rc.function(s["function"])
    E, h = hardy.energy_grid(s["E_max"], s["samples"])
    rows, results = [], []
    for fam in (hardy.Family.PSI, hardy.Family.FPSI):
        f = hardy.sample_energy_pairing(phi, fam, Side(s["branch"]), E, rc.model, rc.quadrature)
        rep = hardy.hardy_diagnostic(f, h)
        env = _envelope_slope(E, f)
        rows.append((fam.value, s["branch"], rep.classification.value, rep.decay_fit_upper,
                     rep.decay_fit_lower, rep.halfline_mass_ratio,
                     env if env is not None else math.nan))
        d = rep.as_dict()
        d.update(family=fam.value, branch=s["branch"], envelope_slope=env)
        results.append(d)
    write_csv(out / "hardy.csv", HEADERS["hardy"], rows)
    (out / "hardy.json").write_text(json.dumps({"reports": results}, indent=2, sort_keys=True,
                                               allow_nan=False, default=_finite) + "\n")
    return [], {"hardy": results}


def _exp_classical(rc, out, args):
    s = rc.section()
    p = rc.model
    tol = s["tolerance"] * args.tolerance_scale
    state = dynamics.ClassicalState(s["x0"], s["p0"])
    rows = []
    for t in s["t"]:
        f = dynamics.classical_flow(state, t, p)
        rows.append((t, f.x, f.p))
    write_csv(out / "classical.csv", HEADERS["classical"], rows)
    entries = []
    T = max(s["t"])
    if T > 0:
        g = p.gamma
        rep = dynamics.hamiltonian_embedding_check(
            lambda x: -g * x, ([s["x0"]], [s["p0"]]), T, s["steps"],
            jacobian=lambda x: np.array([[-g]]))
        exact = math.exp(-g * T) * s["x0"]
        entries.append(verify._entry("classical.trajectory", "embedded Hamiltonian flow",
                                     exact, rep.x[-1, 0], tol, "closed_form", "abs"))
        entries.append(verify._defect("classical.energy", "conservation of H = p X(x)",
                                      rep.energy_drift, tol))
    return entries, None


RUNNERS = {
    "verify": _exp_verify, "expand": _exp_expand, "evolve": _exp_evolve,
    "reconstruct": _exp_reconstruct, "residues": _exp_residues, "hardy": _exp_hardy,
    "classical": _exp_classical,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser():
    ap = argparse.ArgumentParser(prog="rhsdamp", description=__doc__.split("\n")[0])
    ap.add_argument("--config", type=Path, help="TOML run configuration")
    ap.add_argument("--experiment", choices=EXPERIMENTS, help="overrides the config")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--tolerance-scale", type=float, default=1.0)
    return ap


def run(rc: RunConfig, out: Path, args) -> int:
    """Execute the configured experiment; returns the exit status."""
    out.mkdir(parents=True, exist_ok=True)
    try:
        entries, extra = RUNNERS[rc.experiment](rc, out, args)
    except verify.SuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (RHSError, ArithmeticError, ValueError) as exc:
        print(f"error in experiment {rc.experiment}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    report = build_report(entries, args.seed, extra)
    (out / "report.json").write_text(
        json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n")
    s = report["summary"]
    print(f"{rc.experiment}: {s['passed']}/{s['total']} checks passed -> {out}")
    for e in report["entries"]:
        if not e["pass"]:
            print(f"  FAIL {e['check_id']}: abs_err={e['abs_err']} tol={e['tolerance']}")
    return EXIT_OK if s["failed"] == 0 else EXIT_CHECK_FAILED


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if not (args.tolerance_scale > 0 and math.isfinite(args.tolerance_scale)):
            raise ConfigError("--tolerance-scale must be positive")
        rc = (load_config(args.config, args.experiment) if args.config
              else parse_config("", args.experiment))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(rc, args.out, args)


if __name__ == "__main__":
    sys.exit(main())
