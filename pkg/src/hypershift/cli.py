"""Configuration-driven command line front end.

Subcommands
-----------
xray      emit the classical profile CSV for a potential
shifts    emit the phase-shift spectrum CSV + JSON sidecar at one energy
trace     emit the quantum/classical moment report (CSV + JSON)
invert    reconstruct a radial potential from a profile CSV
freespec  emit the free scattering eigenvalue table
selftest  run the acceptance suite

Options come from an INI config file (section per subcommand plus [common])
overridden by command-line flags.  Outputs are written atomically and are
byte-identical across reruns of the same configuration; JSON sidecars carry
a ``generated_by`` hash of the resolved configuration.  Exit codes: 0 ok,
2 validation failure, 3 numerical-tolerance failure.  The environment
variable HYPERSHIFT_THREADS caps mode-level parallelism.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import ToleranceError, ValidationError
from .potentials import make_potential, tabulated_from_csv
from .radial import phase_spectrum, suggest_kmax
from .specfun import free_eigenvalue_mu_k
from .trace import TraceReport, moment_compare, convergence_study
from .xray import ClassicalProfile, xray_radial_profile
from .inversion import potential_from_profile

_DEFAULTS = {
    "dim": 1,
    "potential": "gaussian_rho:A=1,sigma=1",
    "tol": 1e-9,
    "out": ".",
    "lam": 100.0,
    "lambda_list": "50,100,200",
    "kmax": 0,            # 0 = policy ceil(2 lam R)
    "p_list": "1",
    "reg": 1e-10,
    "r_max": 40.0,
    "r_points": 400,
    "rho_max": 8.0,
    "rho_step": 0.1,
    "profile": "",
    "tail_exponent": 0.0,  # 0 = not declared (required for tabulated CSV input)
}


@dataclass
class RunConfig:
    """Resolved options for one subcommand run."""

    subcommand: str
    dim: int = _DEFAULTS["dim"]
    potential: str = _DEFAULTS["potential"]
    tol: float = _DEFAULTS["tol"]
    out: str = _DEFAULTS["out"]
    lam: float = _DEFAULTS["lam"]
    lambda_list: tuple = ()
    kmax: int = _DEFAULTS["kmax"]
    p_list: tuple = (1,)
    reg: float = _DEFAULTS["reg"]
    r_max: float = _DEFAULTS["r_max"]
    r_points: int = _DEFAULTS["r_points"]
    rho_max: float = _DEFAULTS["rho_max"]
    rho_step: float = _DEFAULTS["rho_step"]
    profile: str = _DEFAULTS["profile"]
    tail_exponent: float = _DEFAULTS["tail_exponent"]
    extras: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.dim not in (1, 2, 3):
            raise ValidationError("dim must be 1, 2 or 3")
        if not self.tol > 0:
            raise ValidationError("tol must be positive")
        if self.subcommand in ("shifts", "freespec") and not self.lam > 0:
            raise ValidationError("lambda must be positive")
        if self.reg < 0:
            raise ValidationError("reg must be nonnegative")
        os.makedirs(self.out, exist_ok=True)
        if not os.access(self.out, os.W_OK):
            raise ValidationError(f"output directory {self.out!r} is not writable")

    def hash(self) -> str:
        payload = json.dumps(
            {k: v for k, v in sorted(self.__dict__.items()) if k != "extras"},
            sort_keys=True, default=str)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


def parse_potential(spec: str):
    """'family:key=val,key=val' or 'tabulated:path=...,m=...' or 'zero'."""
    spec = spec.strip()
    if ":" not in spec:
        return make_potential(spec)
    family, _, argstr = spec.partition(":")
    kv = {}
    for item in argstr.split(","):
        if not item.strip():
            continue
        key, _, val = item.partition("=")
        if not _:
            raise ValidationError(f"malformed potential parameter {item!r}")
        kv[key.strip()] = val.strip()
    if family == "tabulated":
        path = kv.pop("path", None)
        m = kv.pop("m", None)
        if path is None or m is None:
            raise ValidationError("tabulated potential needs path=... and m=...")
        return tabulated_from_csv(path, float(m))
    params = {}
    for key, val in kv.items():
        try:
            params[key] = float(val)
        except ValueError:
            raise ValidationError(f"potential parameter {key}={val!r} is not numeric")
    return make_potential(family, **params)


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp-{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, payload: dict) -> None:
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _load_config(path: str | None, subcommand: str) -> dict:
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValidationError(f"config file {path!r} not found")
    merged = {}
    for section in ("common", subcommand):
        if parser.has_section(section):
            merged.update(dict(parser.items(section)))
    return merged


_FLOAT_KEYS = {"tol", "lam", "reg", "r_max", "rho_max", "rho_step", "tail_exponent"}
_INT_KEYS = {"dim", "kmax", "r_points"}


def _coerce(key: str, val):
    if key in _FLOAT_KEYS:
        return float(val)
    if key in _INT_KEYS:
        return int(val)
    if key == "lambda_list":
        return tuple(float(x) for x in str(val).split(",") if x.strip())
    if key == "p_list":
        return tuple(int(x) for x in str(val).split(",") if x.strip())
    return val


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    file_opts = _load_config(getattr(args, "config", None), args.subcommand)
    alias = {"lambda": "lam"}
    for key, val in file_opts.items():
        key = alias.get(key, key)
        if hasattr(cfg, key):
            setattr(cfg, key, _coerce(key, val))
        else:
            cfg.extras[key] = val
    for key in ("dim", "potential", "tol", "out", "lam", "lambda_list", "kmax",
                "p_list", "reg", "r_max", "r_points", "rho_max", "rho_step",
                "profile", "tail_exponent"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, _coerce(key, val))
    if not cfg.lambda_list:
        cfg.lambda_list = tuple(float(x) for x in _DEFAULTS["lambda_list"].split(","))
    cfg.validate()
    return cfg


# ------------------------------------------------------------ subcommand runs

def _run_xray(cfg: RunConfig) -> None:
    pot = parse_potential(cfg.potential)
    r = np.linspace(0.0, cfg.r_max, cfg.r_points)
    prof = xray_radial_profile(pot, r, tol=cfg.tol)
    buf = io.StringIO()
    prof.to_csv(buf)
    _atomic_write(os.path.join(cfg.out, "profile.csv"), buf.getvalue())
    _write_json(os.path.join(cfg.out, "profile.json"), {
        "generated_by": cfg.hash(), "potential": cfg.potential, "dim": cfg.dim,
        "tol": cfg.tol, "r_max": cfg.r_max, "r_points": cfg.r_points,
        "monotone_decreasing": prof.monotone_decreasing,
    })


def _run_shifts(cfg: RunConfig) -> None:
    pot = parse_potential(cfg.potential)
    kmax = cfg.kmax or suggest_kmax(pot, cfg.lam, cfg.dim)
    spec = phase_spectrum(cfg.lam, kmax, pot, cfg.dim, tol=cfg.tol)
    buf = io.StringIO()
    spec.to_csv(buf)
    _atomic_write(os.path.join(cfg.out, "spectrum.csv"), buf.getvalue())
    _write_json(os.path.join(cfg.out, "spectrum.json"),
                {"generated_by": cfg.hash(), **spec.sidecar()})


def _run_trace(cfg: RunConfig) -> None:
    pot = parse_potential(cfg.potential)
    lams = cfg.lambda_list
    kmax_policy = (lambda lam: cfg.kmax) if cfg.kmax else None
    if len(lams) >= 3:
        report = None
        rows = []
        for p in cfg.p_list:
            rep = convergence_study(pot, cfg.dim, lams, int(p), tol=cfg.tol,
                                    kmax_policy=kmax_policy)
            rows.extend(rep.rows)
            report = rep
        report = TraceReport(rows=rows, fit_slope=report.fit_slope,
                             fit_residual=report.fit_residual,
                             meta={"p_list": list(cfg.p_list)})
    else:
        rows = []
        for lam in lams:
            kmax = cfg.kmax or suggest_kmax(pot, lam, cfg.dim)
            rows.extend(moment_compare(pot, cfg.dim, lam, cfg.p_list,
                                       tol=cfg.tol, kmax=kmax))
        report = TraceReport(rows=rows, meta={"p_list": list(cfg.p_list)})
    buf = io.StringIO()
    report.to_csv(buf)
    _atomic_write(os.path.join(cfg.out, "trace.csv"), buf.getvalue())
    _write_json(os.path.join(cfg.out, "trace.json"),
                {"generated_by": cfg.hash(), **report.summary()})


def _run_invert(cfg: RunConfig) -> None:
    if not cfg.profile:
        raise ValidationError("invert needs profile=<csv path>")
    with open(cfg.profile, "r", encoding="utf-8") as fh:
        prof = ClassicalProfile.from_csv(
            fh, tail_exponent=cfg.tail_exponent or math.inf)
    rho_grid = np.arange(0.0, cfg.rho_max + cfg.rho_step / 2.0, cfg.rho_step)
    rec = potential_from_profile(prof, cfg.dim, rho_grid, reg=cfg.reg, tol=cfg.tol)
    rho_out = np.linspace(0.0, cfg.rho_max, 4 * rho_grid.size)
    vals = rec(rho_out)
    lines = ["rho,value"]
    lines += [f"{r:.17g},{v:.17g}" for r, v in zip(rho_out, vals)]
    _atomic_write(os.path.join(cfg.out, "potential.csv"), "\n".join(lines) + "\n")
    forward = xray_radial_profile(rec, prof.r_grid, tol=cfg.tol)
    resid = np.abs(forward.g_values - prof.g_values)
    _write_json(os.path.join(cfg.out, "residual.json"), {
        "generated_by": cfg.hash(),
        "reg": cfg.reg,
        "condition": rec.params.get("condition"),
        "max_abs_residual": float(resid.max()),
        "rms_residual": float(np.sqrt(np.mean(resid ** 2))),
    })


def _run_freespec(cfg: RunConfig) -> None:
    kmax = cfg.kmax or 50
    lines = ["k,re,im,multiplicity"]
    for k in range(kmax + 1):
        mu = free_eigenvalue_mu_k(k, cfg.lam, cfg.dim)
        lines.append(f"{k},{mu.value.real:.17g},{mu.value.imag:.17g},{mu.multiplicity}")
    _atomic_write(os.path.join(cfg.out, "freespec.csv"), "\n".join(lines) + "\n")
    _write_json(os.path.join(cfg.out, "freespec.json"), {
        "generated_by": cfg.hash(), "lambda": cfg.lam, "dim": cfg.dim,
        "kmax": kmax,
        "note": "k=0 value is convention-dependent; relative quantities only",
    })


def _run_selftest(cfg: RunConfig) -> None:
    from .acceptance import run_all
    results = run_all(echo=print)
    if not all(r.passed for r in results):
        raise ToleranceError("acceptance suite reported failures")


_RUNNERS = {
    "xray": _run_xray,
    "shifts": _run_shifts,
    "trace": _run_trace,
    "invert": _run_invert,
    "freespec": _run_freespec,
    "selftest": _run_selftest,
}


def _make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypershift",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", help="INI config file (sections [common], [<cmd>])")
        p.add_argument("--dim", type=int, help=f"boundary dimension n (default {_DEFAULTS['dim']})")
        p.add_argument("--potential",
                       help="family:key=val,... e.g. gaussian_rho:A=1,sigma=1 "
                            "| bump_ball:delta=0.5 | exp_decay:A=1,m=2 "
                            "| tabulated:path=f.csv,m=3 | zero")
        p.add_argument("--lambda", dest="lam", type=float,
                       help=f"energy parameter lambda (default {_DEFAULTS['lam']})")
        p.add_argument("--lambda-list", dest="lambda_list",
                       help=f"comma list for trace (default {_DEFAULTS['lambda_list']})")
        p.add_argument("--kmax", type=int,
                       help="max harmonic degree (default: ceil(2 lam R_support))")
        p.add_argument("--tol", type=float, help=f"tolerance (default {_DEFAULTS['tol']})")
        p.add_argument("--p-list", dest="p_list",
                       help=f"comma list of moment orders (default {_DEFAULTS['p_list']})")
        p.add_argument("--reg", type=float,
                       help=f"Tikhonov weight for invert (default {_DEFAULTS['reg']})")
        p.add_argument("--out", help="output directory (default '.')")
        p.add_argument("--r-max", dest="r_max", type=float,
                       help=f"profile radius limit (default {_DEFAULTS['r_max']})")
        p.add_argument("--r-points", dest="r_points", type=int,
                       help=f"profile grid size (default {_DEFAULTS['r_points']})")
        p.add_argument("--rho-max", dest="rho_max", type=float,
                       help=f"reconstruction knot range (default {_DEFAULTS['rho_max']})")
        p.add_argument("--rho-step", dest="rho_step", type=float,
                       help=f"reconstruction knot spacing (default {_DEFAULTS['rho_step']})")
        p.add_argument("--profile", help="input profile CSV for invert")
        p.add_argument("--tail-exponent", dest="tail_exponent", type=float,
                       help="declared tail exponent for profile/tabulated input")
    return parser


def main(argv=None) -> int:
    args = _make_parser().parse_args(argv)
    try:
        cfg = build_config(args)
        _RUNNERS[args.subcommand](cfg)
    except ValidationError as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr)
        sys.stderr.write("\n")
        return 2
    except ToleranceError as exc:
        json.dump({"error": {"type": type(exc).__name__, "message": str(exc)}},
                  sys.stderr)
        sys.stderr.write("\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
