"""Command-line front end.

    nhpoisson simulate|verify|casimir|rank-scan --config FILE [--out DIR] [--seed N]

``NHPOISSON_OUT`` and ``NHPOISSON_SEED`` override the config's output
directory and seed; the flags override both.  Exit codes: 0 success,
1 verification failure, 2 configuration error, 3 runtime or domain error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import io
import itertools
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .config import load
from .errors import ConfigError, ContractError, NHPoissonError
from .integrate import IntegratorConfig, integrate, monitor_report
from .multivec import rank_at
from .systems import make_system
from .verify import run_verification

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

ENV_OUT = "NHPOISSON_OUT"
ENV_SEED = "NHPOISSON_SEED"
TIMESTAMP_KEY = "generated_at"


# -- output helpers -------------------------------------------------------

def _umask():
    mask = os.umask(0)
    os.umask(mask)
    return mask


def _atomic_write(path: Path, data: bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.chmod(tmp, 0o666 & ~_umask())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(v) -> str:
    return "%.17g" % float(v)


def csv_bytes(header, columns) -> bytes:
    """RFC 4180 CSV (CRLF line ends) with ``%.17g`` numbers."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([format_float(v) for v in row])
    return buf.getvalue().encode("ascii")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def json_bytes(doc: dict) -> bytes:
    doc = dict(_jsonable(doc))
    doc[TIMESTAMP_KEY] = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")


# -- commands -------------------------------------------------------------

def _spec(cfg):
    return make_system(cfg.system, cfg.params, cfg.variant)


def _x0(cfg, spec):
    init = cfg.section("initial")
    if "state" not in init:
        raise ConfigError("config error at initial: this command needs initial.state")
    x0 = np.array(init["state"], dtype=float)
    if x0.shape != (spec.dim,):
        raise ConfigError(f"config error at initial/state: expected {spec.dim} coordinates "
                          f"for {spec.name} {spec.variant}, got {x0.size}")
    return x0


def _integrator(cfg, spec, default_monitors):
    sec = cfg.section("integrator")
    sec["monitors"] = tuple(sec.get("monitors", default_monitors))
    try:
        return IntegratorConfig(**sec)
    except ContractError as exc:
        raise ConfigError(f"config error at integrator: {exc}") from None


def _base_doc(cfg, command):
    return {"tool": "nhpoisson", "version": __version__, "command": command,
            "system": cfg.system, "variant": cfg.variant, "config": cfg.raw}


def cmd_simulate(cfg, out: Path, seed):
    spec = _spec(cfg)
    x0 = _x0(cfg, spec)
    defaults = ("energy", "phi", "casimirs") if spec.dim == 5 else ("energy", "casimirs")
    traj = integrate(spec, x0, _integrator(cfg, spec, defaults))
    names = list(traj.monitors)
    header = ["t", *spec.coords, *names]
    cols = [traj.times, *traj.states.T, *(traj.monitors[n] for n in names)]
    partial = traj.termination != "reached_t_end"
    doc = _base_doc(cfg, "simulate")
    doc.update(termination=traj.termination, partial=partial, steps=len(traj) - 1,
               t_final=float(traj.times[-1]), report=monitor_report(traj))
    _atomic_write(out / f"{cfg.prefix}_trajectory.csv", csv_bytes(header, cols))
    _atomic_write(out / f"{cfg.prefix}_summary.json", json_bytes(doc))
    return EXIT_RUNTIME if partial else EXIT_OK


def cmd_casimir(cfg, out: Path, seed):
    spec = _spec(cfg)
    x0 = _x0(cfg, spec)
    icfg = _integrator(cfg, spec, ("casimirs",))
    if "casimirs" not in icfg.monitors:
        icfg = dataclasses.replace(icfg, monitors=icfg.monitors + ("casimirs",))
    traj = integrate(spec, x0, icfg)
    names = [n for n in traj.monitors if n in ("c1", "c2", "c3", "j", "k")]
    header = ["t", *names]
    cols = [traj.times, *(traj.monitors[n] for n in names)]
    partial = traj.termination != "reached_t_end"
    report = monitor_report(traj)
    doc = _base_doc(cfg, "casimir")
    doc.update(termination=traj.termination, partial=partial,
               casimir_base=float(x0[0] if icfg.casimir_base is None else icfg.casimir_base),
               report={n: report[n] for n in names})
    _atomic_write(out / f"{cfg.prefix}_casimir.csv", csv_bytes(header, cols))
    _atomic_write(out / f"{cfg.prefix}_casimir.json", json_bytes(doc))
    return EXIT_RUNTIME if partial else EXIT_OK


def cmd_verify(cfg, out: Path, seed):
    sec = cfg.section("verify")
    if cfg.system == "cylinder":
        variants = sec.get("variants", ["reduced4"])
    else:
        variants = sec.get("variants", ["reduced4", "extended5"])
    systems = [(cfg.system, cfg.params, variants)]
    if sec.get("include_heisenberg", False):
        systems.append(("heisenberg", None, []))
    seed = sec.get("seed", 0) if seed is None else seed
    report = run_verification(
        systems, n=sec.get("samples", 1000), seed=seed, tolerances=sec.get("tolerances"),
        inject_sign_flip=(cfg.system,) if sec.get("inject_sign_flip", False) else (),
        config_echo=cfg.raw)
    report["command"] = "verify"
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    report["failed_checks"] = failed
    _atomic_write(out / f"{cfg.prefix}_verify.json", json_bytes(report))
    return EXIT_OK if report["passed"] else EXIT_FAIL


def _grid(sec, spec):
    base = np.array(sec["base"], dtype=float)
    if base.shape != (spec.dim,):
        raise ConfigError(f"config error at rank_scan/base: expected {spec.dim} coordinates")
    axes = sec.get("axes", {})
    unknown = sorted(set(axes) - set(spec.coords))
    if unknown:
        raise ConfigError(f"config error at rank_scan/axes: unknown coordinate(s) "
                          f"{', '.join(unknown)}")
    names = [c for c in spec.coords if c in axes]
    values = [np.linspace(*axes[c][:2], int(axes[c][2])) for c in names]
    pts = []
    for combo in itertools.product(*values):
        p = base.copy()
        for c, v in zip(names, combo):
            p[spec.coords.index(c)] = v
        pts.append(p)
    return np.array(pts)


def cmd_rank_scan(cfg, out: Path, seed):
    spec = _spec(cfg)
    sec = cfg.section("rank_scan")
    tol = sec.get("tol", 1e-9)
    L = spec.bivector()
    grid = _grid(sec, spec)
    fixtures = np.array(spec.singular_fixtures).reshape(-1, spec.dim)
    rows = []
    for kind, pts in (("grid", grid), ("fixture", fixtures)):
        if len(pts) == 0:
            continue
        ranks = np.atleast_1d(rank_at(L, pts, tol))
        W = L.matrix(pts)
        wmax = np.max(np.abs(W.reshape(len(pts), -1)), axis=-1)
        rows.extend({"kind": kind, "point": p, "rank": int(r), "max_component": float(w)}
                    for p, r, w in zip(pts, ranks, wmax))
    valid = all(r["rank"] in (0, 2) for r in rows)
    doc = _base_doc(cfg, "rank-scan")
    doc.update(points=rows, tol=tol, ranks_valid=valid,
               rank_counts={str(k): sum(r["rank"] == k for r in rows)
                            for k in sorted({r["rank"] for r in rows})})
    _atomic_write(out / f"{cfg.prefix}_rank.json", json_bytes(doc))
    return EXIT_OK if valid else EXIT_FAIL


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "casimir": cmd_casimir,
            "rank-scan": cmd_rank_scan}


def _parse_seed(text):
    try:
        v = int(text)
    except (TypeError, ValueError):
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= v < 2 ** 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {text!r}")
    return v


def build_parser():
    ap = argparse.ArgumentParser(prog="nhpoisson", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"nhpoisson {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="TOML run configuration")
    ap.add_argument("--out", help="output directory (default: config output.dir or .)")
    ap.add_argument("--seed", help="verification seed (unsigned 64-bit)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load(args.config)
        seed_text = args.seed if args.seed is not None else os.environ.get(ENV_SEED)
        seed = None if seed_text in (None, "") else _parse_seed(seed_text)
        out = args.out or os.environ.get(ENV_OUT) or cfg.section("output").get("dir") or "."
        return COMMANDS[args.command](cfg, Path(out), seed)
    except ConfigError as exc:
        print(f"nhpoisson: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NHPoissonError, ArithmeticError) as exc:
        print(f"nhpoisson: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
