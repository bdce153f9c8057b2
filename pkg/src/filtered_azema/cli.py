"""
Command-line driver: ``simulate``, ``verify`` and ``table``.

Exit codes: 0 when everything ran and passed, 1 when a verification suite
reported a statistical failure, 2 for usage or configuration errors (bad
flags, malformed grids, ``|alpha| > 1`` for skew constructions, unwritable
output paths).

Every subcommand accepts ``--config FILE`` with plain ``key = value`` lines.
Command-line flags override config entries, which override built-in defaults;
the resolved configuration is echoed into every manifest and report.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from . import experiments as exps
from . import filters as flt
from . import oracle as orc
from .paths import (LANE_W, SamplePath, TimeGrid, _check_alpha_skew, bm_batch, iter_streams,
                    skew_bm_batch)
from .solvers import THREADS_ENV, ScenarioKind, scenario_batch

SIM_KINDS = ("first-euler", "first-exact", "second", "skew", "bm", "z")
TABLES = ("density", "filter", "moments")


class UsageError(Exception):
    """Bad flags, config or grid specification (exit code 2)."""


# ---------------------------------------------------------------------------
# files


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def provenance_line(seed, dt, n_paths, **extra) -> str:
    """Leading ``#`` comment embedding seed, dt, N and the package version."""
    items = {"version": __version__, "seed": seed, "dt": dt, "n_paths": n_paths, **extra}
    return "# " + " ".join(f"{k}={v}" for k, v in items.items()) + "\n"


def read_config(path) -> dict:
    """Parse a ``key = value`` file; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read config file {path}: {e}") from None
    for k, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{k}: expected 'key = value', got {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if not key:
            raise UsageError(f"{path}:{k}: empty key")
        out[key.replace("-", "_")] = val
    return out


def _resolve(args: argparse.Namespace, keys: Sequence[str], defaults: dict,
             allow_extra: bool = False) -> tuple[dict, dict]:
    """flags > config file > defaults; returns (resolved, unknown config keys)."""
    conf = read_config(args.config) if args.config else {}
    if "paths" in conf:
        conf["n_paths"] = conf.pop("paths")
    extra = {k: conf.pop(k) for k in list(conf) if k not in keys}
    if extra and not allow_extra:
        raise UsageError(f"unknown config keys: {', '.join(sorted(extra))}")
    out = dict(defaults)
    out.update(conf)
    out.update({k: v for k in keys if (v := getattr(args, k, None)) is not None})
    return out, extra


def _num(value, kind, name):
    if value is None:
        return None
    try:
        return kind(float(value)) if kind is int else kind(value)
    except (TypeError, ValueError):
        raise UsageError(f"{name}: expected {kind.__name__}, got {value!r}") from None


def _bool(value) -> bool:
    if isinstance(value, bool):
        return value
    v = str(value).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {value!r}")


def parse_grid(spec: str, name: str = "grid") -> np.ndarray:
    """``lo:hi:count`` (inclusive, evenly spaced) or a comma list of numbers."""
    try:
        if ":" in spec:
            lo, hi, cnt = spec.split(":")
            cnt = int(cnt)
            if cnt < 1:
                raise ValueError
            vals = np.linspace(float(lo), float(hi), cnt)
        else:
            vals = np.array([float(s) for s in spec.split(",") if s.strip()])
    except ValueError:
        raise UsageError(f"malformed {name} spec {spec!r}; use lo:hi:count or a,b,c") from None
    if vals.size == 0 or not np.all(np.isfinite(vals)):
        raise UsageError(f"malformed {name} spec {spec!r}")
    return vals


def _out_dir(path) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise UsageError(f"cannot create output directory {p}: {e}") from None
    if not os.access(p, os.W_OK):
        raise UsageError(f"output directory {p} is not writable")
    return p


def _emit(text: str, output) -> None:
    if output in (None, "-"):
        sys.stdout.write(text)
        return
    p = Path(output)
    if p.parent and not p.parent.exists():
        raise UsageError(f"output directory {p.parent} does not exist")
    try:
        write_atomic(p, text)
    except OSError as e:
        raise UsageError(f"cannot write {p}: {e}") from None


# ---------------------------------------------------------------------------
# simulate

_SIM_KEYS = ("kind", "alpha", "t_max", "dt", "n_paths", "seed", "output", "bridge", "threads")
_SIM_DEFAULTS = {"alpha": 0.0, "t_max": 1.0, "dt": 1e-3, "n_paths": 1, "seed": exps.DEFAULT_SEED,
                 "output": "scenarios", "bridge": True}


def cmd_simulate(args) -> int:
    cfg, _ = _resolve(args, _SIM_KEYS, _SIM_DEFAULTS)
    kind = cfg.get("kind")
    if kind not in SIM_KINDS:
        raise UsageError(f"--kind must be one of {', '.join(SIM_KINDS)}, got {kind!r}")
    alpha = _num(cfg["alpha"], float, "alpha")
    t_max = _num(cfg["t_max"], float, "t_max")
    dt = _num(cfg["dt"], float, "dt")
    n = _num(cfg["n_paths"], int, "n_paths")
    seed = _num(cfg["seed"], int, "seed")
    bridge = _bool(cfg["bridge"])
    if kind in ("second", "skew"):
        try:
            _check_alpha_skew(alpha)
        except ValueError as e:
            raise UsageError(str(e)) from None
    if n < 1:
        raise UsageError("n_paths must be at least 1")
    try:
        grid = TimeGrid.from_dt(t_max, dt)
    except ValueError as e:
        raise UsageError(str(e)) from None
    out = _out_dir(cfg["output"])
    resolved = {"kind": kind, "alpha": alpha, "t_max": t_max, "dt": grid.dt, "n_paths": n,
                "seed": seed, "bridge": bridge, "output": str(out)}

    files = []
    chunk = max(1, min(n, 500_000 // (grid.n_steps + 1)))
    for block in iter_streams(n, chunk):
        for name, text in _simulate_block(kind, grid, seed, block, alpha, bridge, n):
            write_atomic(out / name, text)
            files.append({"file": name, "sha256": hashlib.sha256(text.encode()).hexdigest()})
    manifest = {"version": __version__, "command": "simulate", "config": resolved,
                "seed": seed, "dt": grid.dt, "n_paths": n, "files": files}
    write_atomic(out / "manifest.json", json.dumps(manifest, indent=1) + "\n")
    print(f"wrote {len(files)} paths and manifest.json to {out}")
    return 0


def _simulate_block(kind, grid, seed, block, alpha, bridge, n):
    streams = list(block)
    if kind in ("skew", "bm"):
        arr = (skew_bm_batch(grid, seed, streams, alpha) if kind == "skew"
               else bm_batch(grid, seed, streams, LANE_W))
        for k, s in enumerate(streams):
            text = SamplePath(grid, arr[k]).to_csv()
            yield f"{kind}_{s:06d}.csv", _stamp(text, seed, s, grid.dt, n, kind, alpha)
        return
    sk = ScenarioKind(kind)
    batch = scenario_batch(sk, grid, seed, streams, alpha, bridge)
    for k, s in enumerate(streams):
        yield f"{kind}_{s:06d}.csv", _stamp(batch[k].to_csv(), seed, s, grid.dt, n, kind, alpha)


def _stamp(text, seed, stream, dt, n, kind, alpha):
    return provenance_line(seed, dt, n, stream=stream, kind=kind, alpha=alpha) + text


# ---------------------------------------------------------------------------
# verify

_VERIFY_KEYS = ("experiment", "alpha", "t_max", "dt", "n_paths", "seed", "output",
                "constant_mode", "moment_mode", "threads")


def cmd_verify(args) -> int:
    cfg, extra = _resolve(args, _VERIFY_KEYS, {"seed": exps.DEFAULT_SEED}, allow_extra=True)
    for item in args.set or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        extra[k.strip().replace("-", "_")] = v.strip()
    name = cfg.get("experiment")
    if name not in exps.EXPERIMENTS:
        raise UsageError(f"unknown experiment {name!r}; choose from {', '.join(exps.EXPERIMENTS)}")
    try:
        ec = exps.ExperimentConfig(
            name, alpha=_num(cfg.get("alpha"), float, "alpha"),
            t_max=_num(cfg.get("t_max"), float, "t_max"), dt=_num(cfg.get("dt"), float, "dt"),
            n_paths=_num(cfg.get("n_paths"), int, "n_paths"),
            seed=_num(cfg["seed"], int, "seed"), output=cfg.get("output"),
            constant_mode=cfg.get("constant_mode", flt.ConstantMode.ORACLE_DERIVED),
            moment_mode=cfg.get("moment_mode", flt.MomentMode.DENSITY_EXACT),
            threads=_num(cfg.get("threads"), int, "threads"), overrides=extra)
    except ValueError as e:
        raise UsageError(str(e)) from None
    if ec.output is None:
        ec.output = f"verify-{name}.json"
    if ec.output != "-" and not Path(ec.output).parent.exists():
        raise UsageError(f"output directory {Path(ec.output).parent} does not exist")
    if ec.threads is not None:
        os.environ[THREADS_ENV] = str(ec.threads)

    names = exps.EXPERIMENTS[:-1] if name == "all" else (name,)
    reports = []
    for nm in names:
        part = exps.run(replace(ec, experiment=nm))
        for r in part:
            print(r.line(), flush=True)
            if r.name == "calibrate-meander-constant":
                _print_calibration_rows(r)
        reports += part
    resolved = ec.as_dict()
    doc = [dict(r.to_dict(), config=resolved, version=__version__) for r in reports]
    text = json.dumps(doc, indent=1) + "\n"
    if ec.output != "-":
        _emit(text, ec.output)
    print(orc.summary_line(reports))
    return 0 if all(r.passed for r in reports) else 1


def _print_calibration_rows(r: orc.McReport) -> None:
    print("  candidate        value       z")
    for key, val in orc.CANDIDATES.items():
        z = r.params.get(f"z_vs_{key}")
        mark = "  <- selected" if r.params.get("selected") == key else ""
        print(f"  {key:<14} {val:.6f} {z:+8.2f}{mark}")


# ---------------------------------------------------------------------------
# table

_TABLE_KEYS = ("table", "t", "g", "y", "alpha", "x", "n", "kind", "t_max", "dt", "seed",
               "stream", "constant_mode", "output")
_TABLE_DEFAULTS = {"t": 1.0, "g": 0.5, "y": 0.0, "alpha": 1.0, "x": "-4:4:81", "n": "0:4:5",
                   "kind": "second", "t_max": 1.0, "dt": 1e-3, "seed": exps.DEFAULT_SEED,
                   "stream": 0, "constant_mode": flt.ConstantMode.ORACLE_DERIVED.value}


def cmd_table(args) -> int:
    cfg, _ = _resolve(args, _TABLE_KEYS, _TABLE_DEFAULTS)
    which = cfg.get("table")
    if which not in TABLES:
        raise UsageError(f"table must be one of {', '.join(TABLES)}, got {which!r}")
    try:
        text = {"density": _table_density, "moments": _table_moments,
                "filter": _table_filter}[which](cfg)
    except ValueError as e:
        raise UsageError(str(e)) from None
    _emit(text, cfg.get("output"))
    return 0


def _fmt(v: float) -> str:
    return repr(float(v))


def _table_density(cfg) -> str:
    t, g, y, a = (_num(cfg[k], float, k) for k in ("t", "g", "y", "alpha"))
    xs = parse_grid(str(cfg["x"]), "x")
    dens = flt.conditional_density_first_kind(t, xs, y, g, a)
    head = provenance_line("none", "none", "none", t=t, g=g, y=y, alpha=a)
    return head + "x,density\n" + "".join(f"{_fmt(x)},{_fmt(d)}\n" for x, d in zip(xs, dens))


def _table_moments(cfg) -> str:
    t, g, y, a = (_num(cfg[k], float, k) for k in ("t", "g", "y", "alpha"))
    ns = parse_grid(str(cfg["n"]), "n")
    if np.any(ns != np.round(ns)) or np.any(ns < 0):
        raise UsageError("n grid must hold nonnegative integers")
    rows = []
    for n in ns.astype(int):
        ex = flt.conditional_moment_first_kind(n, t, g, y, a, flt.MomentMode.DENSITY_EXACT)
        pv = flt.conditional_moment_first_kind(n, t, g, y, a, flt.MomentMode.PAPER_VERBATIM)
        rows.append(f"{n},{_fmt(ex)},{_fmt(pv)}\n")
    head = provenance_line("none", "none", "none", t=t, g=g, y=y, alpha=a)
    return head + "n,density_exact,paper_verbatim\n" + "".join(rows)


def _table_filter(cfg) -> str:
    kind = ScenarioKind(cfg["kind"])
    a = _num(cfg["alpha"], float, "alpha")
    grid = TimeGrid.from_dt(_num(cfg["t_max"], float, "t_max"), _num(cfg["dt"], float, "dt"))
    seed, stream = _num(cfg["seed"], int, "seed"), _num(cfg["stream"], int, "stream")
    if kind is ScenarioKind.SECOND:
        try:
            _check_alpha_skew(a)
        except ValueError as e:
            raise UsageError(str(e)) from None
    sc = scenario_batch(kind, grid, seed, [stream], a)[0]
    if kind is ScenarioKind.SECOND:
        series = flt.second_kind_series(sc, flt.MeanderConstant.from_mode(cfg["constant_mode"]))
    elif kind.is_first:
        series = flt.first_kind_series(sc)
    else:
        raise UsageError("filter tables need kind first-euler, first-exact or second")
    head = provenance_line(seed, grid.dt, 1, stream=stream, kind=kind.value, alpha=a)
    return head + series.to_csv()


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="filtered-azema", description=__doc__.strip().split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="key = value file; flags override its entries")
        sp.add_argument("--output", "-o")
        sp.add_argument("--seed", type=int)

    s = sub.add_parser("simulate", help="write scenario CSVs and a manifest")
    common(s)
    s.add_argument("--kind", choices=SIM_KINDS)
    s.add_argument("--alpha", type=float)
    s.add_argument("--t-max", dest="t_max", type=float)
    s.add_argument("--dt", type=float)
    s.add_argument("--paths", dest="n_paths", type=int)
    s.add_argument("--no-bridge", dest="bridge", action="store_const", const=False,
                   help="grid sign changes only, no bridge-refined zeros")
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run a verification suite, write a JSON report")
    common(v)
    v.add_argument("--experiment", help=", ".join(exps.EXPERIMENTS))
    v.add_argument("--alpha", type=float)
    v.add_argument("--t-max", dest="t_max", type=float)
    v.add_argument("--dt", type=float)
    v.add_argument("--paths", dest="n_paths", type=int)
    v.add_argument("--constant-mode", dest="constant_mode",
                   choices=[m.value for m in flt.ConstantMode])
    v.add_argument("--moment-mode", dest="moment_mode",
                   choices=[m.value for m in flt.MomentMode])
    v.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    v.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="suite-specific override, repeatable")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("table", help="tabulate densities, moments or a filter path as CSV")
    common(t)
    t.add_argument("table", nargs="?", choices=TABLES)
    t.add_argument("--t", type=float)
    t.add_argument("--g", type=float)
    t.add_argument("--y", type=float)
    t.add_argument("--alpha", type=float)
    t.add_argument("--x", help="x grid for density: lo:hi:count or a,b,c")
    t.add_argument("--n", help="moment orders: lo:hi:count or a,b,c")
    t.add_argument("--kind", choices=[k.value for k in ScenarioKind])
    t.add_argument("--t-max", dest="t_max", type=float)
    t.add_argument("--dt", type=float)
    t.add_argument("--stream", type=int)
    t.add_argument("--constant-mode", dest="constant_mode",
                   choices=[m.value for m in flt.ConstantMode])
    t.set_defaults(func=cmd_table)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help/--version
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
