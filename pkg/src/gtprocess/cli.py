"""Command-line interface.

Every subcommand emits a flat table of records, as CSV (header row first) or
as a JSON list of objects.  Reals are written with 17 significant digits.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 violated precondition.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from . import asymptotics, kernel, region, sampler
from .errors import GTError
from .measure import AtomicMeasure, TopRow, clustered_top_row

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 2, 3, 4


class ConfigError(Exception):
    """Bad flags, configuration file or measure file."""


class PreconditionError(Exception):
    """The requested computation's preconditions do not hold."""


# ---------------------------------------------------------------------------
# value parsing


def _floats(text: str, count: Optional[int] = None, name: str = "value") -> List[float]:
    try:
        vals = [float(v) for v in str(text).split(",") if v.strip() != ""]
    except ValueError:
        raise ConfigError(f"{name}: expected comma-separated numbers, got {text!r}")
    if count is not None and len(vals) != count:
        raise ConfigError(f"{name}: expected {count} numbers, got {len(vals)}")
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError(f"{name}: values must be finite")
    return vals


def _grid(text: str):
    try:
        nx, ny = (int(v) for v in str(text).lower().split("x"))
    except ValueError:
        raise ConfigError(f"--grid: expected NXxNY, got {text!r}")
    if nx < 1 or ny < 1:
        raise ConfigError("--grid: sizes must be positive")
    return nx, ny


def _int(value, name):
    try:
        out = int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    if out != float(value):
        raise ConfigError(f"{name}: expected an integer, got {value!r}")
    return out


def _load_measure(cfg) -> AtomicMeasure:
    if cfg.get("measure") and cfg.get("atoms"):
        raise ConfigError("give either --measure or --atoms, not both")
    try:
        if cfg.get("measure"):
            return AtomicMeasure.from_json(cfg["measure"])
        if cfg.get("atoms"):
            pairs = []
            for item in str(cfg["atoms"]).split(","):
                p, w = item.split(":")
                pairs.append((float(p), float(w)))
            return AtomicMeasure.from_atoms(pairs)
    except (OSError, ValueError, json.JSONDecodeError, GTError) as exc:
        raise ConfigError(f"bad measure: {exc}")
    return None


def _need_measure(cfg) -> AtomicMeasure:
    mu = _load_measure(cfg)
    if mu is None:
        raise ConfigError("a measure is required (--measure FILE or --atoms X:W,...)")
    return mu


def _top_row(cfg) -> TopRow:
    if cfg.get("top_row"):
        try:
            return TopRow(_floats(cfg["top_row"], name="--top-row"))
        except GTError as exc:
            raise ConfigError(f"bad top row: {exc}")
    mu = _load_measure(cfg)
    if mu is None or cfg.get("n") is None:
        raise ConfigError("give --top-row, or a measure together with --n")
    try:
        return clustered_top_row(mu, _int(cfg["n"], "--n"))
    except GTError as exc:
        raise PreconditionError(str(exc))


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else None
    return v


def emit(records: List[dict], columns: Sequence[str], fmt: str, out) -> None:
    if fmt == "json":
        data = [{c: _json_value(r.get(c)) for c in columns} for r in records]
        out.write(json.dumps(data, indent=1) + "\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow([_fmt(r.get(c)) for c in columns])


# ---------------------------------------------------------------------------
# commands


def cmd_classify(cfg):
    mu = _need_measure(cfg)
    if cfg.get("point"):
        pts = [tuple(_floats(cfg["point"], 2, "--point"))]
    elif cfg.get("grid"):
        nx, ny = _grid(cfg["grid"])
        xs = mu.a + (np.arange(nx) + 0.5) * (mu.b - mu.a) / nx
        ys = (np.arange(ny) + 0.5) / ny
        pts = [(float(c), float(e)) for e in ys for c in xs]
    else:
        raise ConfigError("classify needs --point or --grid")
    recs = []
    for chi, eta in pts:
        try:
            p = region.classify(mu, chi, eta)
            rec = {"chi": chi, "eta": eta, "label": p.label.value}
            if p.root is not None:
                rec["root_re"], rec["root_im"] = p.root.real, p.root.imag
            if p.repeated_root is not None:
                rec["repeated_root"], rec["multiplicity"] = p.repeated_root, p.multiplicity
            if p.pair is not None:
                rec["t"], rec["s"] = p.pair
        except GTError as exc:
            if len(pts) == 1:
                raise
            rec = {"chi": chi, "eta": eta, "label": "Error:" + type(exc).__name__}
        recs.append(rec)
    return recs, ["chi", "eta", "label", "root_re", "root_im", "repeated_root", "multiplicity", "t", "s"]


def _params(cfg, name="--param"):
    if not cfg.get("param"):
        raise ConfigError(f"this command needs {name}")
    return _floats(cfg["param"], name=name)


def cmd_edge(cfg):
    mu = _need_measure(cfg)
    recs = []
    for t in _params(cfg):
        chi, eta, branch = region.edge_curve(mu, t)
        rec = {"t": t, "chi": chi, "eta": eta, "branch": branch}
        g = region.edge_local_geometry(mu, t)
        rec.update(a1=g.a1, a2=g.a2, b1=g.b1, b2=g.b2, m=g.m)
        recs.append(rec)
    return recs, ["t", "chi", "eta", "branch", "a1", "a2", "b1", "b2", "m"]


def cmd_outside(cfg):
    mu = _need_measure(cfg)
    if cfg.get("point"):
        chi, eta = _floats(cfg["point"], 2, "--point")
        t, s = region.outside_inverse(mu, chi, eta)
    elif cfg.get("pair"):
        t, s = _floats(cfg["pair"], 2, "--pair")
        chi, eta = region.outside_map(mu, t, s)
    else:
        raise ConfigError("outside needs --point CHI,ETA or --pair T,S")
    expo = float((region.f_value(mu, chi, eta, t) - region.f_value(mu, chi, eta, s)).real)
    return [{"chi": chi, "eta": eta, "t": t, "s": s, "exponent": expo}], \
        ["chi", "eta", "t", "s", "exponent"]


def cmd_kernel(cfg):
    x = _top_row(cfg)
    if not cfg.get("particles"):
        raise ConfigError("kernel needs --particles U,R,V,S")
    u, r, v, s = _floats(cfg["particles"], 4, "--particles")
    p = kernel.ParticleCoord(u, _int(r, "r"))
    q = kernel.ParticleCoord(v, _int(s, "s"))
    method = cfg.get("method") or "auto"
    if method not in ("auto", "exact", "quadrature"):
        raise ConfigError("--method must be auto, exact or quadrature")
    val = kernel.kernel(x, p, q, method=method)
    return [{"n": x.n, "u": u, "r": p.r, "v": v, "s": q.r, "method": method, "kernel": val}], \
        ["n", "u", "r", "v", "s", "method", "kernel"]


def _row_interval(cfg):
    if cfg.get("row") is None or not cfg.get("interval"):
        raise ConfigError("this command needs --row and --interval")
    lo, hi = _floats(cfg["interval"], 2, "--interval")
    return _int(cfg["row"], "--row"), (lo, hi)


def cmd_expected_count(cfg):
    x = _top_row(cfg)
    r, iv = _row_interval(cfg)
    val = kernel.expected_count(x, r, iv)
    return [{"n": x.n, "row": r, "lo": iv[0], "hi": iv[1], "expected_count": val}], \
        ["n", "row", "lo", "hi", "expected_count"]


DECAY_COLUMNS = ["n", "l", "theta", "chi", "eta", "t", "s", "chi_n", "eta_n", "t_n", "s_n_root",
                 "t_tilde_n", "s_tilde_n", "D_n", "D_tilde_n", "b_n", "b_tilde_n", "alpha_n",
                 "alpha_tilde_n", "exponent_n", "limit_exponent", "leading", "kernel_estimate",
                 "envelope_taylor", "envelope_tail", "roots_in_window", "envelope_note",
                 "feasible", "failed_conditions"]


def _decay_setup(cfg, n):
    theta = float(cfg["theta"]) if cfg.get("theta") is not None else asymptotics.DEFAULT_THETA
    mu = _load_measure(cfg)
    if cfg.get("l") is not None:
        l = _int(cfg["l"], "--l")
        if cfg.get("point"):
            chi = _floats(cfg["point"], name="--point")[0]
        else:
            chi = 0.5
        return asymptotics.paper_setup(l, n, chi, theta=theta, mu=mu), l
    if mu is None or not cfg.get("point"):
        raise ConfigError("decay needs --l (two-atom line) or --measure with --point CHI,ETA")
    chi, eta = _floats(cfg["point"], 2, "--point")
    t, s = region.outside_inverse(mu, chi, eta)
    x = clustered_top_row(mu, n)
    row = int(round(n * eta))
    return asymptotics.SteepestSetup.from_particles(mu, x, t, s, chi, row, chi, row, theta), None


def cmd_decay(cfg):
    if cfg.get("n") is None:
        raise ConfigError("decay needs --n")
    n = _int(cfg["n"], "--n")
    setup, l = _decay_setup(cfg, n)
    feas = asymptotics.feasibility_check(setup)
    if not feas.passed and not cfg.get("force"):
        raise PreconditionError("setup is not feasible at this n (use --force): "
                                + "; ".join(feas.failures))
    rep = asymptotics.decay_estimate(setup).to_dict()
    rep.update(l=l, theta=setup.theta, feasible=feas.passed,
               failed_conditions="; ".join(feas.failures))
    return [rep], DECAY_COLUMNS


def cmd_sample(cfg):
    x = _top_row(cfg)
    count = _int(cfg.get("count") or 1000, "--count")
    seed = _int(cfg.get("seed") if cfg.get("seed") is not None else 0, "--seed")
    workers = _int(cfg.get("workers") or 1, "--workers")
    method = cfg.get("method") or "minor"
    if method == "minor":
        batch = sampler.sample_minor_batch(x, count, seed, workers=workers)
    elif method == "rejection":
        batch = sampler.sample_rejection_batch(x, count, seed, workers=workers)
    else:
        raise ConfigError("--method must be minor or rejection for sample")
    if not batch.interlacing_ok().all():
        raise ArithmeticError("sampled pattern violates interlacing")
    if cfg.get("dump"):
        sampler.write_patterns(cfg["dump"], batch)
    recs = []
    if cfg.get("row") is not None and cfg.get("interval"):
        r, iv = _row_interval(cfg)
        mean, se = sampler.empirical_count(batch, r, iv)
        recs.append({"n": x.n, "count": count, "seed": seed, "method": method, "row": r,
                     "lo": iv[0], "hi": iv[1], "mean": mean, "stderr": se})
    else:
        for r in range(1, x.n + 1):
            y = batch.row(r)
            for i in range(r):
                col = y[:, i]
                recs.append({"n": x.n, "count": count, "seed": seed, "method": method, "row": r,
                             "index": i + 1, "mean": float(col.mean()),
                             "stderr": float(col.std(ddof=1) / math.sqrt(count)) if count > 1 else None})
    return recs, ["n", "count", "seed", "method", "row", "index", "lo", "hi", "mean", "stderr"]


def cmd_norm(cfg):
    mu = _need_measure(cfg)
    return [{"t": t, "norm": region.free_compressed_norm(mu, t)} for t in _params(cfg)], ["t", "norm"]


def cmd_reproduce_atoms(cfg):
    l = _int(cfg.get("l") if cfg.get("l") is not None else 4, "--l")
    if l < 2:
        raise PreconditionError("l must be at least 2")
    ns = [_int(v, "--n") for v in _floats(cfg.get("n") or "32,64,96", name="--n")]
    for n in ns:
        if n <= 0 or n % (4 * l):
            raise PreconditionError(f"n = {n} is not a positive multiple of 4l = {4 * l}")
    mu = _load_measure(cfg) or asymptotics.two_atom_measure()
    rate = 5.0 / (12.0 * math.sqrt(6.0)) * l ** -1.5
    recs = []
    for n in sorted(ns):
        x = clustered_top_row(mu, n)
        row = n * (l - 1) // (4 * l)
        val = kernel.expected_count(x, row, (0.5, 0.99))
        recs.append({"n": n, "l": l, "row": row, "expected_count": val,
                     "bound_shape": l * math.exp(-n * rate)})
    c = recs[0]["expected_count"] / recs[0]["bound_shape"]
    for rec in recs:
        rec["bound_calibrated"] = c * rec["bound_shape"]
    return recs, ["n", "l", "row", "expected_count", "bound_shape", "bound_calibrated"]


COMMANDS: Dict[str, Callable] = {
    "classify": cmd_classify,
    "edge": cmd_edge,
    "outside": cmd_outside,
    "kernel": cmd_kernel,
    "expected-count": cmd_expected_count,
    "decay": cmd_decay,
    "sample": cmd_sample,
    "norm": cmd_norm,
    "reproduce-atoms": cmd_reproduce_atoms,
}

# flag -> help; every flag is a string option unless listed in _BOOL
_FLAGS = {
    "measure": "JSON measure file {\"atoms\": [{\"x\": .., \"w\": ..}, ...]}",
    "atoms": "inline measure X:W,X:W,...",
    "top_row": "top row entries, comma separated, strictly decreasing",
    "grid": "classification grid NXxNY over [a,b] x (0,1)",
    "point": "CHI,ETA (decay with --l takes CHI only)",
    "pair": "outside pair T,S",
    "param": "edge parameters or norm heights, comma separated",
    "particles": "kernel coordinates U,R,V,S",
    "row": "row index r",
    "interval": "LO,HI",
    "n": "top-row length (reproduce-atoms: comma-separated list)",
    "l": "line index: eta = (1 - 1/l)/4",
    "theta": "steepest-descent exponent in (1/3, 1/2)",
    "seed": "64-bit seed",
    "workers": "worker count",
    "count": "number of samples",
    "method": "kernel: auto|exact|quadrature; sample: minor|rejection",
    "dump": "binary pattern dump path",
    "format": "csv or json",
    "out": "output path (default stdout)",
}
_BOOL = {"force": "run decay even when the setup is infeasible"}
CONFIG_KEYS = set(_FLAGS) | set(_BOOL)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gtprocess", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration; flags override it")
        for key, text in _FLAGS.items():
            p.add_argument("--" + key.replace("_", "-"), dest=key, default=None, help=text)
        for key, text in _BOOL.items():
            p.add_argument("--" + key, dest=key, action="store_true", default=None, help=text)
    return parser


def _merge(args) -> dict:
    cfg = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad config file: {exc}")
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigError("unknown config keys: " + ", ".join(sorted(unknown)))
        cfg.update({k: (",".join(map(str, v)) if isinstance(v, list) else v) for k, v in data.items()})
    for key in CONFIG_KEYS:
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    fmt = cfg.get("format") or "csv"
    if fmt not in ("csv", "json"):
        raise ConfigError("--format must be csv or json")
    cfg["format"] = fmt
    return cfg


_NEGATIVE = re.compile(r"^-[0-9.]")


def _attach_negative_values(argv: Sequence[str]) -> list:
    """Rewrite ``--opt -1,2`` as ``--opt=-1,2`` so argparse keeps it as a value."""
    out = []
    for tok in argv:
        if out and _NEGATIVE.match(tok) and out[-1].startswith("--") and "=" not in out[-1] \
                and out[-1][2:].replace("-", "_") in _FLAGS:
            out[-1] = out[-1] + "=" + tok
        else:
            out.append(tok)
    return out


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parser.parse_args(_attach_negative_values(argv))
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        cfg = _merge(args)
        records, columns = COMMANDS[args.command](cfg)
        buf = io.StringIO()
        emit(records, columns, cfg["format"], buf)
        if cfg.get("out"):
            Path(cfg["out"]).write_text(buf.getvalue(), encoding="utf-8")
        else:
            stdout.write(buf.getvalue())
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_NUMERIC
    except (PreconditionError, GTError, ValueError) as exc:
        print(f"precondition failed: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_PRECONDITION


def main(argv: Optional[Sequence[str]] = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
