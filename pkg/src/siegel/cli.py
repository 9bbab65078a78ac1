"""Command-line front end.

    siegel verify [--n N] [--seed S] [--nodes M] [--degree-cap D] [--inject-fault]
    siegel report TASK --symbol ID [--param k=v ...] [--grid PRESET]

Reports are JSON lines (default) or CSV.  The first record is a header with
the run configuration, a timestamp and the git blob hash of the symbol
corpus; every following row is a pure function of the configuration.
Exit status: 0 success, 1 a check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import bloch as bl
from . import checks as ck
from . import geometry as geo
from . import hankel as hk
from . import oscillation as osc
from . import symbols as sym
from .integrate import MIN_NODES, QuadratureSpec

TASKS = ("berezin", "mo", "bmo-scan", "hankel", "bloch", "decay")
FORMATS = ("jsonl", "csv")
GRIDS = ("ray-ladder", "interior-qmc", "all")
DEFAULT_NODES = 2**14
HANKEL_MIN_NODES = {1: 2**16, 2: 2**18}

CITE = {
    "berezin": "Berezin transform f~(z) = integral of f |k_z|^2 dV",
    "mo": "MO(f)(z)^2 = Berezin(|f|^2)(z) - |f~(z)|^2; MO_r over the metric ball D(z, r)",
    "BMO": "||f||_BMO = sup_z MO(f)(z)",
    "BMO_r": "||f||_BMO_r = sup_z MO_r(f)(z)",
    "BO": "BO: sup of |f(u) - f(v)| over beta(u, v) <= r",
    "BA": "BA: sup_z of the ball average of |f|^2 over D(z, r), square-rooted",
    "hankel": "(||H_f|| + ||H_conj f||) is comparable to ||f||_BMO",
    "bloch": "|grad~ f(z)| = sqrt 2 |grad~_B (f o Phi)(Phi^-1 z)|",
    "decay": "VMO/VA and little Bloch: oscillation and gradient vanish toward the boundary",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n: int = 1
    seed: int = 0
    node_count: int = DEFAULT_NODES
    degree_cap: int | None = None
    grid: str = "ray-ladder"
    format: str = "jsonl"
    out: str | None = None
    command: str = "verify"
    task: str | None = None
    symbol: str | None = None
    params: dict = field(default_factory=dict)
    fault: bool = False

    def validate(self) -> None:
        if self.n < 1:
            raise ConfigError("--n must be >= 1")
        if self.node_count < MIN_NODES:
            raise ConfigError(f"--nodes must be >= {MIN_NODES}, got {self.node_count}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must be a 64-bit unsigned integer")
        if self.degree_cap is not None and self.degree_cap < 0:
            raise ConfigError("--degree-cap must be >= 0")
        if self.grid not in GRIDS:
            raise ConfigError(f"unknown grid {self.grid!r}; choose from {', '.join(GRIDS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if self.command == "report":
            if self.task not in TASKS:
                raise ConfigError(f"unknown task {self.task!r}; choose from {', '.join(TASKS)}")
            if not self.symbol:
                raise ConfigError("report needs --symbol")

    @property
    def cap(self) -> int:
        return self.degree_cap if self.degree_cap is not None else hk.default_cap(self.n)


# -- output ---------------------------------------------------------------------


def fmt_float(x: float) -> str:
    return "%.17g" % x


def _scalar(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        v = v.item()
    if isinstance(v, complex):
        return {"re": _scalar(v.real), "im": _scalar(v.imag)}
    return v


def _json_value(v) -> str:
    v = _scalar(v)
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return fmt_float(v) if math.isfinite(v) else json.dumps(str(v))
    if isinstance(v, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_json_value(x)}" for k, x in v.items()) + "}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    if isinstance(v, int):
        return str(v)
    return json.dumps(str(v), ensure_ascii=False)


def _csv_value(v) -> str:
    v = _scalar(v)
    if isinstance(v, float):
        return fmt_float(v)
    if isinstance(v, (dict, list, tuple)):
        return _json_value(v)
    return "" if v is None else str(v)


def render(header: dict, rows: list[dict], fmt: str) -> str:
    """Header first, then rows in order; floats carry 17 significant digits."""
    if fmt == "jsonl":
        lines = [_json_value({"header": header})] + [_json_value(r) for r in rows]
        return "\n".join(lines) + "\n"
    buf = io.StringIO()
    buf.write("# " + _json_value(header) + "\n")
    cols: list[str] = []
    for r in rows:
        cols += [k for k in r if k not in cols]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_csv_value(r.get(c)) for c in cols])
    return buf.getvalue()


def corpus_hash() -> str:
    """git blob sha1 of the symbol corpus source."""
    data = Path(sym.__file__).read_bytes()
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def make_header(cfg: RunConfig) -> dict:
    return {"config": asdict(cfg), "version": __version__, "corpus_sha1": corpus_hash(),
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}


def _parse_params(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise ConfigError(f"--param expects k=v, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = int(v)
        except ValueError:
            try:
                out[k] = float(v)
            except ValueError:
                out[k] = v
    return out


# -- tasks -----------------------------------------------------------------------


def _point_row(k: int, g: osc.GridPoint) -> dict:
    return {"index": k, "ray": g.ray, "t": g.t, "rho": float(geo.rho(g.z)),
            "z": [complex(c) for c in g.z]}


def _grid(cfg: RunConfig):
    return osc.make_grid(cfg.grid, cfg.n)


def task_berezin(f, cfg, spec):
    rows = []
    for k, g in enumerate(_grid(cfg)):
        b = osc.berezin(f, g.z, spec.child(k))
        rows.append({**_point_row(k, g), "berezin": complex(b.value), "std_error": b.std_error,
                     "nodes_used": b.nodes_used, "citation": CITE["berezin"]})
    return rows


def task_mo(f, cfg, spec, r):
    rows = []
    for k, g in enumerate(_grid(cfg)):
        m = osc.mean_oscillation(f, g.z, spec.child(k))
        mr = osc.mean_oscillation_r(f, g.z, r, spec.child(k, 1))
        rows.append({**_point_row(k, g), "mo": m.value, "mo_std_error": m.std_error,
                     "mo_r": mr.value, "mo_r_std_error": mr.std_error, "r": r,
                     "citation": CITE["mo"]})
    return rows


def _scan_rows(scan: osc.SeminormScan, citation: str):
    for row in scan.rows():
        yield {"seminorm": scan.which, **row, "citation": citation}


def task_bmo_scan(f, cfg, spec, r, which=("BMO", "BMO_r", "BA")):
    rows = []
    for w in which:
        scan = osc.seminorm_scan(f, w, cfg.grid, spec, r)
        rows += list(_scan_rows(scan, CITE[w]))
        rows.append({"seminorm": w, "sup_estimate": scan.sup_estimate, "citation": CITE[w]})
    return rows


def task_hankel(f, cfg, spec):
    hspec = QuadratureSpec("polar", max(cfg.node_count, HANKEL_MIN_NODES.get(cfg.n, 2**18)), cfg.seed, cfg.n)
    rows, total = [], 0.0
    for g in (f, f.conj()):
        est = hk.truncated_hankel_norm(g, cfg.cap, hspec, proj_cap=4 * cfg.cap, extrapolate=True)
        total += est.norm_estimate
        rows.append({"kind": "hankel", **est.as_row(), "citation": CITE["hankel"]})
    scan = osc.seminorm_scan(f, "BMO", cfg.grid, spec)
    bmo = scan.sup_estimate
    rows.append({"kind": "bmo-scan", "symbol": f.id, "sup_estimate": bmo,
                 "grid": cfg.grid, "citation": CITE["BMO"]})
    rows.append({"kind": "ratio", "symbol": f.id, "hankel_sum": total,
                 "ratio": total / bmo if bmo > 0 else math.inf, "citation": CITE["hankel"]})
    return rows


def task_bloch(f, cfg):
    if not f.holomorphic:
        raise ConfigError(f"symbol {f.id} is not holomorphic")
    rows = []
    for k, g in enumerate(_grid(cfg)):
        rep = bl.gradient_report(f, g.z)
        rows.append({**_point_row(k, g), **rep.as_row(), "citation": CITE["bloch"]})
    return rows


def task_decay(f, cfg, spec, r):
    grid = "ray-ladder"
    which = ["BMO", "BA"] + (["Bloch"] if f.holomorphic else [])
    rows = []
    for w in which:
        scan = osc.seminorm_scan(f, w, grid, spec, r)
        for ray, prof in scan.decay_profile.items():
            for step, (t, v) in enumerate(prof):
                rows.append({"seminorm": w, "ray": ray, "step": step, "t": t, "value": v,
                             "citation": CITE["decay"]})
    return rows


def run_report(cfg: RunConfig) -> list[dict]:
    try:
        f = sym.make_symbol(cfg.symbol, **{k: v for k, v in cfg.params.items() if k != "r"})
    except (sym.UnknownSymbol, ValueError) as exc:
        raise ConfigError(str(exc.args[0] if exc.args else exc)) from None
    spec = QuadratureSpec("qmc", cfg.node_count, cfg.seed, cfg.n)
    r = float(cfg.params.get("r", osc.DEFAULT_RADIUS))
    if cfg.task == "berezin":
        return task_berezin(f, cfg, spec)
    if cfg.task == "mo":
        return task_mo(f, cfg, spec, r)
    if cfg.task == "bmo-scan":
        return task_bmo_scan(f, cfg, spec, r)
    if cfg.task == "hankel":
        return task_hankel(f, cfg, spec)
    if cfg.task == "bloch":
        return task_bloch(f, cfg)
    return task_decay(f, cfg, spec, r)


def run_verify(cfg: RunConfig, progress=None) -> tuple[int, list[dict]]:
    results = ck.run_suite(cfg.n, cfg.seed, cfg.node_count, cfg.degree_cap, cfg.fault, progress)
    rows = [c.as_row() for c in results]
    return (1 if any(c.status == "fail" for c in results) else 0), rows


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="complex dimension (default 1)")
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--nodes", type=int, default=DEFAULT_NODES,
                        help=f"quadrature node count, >= {MIN_NODES} (default {DEFAULT_NODES})")
    common.add_argument("--degree-cap", type=int, default=None,
                        help="Hankel basis degree cap (default 10 for n=1, 6 for n=2)")
    common.add_argument("--grid", default="ray-ladder",
                        help="grid preset: 'ray-ladder' (dilation rays up/down from i and the "
                             "horizontal ray x + i, 2^0..2^8), 'interior-qmc' (200 Sobol points "
                             "within hyperbolic radius 3 of i) or 'all'")
    common.add_argument("--format", default="jsonl", choices=FORMATS, help="output format")
    common.add_argument("--out", default=None, help="output path (default stdout)")
    p = argparse.ArgumentParser(prog="siegel", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"siegel {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run the verification suite")
    v.add_argument("--inject-fault", action="store_true",
                   help="replace the holomorphic basis multiplier by its modulus (must fail)")
    r = sub.add_parser("report", parents=[common], help="evaluate a task over a grid")
    r.add_argument("task", help=f"one of: {', '.join(TASKS)}")
    r.add_argument("--symbol", required=True, help=f"corpus id ({', '.join(sym.CORPUS_IDS)}), "
                                                   "optionally prefixed with 'conj-'")
    r.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="symbol parameter; 'r' sets the metric-ball radius")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig(args.n, args.seed, args.nodes, args.degree_cap, args.grid, args.format,
                        args.out, args.command, getattr(args, "task", None),
                        getattr(args, "symbol", None), _parse_params(getattr(args, "param", [])),
                        getattr(args, "inject_fault", False))
        cfg.validate()
        header = make_header(cfg)

        def progress(label):
            print(f"siegel: {label}", file=sys.stderr, flush=True)

        if cfg.command == "verify":
            status, rows = run_verify(cfg, progress)
        else:
            status, rows = 0, run_report(cfg)
    except ConfigError as exc:
        print(f"siegel: error: {exc}", file=sys.stderr)
        return 2
    text = render(header, rows, cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if cfg.command == "verify":
        failed = [r["check"] for r in rows if r["status"] == "fail"]
        conflicts = [r["check"] for r in rows if r["status"] == "conflict"]
        print(f"siegel: {len(rows) - len(failed) - len(conflicts)} passed, {len(failed)} failed, "
              f"{len(conflicts)} known conflicts", file=sys.stderr)
        for name in failed:
            print(f"siegel: FAILED {name}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
