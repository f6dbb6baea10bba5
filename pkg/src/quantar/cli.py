"""Command-line interface.

    quantar simulate --alpha 0.5 --mu 0.2 --sigma 1.0 --n 1000 --seed 7 --out y.csv
    quantar likelihood --input y.csv --alpha 0.5 --mu 0.2 --sigma 1.0
    quantar estimate --input y.csv
    quantar identifiability --sigma1 1 --sigma2 1.5
    quantar consistency --reps 20 --seed 1
    quantar profile --input y.csv --axis sigma --grid 0.5:2.0:0.1

Exit status: 0 on success, 1 for usage errors, 2 for runtime failures.
Observation files are one integer per line with an optional ``y`` header; a
CSV with a ``y`` column (such as ``simulate`` output) is accepted too.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ar1 import DEFAULT_BOX, THETA_STAR, Theta, ThetaBox, simulate
from .experiments import consistency_experiment, likelihood_profile
from .filter import DEFAULT_NODES, log_likelihood
from .laws import gaussian_quantized_law, tail_ratio_sequence, total_variation
from .mle import EstimateConfig, estimate
from .normal import GaussianParams
from .quantizer import QuantizerKind

__all__ = ["RunConfig", "UsageError", "parse_args", "run", "main", "read_observations"]

SUBCOMMANDS = ("simulate", "likelihood", "estimate", "identifiability", "consistency", "profile")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    output_format: str = "json"
    out: Path | None = None
    theta: Theta | None = None
    box: ThetaBox | None = None
    n: int | None = None
    seed: int = 0
    reps: int | None = None
    nodes: int = DEFAULT_NODES
    input: Path | None = None
    options: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _add_output(p):
    p.add_argument("--format", dest="output_format", choices=("csv", "json"), default=None,
                   help="output format (default depends on subcommand)")
    p.add_argument("--out", type=Path, default=None, help="write to this path instead of stdout")


def _add_theta(p):
    p.add_argument("--alpha", type=float, default=THETA_STAR.alpha,
                   help=f"AR coefficient in [0, 1) (default {THETA_STAR.alpha})")
    p.add_argument("--mu", type=float, default=THETA_STAR.mu,
                   help=f"noise mean (default {THETA_STAR.mu})")
    p.add_argument("--sigma", type=float, default=THETA_STAR.sigma,
                   help=f"noise standard deviation > 0 (default {THETA_STAR.sigma})")


def _add_box(p):
    for name in ("alpha_lo", "alpha_hi", "mu_lo", "mu_hi", "sigma_lo", "sigma_hi"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float,
                       default=getattr(DEFAULT_BOX, name),
                       help=f"box bound (default {getattr(DEFAULT_BOX, name)})")


def _add_nodes(p):
    p.add_argument("--nodes", type=int, default=DEFAULT_NODES,
                   help=f"Gauss-Legendre nodes per cell (default {DEFAULT_NODES})")


def _build_parser() -> _Parser:
    parser = _Parser(prog="quantar", description="Estimation for rounded Gaussian AR(1) processes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a trajectory and its rounded observations")
    _add_theta(p)
    p.add_argument("--n", type=int, required=True, help="last time index (n + 1 observations)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stream", type=int, default=0, help="substream id (default 0)")
    p.add_argument("--x-init", type=float, default=0.0, help="initial value X_{-1} (default 0)")
    _add_output(p)

    p = sub.add_parser("likelihood", help="log-likelihood of an observation file")
    p.add_argument("--input", type=Path, required=True)
    _add_theta(p)
    _add_nodes(p)
    _add_output(p)

    p = sub.add_parser("estimate", help="maximum likelihood estimate over a box")
    p.add_argument("--input", type=Path, required=True)
    _add_box(p)
    p.add_argument("--grid", default="7,7,7", help="grid points per axis, 'a,m,s' (default 7,7,7)")
    p.add_argument("--tol", type=float, default=1e-6, help="log-likelihood spread tolerance (default 1e-6)")
    p.add_argument("--max-evals", type=int, default=500, help="simplex evaluation budget (default 500)")
    _add_nodes(p)
    _add_output(p)

    p = sub.add_parser("identifiability", help="tail-ratio and total-variation diagnostics")
    p.add_argument("--sigma1", type=float, required=True)
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--mu1", type=float, default=0.0)
    p.add_argument("--mu2", type=float, default=0.0)
    p.add_argument("--n-max", type=int, default=30, help="last tail index (default 30)")
    p.add_argument("--kind", choices=("floor", "round"), default="floor",
                   help="quantizer (default floor)")
    _add_output(p)

    p = sub.add_parser("consistency", help="Monte Carlo consistency study")
    _add_theta(p)
    _add_box(p)
    p.add_argument("--n-values", default="250,1000,4000", help="comma-separated sample sizes")
    p.add_argument("--reps", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    _add_nodes(p)
    _add_output(p)

    p = sub.add_parser("profile", help="normalized log-likelihood along one axis")
    p.add_argument("--input", type=Path, default=None,
                   help="observation file; if omitted, data are simulated at the given theta")
    p.add_argument("--n", type=int, default=4000, help="sample size when simulating (default 4000)")
    p.add_argument("--seed", type=int, default=0)
    _add_theta(p)
    p.add_argument("--axis", choices=("alpha", "mu", "sigma"), default="sigma")
    p.add_argument("--grid", default="0.5:2.0:0.1", help="'lo:hi:step' or comma-separated values")
    _add_nodes(p)
    _add_output(p)
    return parser


def _int_list(text: str, flag: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{flag}: empty list")
    return vals


def _float_grid(text: str) -> np.ndarray:
    try:
        if ":" in text:
            lo, hi, step = (float(t) for t in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            k = int(math.floor((hi - lo) / step + 1e-9))
            return np.round(lo + step * np.arange(k + 1), 12)
        return np.array([float(t) for t in text.split(",") if t.strip()])
    except ValueError:
        raise UsageError(f"--grid: cannot parse {text!r}") from None


def _theta_from(ns) -> Theta:
    try:
        return Theta(ns.alpha, ns.mu, ns.sigma)
    except ValueError as exc:
        flag = {"alpha": "--alpha", "mu": "--mu", "sigma": "--sigma"}
        bad = next((f for k, f in flag.items() if k in str(exc)), "--alpha/--mu/--sigma")
        raise UsageError(f"{bad}: {exc}") from None


def _box_from(ns) -> ThetaBox:
    try:
        return ThetaBox(ns.alpha_lo, ns.alpha_hi, ns.mu_lo, ns.mu_hi, ns.sigma_lo, ns.sigma_hi)
    except ValueError as exc:
        raise UsageError(f"box flags: {exc}") from None


def _check_input(path: Path | None) -> None:
    if path is not None and not path.is_file():
        raise UsageError(f"--input: no such file {str(path)!r}")


def parse_args(argv) -> RunConfig:
    """Parse and validate ``argv``; raises :class:`UsageError` on bad input."""
    ns = _build_parser().parse_args(list(argv))
    if ns.subcommand is None:
        raise UsageError("quantar: a subcommand is required: " + ", ".join(SUBCOMMANDS))
    cmd = ns.subcommand
    default_format = {"simulate": "csv", "identifiability": "csv", "consistency": "csv",
                      "profile": "csv"}.get(cmd, "json")
    cfg = RunConfig(cmd, ns.output_format or default_format, ns.out)
    cfg.options["verbose"] = ns.verbose
    if hasattr(ns, "nodes"):
        if ns.nodes < 2:
            raise UsageError("--nodes: need at least 2")
        cfg.nodes = ns.nodes
    if hasattr(ns, "seed"):
        cfg.seed = ns.seed
    if hasattr(ns, "input"):
        _check_input(ns.input)
        cfg.input = ns.input
    if hasattr(ns, "alpha"):
        cfg.theta = _theta_from(ns)
    if hasattr(ns, "alpha_lo"):
        cfg.box = _box_from(ns)

    if cmd == "simulate":
        if ns.n < 0:
            raise UsageError("--n: must be non-negative")
        cfg.n = ns.n
        cfg.options.update(stream=ns.stream, x_init=ns.x_init)
    elif cmd == "estimate":
        dims = _int_list(ns.grid, "--grid")
        if len(dims) != 3 or min(dims) < 2:
            raise UsageError("--grid: need three integers, each >= 2")
        if not ns.tol > 0:
            raise UsageError("--tol: must be positive")
        if ns.max_evals < 1:
            raise UsageError("--max-evals: must be positive")
        cfg.options.update(grid=tuple(dims), tol=ns.tol, max_evals=ns.max_evals)
    elif cmd == "identifiability":
        if not (ns.sigma1 > 0):
            raise UsageError("--sigma1: must be positive")
        if not (ns.sigma2 > 0):
            raise UsageError("--sigma2: must be positive")
        if ns.n_max < 0:
            raise UsageError("--n-max: must be non-negative")
        cfg.options.update(sigma1=ns.sigma1, sigma2=ns.sigma2, mu1=ns.mu1, mu2=ns.mu2,
                           n_max=ns.n_max, kind=QuantizerKind(ns.kind))
    elif cmd == "consistency":
        if not cfg.box.contains(cfg.theta):
            raise UsageError("--alpha/--mu/--sigma: theta lies outside the box")
        if ns.reps < 1:
            raise UsageError("--reps: must be positive")
        cfg.reps = ns.reps
        cfg.options["n_values"] = _int_list(ns.n_values, "--n-values")
        if min(cfg.options["n_values"]) < 1:
            raise UsageError("--n-values: sample sizes must be positive")
    elif cmd == "profile":
        if ns.n < 1:
            raise UsageError("--n: must be positive")
        cfg.n = ns.n
        grid = _float_grid(ns.grid)
        if grid.size == 0:
            raise UsageError("--grid: empty grid")
        axis = ns.axis
        v = cfg.theta.as_array()
        for g in grid:
            v[("alpha", "mu", "sigma").index(axis)] = g
            try:
                Theta.from_array(v)
            except ValueError as exc:
                raise UsageError(f"--grid: value {g} invalid on axis {axis}: {exc}") from None
        cfg.options.update(axis=axis, grid=grid)
    return cfg


def read_observations(path: Path) -> np.ndarray:
    """Read an integer observation file; raises ``ValueError`` if empty or malformed."""
    text = Path(path).read_text(encoding="utf-8")
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if rows and not _is_int(rows[0][0] if len(rows[0]) == 1 else ""):
        header = [c.strip() for c in rows[0]]
        if "y" not in header:
            raise ValueError(f"{path}: header must contain a 'y' column")
        col = header.index("y")
        rows = rows[1:]
    else:
        col = 0
    if not rows:
        raise ValueError(f"{path}: no observations")
    try:
        return np.array([int(r[col]) for r in rows], dtype=np.int64)
    except (ValueError, IndexError):
        raise ValueError(f"{path}: observations must be integers") from None


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _nullable(x: float):
    return float(x) if math.isfinite(x) else None


def _render(cfg: RunConfig) -> str:
    cmd = cfg.subcommand
    fmt = cfg.output_format
    if cmd == "simulate":
        tr = simulate(cfg.theta, cfg.n, cfg.seed, cfg.options["stream"], cfg.options["x_init"])
        if fmt == "csv":
            return _csv_text(["index", "x", "y"], zip(range(len(tr)), tr.x, tr.y))
        return _json_text({"theta": cfg.theta.to_dict(), "seed": cfg.seed,
                           "stream": cfg.options["stream"], "n": cfg.n,
                           "x": [float(v) for v in tr.x], "y": [int(v) for v in tr.y]})

    if cmd == "likelihood":
        y = read_observations(cfg.input)
        ll = log_likelihood(cfg.theta, y, cfg.nodes)
        out = {"theta": cfg.theta.to_dict(), "log_lik": _nullable(ll), "n": int(len(y)), "m": cfg.nodes}
        if fmt == "csv":
            return _csv_text(["alpha", "mu", "sigma", "log_lik", "n", "m"],
                             [[cfg.theta.alpha, cfg.theta.mu, cfg.theta.sigma, ll, len(y), cfg.nodes]])
        return _json_text(out)

    if cmd == "estimate":
        y = read_observations(cfg.input)
        ec = EstimateConfig(grid_dims=cfg.options["grid"], tol=cfg.options["tol"],
                            max_evals=cfg.options["max_evals"], nodes=cfg.nodes)
        est = estimate(y, cfg.box, ec)
        if fmt == "csv":
            t = est.theta_hat
            return _csv_text(["alpha", "mu", "sigma", "log_lik", "n_obs", "evaluations", "converged"],
                             [[t.alpha, t.mu, t.sigma, est.log_lik, est.n_obs, est.evaluations,
                               int(est.converged)]])
        return _json_text({"box": cfg.box.to_dict(), **est.to_dict()})

    if cmd == "identifiability":
        o = cfg.options
        p1, p2 = GaussianParams(o["mu1"], o["sigma1"]), GaussianParams(o["mu2"], o["sigma2"])
        rep = tail_ratio_sequence(p1, p2, o["n_max"], o["kind"])
        if fmt == "csv":
            return _csv_text(["n", "ratio", "log_ratio", "underflow"],
                             ((n, r, lr, int(f)) for n, r, lr, f in rep.rows()))
        law1 = gaussian_quantized_law(p1.mean, p1.sd, o["kind"])
        law2 = gaussian_quantized_law(p2.mean, p2.sd, o["kind"])
        return _json_text({
            "params_1": {"mu": p1.mean, "sigma": p1.sd},
            "params_2": {"mu": p2.mean, "sigma": p2.sd},
            "kind": o["kind"].value,
            "tail_ratios": rep.to_dict(),
            "laws": [law1.to_dict(), law2.to_dict()],
            "total_variation": total_variation(law1, law2),
        })

    if cmd == "consistency":
        rep = consistency_experiment(cfg.theta, cfg.box, cfg.options["n_values"], cfg.reps, cfg.seed,
                                     EstimateConfig(nodes=cfg.nodes))
        if fmt == "csv":
            return _csv_text(["n", "coordinate", "quantile", "value"], rep.rows())
        return _json_text({"box": cfg.box.to_dict(), **rep.to_dict()})

    if cmd == "profile":
        if cfg.input is not None:
            y = read_observations(cfg.input)
        else:
            y = simulate(cfg.theta, cfg.n, cfg.seed).y
        rep = likelihood_profile(cfg.theta, y, cfg.options["axis"], cfg.options["grid"], cfg.nodes)
        if fmt == "csv":
            return _csv_text([rep.axis, "normalized_log_lik"], rep.rows())
        return _json_text({"theta_star": cfg.theta.to_dict(), "n": int(len(y)), **rep.to_dict()})

    raise UsageError(f"unknown subcommand {cmd!r}")


def run(cfg: RunConfig) -> int:
    """Execute ``cfg``; returns the process exit status."""
    logging.basicConfig(level=logging.INFO if cfg.options.get("verbose") else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        text = _render(cfg)
        if cfg.out is None:
            sys.stdout.write(text)
        else:
            cfg.out.write_text(text, encoding="utf-8")
    except (OSError, ValueError) as exc:
        print(f"quantar {cfg.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
