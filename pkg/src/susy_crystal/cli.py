"""Command-line front end: ``susy-crystal {synth,spectrum,compare,figure}``.

Exit codes: 0 success, 1 comparison failed, 2 invalid configuration,
3 I/O failure, 4 numeric non-convergence.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import DomainError, NonConvergenceError
from .numeric import SlicingSpec
from .spectra import MomentumGrid, figure_data, sweep
from .synthesis import PotentialProfile, ProfileKind, derive_params, sample_profile, write_potential_csv

log = logging.getLogger("susy_crystal")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_IO, EXIT_NONCONVERGENCE = 0, 1, 2, 3, 4

THREADS_ENV = "SUSY_CRYSTAL_THREADS"


@dataclass(frozen=True)
class RunConfig:
    epsilon: float = 0.01
    k0: float = 1.0
    N: int = 100
    profile: str = "susy"
    method: str = "analytic"
    pmin: float = 0.6
    pmax: float = 1.4
    points: int = 2001
    slices: int = 64
    tol: float = 1e-6
    max_doublings: int = 8
    threads: int = 1
    out: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        derive_params(self.epsilon, self.k0, self.N)
        if self.profile not in {k.value for k in ProfileKind} - {"custom"}:
            raise DomainError(f"profile must be one of well, susy, sin, sin-shifted; got {self.profile!r}")
        if self.method not in ("analytic", "numeric"):
            raise DomainError(f"method must be analytic or numeric, got {self.method!r}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if self.threads < 1:
            raise DomainError(f"threads must be >= 1, got {self.threads!r}")
        self.grid()
        self.slicing()

    def params(self):
        return derive_params(self.epsilon, self.k0, self.N)

    def grid(self) -> MomentumGrid:
        return MomentumGrid(self.pmin, self.pmax, self.points)

    def slicing(self) -> SlicingSpec:
        return SlicingSpec(slices_per_period=self.slices, convergence_tol=self.tol,
                           max_doublings=self.max_doublings)


_FIELD_TYPES = {"epsilon": float, "k0": float, "N": int, "profile": str, "method": str,
                "pmin": float, "pmax": float, "points": int, "slices": int, "tol": float,
                "max_doublings": int, "threads": int, "out": str, "format": str}


def load_config_file(path) -> dict:
    """Read a JSON object or ``key=value`` lines (``#`` comments allowed)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        raw = json.loads(text)
    else:
        raw = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"config line is not key=value: {line!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key] = value
    out = {}
    for key, value in raw.items():
        if key not in _FIELD_TYPES:
            raise DomainError(f"unknown config key {key!r}")
        try:
            out[key] = _FIELD_TYPES[key](value)
        except ValueError as exc:
            raise DomainError(f"bad value for {key}: {value!r}") from exc
    return out


def _common(parser: argparse.ArgumentParser) -> None:
    a = parser.add_argument
    a("--config", help="JSON or key=value file; flags take precedence")
    a("--epsilon", type=float)
    a("--k0", type=float)
    a("--N", type=int)
    a("--profile", choices=["well", "susy", "sin", "sin-shifted"])
    a("--method", choices=["analytic", "numeric"])
    a("--pmin", type=float)
    a("--pmax", type=float)
    a("--points", type=int)
    a("--slices", type=int, help="starting slices per period (numeric)")
    a("--tol", type=float, help="numeric convergence tolerance; compare pass threshold")
    a("--max-doublings", dest="max_doublings", type=int,
      help="slice doublings before giving up; 0 disables doubling")
    a("--threads", type=int, help=f"worker cap (fallback: ${THREADS_ENV})")
    a("--out")
    a("--format", choices=["csv", "json"])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="susy-crystal", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("synth", help="sample the potential and print derived parameters"))
    _common(sub.add_parser("spectrum", help="write a T/R spectrum"))
    _common(sub.add_parser("compare", help="analytic vs numeric cross-check"))
    fig = sub.add_parser("figure", help="write the datasets behind figure 1-4")
    fig.add_argument("id", type=int)
    _common(fig)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then config file, then environment, then flags."""
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    if "threads" not in values and os.environ.get(THREADS_ENV):
        try:
            values["threads"] = int(os.environ[THREADS_ENV])
        except ValueError as exc:
            raise DomainError(f"{THREADS_ENV} must be an integer") from exc
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = replace(RunConfig(), **values)
    cfg.validate()
    return cfg


def cmd_synth(cfg: RunConfig) -> int:
    params = cfg.params()
    profile = PotentialProfile.of(cfg.profile, params)
    x, V = sample_profile(profile, cfg.slices)
    write_potential_csv(cfg.out or "potential.csv", x, V)
    for name in ("epsilon", "k0", "N", "k1", "rho", "mu", "Lambda", "L", "E1"):
        print(f"{name}={getattr(params, name)!r}")
    return EXIT_OK


def cmd_spectrum(cfg: RunConfig) -> int:
    profile = PotentialProfile.of(cfg.profile, cfg.params())
    spec = sweep(profile, cfg.grid(), cfg.method, cfg.slicing(), cfg.threads)
    spec.write(cfg.out or f"spectrum.{cfg.format}", cfg.format)
    return EXIT_OK


def relative_discrepancy(numeric, exact, floor=np.finfo(float).eps):
    """``|numeric - exact| / max(|exact|, floor)``.

    The default floor treats reflectances below machine epsilon, which are
    invisible next to ``T = 1 - R``, as zero.
    """
    diff = np.abs(np.asarray(numeric) - np.asarray(exact))
    return diff / np.maximum(np.abs(np.asarray(exact)), floor)


def cmd_compare(cfg: RunConfig) -> int:
    if cfg.profile not in ("well", "susy"):
        raise DomainError(f"compare needs a profile with a closed form (well, susy), got {cfg.profile!r}")
    profile = PotentialProfile.of(cfg.profile, cfg.params())
    exact = sweep(profile, cfg.grid(), "analytic", threads=cfg.threads)
    # the engine converges an order of magnitude below the pass threshold
    slicing = replace(cfg.slicing(), convergence_tol=cfg.tol / 10)
    approx = sweep(profile, cfg.grid(), "numeric", slicing, cfg.threads)
    a, n = exact.coefficients, approx.coefficients
    disc = {
        "T": relative_discrepancy(n.T, a.T),
        "Rl": relative_discrepancy(n.R_left, a.R_left),
        "Rr": relative_discrepancy(n.R_right, a.R_right),
    }
    worst = {k: float(v.max()) for k, v in disc.items()}
    ok = all(v <= cfg.tol for v in worst.values())
    for k, v in worst.items():
        print(f"max_rel_{k}={v!r}")
    print(f"{'PASS' if ok else 'FAIL'} tol={cfg.tol!r}")
    if cfg.out:
        cols = {"p": exact.p_values, "dT": disc["T"], "dRl": disc["Rl"], "dRr": disc["Rr"]}
        lines = [",".join(cols)]
        lines += [",".join(f"{cols[c][i]:.17g}" for c in cols) for i in range(len(exact))]
        Path(cfg.out).write_text("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_figure(figure_id: int, cfg: RunConfig) -> int:
    if figure_id not in (1, 2, 3, 4):
        raise DomainError(f"figure id must be 1..4, got {figure_id}")
    slicing = SlicingSpec(slices_per_period=cfg.slices, convergence_tol=cfg.tol,
                          max_doublings=cfg.max_doublings)
    tables = figure_data(figure_id, k0=cfg.k0, epsilon=cfg.epsilon, points=cfg.points,
                         slicing=slicing, threads=cfg.threads)
    outdir = Path(cfg.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    for label, table in tables.items():
        path = outdir / f"fig{figure_id}_{label}.csv"
        path.write_text(table.to_csv())
        print(path)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "synth":
            return cmd_synth(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "compare":
            return cmd_compare(cfg)
        return cmd_figure(args.id, cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
