"""Momentum sweeps, invisibility metrics and figure datasets."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analytic
from .analytic import ScatteringCoefficients
from .errors import DomainError, EmptyBandError
from .numeric import SlicingSpec, scatter_numeric_many
from .synthesis import PotentialProfile, ProfileKind, derive_params

__all__ = [
    "MomentumGrid",
    "SpectrumGrid",
    "InvisibilityReport",
    "Table",
    "sweep",
    "invisibility_metrics",
    "figure_data",
    "FIELDS",
]

FIELDS = ("p", "t_re", "t_im", "rl_re", "rl_im", "rr_re", "rr_im", "T", "Rl", "Rr")

ANALYTIC_KINDS = (ProfileKind.SQUARE_WELL, ProfileKind.SUSY_CRYSTAL)


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform grid on ``[p_min, p_max]``, optionally merged with a finer window.

    The window is ``refine_points`` uniform points on
    ``refine_center +/- refine_halfwidth``, clipped to the band.
    """

    p_min: float = 0.6
    p_max: float = 1.4
    points: int = 2001
    refine_center: float | None = None
    refine_halfwidth: float = 5e-3
    refine_points: int = 201

    def __post_init__(self):
        if not 0 < self.p_min < self.p_max:
            raise DomainError(f"need 0 < pmin < pmax, got ({self.p_min!r}, {self.p_max!r})")
        if self.points < 2:
            raise DomainError(f"need at least 2 grid points, got {self.points!r}")

    def values(self) -> np.ndarray:
        p = np.linspace(self.p_min, self.p_max, int(self.points))
        if self.refine_center is not None:
            c, w = self.refine_center, self.refine_halfwidth
            fine = np.linspace(c - w, c + w, int(self.refine_points))
            fine = fine[(fine > self.p_min) & (fine < self.p_max)]
            # drop window points that duplicate a coarse point up to rounding
            gap = np.min(np.abs(fine[:, None] - p[None, :]), axis=1)
            p = np.union1d(p, fine[gap > 1e-12 * self.p_max])
        return p

    def describe(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True, eq=False)
class SpectrumGrid:
    """Scattering coefficients on a strictly increasing momentum grid."""

    p_values: np.ndarray
    coefficients: ScatteringCoefficients
    method: str
    profile: dict
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.p_values, dtype=float)
        if p.ndim != 1 or p.size == 0 or np.any(p <= 0) or np.any(np.diff(p) <= 0):
            raise DomainError("p_values must be a non-empty, strictly increasing sequence of positive momenta")
        if np.shape(self.coefficients.t) != p.shape:
            raise DomainError("coefficient rows must match p_values")

    def __len__(self):
        return self.p_values.size

    @property
    def rows(self) -> list[ScatteringCoefficients]:
        c = self.coefficients
        slices = c.slices_per_period
        return [
            ScatteringCoefficients(
                float(p), complex(c.t[i]), complex(c.r_left[i]), complex(c.r_right[i]),
                None if slices is None else int(slices[i]),
            )
            for i, p in enumerate(self.p_values)
        ]

    def columns(self) -> dict[str, np.ndarray]:
        c = self.coefficients
        t, rl, rr = (np.asarray(a, dtype=complex) for a in (c.t, c.r_left, c.r_right))
        return {
            "p": self.p_values,
            "t_re": t.real, "t_im": t.imag,
            "rl_re": rl.real, "rl_im": rl.imag,
            "rr_re": rr.real, "rr_im": rr.imag,
            "T": c.T, "Rl": c.R_left, "Rr": c.R_right,
        }

    def file_provenance(self) -> dict:
        """Provenance written to files: everything except wall-clock fields."""
        prov = {"method": self.method, "profile": self.profile}
        prov.update({k: v for k, v in self.provenance.items() if k != "created"})
        return prov

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# provenance: " + json.dumps(self.file_provenance(), sort_keys=True) + "\n")
        _write_columns(buf, self.columns())
        return buf.getvalue()

    def to_json(self) -> str:
        cols = self.columns()
        rows = [{k: float(cols[k][i]) for k in FIELDS} for i in range(len(self))]
        return json.dumps({"provenance": self.file_provenance(), "rows": rows},
                          sort_keys=False, indent=1) + "\n"

    def write(self, path, fmt: str = "csv") -> None:
        if fmt not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {fmt!r}")
        text = self.to_json() if fmt == "json" else self.to_csv()
        Path(path).write_text(text)


def _format(v) -> str:
    return f"{float(v):.17g}"


def _write_columns(buf, columns: dict[str, np.ndarray]) -> None:
    w = csv.writer(buf, lineterminator="\n")
    names = list(columns)
    w.writerow(names)
    for row in zip(*(columns[n] for n in names)):
        w.writerow([_format(v) for v in row])


@dataclass(frozen=True)
class InvisibilityReport:
    band: tuple[float, float]
    sup_abs_T_minus_1: float
    sup_R_right: float
    max_R_left: float
    argmax_R_left: float


def _chunks(p, threads):
    n = max(1, min(int(threads), p.size))
    return [c for c in np.array_split(p, n) if c.size]


def sweep(profile: PotentialProfile, grid, method: str = "analytic",
          slicing: SlicingSpec | None = None, threads: int = 1) -> SpectrumGrid:
    """Scattering coefficients of ``profile`` at every momentum of ``grid``.

    ``grid`` is a :class:`MomentumGrid` or an increasing array of momenta.
    The grid is split into ``threads`` contiguous blocks evaluated
    concurrently; every momentum is computed independently, so the result
    does not depend on the thread count.
    """
    if isinstance(grid, MomentumGrid):
        p, grid_desc = grid.values(), grid.describe()
    else:
        p = np.asarray(grid, dtype=float)
        grid_desc = {"p_min": float(p[0]), "p_max": float(p[-1]), "points": int(p.size)}
    if p.ndim != 1 or p.size == 0 or np.any(p <= 0) or np.any(np.diff(p) <= 0):
        raise DomainError("momentum grid must be strictly increasing and positive")

    if method == "analytic":
        if profile.kind not in ANALYTIC_KINDS:
            raise DomainError(f"no closed form for profile kind {profile.kind.value!r}; use method 'numeric'")
        fn = (analytic.square_well_coefficients if profile.kind is ProfileKind.SQUARE_WELL
              else analytic.crystal_coefficients)

        def run(block):
            return fn(block, profile.params)
        slicing_desc = None
    elif method == "numeric":
        slicing = slicing or SlicingSpec()

        def run(block):
            return scatter_numeric_many(profile, block, slicing)
        slicing_desc = dataclasses.asdict(slicing)
    else:
        raise DomainError(f"method must be 'analytic' or 'numeric', got {method!r}")

    blocks = _chunks(p, threads)
    if len(blocks) == 1:
        parts = [run(blocks[0])]
    else:
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            parts = list(pool.map(run, blocks))

    def cat(name):
        return np.concatenate([np.atleast_1d(getattr(c, name)) for c in parts])

    slices = None if method == "analytic" else cat("slices_per_period").astype(int)
    coeffs = ScatteringCoefficients(p, cat("t"), cat("r_left"), cat("r_right"), slices)
    provenance = {"grid": grid_desc, "slicing": slicing_desc, "created": time.time()}
    if slices is not None:
        provenance["max_slices_per_period"] = int(slices.max())
    return SpectrumGrid(p, coeffs, method, profile.describe(), provenance)


def invisibility_metrics(spectrum: SpectrumGrid, band=(0.6, 1.4)) -> InvisibilityReport:
    """Band extrema of ``|T - 1|``, ``R_right`` and ``R_left`` on grid points.

    Raises
    ------
    DomainError
        If the band is not inside the grid range.
    EmptyBandError
        If no grid point lies in the band.
    """
    lo, hi = float(band[0]), float(band[1])
    p = spectrum.p_values
    span = p[-1] - p[0]
    slack = 1e-12 * max(span, 1.0)
    if lo > hi or lo < p[0] - slack or hi > p[-1] + slack:
        raise DomainError(f"band ({lo}, {hi}) not within grid range ({p[0]}, {p[-1]})")
    mask = (p >= lo - slack) & (p <= hi + slack)
    if not mask.any():
        raise EmptyBandError(f"no grid points in band ({lo}, {hi})")
    c = spectrum.coefficients
    T, Rl, Rr = c.T[mask], c.R_left[mask], c.R_right[mask]
    i = int(np.argmax(Rl))
    return InvisibilityReport(
        band=(lo, hi),
        sup_abs_T_minus_1=float(np.max(np.abs(T - 1.0))),
        sup_R_right=float(np.max(Rr)),
        max_R_left=float(Rl[i]),
        argmax_R_left=float(p[mask][i]),
    )


@dataclass(frozen=True, eq=False)
class Table:
    """Named columns of equal length, written as CSV at 17 significant digits."""

    columns: dict[str, np.ndarray]
    comment: str | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.comment:
            buf.write(f"# {self.comment}\n")
        _write_columns(buf, self.columns)
        return buf.getvalue()


FIGURE_EPSILONS = (0.1, 0.01)
FIGURE3_CELLS = (100, 1000, 5000)


def figure_data(figure_id: int, *, k0: float = 1.0, epsilon: float = 0.01,
                points: int = 2001, slicing: SlicingSpec | None = None,
                threads: int = 1) -> dict[str, Table]:
    """Plot-ready tables for figures 1-4, keyed by file label.

    1. ``V_R``, ``V_I`` over one cell for epsilon 0.1 and 0.01.
    2. Square-well ``R1(p)`` for the same epsilons, N = 100.
    3. Crystal ``R_left``, ``R_right`` and ``T`` for N = 100, 1000, 5000,
       with a refined window around ``k1``.
    4. Numeric ``T`` of the unbiased and shifted sinusoidal crystals,
       N = 5000, with a refined window around ``k0``.

    ``epsilon`` applies to figures 3 and 4; figures 1 and 2 always show
    both regimes.
    """
    if figure_id not in (1, 2, 3, 4):
        raise DomainError(f"figure_id must be 1..4, got {figure_id!r}")
    band = (0.6 * k0, 1.4 * k0)
    out: dict[str, Table] = {}
    if figure_id == 1:
        for eps in FIGURE_EPSILONS:
            params = derive_params(eps, k0, 1)
            x = np.linspace(0.0, params.Lambda, points)
            V = PotentialProfile.of("susy", params)(x)
            out[f"eps{eps:g}"] = Table({"x": x, "V_R": V.real, "V_I": V.imag},
                                       f"epsilon={eps!r} k0={k0!r}")
    elif figure_id == 2:
        for eps in FIGURE_EPSILONS:
            params = derive_params(eps, k0, 100)
            p = MomentumGrid(*band, points).values()
            out[f"eps{eps:g}"] = Table({"p": p, "R1": analytic.square_well_reflectance(p, params)},
                                       f"epsilon={eps!r} k0={k0!r} N=100")
    elif figure_id == 3:
        for N in FIGURE3_CELLS:
            params = derive_params(epsilon, k0, N)
            grid = MomentumGrid(*band, points, refine_center=params.k1)
            spec = sweep(PotentialProfile.of("susy", params), grid, "analytic", threads=threads)
            c = spec.coefficients
            note = f"epsilon={epsilon!r} k0={k0!r} N={N}"
            for label, values in (("Rl", c.R_left), ("Rr", c.R_right), ("T", c.T)):
                out[f"N{N}_{label}"] = Table({"p": spec.p_values, label: values}, note)
    else:
        params = derive_params(epsilon, k0, 5000)
        grid = MomentumGrid(*band, points, refine_center=k0)
        for label, kind in (("unbiased", "sin"), ("shifted", "sin-shifted")):
            spec = sweep(PotentialProfile.of(kind, params), grid, "numeric", slicing, threads)
            out[label] = Table({"p": spec.p_values, "T": spec.coefficients.T},
                               f"{kind} epsilon={epsilon!r} k0={k0!r} N=5000 numeric")
    return out
