"""Transfer-matrix scattering for arbitrary complex potentials on ``(0, L)``.

The potential is replaced by a piecewise-constant one sampled at slice
midpoints, and each slice is propagated exactly.  State vectors hold the
amplitudes ``(a, b)`` of ``a exp(i p (x - x0)) + b exp(-i p (x - x0))``
referenced at the current position ``x0``, so a field-free slice of width
``h`` is ``diag(exp(i p h), exp(-i p h))`` and every matrix is unimodular.

For periodic profiles the one-period (monodromy) matrix is raised to the
``N``-th power by repeated squaring.  Computations are batched over an array
of momenta; each momentum's convergence history is independent of the others
in the batch.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .analytic import ScatteringCoefficients
from .errors import DomainError, GridTooCoarseError, NonConvergenceError
from .synthesis import PotentialProfile

__all__ = [
    "SlicingSpec",
    "TransferMatrix",
    "slice_matrix",
    "slice_values",
    "monodromy",
    "total_transfer_matrices",
    "scatter_numeric",
    "scatter_numeric_many",
    "scatter_fixed",
    "schrodinger_residual",
]

log = logging.getLogger(__name__)

_SERIES_CUTOFF = 1e-4
_BLOCK = 64
_TINY = 16 * np.finfo(float).tiny
_DRIFT_WARN = 1e-8


@dataclass(frozen=True)
class SlicingSpec:
    """Slicing and convergence controls for the numeric engine.

    ``max_doublings`` bounds the doubling loop; with ``extrapolate`` the
    two finest levels are combined by Richardson extrapolation, which
    removes the leading ``h**2`` error of midpoint slicing.
    """

    slices_per_period: int = 64
    use_monodromy_power: bool = True
    convergence_tol: float = 1e-6
    max_doublings: int = 8
    extrapolate: bool = True

    def __post_init__(self):
        if int(self.slices_per_period) != self.slices_per_period or self.slices_per_period < 4:
            raise DomainError(f"slices_per_period must be an integer >= 4, got {self.slices_per_period!r}")
        if not self.convergence_tol > 0:
            raise DomainError(f"convergence_tol must be > 0, got {self.convergence_tol!r}")
        if self.max_doublings < 0 or (self.extrapolate and self.max_doublings == 1):
            raise DomainError("max_doublings must be 0 (fixed slicing) or >= 2 with extrapolation")


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """2x2 complex matrix acting on (right-moving, left-moving) amplitudes."""

    m: np.ndarray

    @property
    def m11(self) -> complex:
        return complex(self.m[0, 0])

    @property
    def m12(self) -> complex:
        return complex(self.m[0, 1])

    @property
    def m21(self) -> complex:
        return complex(self.m[1, 0])

    @property
    def m22(self) -> complex:
        return complex(self.m[1, 1])

    @property
    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(self.m @ other.m)

    def power(self, n: int) -> "TransferMatrix":
        return TransferMatrix(_matrix_power(self.m[None], n)[0])

    def scattering(self, p: float, length: float) -> ScatteringCoefficients:
        t, rl, rr, _ = _extract(self.m[None], np.array([p]), length)
        return ScatteringCoefficients(p, complex(t[0]), complex(rl[0]), complex(rr[0]))

    def transmissions(self, p: float, length: float) -> tuple[complex, complex]:
        """``(t_left, t_right)``: equal for any 1D potential, complex ones included."""
        t, _, _, t_right = _extract(self.m[None], np.array([p]), length)
        return complex(t[0]), complex(t_right[0])


def _slice_arrays(V, p, h):
    """Slice matrices for potentials ``V`` (shape S) and momenta ``p`` (shape P).

    Returns shape ``(S, P, 2, 2)``.  Entries depend on ``q**2 = p**2 - V``
    only through ``cos(q h)`` and ``sin(q h)/q``, both even in ``q``.
    """
    V = np.asarray(V, dtype=complex)[:, None]
    p = np.asarray(p, dtype=float)[None, :]
    q = np.sqrt(p * p - V)
    qh = q * h
    small = np.abs(qh) < _SERIES_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        sin_over_q = np.where(small, h - q * q * h ** 3 / 6.0, np.sin(qh) / np.where(small, 1.0, q))
    c = np.cos(qh)
    diag = 0.5j * (2.0 * p * p - V) * sin_over_q / p
    off = -0.5j * V * sin_over_q / p
    out = np.empty(V.shape[:1] + p.shape[1:] + (2, 2), dtype=complex)
    out[..., 0, 0] = c + diag
    out[..., 0, 1] = off
    out[..., 1, 0] = -off
    out[..., 1, 1] = c - diag
    return out


def slice_matrix(V_mid: complex, p: float, h: float) -> TransferMatrix:
    """Exact propagation across a slice of width ``h`` with constant potential ``V_mid``."""
    if not p > 0 or not h > 0:
        raise DomainError(f"need p > 0 and h > 0, got p={p!r}, h={h!r}")
    return TransferMatrix(_slice_arrays([V_mid], [p], h)[0, 0])


def _compose(mats):
    """Ordered product ``M[-1] @ ... @ M[0]`` over axis 0 by pairwise reduction."""
    while mats.shape[0] > 1:
        odd = mats[-1:] if mats.shape[0] % 2 else None
        mats = mats[1::2] @ mats[0:mats.shape[0] - (odd is not None):2]
        if odd is not None:
            mats = np.concatenate([mats, odd])
    return mats[0]


def _compose_slices(V, p, h):
    """Product of all slice matrices, built in blocks to bound memory."""
    total = None
    for start in range(0, len(V), _BLOCK):
        block = _compose(_slice_arrays(V[start:start + _BLOCK], p, h))
        total = block if total is None else block @ total
    return total


def _matrix_power(m, n):
    result = np.broadcast_to(np.eye(2, dtype=complex), m.shape).copy()
    base = m
    while n:
        if n & 1:
            result = base @ result
        n >>= 1
        if n:
            base = base @ base
    return result


def slice_values(profile: PotentialProfile, slices_per_period: int):
    """Midpoint samples of one period (periodic kinds) or of the whole support.

    Returns ``(V, h, repeats)`` where the full potential is ``V`` repeated
    ``repeats`` times.
    """
    if profile.is_periodic:
        Lambda = profile.params.Lambda
        h = Lambda / slices_per_period
        x = (np.arange(slices_per_period) + 0.5) * h
        return profile(x), h, profile.params.N
    V = profile.samples
    return V, profile.length / V.size, 1


def total_transfer_matrices(profile: PotentialProfile, p, slices_per_period: int,
                            use_power: bool = True):
    """Transfer matrices over ``(0, L)`` for every momentum in ``p``: shape ``(P, 2, 2)``."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    V, h, repeats = slice_values(profile, slices_per_period)
    cell = _compose_slices(V, p, h)
    if repeats == 1:
        return cell
    if use_power:
        return _matrix_power(cell, repeats)
    total = cell
    for _ in range(repeats - 1):
        total = cell @ total
    return total


def monodromy(profile: PotentialProfile, p: float, spec: SlicingSpec = SlicingSpec()) -> TransferMatrix:
    """Transfer matrix of the whole profile at momentum ``p``.

    For periodic profiles this is the one-period matrix to the ``N``-th power
    (``use_monodromy_power``) or the product of all ``N * slices_per_period``
    slice matrices.
    """
    if not p > 0:
        raise DomainError(f"momentum must be > 0, got p={p!r}")
    if spec.use_monodromy_power and not profile.is_periodic:
        raise DomainError("monodromy power needs a profile made of whole periods")
    m = total_transfer_matrices(profile, [p], spec.slices_per_period, spec.use_monodromy_power)
    return TransferMatrix(m[0])


def _extract(M, p, length):
    m11, m12, m21, m22 = M[:, 0, 0], M[:, 0, 1], M[:, 1, 0], M[:, 1, 1]
    phase = np.exp(-1j * p * length)
    r_left = -m21 / m22
    t_left = (m11 + m12 * r_left) * phase
    t_right = phase / m22
    r_right = m12 / m22 * phase * phase
    return t_left, r_left, r_right, t_right


def _amplitudes(profile, p, n, use_power, with_drift=False):
    M = total_transfer_matrices(profile, p, n, use_power)
    t, rl, rr, _ = _extract(M, p, profile.support_length)
    amps = np.stack([t, rl, rr])
    if not with_drift:
        return amps
    det = M[:, 0, 0] * M[:, 1, 1] - M[:, 0, 1] * M[:, 1, 0]
    return amps, np.abs(det - 1.0)


def _observables(amps):
    return np.abs(amps) ** 2


def _converged(new, old, prev_change, tol):
    """Per-momentum convergence of all three amplitudes.

    An amplitude passes when its change is within ``tol`` of its own size,
    or when the change has stopped shrinking (rounding plateau) while being
    within ``tol`` of the largest amplitude at that momentum.
    """
    change = np.abs(new - old)
    relative = change <= tol * np.abs(new) + _TINY
    scale = np.max(np.abs(new), axis=0)
    plateau = (change <= tol * scale) & (change > 0.25 * prev_change)
    return np.all(relative | plateau, axis=0), change


def scatter_fixed(profile: PotentialProfile, p, slices_per_period: int,
                  use_power: bool = True) -> ScatteringCoefficients:
    """Scattering at one fixed slicing, no doubling or extrapolation."""
    p_arr = np.atleast_1d(np.asarray(p, dtype=float))
    if not np.all(p_arr > 0):
        raise DomainError("momentum must be > 0")
    t, rl, rr = _amplitudes(profile, p_arr, slices_per_period, use_power and profile.is_periodic)
    if np.ndim(p) == 0:
        return ScatteringCoefficients(float(p), t[0], rl[0], rr[0], slices_per_period)
    return ScatteringCoefficients(p_arr, t, rl, rr, np.full(p_arr.shape, slices_per_period))


def scatter_numeric_many(profile: PotentialProfile, p, spec: SlicingSpec = SlicingSpec()) -> ScatteringCoefficients:
    """Converged numeric scattering for an array of momenta.

    The slicing doubles until two successive estimates of each amplitude
    ``(t, r_left, r_right)`` differ by less than ``convergence_tol`` relative
    to its size.  Amplitudes that vanish to machine precision are accepted
    once their changes stall at the rounding level, provided that level is
    within ``convergence_tol`` of the largest amplitude.  With
    ``extrapolate`` the estimates are Richardson combinations
    ``(4 A(h/2) - A(h)) / 3`` of the amplitudes, otherwise the raw ones.  ``max_doublings == 0`` returns the raw
    result at the starting slicing.  Custom sampled profiles are already
    piecewise constant and are computed once.

    Raises
    ------
    NonConvergenceError
        If some momentum is not converged after ``max_doublings`` doublings.
    """
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if not np.all(p > 0):
        raise DomainError(f"momentum must be > 0, got p={float(p[~(p > 0)][0])!r}")
    use_power = spec.use_monodromy_power and profile.is_periodic
    n = spec.slices_per_period
    raw = _amplitudes(profile, p, n, use_power)
    if not profile.is_periodic:
        return ScatteringCoefficients(p, raw[0], raw[1], raw[2], np.full(p.shape, profile.samples.size))

    result = raw.copy()
    slices = np.full(p.shape, n)
    if spec.max_doublings == 0:
        return ScatteringCoefficients(p, result[0], result[1], result[2], slices)

    active = np.arange(p.size)
    estimate = None if spec.extrapolate else raw
    prev_change = np.full(raw.shape, np.inf)
    for _ in range(spec.max_doublings):
        n *= 2
        finer, drift = _amplitudes(profile, p[active], n, use_power, with_drift=True)
        if drift.max() > _DRIFT_WARN:
            warnings.warn(f"transfer-matrix determinant drift {drift.max():.2e} at {n} slices/period",
                          RuntimeWarning, stacklevel=2)
        new_estimate = (4.0 * finer - raw) / 3.0 if spec.extrapolate else finer
        result[:, active] = new_estimate
        slices[active] = n
        if estimate is not None:
            done, change = _converged(new_estimate, estimate, prev_change, spec.convergence_tol)
            keep = ~done
            previous = estimate[:, keep]
            active, finer, new_estimate, prev_change = (
                active[keep], finer[:, keep], new_estimate[:, keep], change[:, keep])
            if active.size == 0:
                break
        raw, estimate = finer, new_estimate
    else:
        raise NonConvergenceError(
            float(p[active[0]]),
            tuple(float(v) for v in _observables(previous)[:, 0]),
            tuple(float(v) for v in _observables(estimate)[:, 0]),
            n,
        )
    log.debug("converged %d momenta, max slicing %d", p.size, slices.max())
    return ScatteringCoefficients(p, result[0], result[1], result[2], slices)


def scatter_numeric(profile: PotentialProfile, p: float, spec: SlicingSpec = SlicingSpec()) -> ScatteringCoefficients:
    """Converged numeric scattering coefficients at a single momentum."""
    c = scatter_numeric_many(profile, [p], spec)
    return ScatteringCoefficients(float(p), complex(c.t[0]), complex(c.r_left[0]),
                                  complex(c.r_right[0]), int(c.slices_per_period[0]))


def schrodinger_residual(x, xi, profile: PotentialProfile, E: float) -> float:
    """Max of ``|xi'' + (E - V) xi|`` over interior points of a uniform grid.

    ``xi''`` is the three-point central difference.
    """
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=complex)
    if x.size < 3 or xi.shape != x.shape:
        raise GridTooCoarseError(f"need >= 3 matching samples, got {x.size} and {xi.size}")
    h = np.diff(x)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise DomainError("grid must be uniform")
    h = (x[-1] - x[0]) / (x.size - 1)
    d2 = (xi[2:] - 2.0 * xi[1:-1] + xi[:-2]) / (h * h)
    res = d2 + (E - profile(x[1:-1])) * xi[1:-1]
    return float(np.max(np.abs(res)))
