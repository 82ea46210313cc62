"""Closed-form scattering for the square well and its SUSY partner crystal.

All functions broadcast over the momentum ``p``: pass a scalar to get scalar
fields back, or an array to get arrays.

Near the Bragg point the phase ``q*L`` sits close to ``N*pi``.  Writing
``q = k0 + s`` with ``s = (p - k1)(p + k1)/(q + k0)`` gives
``sin(q L) = (-1)**N sin(s L)`` and ``cos(q L) = (-1)**N cos(s L)`` with no
cancellation, and ``sin(s L)/(k1 - p)`` becomes a ``sinc`` that is regular
at ``p = k1``.  The left reflection of the crystal is evaluated in that
factored form everywhere, so the ``p -> k1`` limit needs no special branch.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .synthesis import CrystalParams

__all__ = [
    "ScatteringCoefficients",
    "square_well_coefficients",
    "square_well_reflectance",
    "square_well_solution",
    "reflectance_bound",
    "crystal_coefficients",
    "crystal_reflectances",
    "left_reflection_limit",
    "peak_left_reflectance",
    "unitarity_defect",
]


@dataclass(frozen=True, eq=False)
class ScatteringCoefficients:
    """Complex amplitudes at momentum ``p`` (scalars or equal-shape arrays).

    ``t`` is referenced to ``exp(i p x)`` in global coordinates, so a region
    of zero potential has ``t == 1``.  ``slices_per_period`` records the
    final slicing when the values come from the numeric engine.
    """

    p: float | np.ndarray
    t: complex | np.ndarray
    r_left: complex | np.ndarray
    r_right: complex | np.ndarray
    slices_per_period: int | np.ndarray | None = None

    @property
    def T(self):
        return np.abs(self.t) ** 2

    @property
    def R_left(self):
        return np.abs(self.r_left) ** 2

    @property
    def R_right(self):
        return np.abs(self.r_right) ** 2


def _check_momentum(p):
    p = np.asarray(p, dtype=float)
    if not np.all(p > 0.0):
        bad = p[~(p > 0.0)].ravel()[0] if p.ndim else p
        raise DomainError(f"momentum must be > 0, got p={float(bad)!r}")
    return p


def _scalar(a):
    a = np.asarray(a)
    return a[()] if a.ndim == 0 else a


class _WellParts:
    """Shared intermediates of the square-well solution at momentum ``p``."""

    def __init__(self, p, params: CrystalParams):
        eps, k0, k1, L = params.epsilon, params.k0, params.k1, params.L
        self.p = p
        self.q = q = np.sqrt(p * p + eps)
        self.s = s = (p - k1) * (p + k1) / (q + k0)
        sL = s * L
        self.sin_sL = np.sin(sL)
        self.cos_sL = np.cos(sL)
        self.parity = -1.0 if params.N % 2 else 1.0
        # denominator 2pq cos(qL) - i(p^2+q^2) sin(qL), with the (-1)^N divided out
        self.den = 2.0 * p * q * self.cos_sL - 1j * (p * p + q * q) * self.sin_sL
        # sin(sL)/(k1 - p), regular at p = k1
        self.sin_over_detuning = -L * (p + k1) / (q + k0) * np.sinc(sL / np.pi)


def square_well_coefficients(p, params: CrystalParams) -> ScatteringCoefficients:
    """Transmission and reflection amplitudes of the square well of depth ``epsilon``.

    Raises
    ------
    DomainError
        If any ``p <= 0``.
    """
    p = _check_momentum(p)
    w = _WellParts(p, params)
    t1 = w.parity * 2.0 * p * w.q * np.exp(-1j * p * params.L) / w.den
    r1l = 1j * params.epsilon * w.sin_sL / w.den
    r1r = r1l * np.exp(-2j * p * params.L)
    return ScatteringCoefficients(_scalar(p), _scalar(t1), _scalar(r1l), _scalar(r1r))


def square_well_reflectance(p, params: CrystalParams):
    """``R1 = eps^2 sin^2(qL) / (-eps^2 cos^2(qL) + (2p^2 + eps)^2)``."""
    p = _check_momentum(p)
    w = _WellParts(p, params)
    eps = params.epsilon
    R1 = eps ** 2 * w.sin_sL ** 2 / (-(eps ** 2) * w.cos_sL ** 2 + (2 * p * p + eps) ** 2)
    return _scalar(R1)


def reflectance_bound(p, params: CrystalParams):
    """Thickness-independent upper bound ``eps^2 / (4 p^2 (p^2 + eps))`` on ``R1``."""
    p = np.asarray(p, dtype=float)
    eps = params.epsilon
    return _scalar(eps ** 2 / (4.0 * p * p * (p * p + eps)))


def square_well_solution(x, p: float, params: CrystalParams):
    """Left-incidence scattering state of the well and its derivative at ``x``.

    Returns ``(psi, dpsi)``; inside the well
    ``psi = (1 + r) cos(q x) + i p (1 - r) sin(q x) / q``.
    """
    x = np.asarray(x, dtype=float)
    c = square_well_coefficients(p, params)
    r, t, L = c.r_left, c.t, params.L
    q = np.sqrt(p * p + params.epsilon)
    a = 1.0 + r
    b = 1j * p * (1.0 - r) / q
    e_plus, e_minus = np.exp(1j * p * x), np.exp(-1j * p * x)
    psi = np.where(
        x < 0.0, e_plus + r * e_minus,
        np.where(x > L, t * e_plus, a * np.cos(q * x) + b * np.sin(q * x)),
    )
    dpsi = np.where(
        x < 0.0, 1j * p * (e_plus - r * e_minus),
        np.where(x > L, 1j * p * t * e_plus, q * (-a * np.sin(q * x) + b * np.cos(q * x))),
    )
    return _scalar(psi), _scalar(dpsi)


def crystal_coefficients(p, params: CrystalParams) -> ScatteringCoefficients:
    """Amplitudes of the SUSY partner crystal.

    ``t = t1``, ``r_left = r1_left (k1 + p)/(k1 - p)`` and
    ``r_right = r1_right (k1 - p)/(k1 + p)``.  At ``p = k1`` the left
    reflection takes its limiting value ``-i eps L k1 / k0**2`` and the right
    reflection vanishes.
    """
    p = _check_momentum(p)
    well = square_well_coefficients(p, params)
    w = _WellParts(p, params)
    k1 = params.k1
    rl = 1j * params.epsilon * w.sin_over_detuning * (k1 + p) / w.den
    # the sinc form is already regular at k1; pin the value to the closed-form limit
    rl = np.where(p == k1, left_reflection_limit(params), rl)
    rr = well.r_right * (k1 - p) / (k1 + p)
    return ScatteringCoefficients(well.p, well.t, _scalar(rl), _scalar(rr))


def crystal_reflectances(p, params: CrystalParams):
    """``(R_left, R_right) = R1 * ((k1+p)/(k1-p))**2, R1 * ((k1-p)/(k1+p))**2``.

    The left factor is applied through the regular ``sinc`` form so
    ``p = k1`` returns the peak value instead of ``0/0``.
    """
    p = _check_momentum(p)
    w = _WellParts(p, params)
    eps, k1 = params.epsilon, params.k1
    den = -(eps ** 2) * w.cos_sL ** 2 + (2 * p * p + eps) ** 2
    R_left = eps ** 2 * (w.sin_over_detuning * (k1 + p)) ** 2 / den
    R_right = eps ** 2 * (w.sin_sL * (k1 - p) / (k1 + p)) ** 2 / den
    return _scalar(R_left), _scalar(R_right)


def left_reflection_limit(params: CrystalParams) -> complex:
    """``lim_{p -> k1} r_left = -i eps L k1 / k0**2``."""
    return -1j * params.epsilon * params.L * params.k1 / params.k0 ** 2


def peak_left_reflectance(params: CrystalParams) -> float:
    """Peak left reflectance ``eps^2 L^2 (1 - eps/k0^2) / k0^2``, growing like ``L**2``."""
    eps, k0 = params.epsilon, params.k0
    return eps ** 2 * params.L ** 2 * (1.0 - eps / k0 ** 2) / k0 ** 2


def unitarity_defect(c: ScatteringCoefficients):
    """``| |T - 1| - sqrt(R_left R_right) |``; vanishes for PT-symmetric scatterers."""
    return _scalar(np.abs(np.abs(c.T - 1.0) - np.sqrt(c.R_left * c.R_right)))
