"""Supersymmetric synthesis of the PT-symmetric complex crystal.

The seed is a square well of depth ``epsilon`` on ``0 < x < L``.  A
non-normalizable solution ``phi`` of the seed equation at the factorization
energy ``E1 = k0**2 - epsilon`` defines the superpotential ``W = phi'/phi``
and the partner potential ``V = W**2 - W' + E1``, which is locally periodic
with period ``pi / k0`` and satisfies ``V(Lambda - x) = conj(V(x))``.

Units are dimensionless with hbar**2 / 2m = 1.  Every point function here
accepts scalars or numpy arrays and returns the same shape.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError

__all__ = [
    "CrystalParams",
    "ProfileKind",
    "PotentialProfile",
    "derive_params",
    "phi",
    "superpotential",
    "partner_potential",
    "shallow_limit_potential",
    "sinusoidal_potential",
    "apply_intertwiner",
    "sample_profile",
    "write_potential_csv",
]


@dataclass(frozen=True)
class CrystalParams:
    """Well depth, Bragg wavenumber and cell count plus derived quantities.

    Build instances with :func:`derive_params`.  ``epsilon == 0`` is accepted
    as the free limit: ``rho`` is infinite, ``mu`` is zero and every
    potential vanishes identically.
    """

    epsilon: float
    k0: float
    N: int
    Lambda: float
    L: float
    E1: float
    k1: float
    rho: float
    mu: float

    @property
    def is_free(self) -> bool:
        return self.epsilon == 0.0


def derive_params(epsilon: float, k0: float = 1.0, N: int = 100) -> CrystalParams:
    """Validate ``(epsilon, k0, N)`` and compute the derived crystal quantities.

    ``rho = atanh(y)`` with ``y = sqrt(1 - epsilon/k0**2)`` is evaluated as
    ``0.5*log((1+y)/(1-y))`` where ``1 - y`` is formed as
    ``(epsilon/k0**2) / (1 + y)``, so no digits are lost as ``y -> 1``.

    Raises
    ------
    DomainError
        If ``k0 <= 0``, ``epsilon < 0``, ``epsilon >= k0**2`` or ``N < 1``.
    """
    epsilon = float(epsilon)
    k0 = float(k0)
    if not math.isfinite(k0) or k0 <= 0.0:
        raise DomainError(f"k0 must be > 0, got {k0!r}")
    if not math.isfinite(epsilon) or epsilon < 0.0:
        raise DomainError(f"epsilon must be >= 0, got {epsilon!r}")
    if epsilon >= k0 * k0:
        raise DomainError(f"epsilon must be < k0^2 (= {k0 * k0!r}), got {epsilon!r}")
    if isinstance(N, bool) or int(N) != N or int(N) < 1:
        raise DomainError(f"N must be an integer >= 1, got {N!r}")
    N = int(N)

    Lambda = math.pi / k0
    E1 = k0 * k0 - epsilon
    k1 = math.sqrt(E1)
    ratio = epsilon / (k0 * k0)
    mu = math.sqrt(ratio)
    if epsilon == 0.0:
        rho = math.inf
    else:
        y = math.sqrt(1.0 - ratio)
        one_minus_y = ratio / (1.0 + y)
        rho = 0.5 * math.log((1.0 + y) / one_minus_y)
    return CrystalParams(
        epsilon=epsilon, k0=k0, N=N, Lambda=Lambda, L=N * Lambda,
        E1=E1, k1=k1, rho=rho, mu=mu,
    )


def _inside(x, params: CrystalParams):
    # closed interval: boundary points take the interior branch
    return (x >= 0.0) & (x <= params.L)


def _cell_phase(x, params: CrystalParams):
    """``k0*x`` reduced into one period, exact up to the final multiply."""
    return params.k0 * np.mod(x, params.Lambda)


def phi(x, params: CrystalParams):
    """Auxiliary solution of the seed equation at energy ``E1``.

    Plane wave ``exp(i k1 x)`` left of the well, ``mu*cos(k0 x - i rho)``
    inside and ``exp(i k1 (x - L) - i N pi)`` on the right.  The interior
    branch is evaluated as ``a*exp(i k0 x) + b*exp(-i k0 x)`` with
    ``a = (1 + y)/2`` and ``b = mu**2 / (2 (1 + y))``, which is the same
    function without overflow for small ``epsilon``.
    """
    x = np.asarray(x, dtype=float)
    k0, k1 = params.k0, params.k1
    y = k1 / k0
    a = 0.5 * (1.0 + y)
    b = params.mu ** 2 / (2.0 * (1.0 + y))
    theta = k0 * x
    interior = a * np.exp(1j * theta) + b * np.exp(-1j * theta)
    left = np.exp(1j * k1 * x)
    sign = -1.0 if params.N % 2 else 1.0
    right = sign * np.exp(1j * k1 * (x - params.L))
    out = np.where(x < 0.0, left, np.where(x > params.L, right, interior))
    return out[()] if out.ndim == 0 else out


def superpotential(x, params: CrystalParams):
    """``W = phi'/phi``: ``i k1`` outside the well, ``-k0 tan(k0 x - i rho)`` inside."""
    x = np.asarray(x, dtype=float)
    k0, k1 = params.k0, params.k1
    if params.is_free:
        interior = np.full(x.shape, 1j * k0)
    else:
        interior = -k0 * np.tan(_cell_phase(x, params) - 1j * params.rho)
    out = np.where(_inside(x, params), interior, 1j * k1)
    return out[()] if out.ndim == 0 else out


def partner_potential(x, params: CrystalParams):
    """The synthesized crystal ``4 k0**2 / (1 + cos(2 k0 x - 2 i rho)) - epsilon``.

    Zero outside ``[0, L]``.
    """
    x = np.asarray(x, dtype=float)
    if params.is_free:
        out = np.zeros(x.shape, dtype=complex)
    else:
        k0 = params.k0
        arg = 2.0 * _cell_phase(x, params) - 2j * params.rho
        interior = 4.0 * k0 * k0 / (1.0 + np.cos(arg)) - params.epsilon
        out = np.where(_inside(x, params), interior, 0.0 + 0.0j)
    return out[()] if out.ndim == 0 else out


def sinusoidal_potential(x, params: CrystalParams, bias: bool = False):
    """``2 epsilon exp(-2 i k0 x)`` on ``[0, L]``, minus ``epsilon`` if ``bias``."""
    x = np.asarray(x, dtype=float)
    eps = params.epsilon
    interior = 2.0 * eps * np.exp(-2j * _cell_phase(x, params))
    if bias:
        interior = interior - eps
    out = np.where(_inside(x, params), interior, 0.0 + 0.0j)
    return out[()] if out.ndim == 0 else out


def shallow_limit_potential(x, params: CrystalParams):
    """Small-``epsilon`` form of the crystal: ``2 epsilon exp(-2 i k0 x) - epsilon``."""
    return sinusoidal_potential(x, params, bias=True)


def apply_intertwiner(psi, dpsi, W):
    """Map a seed solution to the partner equation: ``xi = -psi' + W psi``."""
    return -np.asarray(dpsi) + np.asarray(W) * np.asarray(psi)


class ProfileKind(str, enum.Enum):
    SQUARE_WELL = "well"
    SUSY_CRYSTAL = "susy"
    SINUSOIDAL = "sin"
    SHIFTED_SINUSOIDAL = "sin-shifted"
    CUSTOM_SAMPLED = "custom"


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """A scattering potential supported on ``(0, L)``.

    For ``CUSTOM_SAMPLED`` the potential is piecewise constant: ``samples[j]``
    holds on the ``j``-th of ``len(samples)`` equal slices of ``(0, length)``.
    All other kinds are defined by ``params``.
    """

    kind: ProfileKind
    params: CrystalParams | None = None
    samples: np.ndarray | None = None
    length: float | None = None

    def __post_init__(self):
        kind = ProfileKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is ProfileKind.CUSTOM_SAMPLED:
            if self.samples is None or self.length is None:
                raise DomainError("custom profile needs samples and length")
            samples = np.asarray(self.samples, dtype=complex).ravel()
            if samples.size == 0 or not self.length > 0:
                raise DomainError("custom profile needs >= 1 sample and length > 0")
            samples.setflags(write=False)
            object.__setattr__(self, "samples", samples)
        elif self.params is None:
            raise DomainError(f"{kind.value} profile needs CrystalParams")

    @classmethod
    def of(cls, kind, params: CrystalParams) -> "PotentialProfile":
        return cls(ProfileKind(kind), params)

    @property
    def support_length(self) -> float:
        if self.kind is ProfileKind.CUSTOM_SAMPLED:
            return float(self.length)
        return self.params.L

    @property
    def is_periodic(self) -> bool:
        return self.kind is not ProfileKind.CUSTOM_SAMPLED

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        kind = self.kind
        if kind is ProfileKind.SUSY_CRYSTAL:
            return partner_potential(x, self.params)
        if kind is ProfileKind.SINUSOIDAL:
            return sinusoidal_potential(x, self.params)
        if kind is ProfileKind.SHIFTED_SINUSOIDAL:
            return sinusoidal_potential(x, self.params, bias=True)
        if kind is ProfileKind.SQUARE_WELL:
            inside = _inside(x, self.params)
            out = np.where(inside, -self.params.epsilon + 0.0j, 0.0 + 0.0j)
        else:
            n = self.samples.size
            idx = np.clip(np.floor(x / self.length * n).astype(int), 0, n - 1)
            inside = (x >= 0.0) & (x <= self.length)
            out = np.where(inside, self.samples[idx], 0.0 + 0.0j)
        return out[()] if out.ndim == 0 else out

    def describe(self) -> dict:
        d = {"kind": self.kind.value}
        if self.params is not None:
            d.update(epsilon=self.params.epsilon, k0=self.params.k0, N=self.params.N)
        else:
            d.update(length=self.length, n_samples=int(self.samples.size))
        return d


def sample_profile(profile: PotentialProfile, samples_per_period: int = 64):
    """Uniform samples ``(x, V)`` over the closed support ``[0, L]``."""
    if profile.is_periodic:
        n = profile.params.N * samples_per_period
    else:
        n = profile.samples.size
    x = np.linspace(0.0, profile.support_length, n + 1)
    return x, profile(x)


def write_potential_csv(path, x, V) -> None:
    """Write ``x,V_re,V_im`` rows at 17 significant digits."""
    V = np.asarray(V, dtype=complex)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "V_re", "V_im"])
        for xi, vi in zip(np.asarray(x, dtype=float), V):
            w.writerow([f"{xi:.17g}", f"{vi.real:.17g}", f"{vi.imag:.17g}"])
