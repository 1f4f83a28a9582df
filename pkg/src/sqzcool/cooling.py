"""Closed-form cooling limits and bath occupancies, plus grid evaluation
for cooling maps.

The mechanical mode couples to two reservoirs: its thermal environment
(rate Gamma, occupancy n_th) and an effective optical bath (rate
gamma_opt = Gamma_+ - Gamma_-) whose occupancy is set by the quantum state
of the drive.  All formulas here assume the weak coupling limit and, for
squeezed drives, the cooling-optimal squeezing phase; behavior at other
phases is handled numerically by the Langevin solver.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .errors import NotCooling
from .model import (
    OmSystem,
    SqueezedDrive,
    effective_omega,
    scattering_rates,
)

_COMPONENT_TOL = 1e-12


@dataclass(frozen=True)
class BathOccupancy:
    """Effective optical-bath phonon occupancy with optional breakdown."""

    n_bath: float
    components: Mapping[str, float] | None = None

    def __post_init__(self):
        if self.n_bath < -_COMPONENT_TOL:
            raise ValueError("bath occupancy must be nonnegative")
        if self.components is not None:
            total = sum(self.components.values())
            if abs(total - self.n_bath) > _COMPONENT_TOL * max(1.0, abs(self.n_bath)):
                raise ValueError("components do not sum to n_bath")

    def __float__(self) -> float:
        return self.n_bath


@dataclass(frozen=True)
class LossyCavityOccupancy(BathOccupancy):
    """Bath occupancy with internal cavity loss, plus its companion limits:

    bound_opt : lower bound (1 - eta) * n_m^0(kappa) reached with optimal
        pure squeezing at this coupling split
    floor_internal : n_m^0(kappa_0), the cooling floor set by the internal
        loss rate alone
    """

    bound_opt: float = 0.0
    floor_internal: float = 0.0


@dataclass(frozen=True)
class CoolMap:
    """Bath occupancy over a (kappa/Omega, Delta/Omega) grid.

    values[i, j] corresponds to kappa_axis[i], delta_axis[j]; points where
    the drive does not cool hold NaN.  The squeezing phase is pinned to its
    optimal value at every grid point.
    """

    kappa_axis: np.ndarray
    delta_axis: np.ndarray
    values: np.ndarray
    drive: SqueezedDrive = field(default_factory=SqueezedDrive.coherent)

    def __post_init__(self):
        if self.values.shape != (len(self.kappa_axis), len(self.delta_axis)):
            raise ValueError("values shape does not match axes")
        finite = self.values[np.isfinite(self.values)]
        if finite.size and finite.min() < -_COMPONENT_TOL:
            raise ValueError("bath occupancies must be nonnegative")
        for arr in (self.kappa_axis, self.delta_axis, self.values):
            arr.setflags(write=False)


def _cooling_rates(sys: OmSystem, spring: bool):
    if sys.delta >= 0:
        raise NotCooling(f"delta={sys.delta:.6g} is not red-detuned")
    rates = scattering_rates(sys, spring=spring)
    return rates


def sideband_limit(sys: OmSystem, spring: bool = False) -> float:
    """Minimum phonon occupancy for a coherent drive:

    n_m^0 = Gamma_- / (Gamma_+ - Gamma_-) = -(kappa^2 + 4 (Delta + Omega)^2) / (16 Delta Omega)

    Independent of g.  Raises NotCooling for Delta >= 0.
    """
    if sys.delta >= 0:
        raise NotCooling(f"delta={sys.delta:.6g} is not red-detuned")
    om = effective_omega(sys, spring)
    return -(sys.kappa**2 + 4 * (sys.delta + om) ** 2) / (16 * sys.delta * om)


def bath_occupancy_pure(sys: OmSystem, r: float, spring: bool = False) -> BathOccupancy:
    """Optical bath occupancy for a pure squeezed drive at the optimal phase:

    n_m^bath = (sqrt(Gamma_-) cosh r - sqrt(Gamma_+) sinh r)^2 / gamma_opt

    Vanishes when tanh r = sqrt(Gamma_-/Gamma_+); reduces to the coherent
    limit at r = 0.
    """
    rates = _cooling_rates(sys, spring)
    amp = math.sqrt(rates.gamma_minus) * math.cosh(r) - math.sqrt(
        rates.gamma_plus
    ) * math.sinh(r)
    value = amp**2 / rates.gamma_opt
    return BathOccupancy(n_bath=value, components={"pure": value})


def bath_occupancy(sys: OmSystem, drive: SqueezedDrive, spring: bool = False) -> BathOccupancy:
    """Optical bath occupancy for an impure squeezed drive at the optimal
    phase: the pure-drive term plus

    n_l [ (Gamma_+ + Gamma_-) cosh 2r - 2 sqrt(Gamma_- Gamma_+) sinh 2r ] / gamma_opt

    The result is bounded below by n_l, with equality exactly at r >= r_c
    and the (possibly bifurcated) optimal detunings.  The drive's phase
    field is not consulted; off-optimal phases need the Langevin solver.
    """
    rates = _cooling_rates(sys, spring)
    pure = bath_occupancy_pure(sys, drive.r, spring=spring).n_bath
    impurity = (
        drive.n_l
        * (
            (rates.gamma_plus + rates.gamma_minus) * math.cosh(2 * drive.r)
            - 2 * math.sqrt(rates.gamma_minus * rates.gamma_plus) * math.sinh(2 * drive.r)
        )
        / rates.gamma_opt
    )
    return BathOccupancy(
        n_bath=pure + impurity,
        components={"pure": pure, "impurity": impurity},
    )


def equilibrium_occupancy(sys: OmSystem, n_bath, spring: bool = False) -> float:
    """Detailed balance between the thermal and optical reservoirs:

    n_m = (Gamma n_th + gamma_opt n_bath) / (Gamma + gamma_opt)
    """
    nb = float(n_bath)
    rates = scattering_rates(sys, spring=spring)
    denom = sys.gamma_m + rates.gamma_opt
    if denom <= 0:
        raise NotCooling("net damping is nonpositive")
    return (sys.gamma_m * sys.n_th + rates.gamma_opt * nb) / denom


def bath_occupancy_lossy_cavity(
    sys: OmSystem, drive: SqueezedDrive, spring: bool = False
) -> LossyCavityOccupancy:
    """Bath occupancy including internal cavity loss (vacuum at that port):

    n_bath(kappa) = eta * n_bath_ext(kappa) + (1 - eta) * n_m^0(kappa),
    eta = kappa_ext / kappa

    Companion values: the optimal-squeezing lower bound (1 - eta) n_m^0(kappa)
    and the floor n_m^0(kappa_0) that both squeezed and coherent drives
    approach as kappa_ext -> 0.
    """
    eta = sys.eta_cavity
    ext = bath_occupancy(sys, drive, spring=spring)
    n0 = sideband_limit(sys, spring=spring)
    pure = eta * ext.components["pure"]
    impurity = eta * ext.components["impurity"]
    internal = (1 - eta) * n0
    om = effective_omega(sys, spring)
    if sys.kappa_0 > 0:
        d0_int = -0.5 * math.hypot(sys.kappa_0, 2 * om)
        floor = -(sys.kappa_0**2 + 4 * (d0_int + om) ** 2) / (16 * d0_int * om)
    else:
        floor = 0.0
    return LossyCavityOccupancy(
        n_bath=pure + impurity + internal,
        components={"pure": pure, "impurity": impurity, "internal_loss": internal},
        bound_opt=internal,
        floor_internal=floor,
    )


def ponderomotive_squeezing(sys: OmSystem, spring: bool = False) -> float:
    """Saturated squeezing parameter of the reflected field generated by the
    optomechanical interaction itself under a red-detuned coherent drive:

    r_OM = asinh(2 sqrt(Gamma_- Gamma_+) / gamma_opt)
         = asinh(2 sqrt(n_m^0 (n_m^0 + 1)))

    Independent of g.  Valid in the strong damping limit (gamma_opt much
    larger than Gamma n_th), which is the caller's responsibility.  At the
    optimal detuning r_OM = 2 r_c exactly, and r_OM is symmetric under
    Delta/Delta_0 -> Delta_0/Delta.
    """
    rates = _cooling_rates(sys, spring)
    return math.asinh(
        2 * math.sqrt(rates.gamma_minus * rates.gamma_plus) / rates.gamma_opt
    )


def strong_coupling_estimate(sys: OmSystem) -> float:
    """Zero-temperature occupancy floor for a coherent drive at the optimal
    detuning, expanded in the normalized linewidth and coupling:

    n_m ~= (kappa / 4 Omega)^2 + (g / Omega)^2 / 2

    The second term is the strong coupling correction; it becomes comparable
    to the first when g ~ kappa.
    """
    return (sys.kappa / (4 * sys.omega_m)) ** 2 + 0.5 * (sys.g / sys.omega_m) ** 2


def cool_map(kappa_axis, delta_axis, r: float, n_l: float) -> CoolMap:
    """Bath occupancy over a (kappa/Omega, Delta/Omega) grid (Omega = 1),
    with the squeezing phase optimal at every point.

    Entries with Delta >= 0 (no net cooling) are recorded as NaN.  The
    result is independent of g; evaluation is vectorized and row-major
    over (kappa, delta).
    """
    kappa_axis = np.asarray(kappa_axis, dtype=float)
    delta_axis = np.asarray(delta_axis, dtype=float)
    for name, ax in (("kappa", kappa_axis), ("delta", delta_axis)):
        if ax.ndim != 1 or ax.size == 0:
            raise ValueError(f"{name} axis must be a nonempty 1-d array")
        if ax.size > 1 and not (np.all(np.diff(ax) > 0) or np.all(np.diff(ax) < 0)):
            raise ValueError(f"{name} axis must be strictly monotone")
    if np.any(kappa_axis <= 0):
        raise ValueError("kappa axis must be positive")

    k = kappa_axis[:, None]
    d = delta_axis[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        gp = 4 * k / (k**2 + 4 * (1 + d) ** 2)  # g = 1, Omega = 1
        gm = 4 * k / (k**2 + 4 * (1 - d) ** 2)
        gopt = gp - gm
        pure = (np.sqrt(gm) * np.cosh(r) - np.sqrt(gp) * np.sinh(r)) ** 2 / gopt
        impurity = (
            n_l * ((gp + gm) * np.cosh(2 * r) - 2 * np.sqrt(gp * gm) * np.sinh(2 * r)) / gopt
        )
        values = pure + impurity
    values = np.where(np.broadcast_to(d, values.shape) < 0, values, np.nan)
    return CoolMap(
        kappa_axis=kappa_axis.copy(),
        delta_axis=delta_axis.copy(),
        values=values,
        drive=SqueezedDrive(r=r, n_l=n_l, theta=0.0),
    )
