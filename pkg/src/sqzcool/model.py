"""Domain types and closed-form single-point quantities.

Conventions used throughout the package:

* All rates are angular (rad/s).  The CLI converts from Hz at the boundary.
* The drive detuning Delta is signed; Delta < 0 means the drive is below
  cavity resonance (the cooling side).
* The squeezing phase theta lives in (-pi, pi]; theta = 0 squeezes the
  amplitude quadrature X = (a + a^dag)/2.
* Squeezing in dB is 10*log10(e^(-2r)); negative numbers mean squeezing.

The drive-induced shift of the mechanical frequency (optical spring) is
opt-in via the ``spring`` flag: normalized-unit theory sweeps leave it off,
physical-unit runs typically turn it on.  With ``spring=True`` all derived
quantities use the self-consistently shifted frequency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DiscriminantNegative, NoConvergence

_SPRING_RTOL = 1e-10
_SPRING_MAXITER = 100


@dataclass(frozen=True)
class OmSystem:
    """Physical parameters of one optomechanical device plus its drive detuning.

    Parameters
    ----------
    kappa_ext : external (feed line) coupling rate, rad/s
    kappa_0 : internal cavity loss rate, rad/s
    omega_m : bare mechanical resonance frequency, rad/s
    gamma_m : intrinsic mechanical decoherence rate, rad/s
    g : parametrically enhanced optomechanical coupling rate, rad/s
    delta : drive detuning from cavity resonance, rad/s (cooling side is < 0)
    n_th : thermal phonon occupancy of the mechanical environment
    omega_c : optional cavity resonance frequency (metadata only)
    g0, alpha : optional provenance for g = alpha * g0 (metadata only)
    """

    kappa_ext: float
    kappa_0: float
    omega_m: float
    gamma_m: float
    g: float
    delta: float
    n_th: float
    omega_c: float | None = None
    g0: float | None = None
    alpha: float | None = None

    def __post_init__(self):
        if self.kappa_ext < 0 or self.kappa_0 < 0:
            raise ValueError("coupling rates must be nonnegative")
        if self.kappa_ext + self.kappa_0 <= 0:
            raise ValueError("total cavity linewidth must be positive")
        if self.omega_m <= 0:
            raise ValueError("mechanical frequency must be positive")
        if self.gamma_m <= 0:
            raise ValueError("mechanical decoherence rate must be positive")
        if self.g < 0:
            raise ValueError("coupling rate g must be nonnegative")
        if self.n_th < 0:
            raise ValueError("thermal occupancy must be nonnegative")

    @property
    def kappa(self) -> float:
        """Total cavity linewidth, rad/s."""
        return self.kappa_ext + self.kappa_0

    @property
    def eta_cavity(self) -> float:
        """Fraction of cavity loss through the external port."""
        return self.kappa_ext / self.kappa

    @property
    def cooperativity(self) -> float:
        return 4 * self.g**2 / (self.kappa * self.gamma_m)

    def with_delta(self, delta: float) -> "OmSystem":
        return replace(self, delta=delta)


@dataclass(frozen=True)
class SqueezedDrive:
    """Gaussian drive state: squeezing r and phase theta applied to an
    effective thermal state of occupancy n_l.

    The squeezing operation is entropy-preserving: the product of the
    minor and major noise-ellipse axes is (1 + 2 n_l)^2 / 16 for any r.
    r = 0, n_l = 0 is exactly a coherent drive.
    """

    r: float
    n_l: float
    theta: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("squeezing parameter r must be nonnegative")
        if self.n_l < 0:
            raise ValueError("light impurity n_l must be nonnegative")
        if not (-math.pi < self.theta <= math.pi):
            raise ValueError("squeezing phase must lie in (-pi, pi]")

    @classmethod
    def coherent(cls) -> "SqueezedDrive":
        return cls(r=0.0, n_l=0.0, theta=0.0)

    @classmethod
    def from_loss(cls, r_in: float, eta_in: float, theta: float = 0.0) -> "SqueezedDrive":
        """Build the (r, n_l) description of a pure squeezed state of
        parameter ``r_in`` sent through a beamsplitter of transmittance
        ``eta_in`` (loss to vacuum)."""
        r, n_l = drive_from_loss(r_in, eta_in)
        return cls(r=r, n_l=n_l, theta=theta)


@dataclass(frozen=True)
class ScatterRates:
    """Stokes/anti-Stokes scattering rates for one operating point, rad/s."""

    gamma_plus: float
    gamma_minus: float
    gamma_opt: float
    gamma_tot: float


def _rates(kappa: float, omega: float, delta: float, g: float) -> tuple[float, float]:
    gp = 4 * g**2 * kappa / (kappa**2 + 4 * (omega + delta) ** 2)
    gm = 4 * g**2 * kappa / (kappa**2 + 4 * (omega - delta) ** 2)
    return gp, gm


def _spring_bracket(kappa: float, omega: float, delta: float) -> float:
    return (delta - omega) / (kappa**2 / 4 + (delta - omega) ** 2) + (
        delta + omega
    ) / (kappa**2 / 4 + (delta + omega) ** 2)


def optical_spring(sys: OmSystem, spring: bool = True) -> float:
    """Spring-shifted mechanical frequency Omega_tot, rad/s.

    The shift depends on Omega_tot itself, so it is resolved by a damped
    fixed-point iteration (relative tolerance 1e-10).  With ``spring=False``
    the bare frequency is returned.
    """
    if not spring or sys.g == 0.0:
        return sys.omega_m
    om = sys.omega_m
    for _ in range(_SPRING_MAXITER):
        target = sys.omega_m + sys.g**2 * _spring_bracket(sys.kappa, om, sys.delta)
        new = 0.5 * (om + target)
        if new <= 0:
            raise NoConvergence("optical spring drives Omega_tot nonpositive")
        if abs(new - om) <= _SPRING_RTOL * abs(new):
            return new
        om = new
    raise NoConvergence("optical spring fixed point did not converge")


def effective_omega(sys: OmSystem, spring: bool) -> float:
    """Mechanical frequency entering the closed forms (shifted when asked)."""
    return optical_spring(sys, spring=spring)


def scattering_rates(sys: OmSystem, spring: bool = False) -> ScatterRates:
    """Stokes (Gamma_-) and anti-Stokes (Gamma_+) scattering rates.

    Gamma_pm = 4 g^2 kappa / (kappa^2 + 4 (Omega +- Delta)^2), valid in the
    weak coupling limit.  gamma_opt = Gamma_+ - Gamma_-; gamma_tot adds the
    intrinsic mechanical linewidth.
    """
    om = effective_omega(sys, spring)
    gp, gm = _rates(sys.kappa, om, sys.delta, sys.g)
    return ScatterRates(
        gamma_plus=gp,
        gamma_minus=gm,
        gamma_opt=gp - gm,
        gamma_tot=gp - gm + sys.gamma_m,
    )


def optimal_detuning(sys: OmSystem, spring: bool = False) -> float:
    """Detuning minimizing the coherent-drive cooling limit:
    Delta_0 = -sqrt(kappa^2 + 4 Omega^2) / 2.

    With the spring enabled, Delta_0 and Omega_tot are solved
    self-consistently (Omega_tot evaluated at the returned detuning).
    """
    om = sys.omega_m
    if not spring or sys.g == 0.0:
        return -0.5 * math.hypot(sys.kappa, 2 * om)
    d = -0.5 * math.hypot(sys.kappa, 2 * om)
    for _ in range(_SPRING_MAXITER):
        om_tot = optical_spring(sys.with_delta(d), spring=True)
        new = -0.5 * math.hypot(sys.kappa, 2 * om_tot)
        if abs(new - d) <= _SPRING_RTOL * abs(new):
            return new
        d = new
    raise NoConvergence("self-consistent optimal detuning did not converge")


def critical_squeezing(sys: OmSystem, spring: bool = False) -> float:
    """Minimum squeezing parameter at which the optical bath can reach zero
    temperature: r_c = asinh(kappa / 2 Omega) / 2."""
    om = effective_omega(sys, spring)
    return 0.5 * math.asinh(sys.kappa / (2 * om))


def bifurcated_detunings(sys: OmSystem, r: float, spring: bool = False) -> tuple[float, float]:
    """The pair of optimal detunings for r >= r_c, ordered high > low:

    Delta_0^pm = -Omega cosh(2r) +- sqrt(4 Omega^2 sinh^2(2r) - kappa^2) / 2

    Raises DiscriminantNegative for r < r_c (the pair does not exist).
    """
    om = effective_omega(sys, spring)
    disc = 4 * om**2 * math.sinh(2 * r) ** 2 - sys.kappa**2
    if disc < 0:
        raise DiscriminantNegative(
            f"r={r:.6g} is below the critical squeezing {critical_squeezing(sys, spring):.6g}"
        )
    root = 0.5 * math.sqrt(disc)
    center = -om * math.cosh(2 * r)
    return center + root, center - root


def optimal_phase(sys: OmSystem, spring: bool = False) -> float:
    """Squeezing phase minimizing the optical bath temperature:

    theta_0 = atan2(-4 Delta kappa, kappa^2 + 4 (Omega^2 - Delta^2))

    The two-argument arctangent resolves the branch when the denominator
    goes negative; the result lies in (-pi, pi].
    """
    om = effective_omega(sys, spring)
    return math.atan2(
        -4 * sys.delta * sys.kappa,
        sys.kappa**2 + 4 * (om**2 - sys.delta**2),
    )


def drive_from_loss(r_in: float, eta_in: float) -> tuple[float, float]:
    """Convert a lossy pure squeezed state to the entropy-preserving (r, n_l)
    description.

    A pure squeezed state of parameter r_in transmitted through a channel of
    transmittance eta_in (loss to vacuum) is the same Gaussian state as an
    ideal squeezer of parameter r acting on a thermal state of occupancy n_l:

        r   = log[((1 - eta + eta e^{2 r_in}) / (1 - eta + eta e^{-2 r_in}))^(1/4)]
        n_l = -1/2 + sqrt((1 - eta + eta e^{-2 r_in})(1 - eta + eta e^{2 r_in})) / 2
    """
    if r_in < 0:
        raise ValueError("r_in must be nonnegative")
    if not 0.0 <= eta_in <= 1.0:
        raise ValueError("eta_in must lie in [0, 1]")
    a = 1 - eta_in + eta_in * math.exp(2 * r_in)
    b = 1 - eta_in + eta_in * math.exp(-2 * r_in)
    r = 0.25 * math.log(a / b)
    n_l = 0.5 * (math.sqrt(a * b) - 1.0)
    return r, max(n_l, 0.0)


def quadrature_variance(drive: SqueezedDrive, theta: float | None = None) -> float:
    """Amplitude-quadrature variance of the drive state:

    <(dX)^2> = (1 + 2 n_l)(cosh 2r - cos(theta) sinh 2r) / 4

    Vacuum gives 1/4.  ``theta`` overrides the drive's own phase; theta = 0
    probes the squeezed quadrature and theta = pi the antisqueezed one.
    """
    th = drive.theta if theta is None else theta
    return (
        (1 + 2 * drive.n_l)
        * (math.cosh(2 * drive.r) - math.cos(th) * math.sinh(2 * drive.r))
        / 4.0
    )


def lossy_variance(r_in: float, eta_in: float, theta: float) -> float:
    """Amplitude-quadrature variance of a pure squeezed state (parameter
    r_in) after transmission eta_in, without re-parameterizing:

    <(dX)^2> = (1 - eta + eta (cosh 2 r_in - cos(theta) sinh 2 r_in)) / 4
    """
    return (
        1
        - eta_in
        + eta_in * (math.cosh(2 * r_in) - math.cos(theta) * math.sinh(2 * r_in))
    ) / 4.0


def squeezing_to_db(r: float) -> float:
    """Squeezed-quadrature noise relative to vacuum, in dB (negative = squeezed)."""
    return 10.0 * math.log10(math.exp(-2.0 * r))


def db_to_squeezing(db: float) -> float:
    """Inverse of squeezing_to_db."""
    return -db * math.log(10.0) / 20.0
