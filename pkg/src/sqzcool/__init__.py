"""Sideband cooling of a cavity optomechanical system driven by squeezed
light: closed-form cooling limits, frequency-domain Langevin spectra, and
sideband thermometry inversion."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DiscriminantNegative,
    IllConditioned,
    NoConvergence,
    NonConvergent,
    NoSolution,
    NotCooling,
    NotLorentzian,
    SqzCoolError,
    Unstable,
)
from .model import (
    OmSystem,
    ScatterRates,
    SqueezedDrive,
    bifurcated_detunings,
    critical_squeezing,
    db_to_squeezing,
    drive_from_loss,
    lossy_variance,
    optical_spring,
    optimal_detuning,
    optimal_phase,
    quadrature_variance,
    scattering_rates,
    squeezing_to_db,
)
from .cooling import (
    BathOccupancy,
    CoolMap,
    LossyCavityOccupancy,
    bath_occupancy,
    bath_occupancy_lossy_cavity,
    bath_occupancy_pure,
    cool_map,
    equilibrium_occupancy,
    ponderomotive_squeezing,
    sideband_limit,
    strong_coupling_estimate,
)
from .spectra import (
    BathSpec,
    FreqGrid,
    Spectrum,
    assert_stable,
    bath_from_drive,
    detected_spectrum,
    detection_efficiency,
    mechanical_spectrum,
    output_spectrum,
    phonon_occupancy_numeric,
    sideband_heights,
    solve_response,
)
from .thermometry import (
    SidebandFit,
    ThermometryResult,
    effective_occupancies,
    fit_sideband,
    fit_sideband_xy,
    heating_bath_occupancy,
    retrieve_state,
)

__all__ = [name for name in dir() if not name.startswith("_")]
