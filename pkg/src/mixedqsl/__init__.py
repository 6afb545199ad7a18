"""Quantum speed limits for mixed states under unitary evolution."""

from .bounds import (
    BoundReport,
    compare_bounds,
    gp_exact_distance,
    tau_frowis,
    tau_fs,
    tau_g,
    tau_mt,
    tau_p,
    tau_u,
    tau_wy,
)
from .dynamics import (
    HamiltonianSchedule,
    Trajectory,
    average_energy_uncertainty,
    curve_length,
    evolve,
    gp_distance_numeric,
    gp_geodesic_shoot,
    involution_hamiltonian,
    metric_speed,
    parallel_transport_projection,
)
from .errors import QSLError
from .geometry import (
    Projector,
    affinity,
    bures_angle,
    fidelity_sqrt,
    fs_distance_pure,
    grassmann_distance,
    grassmann_geodesic,
    make_projector,
    plucker_distance,
    principal_angles,
    product_grassmann_distance,
    wy_distance,
)
from .states import (
    DensityOperator,
    diagonal_state,
    j_functional,
    pure_state,
    quantum_fisher_information,
    skew_information,
    split_observable,
    uncertainty,
    validate_density,
    variance,
)
from .uhlmann import (
    amplitude_of,
    bures_geodesic_hamiltonian,
    connection_solve,
    dispersion_decomposition,
    horizontal_lift,
    uhlmann_tightness_check,
)

__version__ = "0.1.0"
