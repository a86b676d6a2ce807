"""Finite-temperature open-system dynamics via thermofield chain mapping.

The package maps a thermal bosonic or fermionic reservoir onto two
zero-temperature chains (thermofield doubling + orthogonal-polynomial
chain mapping), evolves the resulting one-dimensional lattice with
MPS/TEBD, and ships independent cross-checks: closed-form pure-dephasing
dynamics, exact diagonalization of small discrete environments, and a
second-order time-convolutionless master equation.
"""

__version__ = "0.1.0"

from .spectral import (  # noqa: F401
    BOSONIC,
    FERMIONIC,
    SpectralDensity,
    ThermalParameters,
    ThermofieldDensities,
    dispersion,
    occupation,
    thermofield_couplings,
    thermofield_densities,
)
from .chainmap import (  # noqa: F401
    ChainCoefficients,
    DiscretizedMeasure,
    discretize,
    orthogonality_residual,
    recurrence_coefficients,
    tridiagonalize_discrete,
)
from .lattice import (  # noqa: F401
    LatticeModel,
    SystemSpec,
    build_anderson,
    build_spin_boson,
)
from .tensornet import (  # noqa: F401
    EvolutionConfig,
    MatrixProductState,
    tebd_evolve,
    vacuum_state,
)
from .reference import (  # noqa: F401
    DephasingSolution,
    bath_correlation,
    dephasing_observables,
    dephasing_phi,
    dephasing_series,
    exact_diagonalization,
    thermal_occupation_check,
)
from .mastereq import (  # noqa: F401
    DensityMatrix,
    KernelTable,
    anderson_me,
    compute_kernels,
    integrate_me,
)
from .series import (  # noqa: F401
    TimeSeries,
    compare_series,
    read_csv,
    write_csv,
)
