"""Spectral certification toolkit for finite lattice boxes.

Analytic eigenbases of box adjacency matrices under zero-boundary and
wraparound conditions, quantum variance and time-averaged observables,
the eigenfunction embedding between the two boundary conditions, truncated
periodic Schrödinger operators, eigenfunction correlators, and a
reproducible experiment driver.
"""

from .lattice import (
    BoxMismatchError,
    LatticeBox,
    Observable,
    ShiftSet,
    UnsupportedPeriodError,
    Wavefunction,
    averages,
    cube,
    shift_set,
    translate,
)
from .spectra import (
    SpectralData,
    adjacency_matrix,
    apply_adjacency,
    bloch_basis,
    degeneracy_classes,
    dirichlet_eigenpair,
    lemma_c1_count,
    lemma_c1_counts,
    periodic_eigenpair,
    sine_basis,
)
from .time_average import (
    bessel_bound_check,
    centered,
    hs_norm,
    numeric_time_average,
    quantum_variance,
    theta_decompose,
    time_averaged_observable,
)
from .correspondence import embed, extend_observable, reflect, verify_correspondence
from .schrodinger import (
    PeriodicPotential,
    build_operator,
    counterexample_mass_profile,
    eigensolve_symmetric,
    partial_qe_experiment,
)
from .correlators import averaged_kernel, chebyshev_operator, correlator, spherical

__version__ = "0.1.0"
