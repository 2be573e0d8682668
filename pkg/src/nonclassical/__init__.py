"""Nonclassicality, quadrature QFI and metrological power of single-mode bosonic states."""
from . import analytic, checks, fock, io, measures, roof, sweeps
from ._backend import BACKEND
from .analytic import (
    CoherentSuperposition,
    PureClass,
    class_limit,
    class_of,
    closed_form,
    exact_moments,
    gram,
    overlap,
    table1,
)
from .errors import NonclassicalityError
from .fock import (
    DensityMatrix,
    Moments,
    PureFockState,
    auto_cutoff,
    displace,
    make_cat,
    make_coherent,
    make_fock,
    make_fock_superposition,
    make_squeezed_coherent,
    make_squeezed_vacuum,
    moments_mixed,
    moments_pure,
    photon_add,
)
from .measures import (
    MeasureReport,
    MziReport,
    measure_pure,
    measure_Q_pure,
    metrological_power,
    metrological_power_diagonal,
    mzi_qfi,
    ort_pure,
    qfi_quadrature,
    quadrature_variance,
)
from .roof import (
    DiagonalFockMixture,
    EnsembleDecomposition,
    RoofResult,
    closed_form_two_fock,
    decompose,
    diagonal_sum_rules,
    minimize,
    objective,
    phase_damped_squeezed_vacuum,
    photon_added_thermal,
    w_threshold,
)

__version__ = "0.1.0"
