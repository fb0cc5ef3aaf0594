"""Geometric invariants and spectral asymptotics of 2x2 first-order
elliptic self-adjoint systems with trace-free momentum part on the flat
3-torus: metric, frame, orientation charge, spinor field, massless Dirac
action, axial torsion, and the eigenvalue-counting coefficients they encode.
"""

from .errors import (
    ChargeInconsistent,
    ConvergenceFailure,
    EllipticityError,
    LiftIllConditioned,
    MetricMismatch,
    NonpositiveWeight,
    OutsideTrustWindow,
    SpinStructureMismatch,
    SpinspecError,
    TruncationTooSmall,
    ValidationError,
    VanishingSpinor,
)
from .fields import PAULI_S, MatrixField, TrigPoly
from .symbols import (
    Frame,
    Metric,
    Operator1st,
    PrincipalSymbol,
    conjugate_operator,
    conjugation_subprincipal,
    coframe,
    ellipticity_check,
    frame_from_symbol,
    metric_from_symbol,
    operator_from_symbol,
    subprincipal,
    symbol_from_frame,
    topological_charge,
)
from .gauge import (
    SO3Field,
    SU2Field,
    SpinorField,
    charge_conjugate,
    conformal_transform,
    lift_between_symbols,
    relate_frames,
    rigid_rotation,
    same_spin_structure,
    so3_to_su2_lift,
    spinor_from_su2,
    su2_from_spinor,
    su2_reference_transform,
)
from .geometry import (
    PauliField,
    axial_torsion,
    christoffel,
    coeff_a,
    coeff_b_action,
    coeff_b_torsion,
    dirac_action,
    torsion_spinor_identity_residual,
    weyl_apply,
)
from .spectrum import (
    CountingTable,
    DiscreteSpectrum,
    Truncation,
    assemble,
    asymptotic_compare,
    counting_function,
    eigensolve,
    exact_example_counting,
    exact_example_spectrum,
    lattice_count,
    lattice_counts,
    weighted_reduce,
)
from .problem import ProblemSpec
from .pipeline import AnalysisResult, analyze_problem, count_problem, spectrum_problem

__version__ = "0.1.0"
