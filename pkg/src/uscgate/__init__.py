"""Simulator for qubit ensembles ultrastrongly coupled to one bosonic mode."""

from .dynamics import Trajectory, evolve_interaction_picture, interaction_hamiltonian, lab_frame_state
from .errors import (
    AccuracyError,
    ContractViolation,
    CutoffError,
    DimensionError,
    NumericalContractError,
    StepSizeError,
    UscGateError,
    UsageError,
)
from .observables import (
    GhzTarget,
    SphereGrid,
    entropy_closed_form,
    ghz_fidelity,
    ghz_target,
    husimi_q,
    negativity,
    purity,
)
from .operators import BosonSpec, EnsembleSpec, SystemLayout, coherent_state, initial_state
from .propagator import (
    CoefficientSet,
    FactoredPropagator,
    GateDesign,
    coefficients,
    coefficients_via_ode,
    disentangled_gate,
    displacement_check,
    factored_unitary,
    gate_design,
)

__version__ = "0.1.0"
