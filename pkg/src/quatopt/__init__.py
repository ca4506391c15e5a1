"""quatopt: statevector toolkit for sequential single-qubit-gate optimizers.

A single-qubit gate is identified with a unit quaternion; the cost of a
parameterized circuit is then an exact quadratic form in any one gate's
quaternion. The package builds those quadratic-form matrices from a handful
of circuit evaluations, implements the optimizer family that minimizes them
(full SU(2) selection, axis selection, fixed-axis angle solving and the
discrete-axis variant), and measures the spectral radius of the centered
matrix as a trainability diagnostic, including numeric checks of its upper
and lower bounds under random circuits.
"""

from .circuits import (
    CircuitTemplate,
    Entangler,
    EvalCounter,
    GateSlot,
    LightCones,
    brickwork_light_cones,
    build_template,
    energy_with_replacement,
    light_cones,
)
from .gatealg import (
    AxisAngle,
    Quaternion,
    from_axis_angle,
    quaternion_for_axis,
    random_quaternion,
    to_matrix,
    varsigma,
    zxz_decompose,
    zxz_matrix,
)
from .models import (
    CostSpec,
    exact_ground_energy,
    infidelity_cost,
    local_z_observable,
    mixed_field_ising,
    observable_cost,
)
from .optimizers import (
    MethodConfig,
    Trajectory,
    adam_baseline,
    fqs_update,
    fraxis_update,
    initial_parameters,
    rotoselect_update,
    rotosolve_update,
    run_sequential,
)
from .randhaar import (
    WeingartenResult,
    haar_state,
    haar_unitary,
    make_rng,
    weingarten_check,
    weingarten_expectation,
)
from .simcore import (
    Observable,
    PauliString,
    StateVector,
    apply_gate,
    expectation,
    fidelity,
)
from .smatrix import (
    EigPair,
    build_fqs_matrix,
    build_fraxis_matrix,
    build_nft_matrix,
    centered,
    min_eigenpair,
    nft_contraction,
    spectral_radius,
)
from .bpstats import (
    BoundReport,
    MomentEstimate,
    epsilon,
    haar_block_second_moment,
    haar_sandwich_moment,
    second_moment_spectral_radius,
    theorem1_bound,
    theorem2_bound,
)

__version__ = "0.1.0"
