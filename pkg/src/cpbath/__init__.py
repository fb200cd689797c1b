"""Classical Hamiltonian dynamics on CP^{N-1} coupled to a harmonic bath."""
from .bath import (
    BathState,
    ExplicitBathSpec,
    FullTrajectory,
    Oscillators,
    damping_kernel,
    discretize_ohmic_bath,
    integrate_full,
    markovian_equivalent_bath,
    noise,
    shifted_equilibrium,
)
from .config import ScenarioConfig, load_bundled, load_config, parse_config, serialize_config
from .dynamics import (
    IntegratorConfig,
    MarkovianBathSpec,
    Trajectory,
    dissipative_velocity,
    integrate,
    isolated_velocity,
)
from .errors import (
    CPBathError,
    ConfigParse,
    DimensionMismatch,
    EmptySweep,
    InvalidSpec,
    PivotTooSmall,
    SingularDamping,
    StepSizeUnderflow,
    TooFewSamples,
)
from .geometry import (
    ProjectiveState,
    apply_inverse_symplectic,
    from_projective,
    kahler_potential,
    normalization_factor,
    rechart,
    to_projective,
)
from .hamiltonians import (
    CM1_TO_RAD_PER_PS,
    HermitianOperator,
    TwoQubitCoefficients,
    classical_hamiltonian,
    fmo_hamiltonian,
    grad_classical_hamiltonian,
    load_matrix,
    two_qubit_hamiltonian,
)
from .kernels import BACKEND
from .observables import ObservableSeries, concurrence, observe, populations, quaternionic_z, time_average
from .oracle import integrate_schrodinger, populations_from_amplitudes
from .scenario import emit_plot_script, run_scenario, sweep

__version__ = "0.1.0"
