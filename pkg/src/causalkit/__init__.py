"""causalkit: author, execute, and analyze causal models of physical theories.

A model is a typed system state plus guarded transition laws. The package
provides a small modeling language (CML), a uniform-timestep interpreter
with seeded reproducible randomness, a branching (many-worlds) execution
mode, bounded consistency/completeness checking with witnesses, and
quantum/classical numeric kits with bundled example models.
"""

from .errors import (
    BadParamError,
    CausalKitError,
    CmlError,
    ContinuousRandomError,
    EvalError,
    MissingAttributeError,
    MissingFieldError,
    MultipleApplicableError,
    NoApplicableLawError,
    PositionOutOfBinsError,
    RandomError,
    SchemaError,
    SchemaMismatchError,
    SinkError,
    SolveError,
    TypeMismatchError,
    UnknownIntrinsicError,
    UnknownModelError,
    UnknownObservableError,
    UnsampleableFieldError,
    ZeroNormError,
)
from .rng import RngStream, derive_seed
from .pw import PwCollection, PwPath
from .state import (
    Domain,
    StateSchema,
    SystemState,
    TypeDesc,
    VBool,
    VCGrid,
    VComplex,
    VInt,
    VList,
    VPw,
    VReal,
    VRecord,
    VVector,
    Value,
    deep_equal,
    make_initial_state,
    sample_state,
    state_from_json,
    state_to_json,
)
from .frontend import (
    Diagnostic,
    compile_model,
    format_model,
    load_model,
    lower,
    parse,
    parse_expression,
    typecheck,
)
from .engine import (
    CausalModel,
    DeterminismVerdict,
    Law,
    NativeTransition,
    RandomSpec,
    RngSource,
    apply_law,
    build_initial_state,
    classify_determinism,
    eval_guard,
    sample_random,
    select_law,
    step,
)
from .interpreter import (
    RunConfig,
    Termination,
    Trace,
    WorldTree,
    branch_run,
    run,
    world_tree_to_json,
    write_trace,
)
from .analyzer import (
    AnalysisReport,
    CheckStrategy,
    analyze,
    check_completeness,
    check_consistency,
    report_to_json,
    validstate,
)
from .quantum import (
    CaParticle,
    CaWorld,
    GridWave,
    ca_step,
    classical_step,
    discrete_hamiltonian,
    gaussian_packet,
    pw_detect,
    pw_interact,
    pw_propagate,
    schrodinger_step,
)
from .bundled import build_bundled_model, list_bundled_models, two_slit_amplitudes

__version__ = "0.1.0"
