"""Fixed-order output-feedback controller synthesis.

Minimizes the closed-loop spectral abscissa or H-infinity norm over
controllers of a prescribed order with randomized multi-start nonsmooth
BFGS.  Closed loops use positive feedback, ``u = K y``.
"""

from .analysis import (
    EigTriple,
    HinfResult,
    dc_gain,
    freqresp,
    hinf_norm,
    sigma,
    spectral_abscissa,
    step_response,
)
from .errors import (
    AlgebraicLoopError,
    ConfigError,
    DegenerateError,
    DimensionError,
    FixorderError,
    NonProperError,
    NumericalError,
    PlantFormatError,
    SingularFrequencyError,
    StabilizationFailure,
)
from .statespace import (
    S,
    RationalSiso,
    StateSpaceModel,
    ZpkForm,
    augw,
    close_loop,
    format_tf,
    format_zpk,
    minreal,
    mktito,
    rational_arith,
    sensitivity_maps,
    ss_to_tf,
    ss_to_zpk,
    static_gain,
    tf_to_ss,
)
from .synthesis import (
    ControllerParams,
    SynthesisOptions,
    SynthesisResult,
    bfgs_nonsmooth,
    objective_eval,
    refine,
    synthesize,
)

__version__ = "0.1.0"
