"""Conditional pulse nulling receivers for coherent-state codewords."""

__version__ = "0.1.0"

from .baselines import (
    ReceiverResult,
    coherent_overlap,
    dd_ml_error,
    gram_matrix,
    hd_ml_error,
    holevo_bound,
    srm_error,
)
from .detection import IDEAL, DetectionModel, click_probability, control_set, displaced_amplitude
from .ensembles import (
    Amplitude,
    Family,
    SignalEnsemble,
    SlotSymbol,
    hamming_7_4_codewords,
    make_coded,
    make_mppm,
    make_ppm,
)
from .linalg import NumericError, sqrt_psd, sym_eig
from .montecarlo import McConfig, McResult, simulate
from .strategy import (
    BeliefState,
    StrategyTree,
    belief_update,
    evaluate_strategy,
    exhaustive_search,
    export_strategy,
    import_strategy,
    map_decision,
    optimize,
)
