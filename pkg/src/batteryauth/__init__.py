"""Battery authentication from electrochemical fingerprints.

Two pipelines share one feature/model/evaluation stack: differential
capacity analysis (dQ/dV curves from charge cycles) and impedance
spectroscopy (Nyquist channels from frequency sweeps). See the README
for the pipeline walkthrough and the CLI quickstart.
"""

__version__ = "0.1.0"

from .records import (  # noqa: F401
    CycleRecord,
    DatasetCatalog,
    EisSpectrum,
    SampleMeta,
    build_catalog,
    make_cycle,
    make_spectrum,
)
from .dca import DcaConfig, DcaSeries, process_cycle  # noqa: F401
from .eis import EisConfig, NyquistChannels, process_spectrum  # noqa: F401
from .features import (  # noqa: F401
    FeatureCatalog,
    FeatureMatrix,
    catalog_default,
    extract_features,
    matrix_from_cycles,
    matrix_from_spectra,
)
from .selection import SelectionMask, select_features  # noqa: F401
from .models import (  # noqa: F401
    ModelSpec,
    TrainedModel,
    grid_search,
    load_model,
    make_spec,
    predict,
    predict_scores,
    save_model,
    train,
)
from .evaluate import (  # noqa: F401
    EvalConfig,
    EvalReport,
    make_auth_scenario,
    metrics,
    run_authentication,
    run_identification,
    split_train_test,
    undersample,
)
from .explain import mdi_importance, permutation_importance  # noqa: F401
from .synth import (  # noqa: F401
    SyntheticCellSpec,
    demo_specs,
    gen_cycle,
    gen_dataset,
    gen_eis,
    gen_eis_dataset,
)
