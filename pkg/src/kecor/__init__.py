"""Batch active-learning selection by kernel coding-rate maximization.

The selector greedily grows a batch of unlabeled samples that maximizes
the log-det coding rate of their kernel Gram matrix plus a mean-entropy
regularizer.  Kernels over samples come in four kinds: plain dot
product, Laplace RBF, and two gradient kernels (full layerwise tangent
kernel and its last-layer restriction) computed through a small
fully connected proxy network.
"""

from .acquisition import (
    STRATEGIES,
    AcquisitionConfig,
    PoolState,
    SelectionResult,
    mean_entropy,
    select_coreset,
    select_entropy,
    select_kecor,
    select_random,
)
from .coding_rate import (
    CodingRateParams,
    coding_rate_features,
    kernel_coding_rate,
    marginal_gain,
)
from .config import DEFAULTS, PROFILES, load_config, resolve_config
from .estimators import (
    CoresetSelector,
    EntropySelector,
    KernelCodingRateSelector,
    ProxyRegressor,
    RandomSelector,
)
from .errors import (
    BadCrc,
    BadMagic,
    ConfigInvalid,
    DimensionMismatch,
    InsufficientPool,
    KecorError,
    NonFiniteLoss,
    NotPositiveDefinite,
    SnapshotMismatch,
    TensorFileError,
    UnsupportedDtype,
    UnsupportedVersion,
)
from .kernels import (
    KERNEL_KINDS,
    GramMatrix,
    KernelSpec,
    canonical_kind,
    gram,
    kernel_last,
    kernel_linear,
    kernel_ntk,
    kernel_rbf,
)
from .proxy import (
    LayerTrace,
    ProxyLayer,
    ProxyNetwork,
    forward,
    init_proxy,
    param_jacobian,
    predict,
    train_mse,
)
from .simulate import (
    LoopConfig,
    RoundReport,
    SyntheticTask,
    make_task,
    report_csv,
    run_loop,
    write_report,
)
from .tensorfile import (
    load_checkpoint,
    read_all_tensors,
    read_tensor,
    save_checkpoint,
    write_tensor,
)

__version__ = "0.1.0"

__all__ = [
    "STRATEGIES",
    "AcquisitionConfig",
    "PoolState",
    "SelectionResult",
    "mean_entropy",
    "select_coreset",
    "select_entropy",
    "select_kecor",
    "select_random",
    "CodingRateParams",
    "coding_rate_features",
    "kernel_coding_rate",
    "marginal_gain",
    "DEFAULTS",
    "PROFILES",
    "load_config",
    "resolve_config",
    "CoresetSelector",
    "EntropySelector",
    "KernelCodingRateSelector",
    "ProxyRegressor",
    "RandomSelector",
    "BadCrc",
    "BadMagic",
    "ConfigInvalid",
    "DimensionMismatch",
    "InsufficientPool",
    "KecorError",
    "NonFiniteLoss",
    "NotPositiveDefinite",
    "SnapshotMismatch",
    "TensorFileError",
    "UnsupportedDtype",
    "UnsupportedVersion",
    "KERNEL_KINDS",
    "GramMatrix",
    "KernelSpec",
    "canonical_kind",
    "gram",
    "kernel_last",
    "kernel_linear",
    "kernel_ntk",
    "kernel_rbf",
    "LayerTrace",
    "ProxyLayer",
    "ProxyNetwork",
    "forward",
    "init_proxy",
    "param_jacobian",
    "predict",
    "train_mse",
    "LoopConfig",
    "RoundReport",
    "SyntheticTask",
    "make_task",
    "report_csv",
    "run_loop",
    "write_report",
    "load_checkpoint",
    "read_all_tensors",
    "read_tensor",
    "save_checkpoint",
    "write_tensor",
    "__version__",
]
