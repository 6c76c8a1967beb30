"""klsm: exact half-integral-weight Kloosterman sums and their analytic
companions (test-function transforms, Hecke/Shimura coefficient maps,
Rademacher partition series)."""

import os

# The deterministic reduction contract is exercised at 1/4/8 workers;
# make sure the numba pool can be sized up even on small machines.
# Must happen before numba is first imported.
os.environ.setdefault("NUMBA_NUM_THREADS", "8")

from . import arith, exactsum, hecke, kloosterman, multiplier, rademacher, special  # noqa: E402
from .exactsum import ExactExponentialSum, MultiplierValue  # noqa: E402
from .kloosterman import (  # noqa: E402
    KloostermanQuery,
    PartialSumSeries,
    classical_sum,
    eta_sum,
    partial_sum,
    smoothed_sum,
    twisted_sum,
    weil_ratio,
    windowed_sum,
)
from .multiplier import UnimodularMatrix, eta_chi, theta_nu  # noqa: E402
from .rademacher import dedekind_sum, partition_exact, partition_rademacher, rademacher_Ac  # noqa: E402
from .special import TestFunctionParams, transform_Phi, transform_check, transform_hat  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    "arith",
    "exactsum",
    "multiplier",
    "kloosterman",
    "special",
    "hecke",
    "rademacher",
    "ExactExponentialSum",
    "MultiplierValue",
    "UnimodularMatrix",
    "KloostermanQuery",
    "PartialSumSeries",
    "TestFunctionParams",
    "classical_sum",
    "eta_sum",
    "twisted_sum",
    "partial_sum",
    "windowed_sum",
    "smoothed_sum",
    "weil_ratio",
    "eta_chi",
    "theta_nu",
    "dedekind_sum",
    "rademacher_Ac",
    "partition_exact",
    "partition_rademacher",
    "transform_check",
    "transform_hat",
    "transform_Phi",
]
