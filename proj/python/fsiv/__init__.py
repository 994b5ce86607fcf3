# Copyright 2025 The fsiv Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Factor shrinkage prior for Bayesian linear instrumental-variable regression."""

from fsiv._core import (
    EnrichedDesign,
    FrischDecomposition,
    FsivError,
    HorseshoeChain,
    IVPosterior,
    LoadingsBasis,
    collapse_coefficients,
    enrich,
    export_csv,
    generate,
    implied_prior_covariance,
    ingest_csv,
    run_chain,
    run_iv,
    sample_correlation,
    scaled_rmse,
    solve_min_trace,
    truncate_loadings,
)

__all__ = [
    "EnrichedDesign",
    "FrischDecomposition",
    "FsivError",
    "HorseshoeChain",
    "IVPosterior",
    "LoadingsBasis",
    "collapse_coefficients",
    "enrich",
    "export_csv",
    "generate",
    "implied_prior_covariance",
    "ingest_csv",
    "run_chain",
    "run_iv",
    "sample_correlation",
    "scaled_rmse",
    "solve_min_trace",
    "truncate_loadings",
]

__version__ = "0.1.0"
