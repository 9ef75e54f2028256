//! Decompose the mutual information between a target time series and a set
//! of driver series into per-driver and per-interaction causal strengths,
//! with a quantified share for unmodeled processes.
//!
//! The pipeline:
//! 1. lag the drivers against the target into an aligned design matrix,
//! 2. Gaussian-rank transform every column,
//! 3. estimate one conditional mutual information per non-empty driver
//!    subset with k-nearest-neighbor statistics (2^N - 1 terms, evaluated
//!    in parallel),
//! 4. peel the subset table into pure mlinks and per-driver totals,
//! 5. normalize by the total certainty W(x|Y) = W(x) + I(x;Y), measured
//!    against a reported reference density (Cauchy, Gaussian or uniform).
//!
//! The normalized strengths plus the noise share sum to one exactly, so the
//! unmodeled-process share doubles as the missing-process diagnostic.
//! Simulators for the bundled benchmark systems and a CLI live alongside.

pub mod bench;
pub mod certainty;
pub mod decomposition;
pub mod diagnostics;
pub mod error;
pub mod estimators;
pub mod io;
pub mod knn;
pub mod model;
pub mod preprocess;
pub mod simulators;
pub mod web;

pub use certainty::{fit_reference, self_certainty, total_certainty, ReferenceDensity, ReferenceKind};
pub use decomposition::{
    causal_strengths, driver_totals, full_decomposition, pure_mlinks, raw_cmi_for_subset,
    DecompositionOptions, DecompositionResult, MlinkTable, SubsetKey, TransformedDesign,
};
pub use diagnostics::{confounder_scan, missing_process_test, MissingProcessReport};
pub use error::{Error, Result};
pub use estimators::{cmi_chain, cmi_ksg, entropy_kl, mi_ksg, CmiMode, EstimatorParams};
pub use model::{build_design, AnalysisSpec, Dataset, DesignMatrix, DriverSpec, ProcessSeries};
pub use preprocess::{add_noise, gauss_rank_transform, moving_average};
pub use simulators::{
    rk4_step, simulate_coupled_lorenz, simulate_lorenz63, simulate_model, LorenzParams,
    NoiseNotation,
};
pub use web::{build_web, export_web, CausalWeb, WebFormat};
