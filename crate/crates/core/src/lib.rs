//! Topology of directed dependence in multivariate time series.
//!
//! The pipeline fits a VAR model to a recording, turns it into a band-averaged
//! partial directed coherence (PDC) network, splits that network into its
//! symmetric and anti-symmetric parts and runs Vietoris-Rips persistent
//! homology on the departure-from-symmetry distance `|W_a|`.
//!
//! ```
//! use dirtda::{decomp, homology, pdc, simulate, var};
//!
//! let sys = simulate::system_two::<f64>();
//! let series = simulate::realize(&sys, 2_000, 1).unwrap();
//! let model = var::fit_var(&series, 3).unwrap();
//! let band = sys.analysis_band(series.sampling_rate_hz());
//! let net = pdc::pdc_band(&model, &band, series.sampling_rate_hz(), 16, series.labels()).unwrap();
//! let dist = decomp::asym_distance(&decomp::decompose(&net));
//! let diagram = homology::persistence(&homology::rips_filtration(&dist, 2).unwrap());
//! assert_eq!(diagram.dim_pairs(0).count(), 5);
//! ```
//!
//! Every numeric type is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod decomp;
pub mod error;
pub mod homology;
pub mod ingest;
pub mod linalg;
pub mod pdc;
pub mod scalar;
pub mod simulate;
pub mod summaries;
pub mod var;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix = linalg::Matrix<f64>;
pub type MultivariateSeries = ingest::MultivariateSeries<f64>;
pub type VarModel = var::VarModel<f64>;
pub type FrequencyBand = pdc::FrequencyBand<f64>;
pub type DirectedNetwork = pdc::DirectedNetwork<f64>;
pub type NetworkDecomposition = decomp::NetworkDecomposition<f64>;
pub type DistanceMatrix = decomp::DistanceMatrix<f64>;
pub type Filtration = homology::Filtration<f64>;
pub type PersistenceDiagram = homology::PersistenceDiagram<f64>;
pub type PersistencePair = homology::PersistencePair<f64>;
pub type PersistenceLandscape = summaries::PersistenceLandscape<f64>;
pub type LaggedSystem = simulate::LaggedSystem<f64>;

pub use summaries::LandscapeNorm;
pub use var::OrderCriterion;
