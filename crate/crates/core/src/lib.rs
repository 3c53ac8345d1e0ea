//! Feature-weighted forecast combination.
//!
//! A pool of fourteen statistical forecasters is combined per series by a
//! small neural network. The network reads 42 statistical features, a
//! 32-dimensional LSTM-autoencoder embedding and two metadata codes, and
//! emits simplex weights over the pool. The crate also contains an
//! ex-post linear-programming oracle that bounds what any weighting could
//! achieve, and an analysis toolkit (permutation importance, Ward
//! clustering, OWA breakdowns).

pub mod analysis;
pub mod autoencoder;
pub mod corpus;
pub mod decompose;
mod error;
pub mod metrics;
pub mod model_pool;
pub mod neural;
pub mod oracle;
pub mod stat_features;
pub mod stats;
pub mod synthetic;
pub mod weight_net;

pub use corpus::{Period, PeriodName, SeriesType, SplitSeries, TimeSeries};
pub use error::{Error, Result};
pub use model_pool::{ForecastMatrix, ModelId, N_MODELS};
