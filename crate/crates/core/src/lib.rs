//! Cross-sectional intrinsic entropy (CSIE) of a whole market, classical OHLC
//! volatility estimators for index series, and the tooling to compare them.

pub mod analytics;
pub mod clustering;
pub mod cross_section;
pub mod error;
pub mod estimators;
pub mod intrinsic_entropy;
pub mod market_data;
pub mod numeric;
pub mod report;
pub mod svg;
pub mod synthetic;

pub use cross_section::{csie_day, csie_series, csie_weight_f, CsieDay, DEFAULT_ALPHA};
pub use error::{Error, Result};
pub use estimators::{yz_k, EntropySign, Estimator, OhlcWindow, VolEstimate};
pub use market_data::{DailyBar, IndexBar, IndexSeries, MarketDay};
