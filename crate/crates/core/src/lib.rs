//! End-proximity statistics of RNA secondary structures: exact finite-size
//! distributions, limit laws, samplers and a stats pipeline.

pub mod error;
pub mod exact;
pub mod limits;
pub mod pipeline;
pub mod sample;
pub mod shuffle;
pub mod stats;
pub mod structure;

pub use error::{Error, Result};
pub use exact::pfold::PfoldParams;
pub use exact::table::exact_counts;
pub use exact::{AnyTable, CountTable, Model, Stat};
pub use limits::{limit_of, pmf_expand, LimitDist, MomentSummary};
pub use pipeline::{StatsRow, SummaryBlock};
pub use sample::RngHandle;
pub use shuffle::{klet_shuffle, validate_klets};
pub use stats::{EteModel, ExteriorStats};
pub use structure::SecondaryStructure;
