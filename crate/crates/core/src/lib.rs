//! Tag-annotated paraphrase data, a diversity-aware training loss, and
//! paraphrase evaluation.
//!
//! Start with the `examples/` directory; each file exercises one capability.

pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod losskernel;
pub mod markup;
pub mod pipeline;
pub mod synthetic;
pub mod taggers;
pub mod textcore;

pub use config::PipelineConfig;
pub use error::{Error, Result};
