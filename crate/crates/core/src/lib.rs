pub mod bits;
pub mod bounds;
pub mod cli;
pub mod error;
pub mod numfmt;
pub mod packing;
pub mod pipeline;
pub mod plan;
pub mod prefixdb;
pub mod report;
pub mod synth;
pub mod tiler;
pub mod trie;

pub use bits::Bits;
pub use error::{Error, Result};
