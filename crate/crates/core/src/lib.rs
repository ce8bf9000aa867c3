//! Grounding narrative events to an eventuality knowledge graph.
//!
//! The crate is organised along the pipeline:
//!
//! - [`kg`]: the immutable eventuality graph and its binary snapshot
//! - [`event`]: semantic-role frames, person normalization and abstraction ladders
//! - [`matcher`]: embedding nearest-neighbor grounding with a distance threshold
//! - [`retriever`]: hop-bounded shortest paths and joint subgraph assembly
//! - [`serializer`]: DOT / node / node-and-edge text renderings and prompts
//! - [`rgcn`]: relational graph convolution forward pass and choice scoring
//! - [`pipeline`]: glue that chains the stages over whole documents

pub mod error;
pub mod event;
pub mod kg;
pub mod matcher;
pub mod pipeline;
pub mod retriever;
pub mod rgcn;
pub mod serializer;

pub use error::{Error, Result};
