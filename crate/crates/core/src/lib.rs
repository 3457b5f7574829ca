//! Topological features of transformer attention maps.
//!
//! Each attention head is read as a weighted graph on token positions. From it we derive
//!
//! * graph invariants of the thresholded graphs ([`topo`]): Betti numbers, edge counts,
//!   strongly connected components and simple cycles;
//! * statistics of the H0/H1 persistence barcodes of the reversed-weight filtration
//!   ([`persistence`]);
//! * distances to five canonical attention patterns ([`pattern`]).
//!
//! The concatenated features feed an L2-regularized logistic regression ([`detector`]) that
//! separates human-written from machine-generated text. [`io`] holds the on-disk formats,
//! [`pipeline`] the batch driver used by the command line tool.

pub mod config;
pub mod detector;
pub mod error;
pub mod features;
pub mod graph;
pub mod io;
pub mod matrix;
pub mod npy;
pub mod pattern;
pub mod persistence;
pub mod pipeline;
pub mod sample;
pub mod schema;
pub mod synth;
pub mod topo;
mod union_find;

pub use error::{Error, Result};
pub use matrix::{SquareMatrix, WeightsView};
pub use sample::{AttentionSample, Label, SampleMeta};
