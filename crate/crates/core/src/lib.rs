//! Statistics in the space of phylogenetic trees.
//!
//! Trees on a fixed leaf set form a CAT(0) metric space in which each
//! topology is an orthant of internal edge lengths. This crate computes
//! geodesics and distances in that space, weighted Fréchet means, the surface
//! traced by the weighted mean of a small vertex set as the weights range over
//! a simplex, projections of data onto that surface, and stochastic fits of
//! such surfaces to data (a principal-component analogue). A simulation
//! module generates coalescent trees and synthetic data sets with known truth.

pub mod error;
pub mod fmt;
pub mod frechet;
pub mod geodesic;
pub mod locus;
pub mod newick;
pub mod par;
pub mod pca;
pub mod plot;
pub mod rng;
pub mod simulate;
pub mod split;
pub mod tree;

pub use error::{Error, Result};
pub use geodesic::{distance, Geodesic, GeodesicSupport};
pub use newick::{parse_newick, write_newick};
pub use par::Execution;
pub use split::{compatible, LeafSet, Split};
pub use tree::{PendantMode, PhyloTree, TopologyId};
