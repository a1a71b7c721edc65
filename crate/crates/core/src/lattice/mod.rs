//! The block-discretized space-time lattice, its slit variant, polymers and
//! clusters.
//!
//! Sites carry integer coordinates `(x1, x2)`; the physical time of row `x2`
//! is `δ·x2`. The slit over a block doubles the row `x2 = 0` into two layers
//! instead of using half-integer rows, so every index stays integral.

mod cluster;
mod geometry;
mod polymer;

pub use cluster::{enumerate_clusters, incompatibility_connected, Cluster};
pub use geometry::{build_box, Edge, EdgeClass, Layer, LatticeBox, Site};
pub use polymer::{compatible, enumerate_polymers, g_of_edge, is_polymer, Polymer, DEFAULT_POLYMER_CEILING};
