//! Quotient-complex persistent homology for periodic crystal structures.
//!
//! The pipeline runs from a [`CrystalStructure`] to a flat feature vector:
//!
//! 1. [`periodic`] converts cell parameters into a lattice basis, selects an
//!    element-specific atom set and extends the motif by its three basis
//!    translates, labelling lattice-equivalent points.
//! 2. [`filtration`] builds the bipartite Vietoris–Rips filtration over the
//!    extended motif and glues each equivalence class with an abstract apex
//!    vertex ("gluing star"), which is homotopy equivalent to the quotient.
//! 3. [`persistence`] reduces the boundary matrix over Z₂ into barcodes.
//! 4. [`descriptors`] summarises the barcodes and the cell geometry.
//!
//! [`oracle`] is a deliberately naive rank-based homology computation used as
//! an independent reference, and [`verify`] turns the inclusion theorems
//! relating plain and quotient barcodes into randomized checks.
//! [`regress`] holds the gradient-boosted regression trees and the
//! cross-validation harness used downstream of the features.
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is enabled.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod descriptors;
pub mod filtration;
mod math;
pub mod oracle;
pub mod periodic;
pub mod persistence;
pub mod regress;
pub mod structure;
pub mod verify;

pub use descriptors::{assemble_features, DescriptorConfig, FeatureVector};
pub use filtration::{Filtration, Partition, Simplex};
pub use periodic::{AtomSet, ExtendedMotif, LatticeBasis, Motif};
pub use persistence::{reduce, Barcode, BarcodeSet, Interval};
pub use structure::{Atom, CellParams, CrystalStructure};
