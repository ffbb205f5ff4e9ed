//! Color-symmetric stigmergic image generation.
//!
//! Ant-nest motifs are grown by a grain-carrying agent simulation around
//! polar boundary curves, copied under finite dihedral symmetry groups and
//! recolored so that every group element permutes colors consistently.

pub mod cli;
pub mod colorwheel;
pub mod geom;
pub mod symgroup;

pub use geom::Point;
pub mod curves;
pub mod huemap;
pub mod raster;
pub mod stigmergy;
pub mod scene;
