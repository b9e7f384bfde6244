//! Strong and weak simulation checking for one-counter nets.

pub mod approx;
pub mod belt;
pub mod coloring;
pub mod fixtures;
pub mod geometry;
pub mod net;
pub mod normal;
pub mod oracle;
pub mod product;
pub mod random;
pub mod slope;
pub mod strong;
pub mod threshold;
pub mod weak;
