//! Hochschild cohomology of graded complete intersections over prime fields.

pub mod bar_hochschild;
pub mod bv;
pub mod cli;
pub mod fp_linalg;
pub mod graded_algebra;
pub mod koszul_tate;
pub mod moore_ss;
