pub mod error;
pub mod refelem;
pub mod io;
pub mod locality;
pub mod mesh;
pub mod reorder;
pub mod sfc;
pub mod solver;
pub mod synth;
