//! Simplicial mesh quality, protected Delaunay triangulations and
//! interpolation error bounds.

pub mod cli;
pub mod coxeter;
pub mod delaunay;
pub mod error;
pub mod fem;
pub mod functionals;
pub mod geom;
pub mod interp;
pub mod mesh;
pub mod predicates;
pub mod quality;
pub mod verify;

pub use error::{Error, Result};
