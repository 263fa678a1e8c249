//! Darboux, Christoffel and Calapso transformations of polarized curves and
//! semi-discrete isothermic surfaces in the light-cone model of the conformal
//! n-sphere.

pub mod cli;
pub mod clifford;
pub mod cmc;
pub mod bianchi;
pub mod curves;
pub mod darboux;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod minkowski;
pub mod numerics;
pub mod surface;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
