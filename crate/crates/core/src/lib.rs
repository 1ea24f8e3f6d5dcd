pub mod charfun;
pub mod cli;
pub mod linalg;
pub mod models;
pub mod monotone;
pub mod ratfun;
pub mod semigroup;
pub mod spectra;
pub mod verify;
