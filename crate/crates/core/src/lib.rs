pub mod density;
pub mod fourier;
pub mod geometry;
pub mod intlinalg;
pub mod overlap;
pub mod system;
pub mod report;
pub mod cli;
