pub mod backend;
pub mod camera;
pub mod cli;
pub mod diffusion;
pub mod geometry;
pub mod imageio;
pub mod pipeline;
pub mod raster;
pub mod texstate;
