pub mod analysis;
pub mod artifacts;
pub mod sessions;
