pub mod analyze;
pub mod bench;
pub mod denoise;
pub mod simulate;
