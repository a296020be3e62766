pub mod analyze;
pub mod sample;
pub mod synth;
pub mod train;
