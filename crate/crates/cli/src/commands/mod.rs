pub mod convert;
pub mod eval;
pub mod sample;
pub mod sweep;
pub mod train;
pub mod validate;
