pub mod bootstrap;
pub mod eval;
pub mod fit;
pub mod simulate;
