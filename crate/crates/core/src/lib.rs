pub mod numeric;
pub mod ratefun;
pub mod density;
pub mod operators;
pub mod verify;
pub mod cli;
