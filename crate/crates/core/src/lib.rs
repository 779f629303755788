//! Measurement-free 15-to-1 magic state distillation toolkit.

pub mod cfn;
pub mod circuit;
pub mod code;
pub mod experiments;
pub mod gf2;
pub mod pauli;
pub mod protocol;
pub mod sim;
pub mod verify;
