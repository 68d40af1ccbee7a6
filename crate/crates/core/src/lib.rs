pub mod tree;
pub mod algebra;
pub mod growth;
pub mod linalg;
pub mod problems;
pub mod schemes;
pub mod solvers;
pub mod harness;
pub mod verify;
