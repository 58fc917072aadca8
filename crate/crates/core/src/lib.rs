pub mod channels;
pub mod cli;
pub mod correlators;
pub mod error;
pub mod finite_state;
pub mod io;
pub mod linalg;
pub mod mera_bounds;
pub mod parent_ham;
pub mod tensor_core;
pub mod thermo;
