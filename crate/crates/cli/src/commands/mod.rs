pub mod density;
pub mod pde;
pub mod rate;
pub mod simulate;
pub mod validate;
