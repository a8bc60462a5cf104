pub mod aliasing;
pub mod identity;
pub mod montecarlo;
pub mod propagate;
pub mod solve;
pub mod sweep;
