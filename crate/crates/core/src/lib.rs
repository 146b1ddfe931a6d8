pub mod exactalg;
pub mod homlib;
pub mod posetsheaf;
pub mod grpfun;
pub mod kernels;
pub mod axioms;
pub mod cli;
