//! Exact computation of bivariate representation and conjugacy-class zeta
//! data of unipotent group schemes defined by nilpotent Lie lattices, by two
//! independent routes, together with the polyhedral convergence and
//! meromorphy domains of the associated bivariate Euler products.

pub mod cli;
pub mod denef;
pub mod domain;
pub mod lattice;
pub mod orbit;
pub mod quotient;
pub mod ring;
pub mod series;
