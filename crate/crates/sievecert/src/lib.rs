//! Verification engine for Buchstab-sieve integral bounds, exponent-region
//! inequalities and sifted-set combinatorics.

pub mod buchstab;
pub mod combinatorics;
pub mod decomposition;
pub mod enclosure;
pub mod exponents;
pub mod expr;
pub mod interval;
pub mod quadrature;
pub mod regions;
pub mod sieve_sets;
