// `!(x < y)` is used on purpose wherever NaN must be rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::manual_is_multiple_of)]

pub mod exact;
pub mod par;
pub mod quad;
pub mod special;
pub mod sum;
pub mod error;
pub mod lattice;
pub mod geometry;
pub mod polynomials;
pub mod isometries;
pub mod theta;
pub mod unfolding;
pub mod injectivity;
