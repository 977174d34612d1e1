//! Grid-valued score generators and the fixed-point search behind the
//! constant-factor guarantee.

mod grid;
mod phi;
mod search;

pub use grid::{build_grid, GridLaw, IrsgVector, ScoreGrid, MAX_GRID_VECTORS};
pub use phi::{
    construct_fhat, helper1_witness, phi_blocks, phi_residual, phi_rhs, price_marginal, BlockSlack,
    Helper1Witness,
};
pub use search::{
    find_fixed_point, instance_grid, proof_delta, search_from, verify_constant_bound,
    ConstantBound, FixedPointResult, SearchOptions,
};
