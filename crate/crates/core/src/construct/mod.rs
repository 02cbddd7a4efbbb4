//! Prescribed nesting trees realized by perturbing the checkerboard
//! eigenfunction `sin(pi x) sin(pi y)` with a monochromatic wave that fixes
//! how each crossing resolves.

mod fit;
mod pattern;
mod realize;

pub use fit::{fit_monochromatic, MonoWave, MonochromaticFit, CHECKERBOARD_WAVENUMBER};
pub use pattern::{engulf, grow_chain, join, pattern_for_tree, LatticeSignPattern};
pub use realize::{
    realization_grid, realize_and_verify, realize_and_verify_in, realize_with_sweep, Realization, SweepOutcome,
    EPSILON_SWEEP, REALIZE_MARGIN, REALIZE_SPACING,
};
