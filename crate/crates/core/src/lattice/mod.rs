//! Lattice points on `|x_1|^k + ... + |x_d|^k = λ` and the averages built
//! from them.

mod count;
mod enumerate;
mod grid;

pub use count::{
    count_representations, count_representations_capped, one_dimensional_counts,
    RepresentationTable, DEFAULT_TABLE_BYTES_CAP,
};
pub use enumerate::{
    enumerate_solutions, enumerate_solutions_capped, EnumerationMode, HalfTable, SolutionPoints,
    SolutionSet, DEFAULT_POINT_CAP,
};
pub use grid::{
    apply_average, empirical_lp_ratio, maximal_function, GridFile, GridFunction,
    DEFAULT_GRID_CELL_CAP,
};
