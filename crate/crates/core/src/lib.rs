//! Horseshoe interval maps and finite-stage estimates of mean Hausdorff
//! dimension and metric mean dimension.
//!
//! All geometry is exact: nodes, endpoints and node values are
//! arbitrary-precision rationals, and floating point only enters through
//! logarithms and Hausdorff sums.

pub mod cli;
pub mod cubes;
pub mod error;
pub mod estimators;
pub mod maps1d;
pub mod rational;
pub mod surgery;
pub mod symbolic;

pub use error::{Error, Result};
pub use maps1d::{
    make_odd_legs_map, make_phi_sr, make_quadratic_map, make_schedule_map, make_tent_g,
    HorseshoeBlock, PAMap, Schedule, ScheduleRule,
};
pub use rational::{format_rational, parse_rational, Rational};
