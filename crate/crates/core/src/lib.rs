//! Task generators, simulators and transcript metrics for grid-world spatial
//! reasoning benchmarks.
//!
//! Three task families are covered:
//!
//! * visual navigation ([`nav`]): k-hop maps with route-planning and
//!   next-step-prediction questions,
//! * visual tiling ([`tiling`]): masked 5×4 polyomino rectangles, enumerated by
//!   exact cover (dancing links) and cross-checked with a SAT enumerator,
//! * natural-language navigation ([`nlnav`]): 3×3 landmark maps described in
//!   snake order, plus a ring variant.
//!
//! [`harness`] builds prompts for each prompting setting and collects model
//! transcripts, [`sim`] and [`answer`] score final answers, and [`trace`]
//! measures visual state tracking inside the transcripts.

pub mod answer;
pub mod config;
pub mod dataset;
pub mod error;
pub mod grid;
pub mod harness;
pub mod nav;
pub mod nlnav;
pub mod report;
pub mod rng;
pub mod sim;
pub mod tiling;
pub mod trace;

pub use error::{Error, Result};
pub use grid::{Coord, Direction, GridMap, RenderPalette};
