//! Synthetic benchmark: reference shapes, sweep plans and the runner.

pub mod plan;
mod run;
pub mod shapes;

pub use plan::{derive_seed, BenchPlan, DataCell, FieldChoice, Method, RunCell};
pub use run::{run_benchmark, BenchResult, BenchRow, RowStatus};
pub use shapes::{sample_mesh, sample_shape, Shape};
