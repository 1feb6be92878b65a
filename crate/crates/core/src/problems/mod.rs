//! Benchmark problems: least squares over the spectrahedron and a strongly
//! convex box-constrained QP.

mod boxqp;
mod io;
mod lsq;

pub use boxqp::{make_boxqp, BoxQP};
pub use io::{load_instance, read_instance, save_instance, write_instance, FORMAT_VERSION, MAGIC};
pub use lsq::{
    default_density, generate_instance, planted_solution, starting_point, InstanceMeta,
    SparseMatrix, SpectrahedronLSQ, STREAM_A, STREAM_ANGLES, STREAM_POSITIONS,
};
