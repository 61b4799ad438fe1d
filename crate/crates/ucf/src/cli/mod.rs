//! Front-end services: synthetic instances, benchmarking, performance
//! profiles and facet reports.

pub mod bench;
pub mod profile;
pub mod synthetic;
pub mod verify;

pub use bench::{bench_run, read_csv, redu_con, write_csv, BenchCase, BenchConfig, BenchError, BenchRecord};
pub use profile::{performance_profile, profile_csv, rho_at, ProfileError};
pub use synthetic::generate_synthetic;
pub use verify::{verify_unit_window, VerifyRequest};
