//! Constructions of LCK potentials: the periodic first-order equation, the Leeolo
//! deformation of a Vaisman metric, and averaging along the orbits of `JC`.

pub mod leeolo;
pub mod orbit;
pub mod periodic;

pub use periodic::{solve_periodic_first_order, PeriodicFunction, PotentialSolution, SolutionDiagnostics};
pub use leeolo::{build_leeolo, leeolo, leeolo_mean, Leeolo, LeeoloReport};
pub use orbit::{
    duhamel_g, orbit_average_potential, orbit_for_fixture, orbit_setup, FlowFamily, OrbitOptions, OrbitReport,
    OrbitResult, OrbitSetup,
};
