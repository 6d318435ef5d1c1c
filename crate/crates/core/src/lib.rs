//! Travelling waves, dispersion derivatives and travelling corners for the
//! monochromatic and bichromatic Nagumo lattice differential equations.

pub mod banded;
pub mod bichromatic;
pub mod corner;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod lattice;
pub mod model;
pub mod operator;
pub mod wave;

pub use bichromatic::{bichromatic_equilibria, solve_bichromatic_wave, Connection, Equilibrium};
pub use error::{Error, Result};
pub use grid::{Grid, Profile};
pub use model::{Model, WaveParams};
pub use wave::{continue_in, solve_adjoint, solve_corrector, solve_wave, Branch, InitialGuess, SolverOptions, WaveSolution};
pub use dispersion::{
    angle_sweep, corner_angles, directional_dispersion, dispersion_report, hs1_scan, DirectionalDispersion,
    DispersionCurve, DispersionReport, Method,
};
pub use corner::{build_reduced, interface_shape, iterate_heteroclinic, predict_corner, CornerPrediction, ReducedModel, ThetaClosure};
pub use lattice::{init_corner, init_planar, measure_speed, step_rk4, track_interface, History, InterfaceTrack, LatticeState, Window};
