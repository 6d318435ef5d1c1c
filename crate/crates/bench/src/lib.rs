//! Shared fixtures for the benchmarks.

use nagumo_core::{solve_wave, Grid, InitialGuess, SolverOptions, WaveParams, WaveSolution};

/// Planar wave at `rho`, `zeta` on the default grid.
pub fn planar_wave(rho: f64, zeta: f64) -> WaveSolution {
    let grid = Grid::new(20.0, 0.05).expect("default grid");
    solve_wave(&WaveParams::monochromatic(rho, zeta), &InitialGuess::monochromatic(grid), &SolverOptions::default())
        .expect("benchmark wave converges")
}
