//! Configuration, orchestration and file output behind the `nagumo` binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, Command, ConfigError, ExperimentConfig, RawConfig};
pub use run::run;

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CONVERGENCE: i32 = 3;
pub const EXIT_PINNING: i32 = 4;
pub const EXIT_TRACKING: i32 = 5;

/// Exit status for an error chain: the first recognised cause decides.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    use nagumo_core::Error as E;
    for cause in err.chain() {
        if cause.downcast_ref::<ConfigError>().is_some() {
            return EXIT_CONFIG;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Config(_) | E::Domain(_) | E::Window(_) => EXIT_CONFIG,
                E::Pinned { .. } => EXIT_PINNING,
                E::Tracking(_) | E::Divergence { .. } => EXIT_TRACKING,
                E::NonConvergence { .. }
                | E::DegenerateKernel { .. }
                | E::Singular(_)
                | E::GridMismatch
                | E::Hypothesis(_)
                | E::NoCorner(_)
                | E::StepSize { .. } => EXIT_CONVERGENCE,
            };
        }
    }
    EXIT_OTHER
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_categories() {
        let code = |e: nagumo_core::Error| exit_code(&anyhow::Error::new(e));
        assert_eq!(code(nagumo_core::Error::Domain("rho".into())), 2);
        assert_eq!(code(nagumo_core::Error::NonConvergence { iterations: 1, residual: 1.0 }), 3);
        assert_eq!(code(nagumo_core::Error::Pinned { speed: 0.0 }), 4);
        assert_eq!(code(nagumo_core::Error::Tracking("x".into())), 5);
        assert_eq!(exit_code(&anyhow::Error::new(ConfigError("bad".into()))), 2);
        let wrapped = anyhow::Error::new(nagumo_core::Error::Pinned { speed: 0.0 }).context("sweep");
        assert_eq!(exit_code(&wrapped), 4);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), 1);
    }
}
