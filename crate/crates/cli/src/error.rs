use std::io;

use thiserror::Error;

/// Tool failures. Hypotheses that do not hold are results, not errors.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Validation(lvpatch::Error),

    #[error("integration failed: {0}")]
    Integration(lvpatch::Error),

    #[error("condition check failed: {0}")]
    Check(lvpatch::Error),

    #[error("plot error: {0}")]
    Plot(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub const EXIT_IO: u8 = 1;
    pub const EXIT_CONFIG: u8 = 3;
    pub const EXIT_VALIDATION: u8 = 4;
    pub const EXIT_INTEGRATION: u8 = 5;
    pub const EXIT_CHECK: u8 = 6;
    pub const EXIT_PLOT: u8 = 7;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => Self::EXIT_IO,
            CliError::Config(_) => Self::EXIT_CONFIG,
            CliError::Validation(_) => Self::EXIT_VALIDATION,
            CliError::Integration(_) => Self::EXIT_INTEGRATION,
            CliError::Check(_) => Self::EXIT_CHECK,
            CliError::Plot(_) => Self::EXIT_PLOT,
        }
    }

    /// Classifies a library error raised while running an experiment.
    pub fn from_run(err: lvpatch::Error) -> Self {
        use lvpatch::Error as E;
        match err {
            E::StepUnderflow { .. } => CliError::Integration(err),
            E::Validation(_) => CliError::Validation(err),
            E::DegenerateRegion { .. } => CliError::Check(err),
            E::InvalidArgument(_) | E::NonPositiveState { .. } | E::OutOfRange { .. } => {
                CliError::Config(err.to_string())
            }
        }
    }
}

impl From<lvpatch::Error> for CliError {
    fn from(err: lvpatch::Error) -> Self {
        CliError::from_run(err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        use lvpatch::Error as E;
        let code = |e| CliError::from_run(e).exit_code();
        assert_eq!(code(E::StepUnderflow { t: 0.0, h: 1e-11, h_min: 1e-10 }), 5);
        assert_eq!(code(E::DegenerateRegion { component: "x1", value: 0.0 }), 6);
        assert_eq!(code(E::Validation(Vec::new())), 4);
        assert_eq!(code(E::InvalidArgument("bad".into())), 3);
        assert_eq!(CliError::Plot("x".into()).exit_code(), 7);
        assert_eq!(CliError::Io(io::Error::other("x")).exit_code(), 1);
    }
}
