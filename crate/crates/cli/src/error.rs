use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] seqdec::Error),
    #[error("output error: {0}")]
    Output(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 configuration, 3 budget, 4 invariant violation, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        use seqdec::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) => match e {
                E::BudgetExceeded { .. } | E::DimensionOverflow { .. } => 3,
                E::InvariantViolation(_) | E::NotPsd { .. } | E::NonHermitian { .. } | E::NotProjector { .. } => 4,
                E::InvalidEnsemble(_)
                | E::InvalidChannel(_)
                | E::InvalidCodebook(_)
                | E::InvalidArgument(_)
                | E::UnknownPreset(_)
                | E::BadTrace { .. }
                | E::Format(_)
                | E::ExactModeRequired => 2,
                _ => 1,
            },
            CliError::Output(_) | CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }

    /// Extra hint printed after budget failures.
    pub fn guidance(&self) -> Option<&'static str> {
        match self {
            CliError::Core(seqdec::Error::BudgetExceeded { .. }) => Some(
                "reduce n or N, switch to --mc, or raise the matching budget (--enumeration-budget, --exact-budget, --phi-budget)",
            ),
            CliError::Core(seqdec::Error::DimensionOverflow { .. }) => Some("reduce n or raise --max-dim"),
            _ => None,
        }
    }
}
