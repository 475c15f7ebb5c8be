use thiserror::Error;

/// Pipeline failure, classified by process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable input, bad schema, malformed rows, bad arguments.
    #[error("input: {0}")]
    Input(String),
    /// A fit or diagnostic that the command needs could not be produced.
    #[error("fit: {0}")]
    Fit(String),
    /// Internal consistency check failed.
    #[error("invariant: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Fit(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<tailscope::Error> for CliError {
    fn from(e: tailscope::Error) -> Self {
        use tailscope::Error as E;
        let msg = e.to_string();
        match e {
            E::MalformedRecord { .. }
            | E::Overflow { .. }
            | E::Schema { .. }
            | E::Row { .. }
            | E::Csv(_)
            | E::InvalidSpec(_) => CliError::Input(format!("ingest: {msg}")),
            E::Domain(_) | E::InsufficientData(_) => CliError::Fit(format!("distfit: {msg}")),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(format!("io: {e}"))
    }
}
