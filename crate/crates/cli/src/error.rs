use std::fmt;

/// Exit status for a configuration or validation problem.
pub const EXIT_CONFIG: u8 = 2;
/// Exit status for a numerical failure (quadrature, solver, ...).
pub const EXIT_NUMERICAL: u8 = 3;
/// Exit status for output I/O failures.
pub const EXIT_IO: u8 = 1;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(tempfrac::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use tempfrac::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(e) => match e {
                E::Domain(_) | E::Index { .. } | E::Length { .. } | E::SizeGuard(_) | E::InvalidProblem(_) | E::Json(_) => {
                    EXIT_CONFIG
                }
                E::Quadrature(_) | E::NoConvergence { .. } | E::Numerical(_) => EXIT_NUMERICAL,
                E::Io(_) => EXIT_IO,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<tempfrac::Error> for CliError {
    fn from(e: tempfrac::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::Core(tempfrac::Error::Domain("x".into())).exit_code(), 2);
        assert_eq!(CliError::Core(tempfrac::Error::SizeGuard("x".into())).exit_code(), 2);
        let nc = tempfrac::Error::NoConvergence { method: "cg", iterations: 3, residual: 1.0 };
        assert_eq!(CliError::Core(nc).exit_code(), 3);
        assert_eq!(CliError::Core(tempfrac::Error::Quadrature("x".into())).exit_code(), 3);
    }
}
