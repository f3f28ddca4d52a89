use std::fmt;

/// CLI failure, split by exit code: bad input is 1, failures while running are 2.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("invalid configuration {path}:\n{}", bullet_list(.problems))]
    Config { path: String, problems: Vec<String> },
    #[error("{0}")]
    Runtime(String),
}

fn bullet_list(items: &[String]) -> String {
    items.iter().map(|p| format!("  - {p}")).collect::<Vec<_>>().join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Config { .. } => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn validation(msg: impl fmt::Display) -> Self {
        CliError::Validation(msg.to_string())
    }

    pub fn runtime(msg: impl fmt::Display) -> Self {
        CliError::Runtime(msg.to_string())
    }
}

impl From<furnish_core::Error> for CliError {
    fn from(e: furnish_core::Error) -> Self {
        use furnish_core::Error as E;
        match e {
            E::Io { .. } | E::Bandwidth { .. } | E::Separation { .. } | E::External(_) => {
                CliError::Runtime(e.to_string())
            }
            _ => CliError::Validation(e.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
