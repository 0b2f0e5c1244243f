use std::fmt;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// A check ran and failed.
    Check = 1,
    /// Bad input files, flags or configuration.
    Input = 2,
    /// Rendering, I/O or remote failure while producing outputs.
    Runtime = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Input,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Runtime,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        Self {
            kind: ExitKind::Check,
            message: message.into(),
        }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches a context prefix and an exit class to library errors.
pub trait Context<T> {
    fn input_err(self, context: impl fmt::Display) -> CliResult<T>;
    fn runtime_err(self, context: impl fmt::Display) -> CliResult<T>;
}

fn prefixed(context: impl fmt::Display, e: impl fmt::Display) -> String {
    let context = context.to_string();
    if context.is_empty() {
        e.to_string()
    } else {
        format!("{context}: {e}")
    }
}

impl<T, E: fmt::Display> Context<T> for Result<T, E> {
    fn input_err(self, context: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::input(prefixed(context, e)))
    }

    fn runtime_err(self, context: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| CliError::runtime(prefixed(context, e)))
    }
}
