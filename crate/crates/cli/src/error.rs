use std::fmt;

/// A failed run, mapped to the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Io(String),
    Config(String),
    Numerics(String),
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Numerics(_) => 3,
            Failure::Check(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Numerics(m) => write!(f, "numerical failure: {m}"),
            Failure::Check(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl From<ionwire::Error> for Failure {
    fn from(e: ionwire::Error) -> Self {
        match e {
            ionwire::Error::Domain(_) => Failure::Config(e.to_string()),
            ionwire::Error::Output(m) => Failure::Io(m),
            _ => Failure::Numerics(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}
