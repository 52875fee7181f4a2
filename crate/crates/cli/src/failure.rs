//! Error classification and the one-line error report.

use std::process::ExitCode;

use pidforest::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Internal,
    Usage,
    Io,
    Schema,
    Data,
    Model,
}

impl Kind {
    pub fn exit_code(self) -> u8 {
        match self {
            Kind::Internal => 1,
            Kind::Usage => 2,
            Kind::Io => 3,
            Kind::Schema => 4,
            Kind::Data => 5,
            Kind::Model => 6,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Internal => "internal",
            Kind::Usage => "usage",
            Kind::Io => "io",
            Kind::Schema => "schema_mismatch",
            Kind::Data => "invalid_data",
            Kind::Model => "model_format",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    kind: Kind,
    message: String,
}

impl Failure {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into() }
    }

    /// Prefixes the message with what was being done, keeping the kind.
    pub fn context(mut self, what: impl std::fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }

    /// Reclassifies anything but an i/o failure as a model format error.
    pub fn into_model_error(self) -> Self {
        match self.kind {
            Kind::Io => self,
            _ => Self { kind: Kind::Model, ..self },
        }
    }

    pub fn report(&self) -> ExitCode {
        let message: String = self.message.split_whitespace().collect::<Vec<_>>().join(" ");
        eprintln!("error: code={} message={message}", self.kind.name());
        ExitCode::from(self.kind.exit_code())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            Error::Io(_) => Kind::Io,
            Error::Csv(c) if c.is_io_error() => Kind::Io,
            Error::SchemaMismatch(_) | Error::MissingColumn(_) => Kind::Schema,
            Error::UnsupportedVersion { .. } | Error::MalformedModel(_) => Kind::Model,
            Error::InvalidParameter(_) | Error::TooManyCells { .. } => Kind::Usage,
            _ => Kind::Data,
        };
        Failure::new(kind, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(Kind::Io, e.to_string())
    }
}
