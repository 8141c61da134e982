use alloc::string::String;

/// Failure modes shared by every kernel operation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Inputs are not compatible with each other (alphabets, contexts, dimensions, tilings).
    #[error("structural error: {0}")]
    Structural(String),
    /// A documented precondition on levels or intervals does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A value lies outside the domain of a map (e.g. log of a non-unit series).
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerically singular configuration was hit.
    #[error("degenerate input: {0}")]
    Degeneracy(String),
    /// A working level or combinatorial size exceeds the configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A numerical integration left the representable range.
    #[error("divergence: {0}")]
    Divergence(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
