use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AutodiffError {
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },
    #[error("backward needs a scalar loss, got shape {0:?}")]
    NonScalarLoss(Vec<usize>),
    #[error("optimizer state does not match parameter {0}")]
    StateShapeMismatch(String),
    #[error("duplicate parameter name {0}")]
    DuplicateParameter(String),
}

pub(crate) fn mismatch(op: &'static str, detail: impl Into<String>) -> AutodiffError {
    AutodiffError::ShapeMismatch {
        op,
        detail: detail.into(),
    }
}
