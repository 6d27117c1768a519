use thiserror::Error;

use crate::series::{DomainInfo, SeriesEval};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} is below the start index {start}")]
    IndexBelowStart { index: u64, start: u64 },

    #[error("the series diverges for every y (empty domain)")]
    EmptyDomain,

    #[error("y = {y} is outside the domain (alpha = {}, {:?})", .info.alpha, .info.boundary_class)]
    OutsideDomain { y: f64, p: u32, info: Box<DomainInfo> },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("tolerance {requested_tol:e} not reached within {max_terms} terms (best bound {:e})", .best.tail_bound)]
    BudgetExceeded {
        requested_tol: f64,
        max_terms: u64,
        best: Box<SeriesEval>,
    },

    #[error("term budget of {max_terms} exhausted in {what}; best gap {best_gap:e}")]
    WitnessBudget {
        what: &'static str,
        max_terms: u64,
        best_gap: f64,
    },

    #[error("numeric failure in {what}: {diagnostics}")]
    Numeric {
        what: &'static str,
        diagnostics: String,
    },

    #[error("cancelled")]
    Cancelled,
}

impl Error {
    pub(crate) fn numeric(what: &'static str, diagnostics: impl Into<String>) -> Self {
        Error::Numeric {
            what,
            diagnostics: diagnostics.into(),
        }
    }

    /// Short machine-readable name used in JSON error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::IndexBelowStart { .. } => "IndexBelowStart",
            Error::EmptyDomain => "EmptyDomain",
            Error::OutsideDomain { .. } => "OutsideDomain",
            Error::Infeasible(_) => "Infeasible",
            Error::Precondition(_) => "Precondition",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::WitnessBudget { .. } => "WitnessBudget",
            Error::Numeric { .. } => "Numeric",
            Error::Cancelled => "Cancelled",
        }
    }

    /// Domain and feasibility errors, as opposed to numeric failures.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::IndexBelowStart { .. }
                | Error::EmptyDomain
                | Error::OutsideDomain { .. }
                | Error::Infeasible(_)
                | Error::Precondition(_)
        )
    }
}
