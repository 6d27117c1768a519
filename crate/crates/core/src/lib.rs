//! Certified evaluation of exponential series `f(y) = Σ_n e^{σ_n y}`,
//! their Legendre–Fenchel conjugates, and the countable maximum-entropy
//! (Gibbs) problems they dualize.
//!
//! Module map:
//!
//! * [`sequences`]: exponent families `σ_n` and the box spectrum.
//! * [`series`]: certified sums, `φ = f'/f`, domain classification.
//! * [`conjugate`]: `exp*`, `f*`, `(ln f)*` and the box conjugate `h*`.
//! * [`entropy`]: Gibbs fits, plateau and alternating witnesses.
//! * [`oracle`]: brute-force and finite-difference cross-checks.
//! * [`scenarios`]: canned instances (domain table, box model).
//! * [`claims`]: the verification suite behind `gibbs-series verify`.

pub mod claims;
pub mod conjugate;
pub mod entropy;
pub mod error;
pub mod ext;
pub mod numeric;
pub mod oracle;
pub mod report;
pub mod scenarios;
pub mod sequences;
pub mod series;

pub use error::{Error, Result};
pub use ext::ExtReal;
pub use numeric::{Accuracy, Budget};
pub use report::VerificationReport;
pub use sequences::SigmaSequence;
