//! Power-law regression, censored MLE of light-tailed families, model
//! comparison by AIC, and an empirical heavy-tail diagnostic.

pub mod censored;
pub mod compare;
pub mod nelder_mead;
pub mod powerlaw;
pub mod tail;

pub use censored::{fit_censored, CensoredBins, CensoredFitResult, Family, Interval};
pub use compare::{compare_models, ModelKind, ModelScore};
pub use powerlaw::{fit_power_law, PowerLawFit};
pub use tail::{heavy_tail_diagnostic, TailDiagnostic, Verdict};
