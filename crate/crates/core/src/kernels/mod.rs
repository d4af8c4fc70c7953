//! Fundamental kernel and correlations, the Berezinian, the Ingham–Siegel
//! distribution and the HCIZ group integrals.

mod berezinian;
mod fundamental;
mod hciz;
mod ingham_siegel;

pub use berezinian::{berezinian, berezinian_ratio};
pub use fundamental::{
    fundamental_correlations, fundamental_kernel, fundamental_kernel_series, IncrementedPoint,
    KernelVariant,
};
pub use hciz::{hciz_degenerate, hciz_exact, HczValue, CONFLUENCE as HCIZ_CONFLUENCE};
pub use ingham_siegel::{
    gaussian_normalization_pairing, gaussian_normalization_test, HalfLineRule,
    InghamSiegelFunctional,
};
