//! Asymptotics of power-series coefficients of `G(z) / ∏ (1 − b_j·z)^{p_j}`.

pub mod exact;
pub mod arrangement;
pub mod critical;
pub mod oracle;
pub mod decompose;
pub mod asymptotics;
pub mod nongeneric;
pub mod io;
