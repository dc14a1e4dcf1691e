//! Comparison optimizers sharing the same optimize signature and history
//! format as the multi-mutation optimizer.

mod de;
mod ga;
mod hho;
mod pso;

pub use de::{de_optimize, DeConfig};
pub use ga::{ga_optimize, GaConfig};
pub use hho::{hho_optimize, HhoConfig};
pub use pso::{pso_optimize, PsoConfig};
