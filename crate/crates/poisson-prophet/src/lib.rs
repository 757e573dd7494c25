//! Values and bounds for selling an asset to i.i.d. offers arriving at the
//! jump times of a unit-rate Poisson process (and, in discrete time, at
//! renewal times).
//!
//! Two quantities are compared throughout.  With deadline `t`, the optimal
//! stopping value `V(t)` is the best expected return achievable by a rule
//! that sees offers one at a time, while the full-foresight value `M(t)` is
//! the expected maximum of every offer that arrives by the deadline.  The
//! crate computes both exactly for finitely supported offer laws, evaluates
//! every ratio and difference bound relating them, reproduces the sharp
//! i.i.d. constants of Hill and Kertz (1982), and cross-validates all closed
//! forms by independent ODE integration, exhaustive enumeration, and seeded
//! Monte Carlo simulation.
//!
//! Module map:
//! - [`distributions`]: finite nonnegative offer laws and their tail
//!   functionals (mean excess, conditional tail means, balayage).
//! - [`hill_kertz`]: the constants `alpha_n`, `beta_n` and the limit
//!   `alpha_0` obtained from the Hill–Kertz recursion.
//! - [`poisson_stopping`]: exact `V(t)` via critical times, exact `M(t)`,
//!   ODE integration of the value equation, and the optimal acceptance rule.
//! - [`thresholds`]: pure threshold rules, their values, and the minimax
//!   threshold for bounded offers.
//! - [`bounds`]: every bound curve, sharpness family, and the randomized
//!   inequality sweep.
//! - [`simulate`]: reproducible Monte Carlo estimation of all values.
//! - [`renewal`]: discrete-time renewal arrivals, where the Poisson-case
//!   constants provably fail.

pub mod bounds;
pub mod distributions;
pub mod hill_kertz;
pub mod poisson_stopping;
pub mod renewal;
pub mod simulate;
pub mod thresholds;

pub use distributions::{DistError, FiniteDist, TailStats};
pub use poisson_stopping::{Policy, ValueProfile};
pub use simulate::{SimConfig, SimResult};
