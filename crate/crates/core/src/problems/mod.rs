//! Built-in benchmark problems.

mod dirac;
mod quadratic;
mod robust;
mod synthetic;

pub use dirac::{make_dirac_gan, make_dirac_gan_with_box, DIRAC_GAN_Y_BOX};
pub use quadratic::{make_quadratic_oracle, QuadraticOracleSpec};
pub use robust::{make_robust_domains, Dataset, DomainLoss, LogisticDomain, QuadraticDomain, RobustDomainsSpec};
pub use synthetic::{make_synthetic, make_synthetic_boxed, w_eval, SyntheticParams};
