//! Response of a uniformly accelerated Unruh–DeWitt detector to deformed vacuum
//! two-point functions, computed both by direct quadrature at finite switching
//! width and by strip residue sums in the adiabatic limit, together with the
//! KMS and Unruh-preservation diagnostics built on top of them.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod diagnostics;
pub mod error;
pub mod kinematics;
pub mod quadrature;
pub mod response;
pub mod serde_real;
pub mod wightman;

pub use error::{Error, EvalError, Result};
pub use kinematics::{Accel, IntervalComponents, RegulatorPolicy, WSign, WZPoint};
pub use wightman::{catalog, find_spec, DeformationSpec, ExpectedVerdicts, PullbackModel, Verdict};

pub use num_complex::Complex64;
