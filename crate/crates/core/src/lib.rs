//! Ground state of the 3D cubic NLS and channel-by-channel certificates that
//! the linearized operators `L₊`, `L₋` have no eigenvalue in `(0, 1]`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod certificate;
pub mod certify;
pub mod config;
pub mod error;
pub mod groundstate;
pub mod interp;
pub mod ode;
pub mod radialode;
pub mod sturm;

pub use bessel::{mode_verdict, solve_mode, Anchor, BesselMode, ModeVerdict};
pub use certificate::Certificate;
pub use certify::{verify, GapReport, VerifyOptions};
pub use config::{OperatorSelection, RunConfig};
pub use error::{Error, Result};
pub use groundstate::{
    compute_ground_state, compute_ground_state_with, eval_q, GroundStateOptions, GroundStateProfile,
};
pub use radialode::{EffectivePotential, Operator, Potential, Trajectory, ZeroReport};
pub use sturm::{check_comparison, ComparisonCertificate};
