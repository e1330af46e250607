//! Local information criterion for dynamical systems.
//!
//! A trajectory of `x' = f(x)` is described as a sequence of time windows.
//! Each window restarts from the observed state and is rolled out under a
//! truncated Taylor model of `f` around that state. The number of windows and
//! the size of each local model are chosen to minimise
//! `sum_j (lambda * k_j + integral |x~ - x| dt)`, and the resulting score is
//! used both as a compressed description of the trajectory and to rank
//! learned dynamics models.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. File formats, the CLI and parallel drivers live in the `licds`
//! crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod codec;
pub mod dynamics;
pub mod integrate;
pub mod jet;
pub mod learn;
pub mod localmodel;
pub mod partition;
pub mod selection;
pub mod systems;
pub mod theorems;

mod math;

pub use codec::{BitAccount, CodecError, DecodedMessage, EncodedMessage, QuantizationSpec};
pub use dynamics::{Dynamics, FnDynamics, Real};
pub use integrate::{rk4, sample_em, IntegrateError, Trajectory};
pub use jet::{Jet, JetSpace};
pub use localmodel::{taylor_fit, Complexity, FitError, LocalModel, MonomialBasis};
pub use partition::{
    calibrate_lambda, licds, lms, local_cost, CostPoint, Lambda, LicdsError, LicdsParams,
    LicdsResult, LocalCost, PartitionResult, Window,
};
pub use selection::{l2_distance, rank_models, score_model, ModelScore, SelectionError};
pub use systems::{get_system, SystemSpec, UnknownSystem, SYSTEM_NAMES};
