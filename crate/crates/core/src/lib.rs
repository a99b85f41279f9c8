//! Consistent-histories toolkit: decoherence matrices, approximate
//! consistency criteria, maximum probability violation, kissing-problem
//! bounds and the example families that probe them.
//!
//! ```
//! use consistent_histories::prelude::*;
//!
//! let generated = appendix_d_set(&AppendixDParams::new(4, 0.1).unwrap()).unwrap();
//! let d = decoherence_matrix(&generated.set);
//! let mpv = mpv_exact(&d).unwrap();
//! assert!((mpv.value - 0.15).abs() < 1e-10);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod consistency;
pub mod error;
pub mod generators;
pub mod histories;
pub mod io;
pub mod linalg;
pub mod mpv;
pub mod packing;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::consistency::{
        conditional_dhc, dhc, evaluate, medium_consistency, medium_dhc, threshold_criterion, weak_consistency,
        ConsistencyReport, Criterion, CriterionOutcome, CriterionParams, NullPolicy,
    };
    pub use crate::error::{Error, Result};
    pub use crate::generators::{
        appendix_d_set, perturbation_experiment, random_near_consistent_set, theorem6_witness, zeno_closed_form,
        zeno_set, AppendixDParams, PerturbParams, ZenoParams,
    };
    pub use crate::histories::{
        coarse_grain, decoherence_matrix, history_states, ClassOperator, CoarseGraining, DecoherenceMatrix,
        HistorySet, InitialState,
    };
    pub use crate::linalg::{c, ComplexMatrix, ComplexVector, DensityMatrix, Projector, C64};
    pub use crate::mpv::{eps_for_delta, mpv_exact, EpsVariant, MpvResult};
    pub use crate::packing::{shannon_lower_bound, upper_bound, BoundQuery, Overlap};
}
