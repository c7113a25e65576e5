//! State-level probes: Schmidt data and the area law, central measurements,
//! spectral form factors.

pub mod measure;
pub mod sff;
pub mod state;

pub use measure::{classify, measure, measurement_protocol, MeasurementClass, MeasurementRecord, Outcome, RoundRecord};
pub use sff::{sff_analytic, sff_haar_analytic, sff_mc, SffEnsemble, SffResult};
pub use state::{evolve_state, schmidt, schmidt_left, verify_area_law, AreaLawReport, PureState, SchmidtData};
