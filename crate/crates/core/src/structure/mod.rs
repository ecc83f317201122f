//! Singular sets, ray linearity, blowdowns and the case classifiers.

mod blowdown;
mod classify;
mod singular;

pub use blowdown::{blowdown, BlowdownModel, BlowdownReport, RadiusFit, MODEL_THRESHOLD};
pub use classify::{classify_entire, exterior_trichotomy, Case, ClassificationReport, ClassifyOptions, Extrema, Metrics, Side};
pub use singular::{segments_through, singular_set, verify_ray_linearity, LightSegment, SingularSet};
