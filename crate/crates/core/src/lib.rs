//! Drag-minimizing shape optimization for a hinged-panel morphing vehicle.
//!
//! The toolkit covers the full experiment loop: a discretized panel-angle
//! design space with clearance constraints ([`geometry`]), a binary-chromosome
//! genetic algorithm driven by measured mean drag ([`evolve`]), pluggable
//! drag-measurement rigs including a synthetic tunnel stand-in ([`rig`]),
//! force-trace conditioning ([`dsp`]), two-sample hypothesis tests
//! ([`stats`]), full-size panel sizing and economics ([`fullscale`]), and
//! campaign orchestration with reproducible file outputs ([`campaign`]).

pub mod campaign;
pub mod dsp;
pub mod evolve;
pub mod fullscale;
pub mod geometry;
pub mod rig;
pub mod stats;
pub mod trace;

pub use campaign::{CampaignConfig, CampaignError, CampaignMode};
pub use evolve::GaConfig;
pub use geometry::{Domain, GeometryError, MorphShape, PanelChainSpec, VehicleGeometry};
pub use trace::{ForceTrace, RigConditions, TraceMode};
