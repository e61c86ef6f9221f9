// SPDX-License-Identifier: Apache-2.0

//! Floorplanning of partially reconfigurable regions on column-heterogeneous
//! FPGA fabrics.
//!
//! Regions are allocated frame-aligned rectangles in scarce-resource-first
//! order, then a sequence-pair annealer improves wirelength, bounding area
//! and wasted resources.

pub mod anneal;
pub mod constraints;
pub mod cost;
pub mod design;
pub mod error;
pub mod fabric;
pub mod fixtures;
pub mod gen;
pub mod placer;
pub mod priority;
pub mod report;
pub mod svg;
pub mod validate;
pub mod whitespace;

pub use anneal::{anneal, initial_floorplan, plan, AnnealOutcome, AnnealParams, Floorplan, SequencePair};
pub use constraints::{emit_constraints, parse_plan, ConstraintDoc, PblockRecord};
pub use cost::{CostBreakdown, CostTerms, CostWeights, Normalizers};
pub use design::{parse_design, Design, Endpoint, Net, Region, Terminal};
pub use error::{OutOfBounds, ParseError, PlanError};
pub use fabric::{parse_device, ColumnKind, Fabric, FrameId, Rect, ResourceVector};
pub use placer::Placement;
pub use priority::RegionType;
pub use report::Report;
pub use validate::{validate, Violation};
pub use whitespace::{WhiteSpace, WsWeights};
