// SPDX-License-Identifier: Apache-2.0

//! Independent legality check of a plan against its device and design.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::constraints::ConstraintDoc;
use crate::design::{check_capacity, Design};
use crate::fabric::{ColumnKind, Fabric, FrameId, Rect, ResourceVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    UnknownRegion(String),
    DuplicateRegion(String),
    MissingRegion(String),
    OutOfBounds {
        region: String,
        rect: Rect,
    },
    Misaligned {
        region: String,
        rect: Rect,
    },
    Reserved {
        region: String,
        rect: Rect,
    },
    FrameCount {
        region: String,
        declared: ResourceVector,
        actual: ResourceVector,
    },
    Overlap {
        a: String,
        b: String,
    },
    FrameShare {
        a: String,
        b: String,
        frames: usize,
    },
    Uncovered {
        region: String,
        kind: ColumnKind,
        need: u32,
        have: u32,
    },
    Capacity {
        kind: ColumnKind,
        demand: u32,
        available: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownRegion(r) => write!(f, "unknown region `{r}`"),
            Violation::DuplicateRegion(r) => write!(f, "region `{r}` has more than one pblock"),
            Violation::MissingRegion(r) => write!(f, "region `{r}` has no pblock"),
            Violation::OutOfBounds { region, rect } => write!(f, "region `{region}` rect {rect} leaves the fabric"),
            Violation::Misaligned { region, rect } => {
                write!(f, "region `{region}` rect {rect} is not aligned to device rows")
            }
            Violation::Reserved { region, rect } => write!(f, "region `{region}` rect {rect} covers reserved fabric"),
            Violation::FrameCount {
                region,
                declared,
                actual,
            } => {
                write!(
                    f,
                    "region `{region}` declares frames {declared} but its rect spans {actual}"
                )
            }
            Violation::Overlap { a, b } => write!(f, "regions `{a}` and `{b}` overlap"),
            Violation::FrameShare { a, b, frames } => write!(f, "regions `{a}` and `{b}` share {frames} frame(s)"),
            Violation::Uncovered {
                region,
                kind,
                need,
                have,
            } => {
                write!(f, "region `{region}` needs {need} {kind} but its rect holds {have}")
            }
            Violation::Capacity {
                kind,
                demand,
                available,
            } => {
                write!(
                    f,
                    "design needs {demand} {kind} in total but the device has {available}"
                )
            }
        }
    }
}

/// Every violation of `doc`, in a fixed order: design-level capacity,
/// record bookkeeping, per-record geometry and coverage, then pairs.
pub fn validate(doc: &ConstraintDoc, design: &Design, fabric: &Fabric) -> Vec<Violation> {
    let mut out = Vec::new();
    let verdict = check_capacity(design, fabric);
    for kind in verdict.violated {
        out.push(Violation::Capacity {
            kind,
            demand: verdict.demand.get(kind),
            available: verdict.available.get(kind),
        });
    }

    let mut seen = BTreeSet::new();
    // (record name, rect, frames) for records that pass the bounds check
    let mut placed: Vec<(&str, Rect, BTreeSet<FrameId>)> = Vec::new();
    for rec in &doc.records {
        let Some(region) = design.region_index(&rec.name) else {
            out.push(Violation::UnknownRegion(rec.name.clone()));
            continue;
        };
        if !seen.insert(region) {
            out.push(Violation::DuplicateRegion(rec.name.clone()));
            continue;
        }
        let rect = rec.rect;
        let region_name = || rec.name.clone();
        if fabric.check_rect(&rect).is_err() {
            out.push(Violation::OutOfBounds {
                region: region_name(),
                rect,
            });
            continue;
        }
        if !fabric.is_frame_aligned(&rect) {
            out.push(Violation::Misaligned {
                region: region_name(),
                rect,
            });
        }
        if fabric.reserved().iter().any(|r| r.intersects(&rect)) {
            out.push(Violation::Reserved {
                region: region_name(),
                rect,
            });
        }
        let actual = fabric.frame_counts(&rect).expect("in bounds");
        if actual != rec.frames {
            out.push(Violation::FrameCount {
                region: region_name(),
                declared: rec.frames,
                actual,
            });
        }
        let need = design.regions[region].requirement();
        let have = fabric.capacity(&rect).expect("in bounds");
        for kind in ColumnKind::ALL {
            if have.get(kind) < need.get(kind) {
                out.push(Violation::Uncovered {
                    region: region_name(),
                    kind,
                    need: need.get(kind),
                    have: have.get(kind),
                });
            }
        }
        placed.push((&rec.name, rect, fabric.frames_in(&rect).expect("in bounds")));
    }
    for r in &design.regions {
        if !doc.records.iter().any(|rec| rec.name == r.name) {
            out.push(Violation::MissingRegion(r.name.clone()));
        }
    }

    for (i, (a, ra, fa)) in placed.iter().enumerate() {
        for (b, rb, fb) in &placed[i + 1..] {
            if ra.intersects(rb) {
                out.push(Violation::Overlap {
                    a: a.to_string(),
                    b: b.to_string(),
                });
            } else {
                let shared = fa.intersection(fb).count();
                if shared > 0 {
                    out.push(Violation::FrameShare {
                        a: a.to_string(),
                        b: b.to_string(),
                        frames: shared,
                    });
                }
            }
        }
    }
    out
}

/// Violation counts by variant name, for summaries.
pub fn summarize(violations: &[Violation]) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for v in violations {
        let key = match v {
            Violation::UnknownRegion(_) => "unknown-region",
            Violation::DuplicateRegion(_) => "duplicate-region",
            Violation::MissingRegion(_) => "missing-region",
            Violation::OutOfBounds { .. } => "out-of-bounds",
            Violation::Misaligned { .. } => "misaligned",
            Violation::Reserved { .. } => "reserved",
            Violation::FrameCount { .. } => "frame-count",
            Violation::Overlap { .. } => "overlap",
            Violation::FrameShare { .. } => "frame-share",
            Violation::Uncovered { .. } => "uncovered",
            Violation::Capacity { .. } => "capacity",
        };
        *m.entry(key).or_insert(0) += 1;
    }
    m
}
