// SPDX-License-Identifier: Apache-2.0

//! Region classification and the scarce-resource-first placement order.

use std::cmp::Ordering;

use crate::design::{region_requirement, Design};
use crate::error::PlanError;
use crate::fabric::ResourceVector;

/// Region category by which scarce resources it needs.
///
/// The derived ordering is the placement priority: `Type1` first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionType {
    /// DSP, BRAM and CLB.
    Type1,
    /// DSP and CLB.
    Type2,
    /// BRAM and CLB.
    Type3,
    /// CLB only.
    Type4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("requirement {0} has no CLBs and fits no region type")]
pub struct Unclassifiable(pub ResourceVector);

pub fn classify(req: &ResourceVector) -> Result<RegionType, Unclassifiable> {
    if req.clb == 0 {
        return Err(Unclassifiable(*req));
    }
    Ok(match (req.dsp > 0, req.bram > 0) {
        (true, true) => RegionType::Type1,
        (true, false) => RegionType::Type2,
        (false, true) => RegionType::Type3,
        (false, false) => RegionType::Type4,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortedRegion {
    pub region: usize,
    pub name: String,
    pub region_type: RegionType,
    pub requirement: ResourceVector,
}

/// Medal-tally comparison: type first, then DSP, BRAM and CLB counts
/// descending, then name ascending.
pub fn medal_order(a: &SortedRegion, b: &SortedRegion) -> Ordering {
    a.region_type
        .cmp(&b.region_type)
        .then_with(|| b.requirement.dsp.cmp(&a.requirement.dsp))
        .then_with(|| b.requirement.bram.cmp(&a.requirement.bram))
        .then_with(|| b.requirement.clb.cmp(&a.requirement.clb))
        .then_with(|| a.name.cmp(&b.name))
}

pub fn medal_sort(design: &Design) -> Result<Vec<SortedRegion>, PlanError> {
    let mut list = design
        .regions
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let requirement = region_requirement(r);
            let region_type = classify(&requirement).map_err(|_| PlanError::NoLogic { region: r.name.clone() })?;
            Ok(SortedRegion {
                region: i,
                name: r.name.clone(),
                region_type,
                requirement,
            })
        })
        .collect::<Result<Vec<_>, PlanError>>()?;
    list.sort_by(medal_order);
    Ok(list)
}
