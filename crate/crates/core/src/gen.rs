// SPDX-License-Identifier: Apache-2.0

//! Seeded synthetic designs.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::anneal::rng_from_seed;
use crate::design::{Design, Edge, Endpoint, ModuleInstance, Net, Region, Terminal};
use crate::error::PlanError;
use crate::fabric::ResourceVector;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub name: String,
    pub regions: usize,
    /// Inclusive per-instance demand ranges.
    pub clb: (u32, u32),
    pub bram: (u32, u32),
    pub dsp: (u32, u32),
    /// Probability that a region draws BRAM and DSP demands from their
    /// ranges; other regions take each range's minimum.
    pub scarce_fraction: f64,
    pub seed: u64,
    /// Fabric columns and cell rows, used to put terminals on the corners.
    pub width: u32,
    pub height: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            name: "synthetic".into(),
            regions: 8,
            clb: (4, 16),
            bram: (0, 2),
            dsp: (0, 1),
            scarce_fraction: 1.0,
            seed: 1,
            width: 23,
            height: 10,
        }
    }
}

impl GenParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        for (kind, (lo, hi)) in [("clb", self.clb), ("bram", self.bram), ("dsp", self.dsp)] {
            if lo > hi {
                return Err(PlanError::Param(format!("empty {kind} range {lo}..{hi}")));
            }
        }
        if !(0.0..=1.0).contains(&self.scarce_fraction) {
            return Err(PlanError::Param(format!(
                "scarce fraction must lie in [0, 1], got {}",
                self.scarce_fraction
            )));
        }
        if self.clb.0 == 0 {
            return Err(PlanError::Param("clb range must start at 1 or more".into()));
        }
        if self.width == 0 || self.height == 0 {
            return Err(PlanError::Param("fabric dimensions must be positive".into()));
        }
        Ok(())
    }
}

/// Regions with one or two module instances each, demands drawn uniformly
/// from the ranges; four corner terminals; nets of 2 to 4 endpoints whose
/// union connects every region and terminal.
pub fn generate(params: &GenParams) -> Result<Design, PlanError> {
    params.validate()?;
    let mut rng = rng_from_seed(params.seed);
    let n = params.regions;
    let mut regions = Vec::with_capacity(n);
    for i in 0..n {
        let count = rng.gen_range(1..=2);
        let scarce = rng.gen_bool(params.scarce_fraction);
        let instances = (0..count)
            .map(|m| {
                let clb = rng.gen_range(params.clb.0..=params.clb.1);
                let (bram, dsp) = if scarce {
                    (
                        rng.gen_range(params.bram.0..=params.bram.1),
                        rng.gen_range(params.dsp.0..=params.dsp.1),
                    )
                } else {
                    (params.bram.0, params.dsp.0)
                };
                ModuleInstance {
                    name: format!("m{m}"),
                    demand: ResourceVector::new(clb, bram, dsp),
                }
            })
            .collect();
        regions.push(Region {
            name: format!("r{i}"),
            instances,
        });
    }
    let terminals = vec![
        Terminal {
            name: "t_nw".into(),
            edge: Edge::Left,
            offset: 0,
        },
        Terminal {
            name: "t_sw".into(),
            edge: Edge::Left,
            offset: params.height - 1,
        },
        Terminal {
            name: "t_ne".into(),
            edge: Edge::Right,
            offset: 0,
        },
        Terminal {
            name: "t_se".into(),
            edge: Edge::Right,
            offset: params.height - 1,
        },
    ];

    let mut nets = Vec::new();
    if n > 0 {
        let pool: Vec<Endpoint> = (0..n)
            .map(Endpoint::Region)
            .chain((0..terminals.len()).map(Endpoint::Terminal))
            .collect();
        let mut push = |mut eps: Vec<Endpoint>, rng: &mut crate::anneal::PlanRng| {
            let extra = rng.gen_range(0..=2usize);
            let mut candidates: Vec<Endpoint> = pool.iter().copied().filter(|e| !eps.contains(e)).collect();
            candidates.shuffle(rng);
            eps.extend(candidates.into_iter().take(extra));
            nets.push(eps);
        };
        for i in 1..n {
            let j = rng.gen_range(0..i);
            push(vec![Endpoint::Region(i), Endpoint::Region(j)], &mut rng);
        }
        for t in 0..terminals.len() {
            let r = rng.gen_range(0..n);
            push(vec![Endpoint::Terminal(t), Endpoint::Region(r)], &mut rng);
        }
    }
    let nets = nets
        .into_iter()
        .enumerate()
        .map(|(i, endpoints)| Net {
            name: format!("n{i}"),
            endpoints,
        })
        .collect();

    Ok(Design {
        name: params.name.clone(),
        regions,
        terminals,
        nets,
        static_demand: ResourceVector::ZERO,
    })
}
