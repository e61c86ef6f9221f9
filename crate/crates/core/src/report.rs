// SPDX-License-Identifier: Apache-2.0

//! Machine-readable run summary.

use serde::Serialize;

use crate::anneal::AnnealOutcome;
use crate::cost::{evaluate, total_waste, CostWeights, Normalizers};
use crate::design::Design;
use crate::fabric::{ColumnKind, Fabric, ResourceVector};
use crate::placer::Placement;
use crate::whitespace::WsWeights;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KindPercent {
    pub clb: f64,
    pub bram: f64,
    pub dsp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub design: String,
    pub device: String,
    pub regions: usize,
    pub seed: u64,
    pub restarts: usize,
    pub iterations: u64,
    pub hpwl: f64,
    pub area: f64,
    pub wr: f64,
    pub waste: ResourceVector,
    pub waste_pct: KindPercent,
    pub total_cost: f64,
    pub initial_cost: f64,
    pub weights: CostWeights,
    pub normalizers: Normalizers,
    pub ws_weights: [f64; 4],
    pub runtime_ms: u64,
}

/// `100 * waste_k / total_k` per kind; kinds the device lacks report 0.
pub fn waste_percent(waste: &ResourceVector, totals: &ResourceVector) -> KindPercent {
    let pct = |k| {
        let t = totals.get(k);
        if t == 0 {
            0.0
        } else {
            100.0 * f64::from(waste.get(k)) / f64::from(t)
        }
    };
    KindPercent {
        clb: pct(ColumnKind::Clb),
        bram: pct(ColumnKind::Bram),
        dsp: pct(ColumnKind::Dsp),
    }
}

impl Report {
    pub fn new(
        design: &Design,
        fabric: &Fabric,
        outcome: &AnnealOutcome,
        ws_weights: &WsWeights,
        restarts: usize,
        runtime_ms: u64,
    ) -> Self {
        let best = &outcome.best;
        let terms = evaluate(design, fabric, &best.placements).expect("planner output is complete");
        let waste = total_waste(&best.placements);
        Self {
            design: design.name.clone(),
            device: fabric.name().to_string(),
            regions: best.placements.len(),
            seed: best.seed,
            restarts,
            iterations: best.iterations,
            hpwl: terms.wl,
            area: terms.area,
            wr: terms.wr,
            waste,
            waste_pct: waste_percent(&waste, &fabric.total()),
            total_cost: best.cost.total,
            initial_cost: outcome.initial.cost.total,
            weights: outcome.weights,
            normalizers: outcome.weights.normalizers,
            ws_weights: [ws_weights.alpha, ws_weights.beta, ws_weights.gamma, ws_weights.delta],
            runtime_ms,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Per-placement CLB waste bound: one frame's CLBs for every CLB column
/// the rect spans.
pub fn clb_waste_bound(p: &Placement, fabric: &Fabric) -> u32 {
    let clb_cols = (p.rect.x1..=p.rect.x2)
        .filter(|x| fabric.column(*x) == ColumnKind::Clb)
        .count() as u32;
    fabric.slices_per_frame(ColumnKind::Clb) * clb_cols
}
