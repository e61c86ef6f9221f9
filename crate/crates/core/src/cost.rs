// SPDX-License-Identifier: Apache-2.0

//! Floorplan quality: wirelength, bounding area, wasted resources and the
//! weighted objective the annealer minimizes.

use serde::Serialize;

use crate::design::{Design, Endpoint};
use crate::error::PlanError;
use crate::fabric::{ColumnKind, Fabric, Rect, ResourceVector};
use crate::placer::Placement;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("net `{net}` endpoint `{endpoint}` has no position")]
    UnresolvedEndpoint { net: String, endpoint: String },
    #[error("{0} blocks are wasted but the device has none of that kind")]
    ZeroTotal(ColumnKind),
    #[error("centroid of an empty floorplan")]
    Empty,
}

/// Per-term divisors applied before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Normalizers {
    pub wl: f64,
    pub area: f64,
    pub wr: f64,
}

impl Default for Normalizers {
    fn default() -> Self {
        Self {
            wl: 1.0,
            area: 1.0,
            wr: 1.0,
        }
    }
}

impl Normalizers {
    /// Uses each term's own value as its scale; zero terms scale by 1.
    pub fn from_terms(terms: &CostTerms) -> Self {
        let pick = |v: f64| if v > 0.0 { v } else { 1.0 };
        Self {
            wl: pick(terms.wl),
            area: pick(terms.area),
            wr: pick(terms.wr),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub normalizers: Normalizers,
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            beta: 0.2,
            gamma: 0.3,
            normalizers: Normalizers::default(),
        }
    }
}

impl CostWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, PlanError> {
        let all = [alpha, beta, gamma];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) || all.iter().all(|w| *w == 0.0) {
            return Err(PlanError::Param(format!(
                "cost weights must be non-negative with at least one positive, got {alpha},{beta},{gamma}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            normalizers: Normalizers::default(),
        })
    }
}

/// Raw objective terms: wirelength, bounding-box area, weighted waste.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CostTerms {
    pub wl: f64,
    pub area: f64,
    pub wr: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub wl: f64,
    pub area: f64,
    pub wr: f64,
    pub total: f64,
}

/// Half-perimeter of the bounding box of each point set, summed.
pub fn hpwl_of_points<'a>(nets: impl IntoIterator<Item = &'a [(f64, f64)]>) -> f64 {
    nets.into_iter()
        .filter(|pts| pts.len() >= 2)
        .map(|pts| {
            let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
            for (x, y) in pts {
                x0 = x0.min(*x);
                x1 = x1.max(*x);
                y0 = y0.min(*y);
                y1 = y1.max(*y);
            }
            (x1 - x0) + (y1 - y0)
        })
        .sum()
}

/// Total wirelength. Regions sit at their rect centers, terminals on the
/// die edge.
pub fn hpwl(design: &Design, fabric: &Fabric, placements: &[Placement]) -> Result<f64, CostError> {
    let mut centers: Vec<Option<(f64, f64)>> = vec![None; design.regions.len()];
    for p in placements {
        centers[p.region] = Some(p.rect.center());
    }
    let mut total = 0.0;
    let mut pts = Vec::new();
    for net in &design.nets {
        pts.clear();
        for ep in &net.endpoints {
            let pos = match *ep {
                Endpoint::Region(i) => centers[i],
                Endpoint::Terminal(i) => Some(design.terminals[i].position(fabric)),
            };
            pts.push(pos.ok_or_else(|| CostError::UnresolvedEndpoint {
                net: net.name.clone(),
                endpoint: design.endpoint_name(*ep).to_string(),
            })?);
        }
        total += hpwl_of_points([pts.as_slice()]);
    }
    Ok(total)
}

/// Area of the box enclosing every placement rect, in boundary coordinates.
pub fn bounding_area(placements: &[Placement]) -> f64 {
    let Some(first) = placements.first() else {
        return 0.0;
    };
    let mut b = first.rect;
    for p in &placements[1..] {
        b.x1 = b.x1.min(p.rect.x1);
        b.y1 = b.y1.min(p.rect.y1);
        b.x2 = b.x2.max(p.rect.x2);
        b.y2 = b.y2.max(p.rect.y2);
    }
    (f64::from(b.x2 + 1) - f64::from(b.x1)) * (f64::from(b.y2 + 1) - f64::from(b.y1))
}

/// Scarcity-weighted waste: each kind's wasted blocks count
/// `total / total_kind` times.
pub fn rw_cost(waste: &ResourceVector, totals: &ResourceVector) -> Result<f64, CostError> {
    let all = f64::from(totals.clb) + f64::from(totals.bram) + f64::from(totals.dsp);
    let mut cost = 0.0;
    for kind in ColumnKind::ALL {
        let w = waste.get(kind);
        if w == 0 {
            continue;
        }
        let t = totals.get(kind);
        if t == 0 {
            return Err(CostError::ZeroTotal(kind));
        }
        cost += all / f64::from(t) * f64::from(w);
    }
    Ok(cost)
}

pub fn total_cost(terms: &CostTerms, weights: &CostWeights) -> CostBreakdown {
    let n = &weights.normalizers;
    CostBreakdown {
        wl: terms.wl,
        area: terms.area,
        wr: terms.wr,
        total: weights.alpha * terms.wl / n.wl + weights.beta * terms.area / n.area + weights.gamma * terms.wr / n.wr,
    }
}

/// Area-weighted mean of rect centers.
pub fn rect_centroid(rects: &[Rect]) -> Option<(f64, f64)> {
    if rects.is_empty() {
        return None;
    }
    let (mut sx, mut sy, mut sa) = (0.0, 0.0, 0.0);
    for r in rects {
        let a = r.area() as f64;
        let (cx, cy) = r.center();
        sx += a * cx;
        sy += a * cy;
        sa += a;
    }
    Some((sx / sa, sy / sa))
}

pub fn centroid(placements: &[Placement]) -> Result<(f64, f64), CostError> {
    let rects: Vec<Rect> = placements.iter().map(|p| p.rect).collect();
    rect_centroid(&rects).ok_or(CostError::Empty)
}

pub fn total_waste(placements: &[Placement]) -> ResourceVector {
    placements.iter().map(|p| p.waste).sum()
}

/// All three raw terms for a set of placements.
pub fn evaluate(design: &Design, fabric: &Fabric, placements: &[Placement]) -> Result<CostTerms, CostError> {
    Ok(CostTerms {
        wl: hpwl(design, fabric, placements)?,
        area: bounding_area(placements),
        wr: rw_cost(&total_waste(placements), &fabric.total())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn place(x1: u32, y1: u32, x2: u32, y2: u32) -> Placement {
        Placement {
            region: 0,
            rect: Rect::new(x1, y1, x2, y2),
            waste: ResourceVector::ZERO,
        }
    }

    #[test]
    fn hpwl_examples() {
        assert_eq!(hpwl_of_points([&[(0.0, 0.0), (3.0, 4.0)][..]]), 7.0);
        assert_eq!(hpwl_of_points([&[(1.0, 1.0)][..]]), 0.0);
        let pts = [(0.0, 0.0), (2.0, 1.0), (5.0, 3.0)];
        let oracle = (pts.iter().map(|p| p.0).fold(f64::MIN, f64::max)
            - pts.iter().map(|p| p.0).fold(f64::MAX, f64::min))
            + (pts.iter().map(|p| p.1).fold(f64::MIN, f64::max) - pts.iter().map(|p| p.1).fold(f64::MAX, f64::min));
        assert_eq!(oracle, 8.0);
        assert_eq!(hpwl_of_points([&pts[..]]), 8.0);
    }

    #[test]
    fn hpwl_needs_every_region_placed() {
        let d = fixtures::image_filter();
        let f = fixtures::user_10x23();
        assert!(matches!(hpwl(&d, &f, &[]), Err(CostError::UnresolvedEndpoint { .. })));
    }

    #[test]
    fn area_examples() {
        // extremes X in [2,10], Y in [1,5] in boundary coordinates
        assert_eq!(bounding_area(&[place(2, 1, 9, 4)]), 32.0);
        assert_eq!(bounding_area(&[place(2, 1, 3, 2), place(8, 3, 9, 4)]), 32.0);
        assert_eq!(bounding_area(&[place(0, 0, 3, 4)]), (4.0 - 0.0) * (5.0 - 0.0));
        assert_eq!(bounding_area(&[]), 0.0);
    }

    #[test]
    fn rw_cost_examples() {
        let totals = fixtures::user_10x23().total();
        let got = rw_cost(&ResourceVector::new(10, 1, 1), &totals).unwrap();
        let oracle = 230.0 / 200.0 * 10.0 + 230.0 / 20.0 * 1.0 + 230.0 / 10.0 * 1.0;
        assert!((oracle - 46.0_f64).abs() < 1e-12);
        assert!((got - oracle).abs() < 1e-12);
        assert_eq!(rw_cost(&ResourceVector::ZERO, &totals).unwrap(), 0.0);
        assert!((rw_cost(&ResourceVector::new(20, 0, 0), &totals).unwrap() - 23.0).abs() < 1e-12);
        assert!(rw_cost(&ResourceVector::new(0, 0, 1), &ResourceVector::new(5, 1, 0)).is_err());
    }

    #[test]
    fn total_cost_examples() {
        let unit = CostWeights::new(1.0, 1.0, 1.0).unwrap();
        let t = CostTerms {
            wl: 10.0,
            area: 20.0,
            wr: 5.0,
        };
        assert_eq!(total_cost(&t, &unit).total, 35.0);
        assert_eq!(total_cost(&CostTerms::default(), &unit).total, 0.0);
        let w = CostWeights::new(0.5, 0.2, 0.3).unwrap();
        let t = CostTerms {
            wl: 100.0,
            area: 50.0,
            wr: 10.0,
        };
        assert!((total_cost(&t, &w).total - 63.0).abs() < 1e-12);
        assert!(CostWeights::new(0.0, 0.0, 0.0).is_err());
        assert!(CostWeights::new(-1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn centroid_examples() {
        // center (2.0, 5.0) in boundary coordinates
        assert_eq!(centroid(&[place(1, 4, 2, 5)]).unwrap(), (2.0, 5.0));
        let c = centroid(&[place(0, 0, 0, 0), place(4, 4, 4, 4)]).unwrap();
        assert_eq!(c, (2.5, 2.5));
        // areas 1 and 3 with x-centers 0.5 and 4.5: weighted-mean oracle
        let c = centroid(&[place(0, 0, 0, 0), place(4, 0, 4, 2)]).unwrap();
        let oracle = (1.0 * 0.5 + 3.0 * 4.5) / 4.0;
        assert_eq!(c.0, oracle);
        assert!(matches!(centroid(&[]), Err(CostError::Empty)));
    }

    proptest! {
        #[test]
        fn hpwl_translation_invariant(
            pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 1..6),
            dx in -20.0f64..20.0,
            dy in -20.0f64..20.0,
        ) {
            let moved: Vec<(f64, f64)> = pts.iter().map(|(x, y)| (x + dx, y + dy)).collect();
            let a = hpwl_of_points([pts.as_slice()]);
            let b = hpwl_of_points([moved.as_slice()]);
            prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }

        #[test]
        fn area_monotone(rects in prop::collection::vec((0u32..20, 0u32..20, 0u32..5, 0u32..5), 1..6)) {
            let ps: Vec<Placement> = rects.iter().map(|(x, y, w, h)| place(*x, *y, x + w, y + h)).collect();
            for k in 1..ps.len() {
                prop_assert!(bounding_area(&ps[..k]) <= bounding_area(&ps[..=k]));
            }
        }

        #[test]
        fn rw_cost_strictly_increasing(
            w in (0u32..50, 0u32..10, 0u32..10),
            kind in 0usize..3,
        ) {
            let totals = fixtures::user_10x23().total();
            let base = ResourceVector::new(w.0, w.1, w.2);
            let mut more = base;
            *more.get_mut(ColumnKind::ALL[kind]) += 1;
            prop_assert!(rw_cost(&more, &totals).unwrap() > rw_cost(&base, &totals).unwrap());
        }

        #[test]
        fn weight_scaling_keeps_argmin(
            terms in prop::collection::vec((0.0f64..100.0, 0.0f64..100.0, 0.0f64..100.0), 2..8),
            s in 0.01f64..100.0,
        ) {
            let w = CostWeights::default();
            let scaled = CostWeights::new(w.alpha * s, w.beta * s, w.gamma * s).unwrap();
            let ts: Vec<CostTerms> = terms.iter().map(|(a, b, c)| CostTerms { wl: *a, area: *b, wr: *c }).collect();
            let argmin = |ws: &CostWeights| {
                let mut best = 0;
                for (i, t) in ts.iter().enumerate() {
                    if total_cost(t, ws).total < total_cost(&ts[best], ws).total {
                        best = i;
                    }
                }
                best
            };
            let (a, b) = (argmin(&w), argmin(&scaled));
            // near-ties may flip under rounding; compare the values instead
            let ca = total_cost(&ts[a], &w).total;
            let cb = total_cost(&ts[b], &w).total;
            prop_assert!((ca - cb).abs() <= 1e-9 * ca.abs().max(1.0));
        }
    }
}
