// SPDX-License-Identifier: Apache-2.0

//! Maximal free rectangles ("white spaces") and their scoring.

use crate::error::PlanError;
use crate::fabric::{Fabric, Rect, ResourceVector};
use crate::placer::OccupancyState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhiteSpace {
    pub rect: Rect,
    pub free: ResourceVector,
    pub cost: f64,
}

/// Weights for free DSP, BRAM, CLB and centroid distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WsWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for WsWeights {
    fn default() -> Self {
        Self {
            alpha: 27.0,
            beta: 9.0,
            gamma: 3.0,
            delta: 1.0,
        }
    }
}

impl WsWeights {
    /// Requires `alpha > beta > gamma > delta > 0`.
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self, PlanError> {
        let ordered = alpha > beta && beta > gamma && gamma > delta && delta > 0.0;
        if !ordered || !alpha.is_finite() {
            return Err(PlanError::Param(format!(
                "white-space weights must satisfy a > b > g > d > 0, got {alpha},{beta},{gamma},{delta}"
            )));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            delta,
        })
    }
}

/// All maximal free rectangles of the cell grid.
pub fn detect_whitespace(state: &OccupancyState<'_>) -> Vec<WhiteSpace> {
    detect_whitespace_within(state, 0, 0)
}

/// Like [`detect_whitespace`], with every column left of `min_col` and
/// every device row above `min_row` treated as occupied.
pub fn detect_whitespace_within(state: &OccupancyState<'_>, min_col: u32, min_row: u32) -> Vec<WhiteSpace> {
    let fabric = state.fabric();
    let width = fabric.num_columns() as usize;
    let h = fabric.row_height();
    let height = fabric.height();
    let y_floor = min_row.saturating_mul(h).min(height);

    // Rows of cells that share a free pattern collapse into one band. The
    // pattern can only change at frame boundaries, reserved-rect edges and
    // the bound.
    let mut cuts: Vec<u32> = (0..=fabric.num_rows()).map(|r| r * h).collect();
    for r in fabric.reserved() {
        cuts.push(r.y1);
        cuts.push(r.y2 + 1);
    }
    cuts.push(y_floor);
    cuts.sort_unstable();
    cuts.dedup();
    let bands: Vec<(u32, u32)> = cuts.windows(2).map(|w| (w[0], w[1] - 1)).collect();

    let free_cell = |x: u32, y: u32| -> bool {
        x >= min_col
            && y >= y_floor
            && !fabric.is_reserved_cell(x, y)
            && !state.is_claimed(crate::fabric::FrameId::new(x, y / h))
    };
    let grid: Vec<Vec<bool>> = bands
        .iter()
        .map(|(y0, _)| (0..width as u32).map(|x| free_cell(x, *y0)).collect())
        .collect();

    let mut out = Vec::new();
    let mut heights = vec![0usize; width];
    for (b, row) in grid.iter().enumerate() {
        for x in 0..width {
            heights[x] = if row[x] { heights[x] + 1 } else { 0 };
        }
        let below = grid.get(b + 1);
        for x1 in 0..width {
            let mut m = usize::MAX;
            let mut below_all_free = true;
            for x2 in x1..width {
                m = m.min(heights[x2]);
                if m == 0 {
                    break;
                }
                if let Some(next) = below {
                    below_all_free &= next[x2];
                }
                let left_blocked = x1 == 0 || heights[x1 - 1] < m;
                let right_blocked = x2 + 1 == width || heights[x2 + 1] < m;
                let down_blocked = below.is_none() || !below_all_free;
                if left_blocked && right_blocked && down_blocked {
                    let rect = Rect::new(x1 as u32, bands[b + 1 - m].0, x2 as u32, bands[b].1);
                    let free = fabric.capacity(&rect).expect("white space inside grid");
                    out.push(WhiteSpace { rect, free, cost: 0.0 });
                }
            }
        }
    }
    out
}

/// Scalar white-space cost from free block counts and a normalized
/// centroid distance.
pub fn whitespace_cost(free: &ResourceVector, dist: f64, w: &WsWeights) -> f64 {
    w.alpha * f64::from(free.dsp) + w.beta * f64::from(free.bram) + w.gamma * f64::from(free.clb) + w.delta * dist
}

/// Distance from the rect's center to `centroid`, divided by the fabric's
/// half-perimeter.
pub fn normalized_distance(rect: &Rect, centroid: (f64, f64), fabric: &Fabric) -> f64 {
    let (cx, cy) = rect.center();
    let d = (cx - centroid.0).hypot(cy - centroid.1);
    d / (f64::from(fabric.num_columns()) + f64::from(fabric.height()))
}

/// Fills in every cost and sorts ascending. Ties keep detection order.
pub fn score_whitespaces(list: &mut [WhiteSpace], centroid: (f64, f64), fabric: &Fabric, w: &WsWeights) {
    for ws in list.iter_mut() {
        ws.cost = whitespace_cost(&ws.free, normalized_distance(&ws.rect, centroid, fabric), w);
    }
    list.sort_by(|a, b| a.cost.total_cmp(&b.cost));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fabric::parse_device;
    use crate::placer::Placement;
    use proptest::prelude::*;

    fn rv(clb: u32, bram: u32, dsp: u32) -> ResourceVector {
        ResourceVector::new(clb, bram, dsp)
    }

    fn clb4x4() -> Fabric {
        parse_device("device g\nrows 4\nrow_height 1\ncols CLB,CLB,CLB,CLB\nframe CLB 1\n").unwrap()
    }

    #[test]
    fn empty_grid_is_one_space() {
        let f = clb4x4();
        let st = OccupancyState::new(&f);
        let ws = detect_whitespace(&st);
        assert_eq!(ws.len(), 1);
        assert_eq!(ws[0].rect, Rect::new(0, 0, 3, 3));
        assert_eq!(ws[0].free, rv(16, 0, 0));
    }

    #[test]
    fn left_strip_claimed() {
        let f = clb4x4();
        let mut st = OccupancyState::new(&f);
        st.claim(Placement {
            region: 0,
            rect: Rect::new(0, 0, 1, 3),
            waste: ResourceVector::ZERO,
        });
        let ws = detect_whitespace(&st);
        assert_eq!(
            ws.iter().map(|w| w.rect).collect::<Vec<_>>(),
            vec![Rect::new(2, 0, 3, 3)]
        );
    }

    #[test]
    fn full_grid_has_no_space() {
        let f = clb4x4();
        let mut st = OccupancyState::new(&f);
        st.claim(Placement {
            region: 0,
            rect: f.grid_rect(),
            waste: ResourceVector::ZERO,
        });
        assert!(detect_whitespace(&st).is_empty());
    }

    #[test]
    fn cost_examples() {
        let w = WsWeights::default();
        assert_eq!(whitespace_cost(&rv(12, 0, 0), 5.0, &w), 3.0 * 12.0 + 5.0);
        assert_eq!(whitespace_cost(&rv(12, 0, 0), 5.0, &w), 41.0);
        assert_eq!(whitespace_cost(&ResourceVector::ZERO, 0.0, &w), 0.0);
        assert_eq!(whitespace_cost(&rv(1, 1, 1), 0.0, &w), 27.0 + 9.0 + 3.0);
    }

    #[test]
    fn weight_order_enforced() {
        assert!(WsWeights::new(27.0, 9.0, 3.0, 1.0).is_ok());
        assert!(WsWeights::new(1.0, 9.0, 3.0, 1.0).is_err());
        assert!(WsWeights::new(4.0, 3.0, 2.0, 0.0).is_err());
        assert!(WsWeights::new(4.0, 3.0, 3.0, 1.0).is_err());
    }

    #[test]
    fn dsp_spaces_cost_more_than_clb_spaces() {
        let w = WsWeights::default();
        for n in 1..20u32 {
            for dist in [0.0, 0.3, 1.0] {
                let with_dsp = whitespace_cost(&rv(n - 1, 0, 1), dist, &w);
                let clb_only = whitespace_cost(&rv(n, 0, 0), dist, &w);
                assert!(with_dsp > clb_only);
            }
        }
    }

    #[test]
    fn scoring_sorts_ascending() {
        let f =
            parse_device("device g\nrows 2\nrow_height 1\ncols CLB,DSP,CLB,CLB\nframe CLB 1\nframe DSP 1\n").unwrap();
        let mut st = OccupancyState::new(&f);
        st.claim(Placement {
            region: 0,
            rect: Rect::new(2, 0, 2, 0),
            waste: ResourceVector::ZERO,
        });
        let mut ws = detect_whitespace(&st);
        score_whitespaces(&mut ws, (2.0, 1.0), &f, &WsWeights::default());
        assert!(ws.windows(2).all(|p| p[0].cost <= p[1].cost));
        assert!(ws.iter().all(|w| w.cost > 0.0));
    }

    fn brute_force(free: &dyn Fn(u32, u32) -> bool, w: u32, h: u32) -> std::collections::BTreeSet<Rect> {
        let all_free = |r: &Rect| (r.x1..=r.x2).all(|x| (r.y1..=r.y2).all(|y| free(x, y)));
        let mut out = std::collections::BTreeSet::new();
        for x1 in 0..w {
            for x2 in x1..w {
                for y1 in 0..h {
                    for y2 in y1..h {
                        let r = Rect::new(x1, y1, x2, y2);
                        if !all_free(&r) {
                            continue;
                        }
                        let grows = [
                            x1.checked_sub(1).map(|x| Rect::new(x, y1, x2, y2)),
                            (x2 + 1 < w).then(|| Rect::new(x1, y1, x2 + 1, y2)),
                            y1.checked_sub(1).map(|y| Rect::new(x1, y, x2, y2)),
                            (y2 + 1 < h).then(|| Rect::new(x1, y1, x2, y2 + 1)),
                        ];
                        if grows.iter().flatten().all(|g| !all_free(g)) {
                            out.insert(r);
                        }
                    }
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(600))]
        #[test]
        fn matches_exhaustive_enumeration(
            width in 1u32..=12,
            (rows, row_height) in (1u32..=12).prop_flat_map(|r| (Just(r), 1u32..=12 / r)),
            claim_bits in proptest::collection::vec(any::<bool>(), 144),
            reserved in proptest::option::of((0u32..12, 0u32..12, 0u32..4, 0u32..4)),
        ) {
            let height = rows * row_height;
            let reserved: Vec<Rect> = reserved
                .map(|(x, y, dw, dh)| Rect::new(x % width, y % height, (x % width + dw).min(width - 1), (y % height + dh).min(height - 1)))
                .into_iter()
                .collect();
            let f = Fabric::new("g", rows, row_height, vec![crate::fabric::ColumnKind::Clb; width as usize], [1, 1, 1], reserved).unwrap();
            let mut st = OccupancyState::new(&f);
            for x in 0..width {
                for r in 0..rows {
                    let frame = crate::fabric::FrameId::new(x, r);
                    if claim_bits[(x * rows + r) as usize % 144] && !f.frame_is_reserved(frame) {
                        let rect = f.frame_rect(x, r, x, r);
                        if st.frames_available(x, x, r, r) {
                            st.claim(Placement { region: 0, rect, waste: ResourceVector::ZERO });
                        }
                    }
                }
            }
            let free = |x: u32, y: u32| !f.is_reserved_cell(x, y) && !st.is_claimed(crate::fabric::FrameId::new(x, y / row_height));
            let got: std::collections::BTreeSet<Rect> = detect_whitespace(&st).into_iter().map(|w| w.rect).collect();
            prop_assert_eq!(got, brute_force(&free, width, height));
        }
    }
}
