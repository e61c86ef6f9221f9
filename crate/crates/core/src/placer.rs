// SPDX-License-Identifier: Apache-2.0

//! Frame-exclusive region allocation.
//!
//! Every placement is a frame-aligned rectangle: it spans whole device rows
//! and owns every frame inside it. Three allocation schemes exist:
//!
//! * scheme 1 (DSP + BRAM + CLB): seed a DSP column, pull in the nearest
//!   BRAM column over the same device rows, then surround with CLBs;
//! * scheme 2 (DSP or BRAM, plus CLB): seed the scarce column, then grow
//!   CLBs sideways within the same device rows before adding rows;
//! * scheme 3 (CLB only): take the cheapest white space with enough CLBs
//!   and cut the smallest sub-rectangle at its corner nearest the design.
//!
//! Anchors are scanned columns left to right, device rows in ascending
//! index order. When a scheme finds nothing, an exhaustive search over all
//! frame-aligned rectangles is the last resort.

use std::collections::BTreeSet;

use crate::fabric::{ColumnKind, Fabric, FrameId, Rect, ResourceVector};
use crate::priority::{classify, RegionType};
use crate::whitespace::{detect_whitespace_within, score_whitespaces, WhiteSpace, WsWeights};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Placement {
    /// Index into the design's region list.
    pub region: usize,
    pub rect: Rect,
    pub waste: ResourceVector,
}

impl Placement {
    pub fn frames(&self, fabric: &Fabric) -> BTreeSet<FrameId> {
        fabric.frames_in(&self.rect).expect("placement lies inside the fabric")
    }
}

/// Frames needed to hold `n` blocks and the blocks left unused in them.
pub fn wasted_frames(n: u32, per_frame: u32) -> (u32, u32) {
    assert!(per_frame >= 1, "a frame holds at least one block");
    let frames = n.div_ceil(per_frame);
    (frames, frames * per_frame - n)
}

/// True when two inclusive rectangles share a cell.
pub fn overlaps(a: &Rect, b: &Rect) -> bool {
    a.intersects(b)
}

/// Where the allocation search may look and how the result is nudged.
///
/// Rectangles never start left of `min_col` or above `min_row`. Each
/// candidate is first tried shifted horizontally by `offset` columns and,
/// if that copy is illegal, at its own position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Anchor {
    pub min_col: u32,
    pub min_row: u32,
    pub offset: i32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocError {
    #[error("requirement {req} is not valid for {scheme}")]
    WrongScheme { req: ResourceVector, scheme: &'static str },
    #[error("no free frame-aligned rectangle covers {0}")]
    Infeasible(ResourceVector),
}

/// Inputs scheme 3 needs besides the occupancy itself.
#[derive(Debug, Clone, Copy)]
pub struct AllocContext {
    pub ws_weights: WsWeights,
    /// Design centroid to use while nothing is placed yet.
    pub idle_centroid: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct OccupancyState<'f> {
    fabric: &'f Fabric,
    claimed: Vec<bool>,
    placements: Vec<Placement>,
    // (cols + 1) x (rows + 1) prefix sums of claimed-or-reserved frames
    blocked_prefix: Vec<u32>,
}

impl<'f> OccupancyState<'f> {
    pub fn new(fabric: &'f Fabric) -> Self {
        let mut s = Self {
            fabric,
            claimed: vec![false; (fabric.num_columns() * fabric.num_rows()) as usize],
            placements: Vec::new(),
            blocked_prefix: Vec::new(),
        };
        s.rebuild_prefix();
        s
    }

    pub fn fabric(&self) -> &'f Fabric {
        self.fabric
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn into_placements(self) -> Vec<Placement> {
        self.placements
    }

    pub fn is_claimed(&self, frame: FrameId) -> bool {
        self.claimed[self.frame_index(frame.column, frame.device_row)]
    }

    pub fn claimed_frames(&self) -> BTreeSet<FrameId> {
        let rows = self.fabric.num_rows();
        (0..self.fabric.num_columns())
            .flat_map(|c| (0..rows).map(move |r| FrameId::new(c, r)))
            .filter(|f| self.is_claimed(*f))
            .collect()
    }

    fn frame_index(&self, col: u32, row: u32) -> usize {
        (col * self.fabric.num_rows() + row) as usize
    }

    fn rebuild_prefix(&mut self) {
        let cols = self.fabric.num_columns() as usize;
        let rows = self.fabric.num_rows() as usize;
        let stride = rows + 1;
        let mut p = vec![0u32; (cols + 1) * stride];
        for c in 0..cols {
            for r in 0..rows {
                let frame = FrameId::new(c as u32, r as u32);
                let blocked = self.claimed[c * rows + r] || self.fabric.frame_is_reserved(frame);
                p[(c + 1) * stride + r + 1] =
                    u32::from(blocked) + p[c * stride + r + 1] + p[(c + 1) * stride + r] - p[c * stride + r];
            }
        }
        self.blocked_prefix = p;
    }

    /// True when every frame in columns `x1..=x2`, device rows `r1..=r2` is
    /// neither claimed nor touched by the static region.
    pub fn frames_available(&self, x1: u32, x2: u32, r1: u32, r2: u32) -> bool {
        let stride = self.fabric.num_rows() as usize + 1;
        let (x1, x2, r1, r2) = (x1 as usize, x2 as usize + 1, r1 as usize, r2 as usize + 1);
        let p = &self.blocked_prefix;
        p[x2 * stride + r2] + p[x1 * stride + r1] == p[x1 * stride + r2] + p[x2 * stride + r1]
    }

    /// Claims the placement's frames. Panics if any of them is taken.
    pub fn claim(&mut self, placement: Placement) {
        let h = self.fabric.row_height();
        let rect = placement.rect;
        assert!(
            self.fabric.is_frame_aligned(&rect),
            "placement {rect} is not frame-aligned"
        );
        assert!(
            self.frames_available(rect.x1, rect.x2, rect.y1 / h, rect.y2 / h),
            "placement {rect} reuses a claimed frame"
        );
        for c in rect.x1..=rect.x2 {
            for r in rect.y1 / h..=rect.y2 / h {
                let i = self.frame_index(c, r);
                self.claimed[i] = true;
            }
        }
        self.placements.push(placement);
        self.rebuild_prefix();
    }

    /// Builds a placement for `rect`, whose capacity must cover `req`.
    pub fn make_placement(&self, region: usize, rect: Rect, req: &ResourceVector) -> Placement {
        let cap = self.fabric.capacity(&rect).expect("rect in bounds");
        let waste = cap.checked_sub(req).expect("rect capacity covers the requirement");
        Placement { region, rect, waste }
    }

    /// Validates a candidate after applying the anchor's offset.
    fn accept(&self, rect: Rect, req: &ResourceVector, anchor: &Anchor) -> Option<Rect> {
        if anchor.offset != 0 {
            if let Some(r) = rect
                .shifted_x(i64::from(anchor.offset))
                .and_then(|r| self.legal(r, req, anchor))
            {
                return Some(r);
            }
        }
        self.legal(rect, req, anchor)
    }

    /// `rect` is frame-aligned, inside the anchor's quadrant, free, and
    /// covers `req`.
    pub fn admits(&self, rect: &Rect, req: &ResourceVector, anchor: &Anchor) -> bool {
        self.fabric.check_rect(rect).is_ok()
            && self.fabric.is_frame_aligned(rect)
            && self.legal(*rect, req, anchor).is_some()
    }

    fn legal(&self, r: Rect, req: &ResourceVector, anchor: &Anchor) -> Option<Rect> {
        if r.x1 < anchor.min_col || r.x2 >= self.fabric.num_columns() {
            return None;
        }
        let h = self.fabric.row_height();
        let (r1, r2) = (r.y1 / h, r.y2 / h);
        if r1 < anchor.min_row || !self.frames_available(r.x1, r.x2, r1, r2) {
            return None;
        }
        let cap = self.fabric.aligned_capacity(r.x1, r.x2, r2 - r1 + 1);
        req.fits_within(&cap).then_some(r)
    }

    fn column_free(&self, x: u32, r1: u32, r2: u32) -> bool {
        self.frames_available(x, x, r1, r2)
    }

    /// Widens `[x, x]` over device rows `r1..=r2` until it covers `req`,
    /// each step reaching for the nearest free column of the scarcest kind
    /// still short (DSP, then BRAM, then CLB). Ties go left.
    fn grow(&self, x: u32, r1: u32, r2: u32, req: &ResourceVector, min_col: u32) -> Option<(u32, u32)> {
        let rows = r2 - r1 + 1;
        let (mut lo, mut hi) = (x, x);
        loop {
            let cap = self.fabric.aligned_capacity(lo, hi, rows);
            if req.fits_within(&cap) {
                return Some((lo, hi));
            }
            let short = [ColumnKind::Dsp, ColumnKind::Bram, ColumnKind::Clb]
                .into_iter()
                .find(|k| cap.get(*k) < req.get(*k))?;
            let left = (min_col..lo)
                .rev()
                .take_while(|c| self.column_free(*c, r1, r2))
                .find(|c| self.fabric.column(*c) == short);
            let right = (hi + 1..self.fabric.num_columns())
                .take_while(|c| self.column_free(*c, r1, r2))
                .find(|c| self.fabric.column(*c) == short);
            match (left, right) {
                (Some(l), Some(r)) if lo - l <= r - hi => lo = l,
                (Some(_), Some(r)) => hi = r,
                (Some(l), None) => lo = l,
                (None, Some(r)) => hi = r,
                (None, None) => return None,
            }
        }
    }

    fn scan_columnar(&self, req: &ResourceVector, seed: ColumnKind, anchor: &Anchor) -> Option<Rect> {
        let fabric = self.fabric;
        let rows = fabric.num_rows();
        let per_column = wasted_frames(req.get(seed), fabric.slices_per_frame(seed)).0.max(1);
        for x in anchor.min_col..fabric.num_columns() {
            if fabric.column(x) != seed {
                continue;
            }
            for r1 in anchor.min_row..rows {
                let h_first = per_column.min(rows - r1);
                for h in h_first..=rows - r1 {
                    let r2 = r1 + h - 1;
                    if !self.column_free(x, r1, r2) {
                        break;
                    }
                    if let Some((lo, hi)) = self.grow(x, r1, r2, req, anchor.min_col) {
                        let rect = fabric.frame_rect(lo, r1, hi, r2);
                        if let Some(r) = self.accept(rect, req, anchor) {
                            return Some(r);
                        }
                    }
                }
            }
        }
        None
    }

    /// Smallest frame-aligned rectangle inside `ws` anchored at the corner
    /// nearest `centroid` that covers `req`. Ties prefer fewer device rows.
    fn carve(&self, ws: &Rect, req: &ResourceVector, centroid: (f64, f64)) -> Option<Rect> {
        let h = self.fabric.row_height();
        let r_lo = ws.y1.div_ceil(h);
        let r_end = (ws.y2 + 1) / h; // exclusive
        if r_lo >= r_end {
            return None;
        }
        let r_hi = r_end - 1;
        let aligned = self.fabric.frame_rect(ws.x1, r_lo, ws.x2, r_hi);
        let corners = [
            (aligned.x1, aligned.y1, false, false),
            (aligned.x2 + 1, aligned.y1, true, false),
            (aligned.x1, aligned.y2 + 1, false, true),
            (aligned.x2 + 1, aligned.y2 + 1, true, true),
        ];
        let dist = |(cx, cy, _, _): &(u32, u32, bool, bool)| {
            let dx = f64::from(*cx) - centroid.0;
            let dy = f64::from(*cy) - centroid.1;
            dx * dx + dy * dy
        };
        let mut best_corner = corners[0];
        for c in &corners[1..] {
            if dist(c) < dist(&best_corner) {
                best_corner = *c;
            }
        }
        let (_, _, from_right, from_bottom) = best_corner;

        let width = aligned.width();
        let n_rows = r_hi - r_lo + 1;
        let mut best: Option<(u64, u32, Rect)> = None;
        for rows in 1..=n_rows {
            let (r1, r2) = if from_bottom {
                (r_hi + 1 - rows, r_hi)
            } else {
                (r_lo, r_lo + rows - 1)
            };
            for w in 1..=width {
                let (x1, x2) = if from_right {
                    (aligned.x2 + 1 - w, aligned.x2)
                } else {
                    (aligned.x1, aligned.x1 + w - 1)
                };
                if !self.frames_available(x1, x2, r1, r2) {
                    break;
                }
                let cap = self.fabric.aligned_capacity(x1, x2, rows);
                if req.fits_within(&cap) {
                    let area = u64::from(w) * u64::from(rows);
                    if best.is_none_or(|(a, _, _)| area < a) {
                        best = Some((area, rows, self.fabric.frame_rect(x1, r1, x2, r2)));
                    }
                    break;
                }
            }
        }
        best.map(|(_, _, r)| r)
    }

    /// Design centroid: area-weighted mean of placed rect centers, or
    /// `idle` when nothing is placed.
    pub fn centroid_or(&self, idle: (f64, f64)) -> (f64, f64) {
        let rects: Vec<Rect> = self.placements.iter().map(|p| p.rect).collect();
        crate::cost::rect_centroid(&rects).unwrap_or(idle)
    }

    /// Last-resort search over every frame-aligned rectangle in the anchor's
    /// quadrant: smallest area first, then leftmost, then topmost.
    pub fn allocate_exhaustive(
        &self,
        region: usize,
        req: &ResourceVector,
        anchor: &Anchor,
    ) -> Result<Placement, AllocError> {
        let fabric = self.fabric;
        let (cols, rows) = (fabric.num_columns(), fabric.num_rows());
        let mut best: Option<(u64, u32, u32, Rect)> = None;
        for r1 in anchor.min_row..rows {
            for r2 in r1..rows {
                let h = r2 - r1 + 1;
                for x1 in anchor.min_col..cols {
                    for x2 in x1..cols {
                        if !self.frames_available(x1, x2, r1, r2) {
                            break;
                        }
                        if req.fits_within(&fabric.aligned_capacity(x1, x2, h)) {
                            let area = u64::from(x2 - x1 + 1) * u64::from(h);
                            let key = (area, x1, r1);
                            if best.is_none_or(|(a, bx, br, _)| key < (a, bx, br)) {
                                best = Some((area, x1, r1, fabric.frame_rect(x1, r1, x2, r2)));
                            }
                            break;
                        }
                    }
                }
            }
        }
        best.map(|(_, _, _, rect)| self.make_placement(region, rect, req))
            .ok_or(AllocError::Infeasible(*req))
    }

    /// Places a region by its type's scheme, falling back to exhaustive
    /// search. Does not claim.
    pub fn place_region(
        &self,
        region: usize,
        req: &ResourceVector,
        anchor: &Anchor,
        ctx: &AllocContext,
    ) -> Result<Placement, AllocError> {
        let scheme = match classify(req) {
            Ok(RegionType::Type1) => allocate_scheme1(self, region, req, anchor),
            Ok(RegionType::Type2 | RegionType::Type3) => allocate_scheme2(self, region, req, anchor),
            Ok(RegionType::Type4) => {
                let mut ws = detect_whitespace_within(self, anchor.min_col, anchor.min_row);
                let centroid = self.centroid_or(ctx.idle_centroid);
                score_whitespaces(&mut ws, centroid, self.fabric, &ctx.ws_weights);
                allocate_scheme3(self, region, req, &ws, anchor, centroid)
            }
            Err(_) => {
                return Err(AllocError::WrongScheme {
                    req: *req,
                    scheme: "any scheme",
                })
            }
        };
        scheme.or_else(|_| self.allocate_exhaustive(region, req, anchor))
    }
}

/// Scheme 1, for regions needing DSP, BRAM and CLB.
pub fn allocate_scheme1(
    state: &OccupancyState<'_>,
    region: usize,
    req: &ResourceVector,
    anchor: &Anchor,
) -> Result<Placement, AllocError> {
    if classify(req) != Ok(RegionType::Type1) {
        return Err(AllocError::WrongScheme {
            req: *req,
            scheme: "scheme 1",
        });
    }
    state
        .scan_columnar(req, ColumnKind::Dsp, anchor)
        .map(|r| state.make_placement(region, r, req))
        .ok_or(AllocError::Infeasible(*req))
}

/// Scheme 2, for regions needing CLB plus exactly one of DSP or BRAM.
pub fn allocate_scheme2(
    state: &OccupancyState<'_>,
    region: usize,
    req: &ResourceVector,
    anchor: &Anchor,
) -> Result<Placement, AllocError> {
    let seed = match classify(req) {
        Ok(RegionType::Type2) => ColumnKind::Dsp,
        Ok(RegionType::Type3) => ColumnKind::Bram,
        _ => {
            return Err(AllocError::WrongScheme {
                req: *req,
                scheme: "scheme 2",
            })
        }
    };
    state
        .scan_columnar(req, seed, anchor)
        .map(|r| state.make_placement(region, r, req))
        .ok_or(AllocError::Infeasible(*req))
}

/// Scheme 3, for CLB-only regions. `ws_list` must already be sorted by cost.
pub fn allocate_scheme3(
    state: &OccupancyState<'_>,
    region: usize,
    req: &ResourceVector,
    ws_list: &[WhiteSpace],
    anchor: &Anchor,
    centroid: (f64, f64),
) -> Result<Placement, AllocError> {
    if classify(req) != Ok(RegionType::Type4) {
        return Err(AllocError::WrongScheme {
            req: *req,
            scheme: "scheme 3",
        });
    }
    for ws in ws_list {
        if ws.free.clb < req.clb {
            continue;
        }
        let Some(rect) = state.carve(&ws.rect, req, centroid) else {
            continue;
        };
        if let Some(r) = state.accept(rect, req, anchor) {
            return Ok(state.make_placement(region, r, req));
        }
    }
    Err(AllocError::Infeasible(*req))
}
