// SPDX-License-Identifier: Apache-2.0

//! Column-heterogeneous device model.
//!
//! The fabric is a grid of cells: `x` indexes columns, `y` indexes CLB rows
//! with `y = 0` at the top of the die. Every column holds one resource kind.
//! `row_height` consecutive cells of a column form one frame, the atomic
//! reconfiguration unit, so frame `(column, device_row)` covers cells
//! `device_row * row_height ..= device_row * row_height + row_height - 1`.
//! A complete frame of kind `k` holds `slices_per_frame(k)` blocks.

use std::collections::BTreeSet;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::Serialize;

use crate::error::{OutOfBounds, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ColumnKind {
    Clb,
    Bram,
    Dsp,
}

impl ColumnKind {
    pub const ALL: [ColumnKind; 3] = [ColumnKind::Clb, ColumnKind::Bram, ColumnKind::Dsp];

    pub fn name(self) -> &'static str {
        match self {
            ColumnKind::Clb => "CLB",
            ColumnKind::Bram => "BRAM",
            ColumnKind::Dsp => "DSP",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "CLB" => Some(ColumnKind::Clb),
            "BRAM" => Some(ColumnKind::Bram),
            "DSP" => Some(ColumnKind::Dsp),
            _ => None,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Block counts per resource kind. Used for demands, capacities and waste.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct ResourceVector {
    pub clb: u32,
    pub bram: u32,
    pub dsp: u32,
}

impl ResourceVector {
    pub const ZERO: ResourceVector = ResourceVector {
        clb: 0,
        bram: 0,
        dsp: 0,
    };

    pub const fn new(clb: u32, bram: u32, dsp: u32) -> Self {
        Self { clb, bram, dsp }
    }

    pub fn get(&self, kind: ColumnKind) -> u32 {
        match kind {
            ColumnKind::Clb => self.clb,
            ColumnKind::Bram => self.bram,
            ColumnKind::Dsp => self.dsp,
        }
    }

    pub fn get_mut(&mut self, kind: ColumnKind) -> &mut u32 {
        match kind {
            ColumnKind::Clb => &mut self.clb,
            ColumnKind::Bram => &mut self.bram,
            ColumnKind::Dsp => &mut self.dsp,
        }
    }

    /// Componentwise `self <= other`.
    pub fn fits_within(&self, other: &ResourceVector) -> bool {
        self.clb <= other.clb && self.bram <= other.bram && self.dsp <= other.dsp
    }

    pub fn componentwise_max(&self, other: &ResourceVector) -> ResourceVector {
        ResourceVector::new(
            self.clb.max(other.clb),
            self.bram.max(other.bram),
            self.dsp.max(other.dsp),
        )
    }

    /// Componentwise difference, `None` if any component would go negative.
    pub fn checked_sub(&self, other: &ResourceVector) -> Option<ResourceVector> {
        Some(ResourceVector::new(
            self.clb.checked_sub(other.clb)?,
            self.bram.checked_sub(other.bram)?,
            self.dsp.checked_sub(other.dsp)?,
        ))
    }

    pub fn saturating_sub(&self, other: &ResourceVector) -> ResourceVector {
        ResourceVector::new(
            self.clb.saturating_sub(other.clb),
            self.bram.saturating_sub(other.bram),
            self.dsp.saturating_sub(other.dsp),
        )
    }

    pub fn is_zero(&self) -> bool {
        *self == Self::ZERO
    }
}

impl Add for ResourceVector {
    type Output = ResourceVector;

    fn add(self, rhs: ResourceVector) -> ResourceVector {
        ResourceVector::new(self.clb + rhs.clb, self.bram + rhs.bram, self.dsp + rhs.dsp)
    }
}

impl AddAssign for ResourceVector {
    fn add_assign(&mut self, rhs: ResourceVector) {
        *self = *self + rhs;
    }
}

impl Sum for ResourceVector {
    fn sum<I: Iterator<Item = ResourceVector>>(iter: I) -> Self {
        iter.fold(ResourceVector::ZERO, Add::add)
    }
}

impl fmt::Display for ResourceVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{clb {}, bram {}, dsp {}}}", self.clb, self.bram, self.dsp)
    }
}

/// Inclusive cell rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Rect {
    pub x1: u32,
    pub y1: u32,
    pub x2: u32,
    pub y2: u32,
}

impl Rect {
    pub fn new(x1: u32, y1: u32, x2: u32, y2: u32) -> Self {
        assert!(x1 <= x2 && y1 <= y2, "degenerate rect ({x1},{y1},{x2},{y2})");
        Self { x1, y1, x2, y2 }
    }

    pub fn width(&self) -> u32 {
        self.x2 - self.x1 + 1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1 + 1
    }

    pub fn area(&self) -> u64 {
        u64::from(self.width()) * u64::from(self.height())
    }

    /// True when the two cell sets share at least one cell.
    pub fn intersects(&self, other: &Rect) -> bool {
        self.x1 <= other.x2 && other.x1 <= self.x2 && self.y1 <= other.y2 && other.y1 <= self.y2
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.x1 <= other.x1 && other.x2 <= self.x2 && self.y1 <= other.y1 && other.y2 <= self.y2
    }

    pub fn contains_cell(&self, x: u32, y: u32) -> bool {
        (self.x1..=self.x2).contains(&x) && (self.y1..=self.y2).contains(&y)
    }

    /// Center in boundary coordinates, where the rect spans `[x1, x2+1) x [y1, y2+1)`.
    pub fn center(&self) -> (f64, f64) {
        (
            (f64::from(self.x1) + f64::from(self.x2) + 1.0) / 2.0,
            (f64::from(self.y1) + f64::from(self.y2) + 1.0) / 2.0,
        )
    }

    /// Horizontal translation; `None` if it would leave the non-negative half-plane.
    pub fn shifted_x(&self, dx: i64) -> Option<Rect> {
        let x1 = i64::from(self.x1) + dx;
        let x2 = i64::from(self.x2) + dx;
        if x1 < 0 || x2 > i64::from(u32::MAX) {
            return None;
        }
        Some(Rect::new(x1 as u32, self.y1, x2 as u32, self.y2))
    }
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.x1, self.y1, self.x2, self.y2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FrameId {
    pub column: u32,
    pub device_row: u32,
}

impl FrameId {
    pub fn new(column: u32, device_row: u32) -> Self {
        Self { column, device_row }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid fabric: {0}")]
pub struct InvalidFabric(pub String);

pub const DEFAULT_SLICES_PER_FRAME: [u32; 3] = [20, 2, 4];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fabric {
    name: String,
    num_rows: u32,
    row_height: u32,
    columns: Vec<ColumnKind>,
    slices_per_frame: [u32; 3],
    reserved: Vec<Rect>,
    // per column: number of non-reserved cells in y < index
    free_prefix: Vec<Vec<u32>>,
    // column-major: col * num_rows + row
    frame_reserved: Vec<bool>,
    // per kind: number of columns of that kind with x < index
    kind_prefix: [Vec<u32>; 3],
}

impl Fabric {
    pub fn new(
        name: impl Into<String>,
        num_rows: u32,
        row_height: u32,
        columns: Vec<ColumnKind>,
        slices_per_frame: [u32; 3],
        reserved: Vec<Rect>,
    ) -> Result<Self, InvalidFabric> {
        if columns.is_empty() {
            return Err(InvalidFabric("at least one column is required".into()));
        }
        if num_rows == 0 {
            return Err(InvalidFabric("rows must be at least 1".into()));
        }
        if row_height == 0 {
            return Err(InvalidFabric("row_height must be at least 1".into()));
        }
        if let Some(kind) = ColumnKind::ALL.into_iter().find(|k| slices_per_frame[k.index()] == 0) {
            return Err(InvalidFabric(format!("{kind} frame must hold at least one block")));
        }
        let width = columns.len() as u32;
        let height = num_rows
            .checked_mul(row_height)
            .ok_or_else(|| InvalidFabric("grid height overflows".into()))?;
        for r in &reserved {
            if r.x2 >= width || r.y2 >= height {
                return Err(InvalidFabric(format!(
                    "reserved rect {r} lies outside the {width}x{height} grid"
                )));
            }
        }

        let mut free_prefix = Vec::with_capacity(columns.len());
        for x in 0..width {
            let mut prefix = Vec::with_capacity(height as usize + 1);
            prefix.push(0);
            let mut acc = 0;
            for y in 0..height {
                if !reserved.iter().any(|r| r.contains_cell(x, y)) {
                    acc += 1;
                }
                prefix.push(acc);
            }
            free_prefix.push(prefix);
        }

        let mut frame_reserved = vec![false; (width * num_rows) as usize];
        for x in 0..width {
            for row in 0..num_rows {
                let lo = row * row_height;
                let hi = lo + row_height;
                let free = free_prefix[x as usize][hi as usize] - free_prefix[x as usize][lo as usize];
                frame_reserved[(x * num_rows + row) as usize] = free < row_height;
            }
        }

        let mut kind_prefix: [Vec<u32>; 3] = Default::default();
        for kind in ColumnKind::ALL {
            let prefix = &mut kind_prefix[kind.index()];
            prefix.push(0);
            let mut acc = 0;
            for c in &columns {
                if *c == kind {
                    acc += 1;
                }
                prefix.push(acc);
            }
        }

        Ok(Self {
            name: name.into(),
            num_rows,
            row_height,
            columns,
            slices_per_frame,
            reserved,
            free_prefix,
            frame_reserved,
            kind_prefix,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_rows(&self) -> u32 {
        self.num_rows
    }

    pub fn row_height(&self) -> u32 {
        self.row_height
    }

    pub fn columns(&self) -> &[ColumnKind] {
        &self.columns
    }

    pub fn column(&self, x: u32) -> ColumnKind {
        self.columns[x as usize]
    }

    pub fn num_columns(&self) -> u32 {
        self.columns.len() as u32
    }

    /// Grid height in cells.
    pub fn height(&self) -> u32 {
        self.num_rows * self.row_height
    }

    pub fn slices_per_frame(&self, kind: ColumnKind) -> u32 {
        self.slices_per_frame[kind.index()]
    }

    pub fn reserved(&self) -> &[Rect] {
        &self.reserved
    }

    pub fn grid_rect(&self) -> Rect {
        Rect::new(0, 0, self.num_columns() - 1, self.height() - 1)
    }

    pub fn is_reserved_cell(&self, x: u32, y: u32) -> bool {
        let p = &self.free_prefix[x as usize];
        p[y as usize + 1] == p[y as usize]
    }

    /// True if any cell of the frame belongs to the static region.
    pub fn frame_is_reserved(&self, frame: FrameId) -> bool {
        self.frame_reserved[(frame.column * self.num_rows + frame.device_row) as usize]
    }

    /// Cell rectangle spanned by frame-aligned columns `x1..=x2` and device rows `r1..=r2`.
    pub fn frame_rect(&self, x1: u32, r1: u32, x2: u32, r2: u32) -> Rect {
        Rect::new(x1, r1 * self.row_height, x2, (r2 + 1) * self.row_height - 1)
    }

    pub fn check_rect(&self, rect: &Rect) -> Result<(), OutOfBounds> {
        if rect.x2 >= self.num_columns() || rect.y2 >= self.height() {
            Err(OutOfBounds {
                rect: *rect,
                width: self.num_columns(),
                height: self.height(),
            })
        } else {
            Ok(())
        }
    }

    pub fn is_frame_aligned(&self, rect: &Rect) -> bool {
        rect.y1.is_multiple_of(self.row_height) && (rect.y2 + 1).is_multiple_of(self.row_height)
    }

    /// Blocks of each kind inside `rect`, static-region cells excluded.
    ///
    /// A column contributes `slices_per_frame` blocks for every device row
    /// it covers completely; a partially covered device row contributes in
    /// proportion to its covered free cells, rounded down.
    pub fn capacity(&self, rect: &Rect) -> Result<ResourceVector, OutOfBounds> {
        self.check_rect(rect)?;
        let h = self.row_height;
        let mut cap = ResourceVector::ZERO;
        for x in rect.x1..=rect.x2 {
            let kind = self.column(x);
            let per_frame = self.slices_per_frame(kind);
            let prefix = &self.free_prefix[x as usize];
            let mut blocks = 0u64;
            for row in rect.y1 / h..=rect.y2 / h {
                let lo = (row * h).max(rect.y1);
                let hi = ((row + 1) * h - 1).min(rect.y2);
                let cells = prefix[hi as usize + 1] - prefix[lo as usize];
                blocks += u64::from(per_frame) * u64::from(cells) / u64::from(h);
            }
            *cap.get_mut(kind) += blocks as u32;
        }
        Ok(cap)
    }

    /// Capacity of the frame-aligned block of columns `x1..=x2` over `rows`
    /// device rows, assuming none of those frames is reserved.
    pub(crate) fn aligned_capacity(&self, x1: u32, x2: u32, rows: u32) -> ResourceVector {
        let mut cap = ResourceVector::ZERO;
        for kind in ColumnKind::ALL {
            let p = &self.kind_prefix[kind.index()];
            let n = p[x2 as usize + 1] - p[x1 as usize];
            *cap.get_mut(kind) = n * rows * self.slices_per_frame(kind);
        }
        cap
    }

    pub fn total(&self) -> ResourceVector {
        self.capacity(&self.grid_rect()).expect("grid rect is in bounds")
    }

    /// Every frame that shares at least one cell with `rect`.
    pub fn frames_in(&self, rect: &Rect) -> Result<BTreeSet<FrameId>, OutOfBounds> {
        self.check_rect(rect)?;
        let h = self.row_height;
        let mut frames = BTreeSet::new();
        for x in rect.x1..=rect.x2 {
            for row in rect.y1 / h..=rect.y2 / h {
                frames.insert(FrameId::new(x, row));
            }
        }
        Ok(frames)
    }

    /// Frame counts per kind for `rect`.
    pub fn frame_counts(&self, rect: &Rect) -> Result<ResourceVector, OutOfBounds> {
        let mut counts = ResourceVector::ZERO;
        for f in self.frames_in(rect)? {
            *counts.get_mut(self.column(f.column)) += 1;
        }
        Ok(counts)
    }

    /// Canonical device-file text; `parse_device` reads it back unchanged.
    pub fn to_device_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("device {}\n", self.name));
        out.push_str(&format!("rows {}\n", self.num_rows));
        out.push_str(&format!("row_height {}\n", self.row_height));
        let cols: Vec<&str> = self.columns.iter().map(|c| c.name()).collect();
        out.push_str(&format!("cols {}\n", cols.join(",")));
        for kind in ColumnKind::ALL {
            out.push_str(&format!("frame {} {}\n", kind, self.slices_per_frame(kind)));
        }
        for r in &self.reserved {
            out.push_str(&format!("reserved {} {} {} {}\n", r.x1, r.y1, r.x2, r.y2));
        }
        out
    }
}

pub(crate) fn parse_u32(tok: &str, line: usize, what: &str) -> Result<u32, ParseError> {
    tok.parse::<u32>().map_err(|_| {
        ParseError::new(
            line,
            format!("expected a non-negative integer for {what}, found `{tok}`"),
        )
    })
}

/// Strips `#` comments and surrounding whitespace; yields `(line_no, tokens)`
/// for non-empty lines.
pub(crate) fn tokenized_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split('#').next().unwrap_or("");
        let toks: Vec<&str> = content.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub fn parse_device(text: &str) -> Result<Fabric, ParseError> {
    let mut name = None;
    let mut rows = None;
    let mut row_height = None;
    let mut columns: Option<Vec<ColumnKind>> = None;
    let mut slices = DEFAULT_SLICES_PER_FRAME;
    let mut reserved = Vec::new();
    let mut last_line = 0;

    for (line, toks) in tokenized_lines(text) {
        last_line = line;
        let arity = |n: usize| -> Result<(), ParseError> {
            if toks.len() != n + 1 {
                Err(ParseError::new(
                    line,
                    format!("`{}` takes {} argument(s), found {}", toks[0], n, toks.len() - 1),
                ))
            } else {
                Ok(())
            }
        };
        let once = |seen: bool| -> Result<(), ParseError> {
            if seen {
                Err(ParseError::new(line, format!("duplicate `{}` directive", toks[0])))
            } else {
                Ok(())
            }
        };
        match toks[0] {
            "device" => {
                arity(1)?;
                once(name.is_some())?;
                name = Some(toks[1].to_string());
            }
            "rows" => {
                arity(1)?;
                once(rows.is_some())?;
                rows = Some(parse_u32(toks[1], line, "rows")?);
            }
            "row_height" => {
                arity(1)?;
                once(row_height.is_some())?;
                row_height = Some(parse_u32(toks[1], line, "row_height")?);
            }
            "cols" => {
                once(columns.is_some())?;
                if toks.len() < 2 {
                    return Err(ParseError::new(line, "`cols` needs a column list"));
                }
                let list = toks[1..].join("");
                let mut kinds = Vec::new();
                for item in list.split(',') {
                    let kind = ColumnKind::from_name(item).ok_or_else(|| {
                        ParseError::new(
                            line,
                            format!("unknown column kind `{item}` (expected CLB, BRAM or DSP)"),
                        )
                    })?;
                    kinds.push(kind);
                }
                columns = Some(kinds);
            }
            "frame" => {
                arity(2)?;
                let kind = ColumnKind::from_name(toks[1]).ok_or_else(|| {
                    ParseError::new(
                        line,
                        format!("unknown column kind `{}` (expected CLB, BRAM or DSP)", toks[1]),
                    )
                })?;
                slices[kind.index()] = parse_u32(toks[2], line, "slices per frame")?;
            }
            "reserved" => {
                arity(4)?;
                let v: Vec<u32> = toks[1..]
                    .iter()
                    .map(|t| parse_u32(t, line, "reserved coordinate"))
                    .collect::<Result<_, _>>()?;
                if v[0] > v[2] || v[1] > v[3] {
                    return Err(ParseError::new(line, "reserved rect needs x1 <= x2 and y1 <= y2"));
                }
                reserved.push((line, Rect::new(v[0], v[1], v[2], v[3])));
            }
            other => {
                return Err(ParseError::new(line, format!("unknown directive `{other}`")));
            }
        }
    }

    let missing = |what: &str| ParseError::whole_file(format!("missing `{what}` directive"));
    let name = name.ok_or_else(|| missing("device"))?;
    let rows = rows.ok_or_else(|| missing("rows"))?;
    let row_height = row_height.ok_or_else(|| missing("row_height"))?;
    let columns = columns.ok_or_else(|| missing("cols"))?;

    let width = columns.len() as u32;
    let height = rows.saturating_mul(row_height);
    for (line, r) in &reserved {
        if r.x2 >= width || r.y2 >= height {
            return Err(ParseError::new(
                *line,
                format!("reserved rect {r} lies outside the {width}x{height} grid"),
            ));
        }
    }
    let reserved = reserved.into_iter().map(|(_, r)| r).collect();
    Fabric::new(name, rows, row_height, columns, slices, reserved).map_err(|e| ParseError::new(last_line, e.0))
}
