// SPDX-License-Identifier: Apache-2.0

//! Plan files: one `pblock` record per region.
//!
//! ```text
//! plan <name>
//! pblock <region>
//! rect <x1> <y1> <x2> <y2>
//! frames CLB <n> BRAM <n> DSP <n>
//! ```
//!
//! Rect coordinates are inclusive cell indices; the boundary-coordinate
//! box is `[x1, x2 + 1) x [y1, y2 + 1)`.

use crate::design::Design;
use crate::error::ParseError;
use crate::fabric::{parse_u32, tokenized_lines, Fabric, Rect, ResourceVector};
use crate::placer::Placement;
use crate::priority::medal_sort;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PblockRecord {
    pub name: String,
    pub rect: Rect,
    pub frames: ResourceVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintDoc {
    pub name: String,
    pub records: Vec<PblockRecord>,
}

/// Records in medal-sort order; regions the design cannot classify keep
/// their design order at the end.
pub fn constraint_doc(name: &str, design: &Design, fabric: &Fabric, placements: &[Placement]) -> ConstraintDoc {
    let mut order: Vec<usize> = medal_sort(design)
        .map(|v| v.into_iter().map(|s| s.region).collect())
        .unwrap_or_else(|_| (0..design.regions.len()).collect());
    order.retain(|r| placements.iter().any(|p| p.region == *r));
    let records = order
        .into_iter()
        .map(|r| {
            let p = placements.iter().find(|p| p.region == r).expect("retained above");
            PblockRecord {
                name: design.regions[r].name.clone(),
                rect: p.rect,
                frames: fabric.frame_counts(&p.rect).expect("placement inside fabric"),
            }
        })
        .collect();
    ConstraintDoc {
        name: name.to_string(),
        records,
    }
}

impl ConstraintDoc {
    pub fn to_text(&self) -> String {
        let mut out = format!("plan {}\n", self.name);
        for r in &self.records {
            let (rect, f) = (r.rect, r.frames);
            out.push_str(&format!("pblock {}\n", r.name));
            out.push_str(&format!("rect {} {} {} {}\n", rect.x1, rect.y1, rect.x2, rect.y2));
            out.push_str(&format!("frames CLB {} BRAM {} DSP {}\n", f.clb, f.bram, f.dsp));
        }
        out
    }

    /// Grid-named variant for tools that expect pblock commands. The
    /// `X<x>Y<y>` names are fabric coordinates, not vendor site names.
    pub fn to_xdc_text(&self) -> String {
        let mut out = String::from(
            "# WARNING: X<x>Y<y> are fabric grid coordinates, not vendor site names.\n\
             # Map them to device sites before use.\n",
        );
        out.push_str(&format!("# plan {}\n", self.name));
        for r in &self.records {
            let (rect, f) = (r.rect, r.frames);
            out.push_str(&format!("create_pblock {}\n", r.name));
            out.push_str(&format!(
                "resize_pblock {} -add {{X{}Y{}:X{}Y{}}}\n",
                r.name, rect.x1, rect.y1, rect.x2, rect.y2
            ));
            out.push_str(&format!("# frames CLB {} BRAM {} DSP {}\n", f.clb, f.bram, f.dsp));
        }
        out
    }
}

pub fn emit_constraints(name: &str, design: &Design, fabric: &Fabric, placements: &[Placement]) -> String {
    constraint_doc(name, design, fabric, placements).to_text()
}

pub fn parse_plan(text: &str) -> Result<ConstraintDoc, ParseError> {
    let mut name = None;
    let mut records: Vec<PblockRecord> = Vec::new();
    // fields still missing from the last pblock
    let mut pending: Option<(usize, String, Option<Rect>, Option<ResourceVector>)> = None;

    fn finish(
        pending: &mut Option<(usize, String, Option<Rect>, Option<ResourceVector>)>,
        records: &mut Vec<PblockRecord>,
    ) -> Result<(), ParseError> {
        if let Some((line, name, rect, frames)) = pending.take() {
            let rect = rect.ok_or_else(|| ParseError::new(line, format!("pblock `{name}` has no `rect` line")))?;
            let frames =
                frames.ok_or_else(|| ParseError::new(line, format!("pblock `{name}` has no `frames` line")))?;
            records.push(PblockRecord { name, rect, frames });
        }
        Ok(())
    }

    for (line, toks) in tokenized_lines(text) {
        match toks[0] {
            "plan" => {
                if toks.len() != 2 {
                    return Err(ParseError::new(line, "expected `plan <name>`"));
                }
                if name.is_some() {
                    return Err(ParseError::new(line, "duplicate `plan` header"));
                }
                name = Some(toks[1].to_string());
            }
            _ if name.is_none() => {
                return Err(ParseError::new(line, "expected `plan <name>` header first"));
            }
            "pblock" => {
                if toks.len() != 2 {
                    return Err(ParseError::new(line, "expected `pblock <region>`"));
                }
                finish(&mut pending, &mut records)?;
                pending = Some((line, toks[1].to_string(), None, None));
            }
            "rect" => {
                let Some(p) = pending.as_mut() else {
                    return Err(ParseError::new(line, "`rect` outside a pblock"));
                };
                if toks.len() != 5 {
                    return Err(ParseError::new(line, "expected `rect <x1> <y1> <x2> <y2>`"));
                }
                if p.2.is_some() {
                    return Err(ParseError::new(line, "duplicate `rect` line"));
                }
                let v: Vec<u32> = toks[1..]
                    .iter()
                    .map(|t| parse_u32(t, line, "coordinate"))
                    .collect::<Result<_, _>>()?;
                if v[0] > v[2] || v[1] > v[3] {
                    return Err(ParseError::new(line, "rect corners must satisfy x1 <= x2 and y1 <= y2"));
                }
                p.2 = Some(Rect::new(v[0], v[1], v[2], v[3]));
            }
            "frames" => {
                let Some(p) = pending.as_mut() else {
                    return Err(ParseError::new(line, "`frames` outside a pblock"));
                };
                if toks.len() != 7 || toks[1] != "CLB" || toks[3] != "BRAM" || toks[5] != "DSP" {
                    return Err(ParseError::new(line, "expected `frames CLB <n> BRAM <n> DSP <n>`"));
                }
                if p.3.is_some() {
                    return Err(ParseError::new(line, "duplicate `frames` line"));
                }
                p.3 = Some(ResourceVector::new(
                    parse_u32(toks[2], line, "CLB")?,
                    parse_u32(toks[4], line, "BRAM")?,
                    parse_u32(toks[6], line, "DSP")?,
                ));
            }
            other => return Err(ParseError::new(line, format!("unknown directive `{other}`"))),
        }
    }
    finish(&mut pending, &mut records)?;
    let name = name.ok_or_else(|| ParseError::whole_file("missing `plan <name>` header"))?;
    Ok(ConstraintDoc { name, records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn placement(region: usize, rect: Rect) -> Placement {
        Placement {
            region,
            rect,
            waste: ResourceVector::ZERO,
        }
    }

    fn one_region() -> Design {
        crate::design::parse_design("design d\nregion r0\nmodule r0 m clb 1 bram 1 dsp 1\n").unwrap()
    }

    #[test]
    fn emit_example() {
        let f = fixtures::user_10x23();
        let d = one_region();
        let text = emit_constraints("p", &d, &f, &[placement(0, Rect::new(10, 0, 13, 1))]);
        let frames = f.frames_in(&Rect::new(10, 0, 13, 1)).unwrap();
        let count = |k| frames.iter().filter(|fr| f.column(fr.column) == k).count();
        use crate::fabric::ColumnKind::*;
        let expected = format!(
            "plan p\npblock r0\nrect 10 0 13 1\nframes CLB {} BRAM {} DSP {}\n",
            count(Clb),
            count(Bram),
            count(Dsp)
        );
        assert_eq!(text, expected);
        assert_eq!(text, "plan p\npblock r0\nrect 10 0 13 1\nframes CLB 2 BRAM 4 DSP 2\n");
    }

    #[test]
    fn empty_floorplan_is_header_only() {
        let f = fixtures::user_10x23();
        let d = crate::design::parse_design("design d\n").unwrap();
        assert_eq!(emit_constraints("p", &d, &f, &[]), "plan p\n");
    }

    #[test]
    fn round_trip() {
        let f = fixtures::user_10x23();
        let d = fixtures::image_filter();
        let fp = crate::anneal::initial_floorplan(&d, &f, Default::default()).unwrap();
        let doc = constraint_doc("filter", &d, &f, &fp.placements);
        assert_eq!(parse_plan(&doc.to_text()).unwrap(), doc);
        for p in &fp.placements {
            let rec = doc.records.iter().find(|r| r.name == d.regions[p.region].name).unwrap();
            assert_eq!(rec.rect, p.rect);
        }
    }

    #[test]
    fn records_follow_medal_order() {
        let f = fixtures::user_10x23();
        let d = crate::design::parse_design(
            "design d\nregion b\nmodule b m clb 9 bram 0 dsp 0\nregion a\nmodule a m clb 5 bram 1 dsp 2\n",
        )
        .unwrap();
        let pl = [
            placement(0, Rect::new(0, 0, 0, 0)),
            placement(1, Rect::new(11, 0, 11, 0)),
        ];
        let doc = constraint_doc("p", &d, &f, &pl);
        assert_eq!(
            doc.records.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(),
            ["a", "b"]
        );
    }

    #[test]
    fn parse_errors_carry_lines() {
        assert_eq!(parse_plan("pblock a\n").unwrap_err().line, 1);
        assert_eq!(parse_plan("plan p\npblock a\nrect 3 0 1 0\n").unwrap_err().line, 3);
        assert_eq!(parse_plan("plan p\npblock a\nrect 0 0 1 0\n").unwrap_err().line, 2);
        assert!(parse_plan("").is_err());
        assert!(parse_plan("plan p\nframes CLB 1 BRAM 0 DSP 0\n").is_err());
    }

    #[test]
    fn xdc_style_has_warning_and_grid_names() {
        let f = fixtures::user_10x23();
        let d = one_region();
        let doc = constraint_doc("p", &d, &f, &[placement(0, Rect::new(10, 0, 13, 1))]);
        let x = doc.to_xdc_text();
        assert!(x.starts_with("# WARNING"));
        assert!(x.contains("resize_pblock r0 -add {X10Y0:X13Y1}"));
    }
}
