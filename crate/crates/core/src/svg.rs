// SPDX-License-Identifier: Apache-2.0

//! SVG rendering of a fabric and its placed regions.

use std::fmt::Write;

use crate::design::Design;
use crate::fabric::{ColumnKind, Fabric};
use crate::placer::Placement;

pub const PX_PER_CELL: u32 = 10;

fn kind_fill(k: ColumnKind) -> &'static str {
    match k {
        ColumnKind::Clb => "#e8eef7",
        ColumnKind::Bram => "#f7e3c6",
        ColumnKind::Dsp => "#d8f0d2",
    }
}

const REGION_FILLS: [&str; 8] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Regions are drawn in design order, whatever order `placements` has.
pub fn emit_svg(design: &Design, fabric: &Fabric, placements: &[Placement]) -> String {
    let s = PX_PER_CELL;
    let (w, h) = (fabric.num_columns() * s, fabric.height() * s);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(
        out,
        "<title>{} on {}</title>",
        escape(&design.name),
        escape(fabric.name())
    );

    out.push_str("<g class=\"fabric\">\n");
    for (x, k) in fabric.columns().iter().enumerate() {
        let _ = writeln!(
            out,
            r##"<rect class="column {}" x="{}" y="0" width="{s}" height="{h}" fill="{}" stroke="#c0c0c0" stroke-width="0.5"/>"##,
            k.name().to_ascii_lowercase(),
            x as u32 * s,
            kind_fill(*k)
        );
    }
    for r in 1..fabric.num_rows() {
        let y = r * fabric.row_height() * s;
        let _ = writeln!(
            out,
            r##"<line class="row" x1="0" y1="{y}" x2="{w}" y2="{y}" stroke="#606060" stroke-width="1"/>"##
        );
    }
    for r in fabric.reserved() {
        let _ = writeln!(
            out,
            r##"<rect class="reserved" x="{}" y="{}" width="{}" height="{}" fill="#808080" fill-opacity="0.6"/>"##,
            r.x1 * s,
            r.y1 * s,
            r.width() * s,
            r.height() * s
        );
    }
    out.push_str("</g>\n");

    let mut ordered: Vec<&Placement> = placements.iter().collect();
    ordered.sort_by_key(|p| p.region);
    for p in ordered {
        let r = p.rect;
        let name = design.regions.get(p.region).map_or("?", |r| r.name.as_str());
        let fill = REGION_FILLS[p.region % REGION_FILLS.len()];
        let (cx, cy) = r.center();
        let _ = writeln!(out, r#"<g class="region" id="region-{}">"#, escape(name));
        let _ = writeln!(
            out,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}" fill-opacity="0.55" stroke="#202020" stroke-width="1.5"/>"##,
            r.x1 * s,
            r.y1 * s,
            r.width() * s,
            r.height() * s
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="{}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            cx * f64::from(s),
            cy * f64::from(s),
            s,
            escape(name)
        );
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
