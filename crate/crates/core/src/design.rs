// SPDX-License-Identifier: Apache-2.0

//! Partially reconfigurable design: regions, their module instances, I/O
//! terminals and the hyperedge netlist connecting them.

use std::collections::HashMap;
use std::fmt;

use crate::error::{ParseError, PlanError};
use crate::fabric::{parse_u32, tokenized_lines, ColumnKind, Fabric, ResourceVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleInstance {
    pub name: String,
    pub demand: ResourceVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Region {
    pub name: String,
    pub instances: Vec<ModuleInstance>,
}

impl Region {
    /// Resources the region's rectangle must provide: the componentwise
    /// maximum over every module that can be loaded into it.
    pub fn requirement(&self) -> ResourceVector {
        region_requirement(self)
    }
}

pub fn region_requirement(region: &Region) -> ResourceVector {
    region
        .instances
        .iter()
        .fold(ResourceVector::ZERO, |acc, m| acc.componentwise_max(&m.demand))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Top,
    Bottom,
}

impl Edge {
    pub fn name(self) -> &'static str {
        match self {
            Edge::Left => "left",
            Edge::Right => "right",
            Edge::Top => "top",
            Edge::Bottom => "bottom",
        }
    }

    pub fn from_name(s: &str) -> Option<Edge> {
        match s.to_ascii_lowercase().as_str() {
            "left" => Some(Edge::Left),
            "right" => Some(Edge::Right),
            "top" => Some(Edge::Top),
            "bottom" => Some(Edge::Bottom),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Terminal {
    pub name: String,
    pub edge: Edge,
    pub offset: u32,
}

impl Terminal {
    /// Number of cells along this terminal's edge of `fabric`.
    pub fn edge_length(&self, fabric: &Fabric) -> u32 {
        match self.edge {
            Edge::Left | Edge::Right => fabric.height(),
            Edge::Top | Edge::Bottom => fabric.num_columns(),
        }
    }

    /// Pin location in boundary coordinates: on the die outline, at the
    /// middle of cell `offset` along the edge.
    pub fn position(&self, fabric: &Fabric) -> (f64, f64) {
        let along = f64::from(self.offset) + 0.5;
        match self.edge {
            Edge::Left => (0.0, along),
            Edge::Right => (f64::from(fabric.num_columns()), along),
            Edge::Top => (along, 0.0),
            Edge::Bottom => (along, f64::from(fabric.height())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Endpoint {
    Region(usize),
    Terminal(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Net {
    pub name: String,
    pub endpoints: Vec<Endpoint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Design {
    pub name: String,
    pub regions: Vec<Region>,
    pub terminals: Vec<Terminal>,
    pub nets: Vec<Net>,
    pub static_demand: ResourceVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Feasibility {
    pub demand: ResourceVector,
    pub available: ResourceVector,
    /// Kinds for which demand exceeds what the device offers.
    pub violated: Vec<ColumnKind>,
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        self.violated.is_empty()
    }
}

impl fmt::Display for Feasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violated.is_empty() {
            return write!(f, "demand {} fits {}", self.demand, self.available);
        }
        let parts: Vec<String> = self
            .violated
            .iter()
            .map(|k| {
                format!(
                    "{k} needs {} but the device has {}",
                    self.demand.get(*k),
                    self.available.get(*k)
                )
            })
            .collect();
        f.write_str(&parts.join("; "))
    }
}

impl Design {
    pub fn region_index(&self, name: &str) -> Option<usize> {
        self.regions.iter().position(|r| r.name == name)
    }

    pub fn endpoint_name(&self, ep: Endpoint) -> &str {
        match ep {
            Endpoint::Region(i) => &self.regions[i].name,
            Endpoint::Terminal(i) => &self.terminals[i].name,
        }
    }

    pub fn requirements(&self) -> Vec<ResourceVector> {
        self.regions.iter().map(region_requirement).collect()
    }

    /// Checks every terminal offset against the edges of `fabric`.
    pub fn check_terminals(&self, fabric: &Fabric) -> Result<(), PlanError> {
        for t in &self.terminals {
            let length = t.edge_length(fabric);
            if t.offset >= length {
                return Err(PlanError::TerminalOffset {
                    name: t.name.clone(),
                    offset: t.offset,
                    length,
                });
            }
        }
        Ok(())
    }

    /// Serializes to the design-file grammar.
    pub fn to_text(&self) -> String {
        let mut out = format!("design {}\n", self.name);
        let s = self.static_demand;
        out.push_str(&format!("static clb {} bram {} dsp {}\n", s.clb, s.bram, s.dsp));
        for r in &self.regions {
            out.push_str(&format!("region {}\n", r.name));
            for m in &r.instances {
                let d = m.demand;
                out.push_str(&format!(
                    "module {} {} clb {} bram {} dsp {}\n",
                    r.name, m.name, d.clb, d.bram, d.dsp
                ));
            }
        }
        for t in &self.terminals {
            out.push_str(&format!("terminal {} {} {}\n", t.name, t.edge.name(), t.offset));
        }
        for n in &self.nets {
            let eps: Vec<&str> = n.endpoints.iter().map(|e| self.endpoint_name(*e)).collect();
            out.push_str(&format!("net {} {}\n", n.name, eps.join(" ")));
        }
        out
    }
}

/// Aggregate capacity check: static demand plus every region's requirement
/// must fit the device total, componentwise and non-strictly.
pub fn check_capacity(design: &Design, fabric: &Fabric) -> Feasibility {
    let demand = design.static_demand + design.requirements().into_iter().sum();
    let available = fabric.total();
    let violated = ColumnKind::ALL
        .into_iter()
        .filter(|k| demand.get(*k) > available.get(*k))
        .collect();
    Feasibility {
        demand,
        available,
        violated,
    }
}

fn parse_demand(toks: &[&str], line: usize) -> Result<ResourceVector, ParseError> {
    // clb <n> bram <n> dsp <n>
    let expect = ["clb", "bram", "dsp"];
    if toks.len() != 6 {
        return Err(ParseError::new(line, "expected `clb <n> bram <n> dsp <n>`"));
    }
    let mut v = [0u32; 3];
    for (i, key) in expect.iter().enumerate() {
        if !toks[2 * i].eq_ignore_ascii_case(key) {
            return Err(ParseError::new(
                line,
                format!("expected `{key}`, found `{}`", toks[2 * i]),
            ));
        }
        v[i] = parse_u32(toks[2 * i + 1], line, key)?;
    }
    Ok(ResourceVector::new(v[0], v[1], v[2]))
}

pub fn parse_design(text: &str) -> Result<Design, ParseError> {
    let mut name = None;
    let mut static_demand = None;
    let mut regions: Vec<Region> = Vec::new();
    let mut region_lines: Vec<usize> = Vec::new();
    let mut terminals: Vec<Terminal> = Vec::new();
    let mut raw_nets: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut names: HashMap<String, usize> = HashMap::new();

    for (line, toks) in tokenized_lines(text) {
        match toks[0] {
            "design" => {
                if toks.len() != 2 {
                    return Err(ParseError::new(line, "`design` takes one name"));
                }
                if name.is_some() {
                    return Err(ParseError::new(line, "duplicate `design` directive"));
                }
                name = Some(toks[1].to_string());
            }
            "static" => {
                if static_demand.is_some() {
                    return Err(ParseError::new(line, "duplicate `static` directive"));
                }
                static_demand = Some(parse_demand(&toks[1..], line)?);
            }
            "region" => {
                if toks.len() != 2 {
                    return Err(ParseError::new(line, "`region` takes one name"));
                }
                let rname = toks[1];
                if let Some(prev) = names.insert(rname.to_string(), line) {
                    return Err(ParseError::new(
                        line,
                        format!("duplicate name `{rname}` (first declared on line {prev})"),
                    ));
                }
                regions.push(Region {
                    name: rname.to_string(),
                    instances: Vec::new(),
                });
                region_lines.push(line);
            }
            "module" => {
                if toks.len() < 3 {
                    return Err(ParseError::new(line, "`module` needs a region and an instance name"));
                }
                let demand = parse_demand(&toks[3..], line)?;
                let region = regions.iter_mut().find(|r| r.name == toks[1]).ok_or_else(|| {
                    ParseError::new(line, format!("module refers to undeclared region `{}`", toks[1]))
                })?;
                if region.instances.iter().any(|m| m.name == toks[2]) {
                    return Err(ParseError::new(
                        line,
                        format!("duplicate module `{}` in region `{}`", toks[2], toks[1]),
                    ));
                }
                if demand.clb == 0 {
                    return Err(ParseError::new(
                        line,
                        format!("module `{}` has no CLB demand; every module needs logic", toks[2]),
                    ));
                }
                region.instances.push(ModuleInstance {
                    name: toks[2].to_string(),
                    demand,
                });
            }
            "terminal" => {
                if toks.len() != 4 {
                    return Err(ParseError::new(line, "expected `terminal <name> <edge> <offset>`"));
                }
                let edge = Edge::from_name(toks[2]).ok_or_else(|| {
                    ParseError::new(
                        line,
                        format!("unknown edge `{}` (expected left, right, top or bottom)", toks[2]),
                    )
                })?;
                let offset = parse_u32(toks[3], line, "terminal offset")?;
                if let Some(prev) = names.insert(toks[1].to_string(), line) {
                    return Err(ParseError::new(
                        line,
                        format!("duplicate name `{}` (first declared on line {prev})", toks[1]),
                    ));
                }
                terminals.push(Terminal {
                    name: toks[1].to_string(),
                    edge,
                    offset,
                });
            }
            "net" => {
                if toks.len() < 3 {
                    return Err(ParseError::new(line, "`net` needs a name and at least one endpoint"));
                }
                if raw_nets.iter().any(|(_, n, _)| n == toks[1]) {
                    return Err(ParseError::new(line, format!("duplicate net `{}`", toks[1])));
                }
                raw_nets.push((
                    line,
                    toks[1].to_string(),
                    toks[2..].iter().map(|s| s.to_string()).collect(),
                ));
            }
            other => {
                return Err(ParseError::new(line, format!("unknown directive `{other}`")));
            }
        }
    }

    for (r, line) in regions.iter().zip(&region_lines) {
        if r.instances.is_empty() {
            return Err(ParseError::new(*line, format!("region `{}` has no modules", r.name)));
        }
    }

    let mut nets = Vec::with_capacity(raw_nets.len());
    for (line, nname, eps) in raw_nets {
        let mut endpoints = Vec::with_capacity(eps.len());
        for ep in eps {
            let resolved = if let Some(i) = regions.iter().position(|r| r.name == ep) {
                Endpoint::Region(i)
            } else if let Some(i) = terminals.iter().position(|t| t.name == ep) {
                Endpoint::Terminal(i)
            } else {
                return Err(ParseError::new(
                    line,
                    format!("net `{nname}` refers to unknown region or terminal `{ep}`"),
                ));
            };
            endpoints.push(resolved);
        }
        nets.push(Net { name: nname, endpoints });
    }

    Ok(Design {
        name: name.ok_or_else(|| ParseError::whole_file("missing `design` directive"))?,
        regions,
        terminals,
        nets,
        static_demand: static_demand.unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn rv(clb: u32, bram: u32, dsp: u32) -> ResourceVector {
        ResourceVector::new(clb, bram, dsp)
    }

    fn region(demands: &[ResourceVector]) -> Region {
        Region {
            name: "r".into(),
            instances: demands
                .iter()
                .enumerate()
                .map(|(i, d)| ModuleInstance {
                    name: format!("m{i}"),
                    demand: *d,
                })
                .collect(),
        }
    }

    const TWO: &str = "design two\nregion a\nmodule a m clb 4 bram 0 dsp 0\n\
                       region b\nmodule b m clb 2 bram 1 dsp 0\nnet n a b\n";

    #[test]
    fn two_regions_one_net() {
        let d = parse_design(TWO).unwrap();
        assert_eq!(d.regions.len(), 2);
        assert_eq!(d.nets.len(), 1);
        assert_eq!(d.nets[0].endpoints, vec![Endpoint::Region(0), Endpoint::Region(1)]);
        assert_eq!(parse_design(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn unresolved_endpoint_named() {
        let text = format!("{TWO}net bad a foo\n");
        let err = parse_design(&text).unwrap_err();
        assert!(err.message.contains("`foo`"), "{err}");
        assert_eq!(err.line, 7);
    }

    #[test]
    fn duplicate_names_rejected() {
        let text = "design d\nregion a\nmodule a m clb 1 bram 0 dsp 0\nterminal a left 0\n";
        assert!(parse_design(text).unwrap_err().message.contains("duplicate"));
    }

    #[test]
    fn empty_region_rejected() {
        assert!(parse_design("design d\nregion a\n").is_err());
    }

    #[test]
    fn seven_filter_regions() {
        let d = fixtures::image_filter();
        assert_eq!(d.regions.len(), 7);
        for r in &d.regions {
            let names: Vec<&str> = r.instances.iter().map(|m| m.name.as_str()).collect();
            assert_eq!(names, vec!["median", "mean"]);
        }
    }

    #[test]
    fn requirement_examples() {
        assert_eq!(region(&[rv(10, 0, 0), rv(4, 2, 0)]).requirement(), rv(10, 2, 0));
        assert_eq!(region(&[rv(5, 1, 2)]).requirement(), rv(5, 1, 2));
        // exhaustive oracle: per component, the max over all instances
        let demands = [rv(3, 1, 2), rv(5, 0, 1), rv(1, 4, 0)];
        let oracle = rv(
            demands.iter().map(|d| d.clb).max().unwrap(),
            demands.iter().map(|d| d.bram).max().unwrap(),
            demands.iter().map(|d| d.dsp).max().unwrap(),
        );
        assert_eq!(oracle, rv(5, 4, 2));
        assert_eq!(region(&demands).requirement(), oracle);
    }

    fn design_with(static_demand: ResourceVector, reqs: &[ResourceVector]) -> Design {
        Design {
            name: "d".into(),
            regions: reqs
                .iter()
                .enumerate()
                .map(|(i, d)| Region {
                    name: format!("r{i}"),
                    instances: vec![ModuleInstance {
                        name: "m".into(),
                        demand: *d,
                    }],
                })
                .collect(),
            terminals: vec![],
            nets: vec![],
            static_demand,
        }
    }

    #[test]
    fn capacity_examples() {
        let f = fixtures::user_10x23();
        let reqs = [rv(100, 10, 4), rv(50, 5, 4)];
        let sum: ResourceVector = reqs.iter().copied().sum();
        assert_eq!(sum, rv(150, 15, 8));
        assert!(check_capacity(&design_with(rv(30, 2, 1), &reqs), &f).is_feasible());

        let exact = check_capacity(&design_with(rv(100, 10, 5), &[rv(100, 10, 5)]), &f);
        assert!(exact.is_feasible());

        let over = check_capacity(&design_with(rv(1, 0, 0), &[rv(5, 0, 6), rv(5, 0, 5)]), &f);
        assert_eq!(over.violated, vec![ColumnKind::Dsp]);
        assert!(over.to_string().contains("DSP"));
    }

    #[test]
    fn terminal_offsets_checked() {
        let f = fixtures::user_10x23();
        let mut d = design_with(ResourceVector::ZERO, &[]);
        d.terminals.push(Terminal {
            name: "t".into(),
            edge: Edge::Left,
            offset: 10,
        });
        assert!(d.check_terminals(&f).is_err());
        d.terminals[0].edge = Edge::Top;
        assert!(d.check_terminals(&f).is_ok());
    }

    fn arb_rv() -> impl Strategy<Value = ResourceVector> {
        (1u32..50, 0u32..6, 0u32..6).prop_map(|(c, b, d)| rv(c, b, d))
    }

    proptest! {
        #[test]
        fn requirement_dominates_and_is_attained(demands in prop::collection::vec(arb_rv(), 1..6)) {
            let req = region(&demands).requirement();
            for d in &demands {
                prop_assert!(d.fits_within(&req));
            }
            for kind in ColumnKind::ALL {
                prop_assert!(demands.iter().any(|d| d.get(kind) == req.get(kind)));
            }
        }

        #[test]
        fn adding_an_instance_never_restores_feasibility(
            demands in prop::collection::vec(arb_rv(), 1..8),
            extra in arb_rv(),
            pick in 0usize..8,
        ) {
            let f = fixtures::user_10x23();
            let mut d = design_with(ResourceVector::ZERO, &demands);
            let before = check_capacity(&d, &f).is_feasible();
            let i = pick % d.regions.len();
            d.regions[i].instances.push(ModuleInstance { name: "extra".into(), demand: extra });
            let after = check_capacity(&d, &f).is_feasible();
            prop_assert!(before || !after);
        }
    }
}
