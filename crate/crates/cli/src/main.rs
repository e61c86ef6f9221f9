// SPDX-License-Identifier: Apache-2.0

//! `prfloor`: plan, check, generate and draw floorplans.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use prfloor_core::anneal::parse_ws_weights;
use prfloor_core::constraints::constraint_doc;
use prfloor_core::fixtures;
use prfloor_core::gen::{generate, GenParams};
use prfloor_core::svg::emit_svg;
use prfloor_core::validate::summarize;
use prfloor_core::{
    parse_design, parse_device, parse_plan, plan, validate, AnnealParams, Design, Fabric, Placement, PlanError, Report,
};

#[derive(Parser)]
#[command(
    name = "prfloor",
    version,
    about = "Floorplanner for partially reconfigurable FPGA regions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Place every region and write a constraint file.
    Plan(PlanArgs),
    /// Check a constraint file against its device and design.
    Validate(CheckArgs),
    /// Write a seeded synthetic design.
    Gen(GenArgs),
    /// Draw an existing constraint file as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct Inputs {
    /// Device file, or a bundled device name (user_10x23, virtex5_scale, artix7_scale).
    #[arg(long)]
    device: String,
    #[arg(long)]
    design: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    seed: Option<u64>,
    /// Wirelength weight.
    #[arg(long)]
    alpha: Option<f64>,
    /// Bounding-area weight.
    #[arg(long)]
    beta: Option<f64>,
    /// Wasted-resource weight.
    #[arg(long)]
    gamma: Option<f64>,
    /// White-space weights `a,b,g,d` for free DSP, BRAM, CLB and distance.
    #[arg(long, value_name = "A,B,G,D")]
    ws_weights: Option<String>,
    /// Annealer parameter file with `key value` lines; flags override it.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Independent seeded runs, executed concurrently; the cheapest wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    /// Stop after this many proposed moves.
    #[arg(long)]
    max_iterations: Option<u64>,
    /// Constraint file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// JSON run summary.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write `create_pblock`/`resize_pblock` commands with grid names instead.
    #[arg(long)]
    xdc_style: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    plan: PathBuf,
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    inputs: Inputs,
    #[arg(long)]
    plan: PathBuf,
    /// SVG file; stdout when absent.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    regions: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Inclusive per-instance CLB range.
    #[arg(long, value_name = "LO,HI", default_value = "4,16")]
    clb: String,
    #[arg(long, value_name = "LO,HI", default_value = "0,2")]
    bram: String,
    #[arg(long, value_name = "LO,HI", default_value = "0,1")]
    dsp: String,
    /// Share of regions that draw BRAM and DSP from their ranges; the rest
    /// take each range's minimum.
    #[arg(long, default_value_t = 1.0)]
    scarce_fraction: f64,
    /// Device whose dimensions place the corner terminals.
    #[arg(long)]
    device: Option<String>,
    #[arg(long, default_value = "synthetic")]
    name: String,
    /// Design file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Parse(String),
    Infeasible(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Parse(_) => 2,
            Failure::Infeasible(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Parse(m) | Failure::Infeasible(m) | Failure::Io(m) => m,
        }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Param(_) | PlanError::TerminalOffset { .. } => Failure::Usage(e.to_string()),
            PlanError::Capacity(_) | PlanError::Unplaceable(_) | PlanError::NoLogic { .. } => {
                Failure::Infeasible(e.to_string())
            }
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_device(name_or_path: &str) -> Result<Fabric, Failure> {
    let path = Path::new(name_or_path);
    if !path.exists() {
        if let Some(f) = fixtures::device_by_name(name_or_path) {
            return Ok(f);
        }
    }
    let text = read(path)?;
    parse_device(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn load_inputs(inputs: &Inputs) -> Result<(Fabric, Design), Failure> {
    let fabric = load_device(&inputs.device)?;
    let text = read(&inputs.design)?;
    let design = parse_design(&text).map_err(|e| Failure::Parse(format!("{}: {e}", inputs.design.display())))?;
    Ok((fabric, design))
}

fn load_plan(path: &Path) -> Result<prfloor_core::ConstraintDoc, Failure> {
    parse_plan(&read(path)?).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

fn parse_range(flag: &str, s: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::Usage(format!("--{flag} expects LO,HI, got `{s}`"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    Ok((
        lo.trim().parse().map_err(|_| bad())?,
        hi.trim().parse().map_err(|_| bad())?,
    ))
}

fn cmd_plan(a: &PlanArgs) -> Result<(), Failure> {
    let (fabric, design) = load_inputs(&a.inputs)?;
    let mut params = AnnealParams::default();
    if let Some(p) = &a.params {
        params
            .apply_text(&read(p)?)
            .map_err(|e| Failure::Parse(format!("{}: {e}", p.display())))?;
    }
    if let Some(s) = a.seed {
        params.seed = s;
    }
    if let Some(v) = a.alpha {
        params.weights.alpha = v;
    }
    if let Some(v) = a.beta {
        params.weights.beta = v;
    }
    if let Some(v) = a.gamma {
        params.weights.gamma = v;
    }
    if let Some(w) = &a.ws_weights {
        params.ws_weights = parse_ws_weights(w).map_err(|m| Failure::Usage(format!("--ws-weights: {m}")))?;
    }
    if a.max_iterations.is_some() {
        params.max_iterations = a.max_iterations;
    }
    if a.restarts == 0 {
        return Err(Failure::Usage("--restarts must be at least 1".into()));
    }

    let start = Instant::now();
    let outcome = plan(&design, &fabric, &params, a.restarts)?;
    let runtime_ms = start.elapsed().as_millis() as u64;

    let placements = &outcome.best.placements;
    let doc = constraint_doc(&design.name, &design, &fabric, placements);
    let text = if a.xdc_style { doc.to_xdc_text() } else { doc.to_text() };
    write_or_print(a.out.as_deref(), &text)?;
    if let Some(p) = &a.svg {
        write_or_print(Some(p), &emit_svg(&design, &fabric, placements))?;
    }
    if let Some(p) = &a.report {
        let report = Report::new(&design, &fabric, &outcome, &params.ws_weights, a.restarts, runtime_ms);
        write_or_print(Some(p), &report.to_json())?;
    }
    eprintln!(
        "placed {} regions: cost {:.4} (initial {:.4}), seed {}, {} ms",
        placements.len(),
        outcome.best.cost.total,
        outcome.initial.cost.total,
        outcome.best.seed,
        runtime_ms
    );
    Ok(())
}

/// Exit status 1 when the plan has violations.
fn cmd_validate(a: &CheckArgs) -> Result<bool, Failure> {
    let (fabric, design) = load_inputs(&a.inputs)?;
    let doc = load_plan(&a.plan)?;
    let violations = validate(&doc, &design, &fabric);
    for v in &violations {
        println!("{v}");
    }
    if violations.is_empty() {
        eprintln!("ok: {} pblocks, no violations", doc.records.len());
    } else {
        let parts: Vec<String> = summarize(&violations)
            .into_iter()
            .map(|(k, n)| format!("{k} {n}"))
            .collect();
        eprintln!("{} violation(s): {}", violations.len(), parts.join(", "));
    }
    Ok(violations.is_empty())
}

fn cmd_gen(a: &GenArgs) -> Result<(), Failure> {
    let mut p = GenParams {
        name: a.name.clone(),
        regions: a.regions,
        clb: parse_range("clb", &a.clb)?,
        bram: parse_range("bram", &a.bram)?,
        dsp: parse_range("dsp", &a.dsp)?,
        scarce_fraction: a.scarce_fraction,
        seed: a.seed,
        ..GenParams::default()
    };
    if let Some(d) = &a.device {
        let f = load_device(d)?;
        p.width = f.num_columns();
        p.height = f.height();
    }
    let design = generate(&p)?;
    write_or_print(a.out.as_deref(), &design.to_text())
}

fn cmd_render(a: &RenderArgs) -> Result<(), Failure> {
    let (fabric, design) = load_inputs(&a.inputs)?;
    let doc = load_plan(&a.plan)?;
    let mut placements = Vec::with_capacity(doc.records.len());
    for rec in &doc.records {
        let region = design
            .region_index(&rec.name)
            .ok_or_else(|| Failure::Parse(format!("{}: unknown region `{}`", a.plan.display(), rec.name)))?;
        fabric
            .check_rect(&rec.rect)
            .map_err(|e| Failure::Parse(format!("{}: pblock `{}`: {e}", a.plan.display(), rec.name)))?;
        placements.push(Placement {
            region,
            rect: rec.rect,
            waste: Default::default(),
        });
    }
    write_or_print(a.svg.as_deref(), &emit_svg(&design, &fabric, &placements))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Plan(a) => cmd_plan(a).map(|_| true),
        Command::Validate(a) => cmd_validate(a),
        Command::Gen(a) => cmd_gen(a).map(|_| true),
        Command::Render(a) => cmd_render(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
