// SPDX-License-Identifier: Apache-2.0

//! Sequence-pair annealing.
//!
//! A sequence pair `(a, b)` relates every two regions `p`, `q` with `p`
//! earlier in `a`: if `p` is also earlier in `b`, `p` lies left of `q`;
//! otherwise `p` lies above `q` (smaller `y`). Realization allocates regions
//! in `a` order with their type's scheme, restricting each search to the
//! quadrant right of every region it must follow and below every region it
//! must sit under.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cost::{evaluate, total_cost, CostBreakdown, CostTerms, CostWeights, Normalizers};
use crate::design::{check_capacity, Design};
use crate::error::{ParseError, PlanError};
use crate::fabric::{tokenized_lines, Fabric, Rect, ResourceVector};
use crate::placer::{AllocContext, Anchor, OccupancyState, Placement};
use crate::priority::medal_sort;
use crate::whitespace::WsWeights;

/// Seeded generator used everywhere randomness is needed: ChaCha with 8
/// rounds, seeded through `SeedableRng::seed_from_u64`.
pub type PlanRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> PlanRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SequencePair {
    pub seq_a: Vec<usize>,
    pub seq_b: Vec<usize>,
    /// Horizontal shift hint per region index, in columns.
    pub offsets: Vec<i32>,
}

impl SequencePair {
    pub fn new(seq_a: Vec<usize>, seq_b: Vec<usize>) -> Self {
        let n = seq_a.len();
        Self {
            seq_a,
            seq_b,
            offsets: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.seq_a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq_a.is_empty()
    }

    /// Both sequences are permutations of `0..n` and offsets cover every region.
    pub fn is_valid(&self, n: usize) -> bool {
        let perm = |s: &[usize]| {
            let mut seen = vec![false; n];
            s.len() == n && s.iter().all(|&i| i < n && !std::mem::replace(&mut seen[i], true))
        };
        perm(&self.seq_a) && perm(&self.seq_b) && self.offsets.len() == n
    }

    fn positions(seq: &[usize]) -> Vec<usize> {
        let mut pos = vec![0; seq.len()];
        for (i, &r) in seq.iter().enumerate() {
            pos[r] = i;
        }
        pos
    }

    pub fn positions_a(&self) -> Vec<usize> {
        Self::positions(&self.seq_a)
    }

    pub fn positions_b(&self) -> Vec<usize> {
        Self::positions(&self.seq_b)
    }

    /// `p` precedes `q` in both sequences.
    pub fn left_of(&self, p: usize, q: usize) -> bool {
        let (pa, pb) = (self.positions_a(), self.positions_b());
        pa[p] < pa[q] && pb[p] < pb[q]
    }

    /// `p` precedes `q` in `seq_a` and follows it in `seq_b`.
    pub fn above(&self, p: usize, q: usize) -> bool {
        let (pa, pb) = (self.positions_a(), self.positions_b());
        pa[p] < pa[q] && pb[p] > pb[q]
    }

    /// Pair whose realization relations all hold on the given
    /// non-overlapping placements. Each sequence is a topological order of
    /// the pairs it is forced to order; diagonal pairs, where either
    /// relation is true, are left to the tie-break by `order`.
    pub fn from_placements(order: &[usize], placements: &[Placement]) -> Self {
        let n = order.len();
        let mut rect_of = vec![None; n];
        for p in placements {
            rect_of[p.region] = Some(p.rect);
        }
        let rect = |r: usize| rect_of[r].expect("every region placed");
        let left = |p: usize, q: usize| rect(p).x2 < rect(q).x1;
        let above = |p: usize, q: usize| rect(p).y2 < rect(q).y1;
        let a_before = |p: usize, q: usize| left(p, q) || above(p, q);
        let b_before = |p: usize, q: usize| left(p, q) || above(q, p);
        let seq_a = topo_order(order, |p, q| a_before(p, q) && !a_before(q, p));
        let seq_b = topo_order(order, |p, q| b_before(p, q) && !b_before(q, p));
        Self::new(seq_a, seq_b)
    }
}

/// Kahn's algorithm over `before`, taking the earliest ready region in
/// `order`; a cycle is broken at its earliest remaining region.
fn topo_order(order: &[usize], before: impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut remaining: Vec<usize> = order.to_vec();
    let mut out = Vec::with_capacity(order.len());
    while !remaining.is_empty() {
        let pick = remaining
            .iter()
            .position(|&q| !remaining.iter().any(|&p| p != q && before(p, q)))
            .unwrap_or(0);
        out.push(remaining.remove(pick));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    Shuffle,
    Swap,
    RemoveReplace,
    Shift,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealParams {
    /// Starting temperature; calibrated from probe moves when `None`.
    pub t0: Option<f64>,
    pub cooling: f64,
    /// Moves per temperature level; `None` means `10 * n^2` capped by
    /// `max_moves_per_temp`.
    pub moves_per_temp: Option<usize>,
    pub max_moves_per_temp: usize,
    pub min_temp_ratio: f64,
    /// Stop after this many consecutive frozen levels: no new best and an
    /// acceptance ratio below `frozen_acceptance`.
    pub stagnation: usize,
    pub frozen_acceptance: f64,
    /// Resume each temperature level from the best state found so far.
    pub return_to_best: bool,
    pub max_iterations: Option<u64>,
    pub seed: u64,
    pub weights: CostWeights,
    pub ws_weights: WsWeights,
}

impl Default for AnnealParams {
    fn default() -> Self {
        Self {
            t0: None,
            cooling: 0.95,
            moves_per_temp: None,
            max_moves_per_temp: 2000,
            min_temp_ratio: 1e-4,
            stagnation: 5,
            frozen_acceptance: 0.02,
            return_to_best: true,
            max_iterations: None,
            seed: 1,
            weights: CostWeights::default(),
            ws_weights: WsWeights::default(),
        }
    }
}

/// Probability of each move kind at temperature ratio `T / T0`:
/// shuffle gets `0.4 * min(1, ratio)`, the rest is split evenly.
pub fn move_mix(temp_ratio: f64) -> [f64; 4] {
    let shuffle = 0.4 * temp_ratio.clamp(0.0, 1.0);
    let rest = (1.0 - shuffle) / 3.0;
    [shuffle, rest, rest, rest]
}

impl AnnealParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |m: String| Err(PlanError::Param(m));
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad(format!("cooling must lie in (0, 1), got {}", self.cooling));
        }
        if let Some(t0) = self.t0 {
            if !(t0 > 0.0 && t0.is_finite()) {
                return bad(format!("t0 must be positive, got {t0}"));
            }
        }
        if !(self.min_temp_ratio > 0.0 && self.min_temp_ratio < 1.0) {
            return bad(format!(
                "min_temp_ratio must lie in (0, 1), got {}",
                self.min_temp_ratio
            ));
        }
        if !(0.0..=1.0).contains(&self.frozen_acceptance) {
            return bad(format!(
                "frozen_acceptance must lie in [0, 1], got {}",
                self.frozen_acceptance
            ));
        }
        if self.stagnation == 0 {
            return bad("stagnation window must be at least 1".into());
        }
        CostWeights::new(self.weights.alpha, self.weights.beta, self.weights.gamma)?;
        let w = self.ws_weights;
        WsWeights::new(w.alpha, w.beta, w.gamma, w.delta)?;
        Ok(())
    }

    pub fn moves_for(&self, regions: usize) -> usize {
        self.moves_per_temp
            .unwrap_or_else(|| (10 * regions * regions).min(self.max_moves_per_temp))
    }

    /// Applies `key value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ParseError> {
        for (line, toks) in tokenized_lines(text) {
            if toks.len() != 2 {
                return Err(ParseError::new(
                    line,
                    format!("expected `<key> <value>`, found {} tokens", toks.len()),
                ));
            }
            let (key, val) = (toks[0], toks[1]);
            let f = || {
                val.parse::<f64>()
                    .map_err(|_| ParseError::new(line, format!("`{key}` expects a number, found `{val}`")))
            };
            let u = || {
                val.parse::<u64>().map_err(|_| {
                    ParseError::new(line, format!("`{key}` expects a non-negative integer, found `{val}`"))
                })
            };
            match key {
                "seed" => self.seed = u()?,
                "t0" => self.t0 = Some(f()?),
                "cooling" => self.cooling = f()?,
                "moves_per_temp" => self.moves_per_temp = Some(u()? as usize),
                "max_moves_per_temp" => self.max_moves_per_temp = u()? as usize,
                "min_temp_ratio" => self.min_temp_ratio = f()?,
                "stagnation" => self.stagnation = u()? as usize,
                "frozen_acceptance" => self.frozen_acceptance = f()?,
                "return_to_best" => {
                    self.return_to_best = match val {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        _ => {
                            return Err(ParseError::new(
                                line,
                                format!("`return_to_best` expects true or false, found `{val}`"),
                            ))
                        }
                    }
                }
                "max_iterations" => self.max_iterations = Some(u()?),
                "alpha" => self.weights.alpha = f()?,
                "beta" => self.weights.beta = f()?,
                "gamma" => self.weights.gamma = f()?,
                "ws_weights" => {
                    let v = parse_ws_weights(val).map_err(|m| ParseError::new(line, m))?;
                    self.ws_weights = v;
                }
                other => return Err(ParseError::new(line, format!("unknown parameter `{other}`"))),
            }
        }
        Ok(())
    }
}

/// Parses `a,b,g,d`.
pub fn parse_ws_weights(s: &str) -> Result<WsWeights, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad weight `{t}`")))
        .collect::<Result<_, _>>()?;
    if v.len() != 4 {
        return Err(format!("expected 4 comma-separated weights, found {}", v.len()));
    }
    WsWeights::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    /// In allocation order.
    pub placements: Vec<Placement>,
    pub cost: CostBreakdown,
    pub seed: u64,
    pub iterations: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("region {region} has no legal position")]
pub struct Infeasible {
    pub region: usize,
}

/// Immutable planning inputs shared by every realization.
#[derive(Debug, Clone)]
pub struct Planner<'a> {
    pub design: &'a Design,
    pub fabric: &'a Fabric,
    requirements: Vec<ResourceVector>,
    ctx: AllocContext,
}

impl<'a> Planner<'a> {
    pub fn new(design: &'a Design, fabric: &'a Fabric, ws_weights: WsWeights) -> Self {
        let idle_centroid = if design.terminals.is_empty() {
            (f64::from(fabric.num_columns()) / 2.0, f64::from(fabric.height()) / 2.0)
        } else {
            let n = design.terminals.len() as f64;
            let (sx, sy) = design
                .terminals
                .iter()
                .map(|t| t.position(fabric))
                .fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            (sx / n, sy / n)
        };
        Self {
            design,
            fabric,
            requirements: design.requirements(),
            ctx: AllocContext {
                ws_weights,
                idle_centroid,
            },
        }
    }

    pub fn requirement(&self, region: usize) -> &ResourceVector {
        &self.requirements[region]
    }

    /// Allocates in medal-sort order with no sequence-pair restrictions.
    pub fn initial_placements(&self) -> Result<(Vec<usize>, Vec<Placement>), PlanError> {
        let order: Vec<usize> = medal_sort(self.design)?.into_iter().map(|s| s.region).collect();
        let mut state = OccupancyState::new(self.fabric);
        for &r in &order {
            let p = state
                .place_region(r, &self.requirements[r], &Anchor::default(), &self.ctx)
                .map_err(|_| PlanError::Unplaceable(self.design.regions[r].name.clone()))?;
            state.claim(p);
        }
        Ok((order, state.into_placements()))
    }

    pub fn realize(&self, sp: &SequencePair) -> Result<Vec<Placement>, Infeasible> {
        self.realize_from(sp, &[], 0)
    }

    /// Realizes `sp`, reusing `prefix[..start]`, which must be the first
    /// `start` placements of a realization that agrees with `sp` up to there.
    pub fn realize_from(
        &self,
        sp: &SequencePair,
        prefix: &[Placement],
        start: usize,
    ) -> Result<Vec<Placement>, Infeasible> {
        self.realize_hinted(sp, prefix, start, &[])
    }

    /// Like [`Planner::realize_from`], but a region whose hint rect is
    /// still admissible (inside its quadrant, free, covering) keeps it
    /// instead of running its scheme. `hints` is indexed by region; missing
    /// entries mean no hint.
    pub fn realize_hinted(
        &self,
        sp: &SequencePair,
        prefix: &[Placement],
        start: usize,
        hints: &[Option<Rect>],
    ) -> Result<Vec<Placement>, Infeasible> {
        let fabric = self.fabric;
        let h = fabric.row_height();
        let pos_b = sp.positions_b();
        let mut state = OccupancyState::new(fabric);
        for p in &prefix[..start] {
            state.claim(p.clone());
        }
        for i in start..sp.seq_a.len() {
            let q = sp.seq_a[i];
            let mut anchor = Anchor {
                offset: sp.offsets[q],
                ..Anchor::default()
            };
            for p in state.placements() {
                if pos_b[p.region] < pos_b[q] {
                    anchor.min_col = anchor.min_col.max(p.rect.x2 + 1);
                } else {
                    anchor.min_row = anchor.min_row.max((p.rect.y2 + 1) / h);
                }
            }
            if anchor.min_col >= fabric.num_columns() || anchor.min_row >= fabric.num_rows() {
                return Err(Infeasible { region: q });
            }
            let req = &self.requirements[q];
            let hinted = hints
                .get(q)
                .copied()
                .flatten()
                .filter(|r| state.admits(r, req, &anchor))
                .map(|r| state.make_placement(q, r, req));
            let p = match hinted {
                Some(p) => p,
                None => state
                    .place_region(q, req, &anchor, &self.ctx)
                    .map_err(|_| Infeasible { region: q })?,
            };
            state.claim(p);
        }
        Ok(state.into_placements())
    }

    pub fn terms(&self, placements: &[Placement]) -> CostTerms {
        evaluate(self.design, self.fabric, placements).expect("every region placed and every waste kind present")
    }
}

/// Allocation in medal-sort order; scored with normalizers taken from itself.
pub fn initial_floorplan(design: &Design, fabric: &Fabric, ws_weights: WsWeights) -> Result<Floorplan, PlanError> {
    let planner = Planner::new(design, fabric, ws_weights);
    let (_, placements) = planner.initial_placements()?;
    let terms = planner.terms(&placements);
    let weights = CostWeights {
        normalizers: Normalizers::from_terms(&terms),
        ..CostWeights::default()
    };
    Ok(Floorplan {
        cost: total_cost(&terms, &weights),
        placements,
        seed: 0,
        iterations: 0,
    })
}

pub fn realize(
    sp: &SequencePair,
    design: &Design,
    fabric: &Fabric,
    ws_weights: WsWeights,
) -> Result<Vec<Placement>, Infeasible> {
    Planner::new(design, fabric, ws_weights).realize(sp)
}

/// Draws a move kind from [`move_mix`] and applies it to a copy of `sp`.
/// Shift offsets stay within `±max_offset`.
pub fn propose_move<R: Rng + ?Sized>(
    sp: &SequencePair,
    rng: &mut R,
    temp_ratio: f64,
    max_offset: i32,
) -> (MoveKind, SequencePair) {
    let n = sp.len();
    let mut next = sp.clone();
    if n == 0 {
        return (MoveKind::Shift, next);
    }
    let kind = if n == 1 {
        MoveKind::Shift
    } else {
        let mix = move_mix(temp_ratio);
        let u: f64 = rng.gen();
        if u < mix[0] {
            MoveKind::Shuffle
        } else if u < mix[0] + mix[1] {
            MoveKind::Swap
        } else if u < mix[0] + mix[1] + mix[2] {
            MoveKind::RemoveReplace
        } else {
            MoveKind::Shift
        }
    };
    match kind {
        MoveKind::Shuffle => {
            next.seq_a.shuffle(rng);
            next.seq_b.shuffle(rng);
        }
        MoveKind::Swap => {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            swap_regions(&mut next, a, b);
        }
        MoveKind::RemoveReplace => {
            let r = rng.gen_range(0..n);
            remove_and_append(&mut next, r);
        }
        MoveKind::Shift => {
            let r = rng.gen_range(0..n);
            let k = rng.gen_range(1..=4);
            let step = if rng.gen_bool(0.5) { k } else { -k };
            next.offsets[r] = (next.offsets[r] + step).clamp(-max_offset, max_offset);
        }
    }
    (kind, next)
}

/// Exchanges the positions of regions `a` and `b` in both sequences.
pub fn swap_regions(sp: &mut SequencePair, a: usize, b: usize) {
    for seq in [&mut sp.seq_a, &mut sp.seq_b] {
        let i = seq.iter().position(|&r| r == a).expect("region in sequence");
        let j = seq.iter().position(|&r| r == b).expect("region in sequence");
        seq.swap(i, j);
    }
}

/// Moves region `r` to the end of both sequences.
pub fn remove_and_append(sp: &mut SequencePair, r: usize) {
    for seq in [&mut sp.seq_a, &mut sp.seq_b] {
        seq.retain(|&x| x != r);
        seq.push(r);
    }
}

/// First allocation step whose outcome can differ between realizations of
/// `old` and `new`.
pub fn first_divergence(old: &SequencePair, new: &SequencePair) -> usize {
    let (ob, nb) = (old.positions_b(), new.positions_b());
    for i in 0..new.seq_a.len() {
        let q = new.seq_a[i];
        if old.seq_a[i] != q || old.offsets[q] != new.offsets[q] {
            return i;
        }
        for &p in &new.seq_a[..i] {
            if (ob[p] < ob[q]) != (nb[p] < nb[q]) {
                return i;
            }
        }
    }
    new.seq_a.len()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealOutcome {
    pub best: Floorplan,
    pub initial: Floorplan,
    /// Cost weights, including the normalizers taken from the initial floorplan.
    pub weights: CostWeights,
    pub t0: f64,
    /// Best cost after each temperature level.
    pub trajectory: Vec<f64>,
    pub accepted: u64,
    pub infeasible: u64,
}

#[derive(Clone)]
struct State {
    sp: SequencePair,
    placements: Vec<Placement>,
    cost: CostBreakdown,
    realized: bool,
}

pub fn anneal(design: &Design, fabric: &Fabric, params: &AnnealParams) -> Result<AnnealOutcome, PlanError> {
    params.validate()?;
    let planner = Planner::new(design, fabric, params.ws_weights);
    let (order, placements) = planner.initial_placements()?;
    let terms0 = planner.terms(&placements);
    let weights = CostWeights {
        normalizers: Normalizers::from_terms(&terms0),
        ..params.weights
    };
    let cost0 = total_cost(&terms0, &weights);
    let initial = Floorplan {
        placements: placements.clone(),
        cost: cost0,
        seed: params.seed,
        iterations: 0,
    };
    let n = design.regions.len();
    let moves = params.moves_for(n);
    let mut outcome = AnnealOutcome {
        best: initial.clone(),
        initial,
        weights,
        t0: params.t0.unwrap_or(0.0),
        trajectory: vec![cost0.total],
        accepted: 0,
        infeasible: 0,
    };
    if n == 0 || moves == 0 {
        return Ok(outcome);
    }

    let max_offset = fabric.num_columns() as i32 - 1;
    let mut rng = rng_from_seed(params.seed);
    let mut current = State {
        sp: SequencePair::from_placements(&order, &placements),
        placements,
        cost: cost0,
        realized: false,
    };

    let evaluate = |st: &State, cand: &SequencePair| -> Option<(Vec<Placement>, CostBreakdown)> {
        let start = if st.realized { first_divergence(&st.sp, cand) } else { 0 };
        let mut hints = vec![None; n];
        for p in &st.placements {
            if st.sp.offsets[p.region] == cand.offsets[p.region] {
                hints[p.region] = Some(p.rect);
            }
        }
        let pl = planner.realize_hinted(cand, &st.placements, start, &hints).ok()?;
        let cost = total_cost(&planner.terms(&pl), &weights);
        Some((pl, cost))
    };

    let t0 = match params.t0 {
        Some(t) => t,
        None => {
            let mut uphill = Vec::new();
            for _ in 0..100 {
                let (_, cand) = propose_move(&current.sp, &mut rng, 1.0, max_offset);
                if let Some((_, c)) = evaluate(&current, &cand) {
                    if c.total > current.cost.total {
                        uphill.push(c.total - current.cost.total);
                    }
                }
            }
            if uphill.is_empty() {
                0.1 * cost0.total.max(1e-6)
            } else {
                let mean = uphill.iter().sum::<f64>() / uphill.len() as f64;
                -mean / 0.8f64.ln()
            }
        }
    };
    outcome.t0 = t0;

    let mut best_cost = cost0.total;
    let mut best_state = current.clone();
    let mut temp = t0;
    let mut iterations = 0u64;
    let mut stagnant = 0;
    'levels: loop {
        let mut improved = false;
        let mut level_accepted = 0usize;
        for _ in 0..moves {
            if params.max_iterations.is_some_and(|cap| iterations >= cap) {
                break 'levels;
            }
            iterations += 1;
            let (_, cand) = propose_move(&current.sp, &mut rng, temp / t0, max_offset);
            let Some((pl, cost)) = evaluate(&current, &cand) else {
                outcome.infeasible += 1;
                continue;
            };
            let delta = cost.total - current.cost.total;
            if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
                outcome.accepted += 1;
                if delta != 0.0 {
                    level_accepted += 1;
                }
                current = State {
                    sp: cand,
                    placements: pl,
                    cost,
                    realized: true,
                };
                if cost.total < best_cost {
                    best_cost = cost.total;
                    outcome.best = Floorplan {
                        placements: current.placements.clone(),
                        cost,
                        seed: params.seed,
                        iterations,
                    };
                    best_state = current.clone();
                    improved = true;
                }
            }
        }
        outcome.trajectory.push(best_cost);
        if params.return_to_best && current.cost.total > best_cost {
            current = best_state.clone();
        }
        let frozen = (level_accepted as f64) < params.frozen_acceptance * moves as f64;
        stagnant = if improved || !frozen { 0 } else { stagnant + 1 };
        if stagnant >= params.stagnation || temp < params.min_temp_ratio * t0 {
            break;
        }
        temp *= params.cooling;
    }
    outcome.best.iterations = iterations;
    Ok(outcome)
}

/// Checks aggregate feasibility, then anneals `restarts` seeds
/// (`seed`, `seed + 1`, ...) concurrently and keeps the cheapest; equal
/// costs go to the lower seed.
pub fn plan(
    design: &Design,
    fabric: &Fabric,
    params: &AnnealParams,
    restarts: usize,
) -> Result<AnnealOutcome, PlanError> {
    design.check_terminals(fabric)?;
    let verdict = check_capacity(design, fabric);
    if !verdict.is_feasible() {
        return Err(PlanError::Capacity(verdict.to_string()));
    }
    params.validate()?;
    let restarts = restarts.max(1);
    if restarts == 1 {
        return anneal(design, fabric, params);
    }
    let results: Vec<Result<AnnealOutcome, PlanError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..restarts as u64)
            .map(|i| {
                let mut p = params.clone();
                p.seed = params.seed.wrapping_add(i);
                s.spawn(move || anneal(design, fabric, &p))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("annealer thread panicked"))
            .collect()
    });
    let mut best: Option<AnnealOutcome> = None;
    for r in results {
        let o = r?;
        let better = best
            .as_ref()
            .is_none_or(|b| (o.best.cost.total, o.best.seed) < (b.best.cost.total, b.best.seed));
        if better {
            best = Some(o);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::placer::overlaps;
    use proptest::prelude::*;
    use rand::Rng;

    fn names(sp: &SequencePair, labels: &[&str]) -> (Vec<String>, Vec<String>) {
        let f = |s: &[usize]| s.iter().map(|i| labels[*i].to_string()).collect();
        (f(&sp.seq_a), f(&sp.seq_b))
    }

    #[test]
    fn swap_example() {
        let mut sp = SequencePair::new(vec![0, 1], vec![0, 1]);
        swap_regions(&mut sp, 0, 1);
        assert_eq!(
            names(&sp, &["a", "b"]),
            (vec!["b".into(), "a".into()], vec!["b".into(), "a".into()])
        );
    }

    #[test]
    fn remove_and_append_example() {
        // (<a,b,c>, <c,b,a>) minus b, then b last in both
        let mut sp = SequencePair::new(vec![0, 1, 2], vec![2, 1, 0]);
        remove_and_append(&mut sp, 1);
        let oracle = |s: &[&str]| {
            let mut v: Vec<String> = s.iter().filter(|x| **x != "b").map(|x| x.to_string()).collect();
            v.push("b".into());
            v
        };
        assert_eq!(
            names(&sp, &["a", "b", "c"]),
            (oracle(&["a", "b", "c"]), oracle(&["c", "b", "a"]))
        );
        assert_eq!(names(&sp, &["a", "b", "c"]).0, vec!["a", "c", "b"]);
        assert_eq!(names(&sp, &["a", "b", "c"]).1, vec!["c", "a", "b"]);
    }

    #[test]
    fn shuffle_replays_with_same_seed() {
        let sp = SequencePair::new((0..8).collect(), (0..8).collect());
        let run = || {
            let mut rng = rng_from_seed(99);
            let mut s = sp.clone();
            let mut kinds = Vec::new();
            for _ in 0..50 {
                let (k, next) = propose_move(&s, &mut rng, 1.0, 10);
                kinds.push(k);
                s = next;
            }
            (kinds, s)
        };
        let (k1, s1) = run();
        let (k2, s2) = run();
        assert_eq!(k1, k2);
        assert_eq!(s1, s2);
        assert!(k1.contains(&MoveKind::Shuffle));
    }

    #[test]
    fn mix_sums_to_one_and_decays() {
        for ratio in [0.0, 0.1, 0.5, 1.0, 2.0] {
            let m = move_mix(ratio);
            assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(move_mix(1.0)[0] > move_mix(0.1)[0]);
        assert_eq!(move_mix(0.0)[0], 0.0);
    }

    #[test]
    fn single_region_only_shifts() {
        let sp = SequencePair::new(vec![0], vec![0]);
        let mut rng = rng_from_seed(3);
        for _ in 0..20 {
            let (k, next) = propose_move(&sp, &mut rng, 1.0, 5);
            assert_eq!(k, MoveKind::Shift);
            assert!(next.offsets[0].abs() <= 4);
        }
    }

    fn clb_design(n: usize, clb: u32) -> Design {
        let text: String = std::iter::once("design d\n".to_string())
            .chain((0..n).map(|i| format!("region r{i}\nmodule r{i} m clb {clb} bram 0 dsp 0\n")))
            .collect();
        crate::design::parse_design(&text).unwrap()
    }

    #[test]
    fn one_region_realization_matches_initial() {
        let d = clb_design(1, 6);
        let f = fixtures::user_10x23();
        let planner = Planner::new(&d, &f, WsWeights::default());
        let (_, init) = planner.initial_placements().unwrap();
        let real = planner.realize(&SequencePair::new(vec![0], vec![0])).unwrap();
        assert_eq!(init, real);
    }

    #[test]
    fn left_and_above_relations() {
        let d = clb_design(2, 4);
        let f = fixtures::user_10x23();
        let planner = Planner::new(&d, &f, WsWeights::default());
        let pl = planner.realize(&SequencePair::new(vec![0, 1], vec![0, 1])).unwrap();
        assert!(pl[0].rect.x2 < pl[1].rect.x1, "{pl:?}");
        let pl = planner.realize(&SequencePair::new(vec![0, 1], vec![1, 0])).unwrap();
        assert!(pl[0].rect.y2 < pl[1].rect.y1, "{pl:?}");
    }

    #[test]
    fn zero_moves_returns_initial() {
        let d = fixtures::image_filter();
        let f = fixtures::user_10x23();
        let params = AnnealParams {
            moves_per_temp: Some(0),
            ..AnnealParams::default()
        };
        let o = anneal(&d, &f, &params).unwrap();
        assert_eq!(o.best, o.initial);
        assert_eq!(o.best.iterations, 0);
        let init = initial_floorplan(&d, &f, WsWeights::default()).unwrap();
        assert_eq!(init.placements, o.initial.placements);
    }

    #[test]
    fn empty_design_costs_nothing() {
        let d = crate::design::parse_design("design e\n").unwrap();
        let f = fixtures::user_10x23();
        let fp = initial_floorplan(&d, &f, WsWeights::default()).unwrap();
        assert!(fp.placements.is_empty());
        assert_eq!(fp.cost.total, 0.0);
    }

    #[test]
    fn filter_design_places_all_seven() {
        let d = fixtures::image_filter();
        let f = fixtures::user_10x23();
        let fp = initial_floorplan(&d, &f, WsWeights::default()).unwrap();
        assert_eq!(fp.placements.len(), 7);
        for (i, p) in fp.placements.iter().enumerate() {
            for q in &fp.placements[i + 1..] {
                assert!(!overlaps(&p.rect, &q.rect));
            }
        }
    }

    #[test]
    fn seeded_runs_are_identical() {
        let d = fixtures::image_filter();
        let f = fixtures::user_10x23();
        let params = AnnealParams {
            seed: 5,
            max_iterations: Some(3000),
            ..AnnealParams::default()
        };
        let a = anneal(&d, &f, &params).unwrap();
        let b = anneal(&d, &f, &params).unwrap();
        assert_eq!(a, b);
        assert!(a.best.cost.total <= a.initial.cost.total);
        assert!(a.trajectory.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn params_text() {
        let mut p = AnnealParams::default();
        p.apply_text("# tuning\nseed 9\ncooling 0.9\nws_weights 8,4,2,1\nalpha 1\n")
            .unwrap();
        assert_eq!(p.seed, 9);
        assert_eq!(p.cooling, 0.9);
        assert_eq!(p.ws_weights, WsWeights::new(8.0, 4.0, 2.0, 1.0).unwrap());
        assert_eq!(p.weights.alpha, 1.0);
        assert!(p.clone().apply_text("bogus 1\n").is_err());
        assert!(p.clone().apply_text("ws_weights 1,2,3,4\n").is_err());
        p.cooling = 1.0;
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn moves_keep_permutations(seed in 0u64..1000, n in 1usize..9, steps in 1usize..30) {
            let mut rng = rng_from_seed(seed);
            let mut sp = SequencePair::new((0..n).collect(), (0..n).rev().collect());
            for _ in 0..steps {
                let ratio: f64 = rng.gen();
                sp = propose_move(&sp, &mut rng, ratio, 6).1;
                prop_assert!(sp.is_valid(n));
                prop_assert!(sp.offsets.iter().all(|o| o.abs() <= 6));
            }
        }

        #[test]
        fn prefix_reuse_matches_full_realization(seed in 0u64..500) {
            let d = fixtures::image_filter();
            let f = fixtures::user_10x23();
            let planner = Planner::new(&d, &f, WsWeights::default());
            let mut rng = rng_from_seed(seed);
            let mut sp = SequencePair::new((0..7).collect(), (0..7).collect());
            sp.seq_b.shuffle(&mut rng);
            let mut cur = planner.realize(&sp);
            for _ in 0..10 {
                let (_, cand) = propose_move(&sp, &mut rng, 0.3, 22);
                let full = planner.realize(&cand);
                if let Ok(prev) = &cur {
                    let start = first_divergence(&sp, &cand);
                    prop_assert_eq!(&planner.realize_from(&cand, prev, start), &full);
                }
                if full.is_ok() {
                    sp = cand;
                    cur = full;
                }
            }
        }
    }
}
