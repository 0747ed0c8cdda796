//! Best-first branch-and-bound over the program's binaries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::conic::{check_solution, solve_socp, ContinuousSolution, SolveSettings, SolveStatus, Sense};
use crate::error::BnbError;
use crate::formulation::{Formulation, Symbol};
use crate::network::{BranchStatus, DisjointSet, IntegratedSystem};
use crate::plan::RestorationPlan;
use crate::scenario::SolverParams;

const INT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BnbOptions {
    pub rel_gap: f64,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub node_limit: Option<u64>,
    pub deterministic: bool,
    /// Relaxations solved per batch; 1 means serial.
    pub threads: usize,
    pub settings: SolveSettings,
    /// Rounding heuristic period, in nodes.
    pub heuristic_every: u64,
    /// Re-solve the final incumbent for a tight point among optima.
    pub polish: bool,
    /// Progress line period, in nodes; 0 disables periodic lines.
    pub log_every: u64,
}

impl Default for BnbOptions {
    fn default() -> Self {
        BnbOptions {
            rel_gap: 1e-4,
            time_limit: Some(1800.0),
            node_limit: None,
            deterministic: true,
            threads: 1,
            settings: SolveSettings::default(),
            heuristic_every: 50,
            polish: true,
            log_every: 100,
        }
    }
}

impl BnbOptions {
    pub fn from_params(p: &SolverParams) -> Self {
        BnbOptions {
            rel_gap: p.rel_gap,
            time_limit: Some(p.time_limit_s),
            node_limit: p.node_limit,
            deterministic: p.deterministic,
            threads: p.threads.max(1),
            settings: SolveSettings { feas_tol: p.feas_tol, gap_tol: p.gap_tol, ..SolveSettings::default() },
            ..BnbOptions::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MipStatus {
    Optimal,
    /// Stopped at a limit with an incumbent.
    FeasibleGap,
    Infeasible,
    /// Stopped at a limit without an incumbent.
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MipSolution {
    pub status: MipStatus,
    /// Incumbent after polishing (or as found when polishing is off or fails).
    pub x: Vec<f64>,
    /// Incumbent exactly as the search accepted it.
    pub raw_x: Vec<f64>,
    pub objective: f64,
    pub bound: f64,
    pub gap: f64,
    pub nodes: u64,
    /// Seconds.
    pub wall_time: f64,
    /// Objective of every accepted incumbent, in order.
    pub incumbents: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Node {
    fixed: Vec<(usize, f64)>,
    /// Upper bound (in maximization orientation) inherited from the parent.
    bound: f64,
    seq: u64,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Search<'a> {
    form: &'a Formulation,
    system: &'a IntegratedSystem,
    opts: &'a BnbOptions,
    sign: f64,
    start: Instant,
    incumbent: Option<(Vec<f64>, f64)>,
    history: Vec<f64>,
    unresolved: f64,
    nodes: u64,
    seq: u64,
}

fn prune_tol(rel_gap: f64, inc: f64) -> f64 {
    rel_gap * inc.abs().max(1.0)
}

impl Search<'_> {
    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    fn settings(&self) -> SolveSettings {
        let mut s = self.opts.settings;
        if let Some(limit) = self.opts.time_limit {
            s.time_limit = Some((limit - self.elapsed()).max(0.01));
        }
        s
    }

    fn score(&self, sol: &ContinuousSolution) -> f64 {
        self.sign * sol.objective
    }

    fn inc_score(&self) -> f64 {
        self.incumbent.as_ref().map_or(f64::NEG_INFINITY, |i| i.1)
    }

    fn offer(&mut self, x: Vec<f64>, score: f64) {
        if score > self.inc_score() {
            log::info!("bnb incumbent={:.9} node={} time={:.3}", self.sign * score, self.nodes, self.elapsed());
            self.history.push(self.sign * score);
            self.incumbent = Some((x, score));
        }
    }

    fn limit_hit(&self) -> bool {
        self.opts.time_limit.is_some_and(|t| self.elapsed() >= t)
            || self.opts.node_limit.is_some_and(|n| self.nodes >= n)
    }

    fn solve(&self, fixed: &[(usize, f64)]) -> Result<ContinuousSolution, BnbError> {
        Ok(solve_socp(&self.form.program, fixed, &self.settings())?)
    }

    /// Most fractional free binary; ties go to devices, then switches, then
    /// customers, then the lowest column.
    fn branch_var(&self, x: &[f64], fixed: &[(usize, f64)]) -> Option<usize> {
        let p = &self.form.program;
        let mut best: Option<(f64, u8, usize)> = None;
        for &b in &p.binaries {
            if p.lower[b] >= 0.5 || p.upper[b] <= 0.5 || fixed.iter().any(|f| f.0 == b) {
                continue;
            }
            let frac = (x[b] - x[b].round()).abs();
            if frac <= INT_TOL {
                continue;
            }
            let key = (-frac, self.form.binary_class(b), b);
            if best.is_none_or(|cur| key.0 < cur.0 || (key.0 == cur.0 && (key.1, key.2) < (cur.1, cur.2))) {
                best = Some(key);
            }
        }
        best.map(|b| b.2)
    }

    /// First unfixed binary in priority order, for nodes without a solution.
    fn any_free(&self, fixed: &[(usize, f64)]) -> Option<usize> {
        let p = &self.form.program;
        p.binaries
            .iter()
            .copied()
            .filter(|&b| p.lower[b] < 0.5 && p.upper[b] > 0.5 && !fixed.iter().any(|f| f.0 == b))
            .min_by_key(|&b| (self.form.binary_class(b), b))
    }

    fn heuristic(&mut self, x: &[f64]) -> Result<(), BnbError> {
        let settings = self.settings();
        if let Some((cand, obj)) = rounding_repair(self.form, self.system, x, &settings)? {
            let score = self.sign * obj;
            self.offer(cand, score);
        }
        Ok(())
    }

    fn log_line(&self, bound: f64) {
        let inc = self.inc_score();
        let gap = if inc.is_finite() { (bound - inc) / inc.abs().max(1.0) } else { f64::INFINITY };
        log::info!(
            "bnb node={} bound={:.9} incumbent={:.9} gap={:.3e} time={:.3}",
            self.nodes,
            self.sign * bound,
            self.sign * inc,
            gap,
            self.elapsed()
        );
    }
}

/// Outcome of evaluating one node.
enum Outcome {
    Pruned,
    Leaf,
    Branch(Vec<Node>),
}

/// Solves the program to `opts.rel_gap` and decodes the incumbent.
pub fn solve_misocp(
    form: &Formulation,
    system: &IntegratedSystem,
    opts: &BnbOptions,
) -> Result<(MipSolution, RestorationPlan), BnbError> {
    let sol = branch_and_bound(form, system, opts)?;
    let plan = RestorationPlan::decode(system, form, &sol.x, sol.objective);
    Ok((sol, plan))
}

pub fn branch_and_bound(form: &Formulation, system: &IntegratedSystem, opts: &BnbOptions) -> Result<MipSolution, BnbError> {
    let sign = if form.program.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let mut s = Search {
        form,
        system,
        opts,
        sign,
        start: Instant::now(),
        incumbent: None,
        history: Vec::new(),
        unresolved: f64::NEG_INFINITY,
        nodes: 0,
        seq: 0,
    };

    let root = s.solve(&[])?;
    s.nodes = 1;
    match root.status {
        SolveStatus::Optimal => {}
        SolveStatus::Infeasible => return Err(BnbError::Infeasible),
        SolveStatus::Unbounded | SolveStatus::NumericalLimit => return Err(BnbError::NumericalFailure),
    }
    let root_score = s.score(&root);
    let mut heap: BinaryHeap<Node> = BinaryHeap::new();
    let mut dive: Vec<Node> = Vec::new();
    match s.branch_var(&root.x, &[]) {
        None => s.offer(root.x.clone(), root_score),
        Some(var) => {
            s.heuristic(&root.x)?;
            let mut kids = children(&mut s.seq, &[], var, root.x[var], root_score);
            dive.extend(kids.pop());
            heap.extend(kids);
        }
    }
    s.log_line(root_score);

    let mut stopped = false;
    loop {
        let open_bound = heap
            .peek()
            .map(|n| n.bound)
            .into_iter()
            .chain(dive.iter().map(|n| n.bound))
            .fold(s.unresolved, f64::max);
        let inc = s.inc_score();
        if open_bound == f64::NEG_INFINITY || (inc.is_finite() && open_bound <= inc + prune_tol(opts.rel_gap, inc)) {
            break;
        }
        if s.limit_hit() {
            stopped = true;
            break;
        }
        let diving = !dive.is_empty();
        let batch: Vec<Node> = if let Some(n) = dive.pop() {
            vec![n]
        } else {
            let mut b = Vec::new();
            while b.len() < opts.threads.max(1) {
                match heap.pop() {
                    Some(n) => b.push(n),
                    None => break,
                }
            }
            b
        };
        let batch: Vec<Node> = batch.into_iter().filter(|n| n.bound > s.inc_score() + prune_tol(opts.rel_gap, s.inc_score())).collect();
        if batch.is_empty() {
            continue;
        }
        let results: Vec<Result<ContinuousSolution, BnbError>> = if batch.len() == 1 {
            vec![s.solve(&batch[0].fixed)]
        } else {
            let settings = s.settings();
            std::thread::scope(|scope| {
                let handles: Vec<_> = batch
                    .iter()
                    .map(|n| scope.spawn(|| solve_socp(&form.program, &n.fixed, &settings).map_err(BnbError::from)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("relaxation worker panicked")).collect()
            })
        };
        let mut found_incumbent = false;
        for (node, res) in batch.into_iter().zip(results) {
            let sol = res?;
            s.nodes += 1;
            let before = s.history.len();
            match evaluate(&mut s, &node, &sol)? {
                Outcome::Pruned | Outcome::Leaf => {}
                Outcome::Branch(mut kids) => {
                    if diving {
                        dive.extend(kids.pop());
                    }
                    heap.extend(kids);
                }
            }
            if s.history.len() > before {
                found_incumbent = true;
            }
            if opts.log_every > 0 && s.nodes % opts.log_every == 0 {
                let b = heap.peek().map_or(f64::NEG_INFINITY, |n| n.bound).max(node.bound);
                s.log_line(b);
            }
        }
        if found_incumbent {
            // plunge from the best open node
            heap.extend(dive.drain(..));
            if let Some(n) = heap.pop() {
                dive.push(n);
            }
        }
    }

    let bound_open = heap.iter().chain(dive.iter()).map(|n| n.bound).fold(s.unresolved, f64::max);
    let wall_time = s.elapsed();
    let Some((raw_x, inc)) = s.incumbent.clone() else {
        return if stopped {
            Ok(MipSolution {
                status: MipStatus::TimeLimit,
                x: Vec::new(),
                raw_x: Vec::new(),
                objective: f64::NAN,
                bound: sign * bound_open,
                gap: f64::INFINITY,
                nodes: s.nodes,
                wall_time,
                incumbents: Vec::new(),
            })
        } else {
            Err(BnbError::Infeasible)
        };
    };
    let bound = bound_open.max(inc);
    let gap = (bound - inc) / inc.abs().max(1.0);
    let status = if gap <= opts.rel_gap { MipStatus::Optimal } else { MipStatus::FeasibleGap };
    s.log_line(bound);
    let objective = sign * inc;
    let x = if opts.polish { polish(form, &raw_x, objective, &opts.settings).unwrap_or_else(|| raw_x.clone()) } else { raw_x.clone() };
    Ok(MipSolution {
        status,
        x,
        raw_x,
        objective,
        bound: sign * bound,
        gap: gap.max(0.0),
        nodes: s.nodes,
        wall_time,
        incumbents: s.history,
    })
}

fn children(seq: &mut u64, fixed: &[(usize, f64)], var: usize, value: f64, bound: f64) -> Vec<Node> {
    // the rounding direction comes last so a dive takes it
    let first = if value >= 0.5 { 1.0 } else { 0.0 };
    [1.0 - first, first]
        .into_iter()
        .map(|v| {
            let mut f = fixed.to_vec();
            f.push((var, v));
            *seq += 1;
            Node { fixed: f, bound, seq: *seq }
        })
        .collect()
}

fn evaluate(s: &mut Search, node: &Node, sol: &ContinuousSolution) -> Result<Outcome, BnbError> {
    match sol.status {
        SolveStatus::Infeasible => return Ok(Outcome::Pruned),
        SolveStatus::Unbounded | SolveStatus::NumericalLimit => {
            log::warn!("bnb unresolved node seq={} status={:?}", node.seq, sol.status);
            return Ok(match s.any_free(&node.fixed) {
                Some(var) => Outcome::Branch(children(&mut s.seq, &node.fixed, var, 0.5, node.bound)),
                None => {
                    s.unresolved = s.unresolved.max(node.bound);
                    Outcome::Leaf
                }
            });
        }
        SolveStatus::Optimal => {}
    }
    let score = s.score(sol).min(node.bound);
    let inc = s.inc_score();
    if inc.is_finite() && score <= inc + prune_tol(s.opts.rel_gap, inc) {
        return Ok(Outcome::Pruned);
    }
    match s.branch_var(&sol.x, &node.fixed) {
        None => {
            s.offer(sol.x.clone(), s.score(sol));
            Ok(Outcome::Leaf)
        }
        Some(var) => {
            if s.opts.heuristic_every > 0 && s.nodes % s.opts.heuristic_every == 0 {
                s.heuristic(&sol.x)?;
            }
            Ok(Outcome::Branch(children(&mut s.seq, &node.fixed, var, sol.x[var], score)))
        }
    }
}

/// Largest unscaled row or cone violation a polished point may add.
const POLISH_TOL: f64 = 1e-7;

/// Re-solves with the binaries of `x` fixed, holding the objective at
/// `objective`, and returns the tight point the polish objective selects.
/// Gives up when that point is less feasible than `x`.
pub fn polish(form: &Formulation, x: &[f64], objective: f64, settings: &SolveSettings) -> Option<Vec<f64>> {
    let slack = 1e-7 * objective.abs().max(1.0);
    let program = form.polish_program(x, objective, slack);
    let sol = solve_socp(&program, &[], settings).ok()?;
    if sol.status != SolveStatus::Optimal {
        return None;
    }
    let before = check_solution(&form.program, x, POLISH_TOL).ok()?.max_violation();
    let after = check_solution(&form.program, &sol.x, POLISH_TOL).ok()?.max_violation();
    (after <= POLISH_TOL.max(before)).then_some(sol.x)
}

/// Rounds the binaries of a relaxed point, repairs the switch set into a
/// spanning tree of the energizable component, and re-solves. Falls back to
/// dropping fractional customers, then fractional devices.
pub fn rounding_repair(
    form: &Formulation,
    system: &IntegratedSystem,
    relaxed_x: &[f64],
    settings: &SolveSettings,
) -> Result<Option<(Vec<f64>, f64)>, BnbError> {
    let p = &form.program;
    let free = p.free_binaries();
    if free.iter().all(|&b| (relaxed_x[b] - relaxed_x[b].round()).abs() <= INT_TOL) {
        return Ok(Some((relaxed_x.to_vec(), p.objective_value(relaxed_x))));
    }
    let mut base: Vec<(usize, f64)> = Vec::new();
    for &b in &free {
        let mut v = if relaxed_x[b] >= 0.5 { 1.0 } else { 0.0 };
        if let Some(Symbol::DeviceOn(dev)) = form.varmap.symbol(b) {
            let power = form.varmap.get(Symbol::DevicePower(dev)).map_or(0.0, |i| relaxed_x[i]);
            let rated = form.varmap.get(Symbol::DevicePower(dev)).map_or(0.0, |i| p.upper[i]);
            if power > rated * (1.0 + 1e-9) {
                v = 0.0;
            }
        }
        base.push((b, v));
    }
    repair_switches(form, system, relaxed_x, &mut base);

    let floor_class = |fixed: &mut Vec<(usize, f64)>, class: u8| {
        for f in fixed.iter_mut() {
            if form.binary_class(f.0) == class && relaxed_x[f.0] < 1.0 - INT_TOL {
                f.1 = 0.0;
            }
        }
    };
    let mut attempts = vec![base.clone()];
    let mut no_customers = base.clone();
    floor_class(&mut no_customers, 2);
    attempts.push(no_customers.clone());
    floor_class(&mut no_customers, 0);
    attempts.push(no_customers);
    for fixed in attempts {
        let sol = solve_socp(p, &fixed, settings)?;
        if sol.status == SolveStatus::Optimal {
            return Ok(Some((sol.x, sol.objective)));
        }
    }
    Ok(None)
}

/// Replaces the rounded switch values with a maximum-weight spanning tree
/// over the relaxed switch values, fixed-closed branches first.
fn repair_switches(form: &Formulation, system: &IntegratedSystem, x: &[f64], fixed: &mut [(usize, f64)]) {
    let el = &form.topology.electric;
    let mut edges: Vec<(f64, usize)> = Vec::new();
    for (k, b) in system.electric.branches.iter().enumerate() {
        if !el.usable[k] {
            continue;
        }
        let w = match b.status {
            BranchStatus::Switchable => form.varmap.get(Symbol::Switch(k)).map_or(0.0, |c| x[c]),
            _ => f64::INFINITY,
        };
        edges.push((w, k));
    }
    edges.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut dsu = DisjointSet::new(el.node_ids.len());
    let mut closed = vec![false; system.electric.branches.len()];
    for (_, k) in edges {
        let b = &system.electric.branches[k];
        if dsu.union(el.node_index[&b.from], el.node_index[&b.to]) {
            closed[k] = true;
        }
    }
    for f in fixed.iter_mut() {
        if let Some(Symbol::Switch(k)) = form.varmap.symbol(f.0) {
            f.1 = if closed[k] { 1.0 } else { 0.0 };
        }
    }
}
