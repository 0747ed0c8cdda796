use std::collections::{BTreeMap, VecDeque};

use crate::error::OracleError;
use crate::network::{IntegratedSystem, NodeId};
use crate::plan::RestorationPlan;

#[derive(Debug, Clone, PartialEq)]
pub struct FeederBranch {
    pub id: String,
    pub from: NodeId,
    pub to: NodeId,
    pub r: f64,
    pub x: f64,
}

/// Energized radial island with a slack node at fixed squared voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct Island {
    pub nodes: Vec<NodeId>,
    pub branches: Vec<FeederBranch>,
    pub slack: NodeId,
    pub slack_v: f64,
}

/// Branch-flow state; branch quantities follow each branch's own orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Squared voltage magnitudes.
    pub v: BTreeMap<NodeId, f64>,
    pub p: BTreeMap<String, f64>,
    pub q: BTreeMap<String, f64>,
    pub l: BTreeMap<String, f64>,
    pub iterations: usize,
}

pub const SWEEP_MAX_ITER: usize = 500;

/// Backward/forward sweep. `injections` are net (p, q) per node in
/// per-unit, generation positive; the slack's entry is ignored.
pub fn sweep_power_flow(island: &Island, injections: &BTreeMap<NodeId, (f64, f64)>) -> Result<SweepResult, OracleError> {
    let n = island.nodes.len();
    let index: BTreeMap<NodeId, usize> = island.nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let &root = index.get(&island.slack).ok_or(OracleError::NotATree)?;
    if island.branches.len() + 1 != n {
        return Err(OracleError::NotATree);
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, b) in island.branches.iter().enumerate() {
        let (&i, &j) = (index.get(&b.from).ok_or(OracleError::NotATree)?, index.get(&b.to).ok_or(OracleError::NotATree)?);
        adj[i].push((j, k));
        adj[j].push((i, k));
    }
    // parent-to-child orientation
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &(v, k) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some((u, k));
                queue.push_back(v);
            }
        }
    }
    if order.len() != n {
        return Err(OracleError::NotATree);
    }
    let inj: Vec<(f64, f64)> =
        island.nodes.iter().map(|id| injections.get(id).copied().unwrap_or((0.0, 0.0))).collect();

    let m = island.branches.len();
    let mut v = vec![island.slack_v; n];
    let mut l = vec![0.0; m];
    let mut pt = vec![0.0; m];
    let mut qt = vec![0.0; m];
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > SWEEP_MAX_ITER {
            return Err(OracleError::Diverged(SWEEP_MAX_ITER));
        }
        // backward: power entering each child branch at the parent end
        let mut sub_p = vec![0.0; n];
        let mut sub_q = vec![0.0; n];
        for &u in order.iter().rev() {
            let Some((par, k)) = parent[u] else { continue };
            let b = &island.branches[k];
            pt[k] = sub_p[u] - inj[u].0 + b.r * l[k];
            qt[k] = sub_q[u] - inj[u].1 + b.x * l[k];
            sub_p[par] += pt[k];
            sub_q[par] += qt[k];
        }
        // forward
        let mut delta: f64 = 0.0;
        for &u in &order {
            let Some((par, k)) = parent[u] else { continue };
            let b = &island.branches[k];
            let new_l = (pt[k] * pt[k] + qt[k] * qt[k]) / v[par];
            let z2 = b.r * b.r + b.x * b.x;
            let new_v = v[par] - 2.0 * (b.r * pt[k] + b.x * qt[k]) + z2 * new_l;
            if !(new_v > 0.0) {
                return Err(OracleError::Diverged(iterations));
            }
            delta = delta.max((new_l - l[k]).abs()).max((new_v - v[u]).abs());
            l[k] = new_l;
            v[u] = new_v;
        }
        if delta < 1e-12 {
            break;
        }
    }

    let mut res = SweepResult { v: BTreeMap::new(), p: BTreeMap::new(), q: BTreeMap::new(), l: BTreeMap::new(), iterations };
    for (i, &id) in island.nodes.iter().enumerate() {
        res.v.insert(id, v[i]);
    }
    for &(pi, k) in parent.iter().flatten() {
        let b = &island.branches[k];
        let (p, q) = if index[&b.from] == pi {
            (pt[k], qt[k])
        } else {
            // branch stored child-to-parent: its sending end is the child
            (-pt[k] + b.r * l[k], -qt[k] + b.x * l[k])
        };
        res.p.insert(b.id.clone(), p);
        res.q.insert(b.id.clone(), q);
        res.l.insert(b.id.clone(), l[k]);
    }
    Ok(res)
}

/// The energized island of a plan with its injections, slack at the root.
pub fn island_from_plan(
    system: &IntegratedSystem,
    root: NodeId,
    plan: &RestorationPlan,
) -> (Island, BTreeMap<NodeId, (f64, f64)>) {
    let energized: Vec<NodeId> = plan.nodes.iter().filter(|n| n.energized).map(|n| n.id).collect();
    let branches = system
        .electric
        .branches
        .iter()
        .zip(&plan.branches)
        .filter(|(_, s)| s.closed)
        .map(|(b, _)| FeederBranch { id: b.id.clone(), from: b.from, to: b.to, r: b.impedance.r, x: b.impedance.x })
        .collect();
    let slack_v = plan.nodes.iter().find(|n| n.id == root).map_or(1.0, |n| n.v);
    let inj = plan.nodes.iter().filter(|n| n.energized).map(|n| (n.id, (n.p_inj, n.q_inj))).collect();
    (Island { nodes: energized, branches, slack: root, slack_v }, inj)
}
