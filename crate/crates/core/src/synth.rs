//! Seeded random coupled systems for property tests and benchmarks.
//!
//! Generated water networks satisfy the three exactness conditions by
//! construction: pump ratings cover only part of the downstream demand,
//! pipe limits are at least 1.5 times the demand they can carry, and the
//! reservoir head exceeds the total pipe loss at full flow.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formulation::{GRAVITY, WATER_DENSITY};
use crate::network::{
    BranchStatus, Customer, DistributedGenerator, ElectricBranch, ElectricNetwork, ElectricNode, GasBranch,
    GasBranchKind, GasCompressor, GasNetwork, GasNode, Impedance, IntegratedSystem, LoadDemand, NodeId, NodeRole,
    OutageSpec, Provenance, RatioWeights, Reservoir, UnitBase, WaterBranch, WaterBranchKind, WaterNetwork, WaterNode,
    WaterPump, DEFAULT_V_MAX_SQ, DEFAULT_V_MIN_SQ,
};
use crate::scenario::{ScenarioFile, SolverParams};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub electric_nodes: RangeInclusive<usize>,
    pub water_nodes: RangeInclusive<usize>,
    pub pumps: RangeInclusive<usize>,
    pub gas_nodes: RangeInclusive<usize>,
    pub compressors: RangeInclusive<usize>,
    pub customers: RangeInclusive<usize>,
    /// Switchable branches of the base tree.
    pub switchable_tree: usize,
    /// Extra switchable branches closing loops.
    pub ties: usize,
    /// Upper bound on the binary count; customers are trimmed to fit.
    pub max_binaries: Option<usize>,
    /// Generation as a share of total electric demand.
    pub generation_share: RangeInclusive<f64>,
}

impl SynthConfig {
    /// 6-10 electric nodes, 4-6 water nodes with 1-2 pumps, 4-6 gas nodes
    /// with one compressor, at most 12 binaries.
    pub fn small() -> Self {
        SynthConfig {
            electric_nodes: 6..=10,
            water_nodes: 4..=6,
            pumps: 1..=2,
            gas_nodes: 4..=6,
            compressors: 1..=1,
            customers: 4..=7,
            switchable_tree: 1,
            ties: 1,
            max_binaries: Some(12),
            generation_share: 0.55..=0.8,
        }
    }

    /// Mid-sized systems for exactness sweeps.
    pub fn medium() -> Self {
        SynthConfig {
            electric_nodes: 18..=26,
            water_nodes: 8..=12,
            pumps: 2..=3,
            gas_nodes: 8..=12,
            compressors: 1..=2,
            customers: 8..=12,
            switchable_tree: 2,
            ties: 2,
            max_binaries: None,
            generation_share: 0.55..=0.8,
        }
    }
}

fn pick(rng: &mut ChaCha8Rng, r: &RangeInclusive<usize>) -> usize {
    rng.gen_range(r.clone())
}

/// Random tree over nodes 1..=n: node k hangs off one of the `span`
/// previous nodes.
fn random_tree(rng: &mut ChaCha8Rng, n: usize, span: usize) -> Vec<(NodeId, NodeId)> {
    (2..=n)
        .map(|k| {
            let lo = k.saturating_sub(span).max(1);
            (rng.gen_range(lo..k) as NodeId, k as NodeId)
        })
        .collect()
}

/// Node sets below each node (inclusive) of a tree rooted at 1.
fn subtrees(n: usize, edges: &[(NodeId, NodeId)]) -> Vec<BTreeSet<NodeId>> {
    let mut sets: Vec<BTreeSet<NodeId>> = (0..=n).map(|i| BTreeSet::from([i as NodeId])).collect();
    // parents always carry smaller ids
    for &(p, c) in edges.iter().rev() {
        let child = sets[c as usize].clone();
        sets[p as usize].extend(child);
    }
    sets
}

pub fn random_instance(seed: u64, cfg: &SynthConfig) -> ScenarioFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ne = pick(&mut rng, &cfg.electric_nodes);
    let nw = pick(&mut rng, &cfg.water_nodes);
    let ng = pick(&mut rng, &cfg.gas_nodes);
    let n_pumps = pick(&mut rng, &cfg.pumps).min(nw - 1);
    let n_comps = pick(&mut rng, &cfg.compressors).min(ng - 1);
    let mut n_cust = pick(&mut rng, &cfg.customers);
    let n_switch = cfg.switchable_tree.min(ne - 1) + cfg.ties;
    if let Some(limit) = cfg.max_binaries {
        n_cust = n_cust.min(limit.saturating_sub(n_switch + n_pumps + n_comps)).max(1);
    }

    // electric tree, switchable branches and ties
    let tree = random_tree(&mut rng, ne, 3);
    let mut switchable: BTreeSet<usize> = BTreeSet::new();
    let mut candidates: Vec<usize> = (0..tree.len()).collect();
    candidates.shuffle(&mut rng);
    switchable.extend(candidates.into_iter().take(cfg.switchable_tree));
    let mut edges: Vec<(NodeId, NodeId, bool)> =
        tree.iter().enumerate().map(|(k, &(a, b))| (a, b, switchable.contains(&k))).collect();
    let mut used: BTreeSet<(NodeId, NodeId)> = tree.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut attempts = 0;
    while edges.len() < tree.len() + cfg.ties && attempts < 200 {
        attempts += 1;
        let a = rng.gen_range(1..=ne) as NodeId;
        let b = rng.gen_range(1..=ne) as NodeId;
        if a == b || !used.insert((a.min(b), a.max(b))) {
            continue;
        }
        edges.push((a.min(b), a.max(b), true));
    }
    let branches: Vec<ElectricBranch> = edges
        .iter()
        .map(|&(a, b, sw)| ElectricBranch {
            id: format!("{a}-{b}"),
            from: a,
            to: b,
            impedance: Impedance { r: rng.gen_range(0.004..0.02), x: rng.gen_range(0.004..0.02) },
            l_max: 4.0,
            status: if sw { BranchStatus::Switchable } else { BranchStatus::ClosedFixed },
            provenance: Some(Provenance::Synthesized),
        })
        .collect();

    // water: reservoir at 1, pumps on random branches
    let wtree = random_tree(&mut rng, nw, 2);
    let mut pump_branch: Vec<usize> = (0..wtree.len()).collect();
    pump_branch.shuffle(&mut rng);
    pump_branch.truncate(n_pumps);
    pump_branch.sort_unstable();
    // gas: source at 1
    let gtree = random_tree(&mut rng, ng, 2);
    let mut comp_branch: Vec<usize> = (0..gtree.len()).collect();
    comp_branch.shuffle(&mut rng);
    comp_branch.truncate(n_comps);
    comp_branch.sort_unstable();

    // customers
    let weight_sets = [(0.4, 0.3, 0.3), (0.6, 0.2, 0.2), (0.2, 0.4, 0.4), (0.34, 0.33, 0.33)];
    let priorities = [100.0, 10.0, 1.0];
    let mut customers = Vec::new();
    for id in 1..=n_cust as u32 {
        let (a, b, c) = *weight_sets.choose(&mut rng).expect("nonempty");
        customers.push(Customer {
            id,
            priority: *priorities.choose(&mut rng).expect("nonempty"),
            weights: RatioWeights { a, b, c },
            electric_node: Some(rng.gen_range(2..=ne) as NodeId),
            water_node: Some(rng.gen_range(2..=nw) as NodeId),
            gas_node: Some(rng.gen_range(2..=ng) as NodeId),
            s_rate: LoadDemand { p_kw: (rng.gen_range(30.0f64..120.0)).round(), q_kvar: None },
            w_rate: (rng.gen_range(20.0f64..80.0)).round(),
            g_rate: (rng.gen_range(30.0f64..120.0)).round(),
            provenance: Some(Provenance::Synthesized),
        });
    }
    let mut wdem = vec![0.0; nw + 1];
    let mut gdem = vec![0.0; ng + 1];
    for c in &customers {
        wdem[c.water_node.expect("set") as usize] += c.w_rate;
        gdem[c.gas_node.expect("set") as usize] += c.g_rate;
    }
    let wsub = subtrees(nw, &wtree);
    let gsub = subtrees(ng, &gtree);
    let down_w = |node: NodeId| wsub[node as usize].iter().map(|&i| wdem[i as usize]).sum::<f64>();
    let down_g = |node: NodeId| gsub[node as usize].iter().map(|&i| gdem[i as usize]).sum::<f64>();

    let k = 1.0 / 3600.0;
    let head = 30.0;
    let n_pipes = (wtree.len() - n_pumps).max(1) as f64;
    let mut wbranches = Vec::new();
    let mut pumps = Vec::new();
    let mut pump_nodes: Vec<NodeId> = Vec::new();
    let mut electric_pool: Vec<NodeId> = (2..=ne as NodeId).collect();
    electric_pool.shuffle(&mut rng);
    let next_device_node = |i: usize| electric_pool[i % electric_pool.len()];
    for (b, &(p, c)) in wtree.iter().enumerate() {
        let w_max = (1.5 * down_w(c)).max(10.0);
        let id = format!("W{p}-{c}");
        if let Some(pos) = pump_branch.iter().position(|&x| x == b) {
            let pid = format!("WP{}", pos + 1);
            let (alpha, beta, eff) = (rng.gen_range(150.0..200.0), rng.gen_range(150.0..250.0), 0.8);
            let need = WATER_DENSITY * GRAVITY / eff * (alpha * (k * down_w(c)).powi(2) + beta * k * down_w(c)) / 1000.0;
            let node = next_device_node(pos);
            pump_nodes.push(node);
            pumps.push(WaterPump {
                id: pid.clone(),
                water_branch: id.clone(),
                electric_node: node,
                rated_power_kw: (0.8 * need).max(5.0),
                alpha,
                beta,
                efficiency: eff,
                phi: 0.3,
            });
            wbranches.push(WaterBranch {
                id,
                from: p,
                to: c,
                kind: WaterBranchKind::Pump { pump_id: pid },
                w_max,
                provenance: Some(Provenance::Synthesized),
            });
        } else {
            // loss at full flow is a small share of the reservoir head
            let f = head / (3.0 * n_pipes) / (k * w_max).powi(2) * rng.gen_range(0.5..1.0);
            wbranches.push(WaterBranch {
                id,
                from: p,
                to: c,
                kind: WaterBranchKind::Pipe { f },
                w_max,
                provenance: Some(Provenance::Synthesized),
            });
        }
    }
    let wnodes: Vec<WaterNode> = (1..=nw as NodeId)
        .map(|i| WaterNode {
            id: i,
            demand_rate: wdem[i as usize],
            h_min: if i == 1 { 0.0 } else { rng.gen_range(5.0f64..12.0).round() },
            reservoir: (i == 1).then_some(Reservoir { fixed_head: head }),
            provenance: Some(Provenance::Synthesized),
        })
        .collect();

    let mut gbranches = Vec::new();
    let mut comps = Vec::new();
    let mut comp_nodes = Vec::new();
    for (b, &(p, c)) in gtree.iter().enumerate() {
        let g_max = (1.5 * down_g(c)).max(10.0);
        let id = format!("G{p}-{c}");
        if let Some(pos) = comp_branch.iter().position(|&x| x == b) {
            let cid = format!("GC{}", pos + 1);
            let sigma = 0.42;
            let node = next_device_node(n_pumps + pos);
            comp_nodes.push(node);
            comps.push(GasCompressor {
                id: cid.clone(),
                gas_branch: id.clone(),
                electric_node: node,
                rated_power_kw: (sigma * down_g(c) * rng.gen_range(0.7..1.0)).max(5.0),
                gamma: rng.gen_range(1.5..2.0),
                sigma,
                phi: 0.3,
            });
            gbranches.push(GasBranch {
                id,
                from: p,
                to: c,
                kind: GasBranchKind::Compressor { compressor_id: cid },
                g_max,
                provenance: Some(Provenance::Synthesized),
            });
        } else {
            let drop = rng.gen_range(2.0..5.0);
            gbranches.push(GasBranch {
                id,
                from: p,
                to: c,
                kind: GasBranchKind::Pipe { c: g_max * g_max / drop },
                g_max,
                provenance: Some(Provenance::Synthesized),
            });
        }
    }
    let gnodes: Vec<GasNode> = (1..=ng as NodeId)
        .map(|i| GasNode {
            id: i,
            demand_rate: gdem[i as usize],
            psi_min: if i == 1 { 16.0 } else { 4.0 },
            psi_max: if i == 1 { 25.0 } else { 100.0 },
            source: i == 1,
            provenance: Some(Provenance::Synthesized),
        })
        .collect();

    // generation: root DG plus one more, covering part of the demand
    let demand: f64 = customers.iter().map(|c| c.s_rate.p_kw).sum::<f64>()
        + pumps.iter().map(|p| p.rated_power_kw).sum::<f64>()
        + comps.iter().map(|c| c.rated_power_kw).sum::<f64>();
    let share = rng.gen_range(cfg.generation_share.clone());
    let second = rng.gen_range(2..=ne) as NodeId;
    let split = rng.gen_range(0.5..0.8);
    let dgs = vec![
        DistributedGenerator {
            node: 1,
            capacity_kva: (demand * share * split).round().max(10.0),
            provenance: Some(Provenance::Synthesized),
        },
        DistributedGenerator {
            node: second,
            capacity_kva: (demand * share * (1.0 - split)).round().max(10.0),
            provenance: Some(Provenance::Synthesized),
        },
    ];

    let mut roles: BTreeMap<NodeId, BTreeSet<NodeRole>> = BTreeMap::new();
    let mut attached: BTreeMap<NodeId, Vec<String>> = BTreeMap::new();
    for dg in &dgs {
        roles.entry(dg.node).or_default().insert(NodeRole::Dg);
    }
    for c in &customers {
        roles.entry(c.electric_node.expect("set")).or_default().insert(NodeRole::CustomerLoad);
    }
    for p in &pumps {
        roles.entry(p.electric_node).or_default().insert(NodeRole::PumpLoad);
        attached.entry(p.electric_node).or_default().push(p.id.clone());
    }
    for c in &comps {
        roles.entry(c.electric_node).or_default().insert(NodeRole::CompressorLoad);
        attached.entry(c.electric_node).or_default().push(c.id.clone());
    }
    let enodes = (1..=ne as NodeId)
        .map(|i| ElectricNode {
            id: i,
            v_min_sq: DEFAULT_V_MIN_SQ,
            v_max_sq: DEFAULT_V_MAX_SQ,
            roles: roles.remove(&i).unwrap_or_default(),
            attached_device_ids: attached.remove(&i).unwrap_or_default(),
        })
        .collect();

    let system = IntegratedSystem {
        name: format!("synth-{seed}"),
        base: UnitBase { kva: 1000.0, kv: 12.66 },
        electric: ElectricNetwork { nodes: enodes, branches, dgs },
        water: WaterNetwork { nodes: wnodes, branches: wbranches, pumps },
        gas: GasNetwork { nodes: gnodes, branches: gbranches, compressors: comps },
        customers,
    };
    let outage = OutageSpec { damaged_electric_branches: BTreeSet::new(), grid_available: false, root_node: 1 };
    ScenarioFile {
        system,
        outage,
        params: SolverParams::default(),
        notes: vec![format!("random instance, seed {seed}")],
    }
}
