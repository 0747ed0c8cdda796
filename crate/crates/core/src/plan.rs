//! Decoded restoration decisions and network states.

use serde::{Deserialize, Serialize};

use crate::formulation::{DeviceRef, Formulation, Symbol};
use crate::network::{CustomerId, GasBranchKind, IntegratedSystem, NodeId, WaterBranchKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchState {
    pub id: String,
    pub closed: bool,
    /// Sending-end power and squared current, per-unit.
    pub p: f64,
    pub q: f64,
    pub l: f64,
    pub fict_flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    pub id: NodeId,
    pub energized: bool,
    /// Squared voltage magnitude, per-unit.
    pub v: f64,
    pub p_inj: f64,
    pub q_inj: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DgState {
    pub node: NodeId,
    pub p: f64,
    pub q: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomerState {
    pub id: CustomerId,
    pub restored: bool,
    /// m³/h.
    pub water: f64,
    pub gas: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeviceKind {
    Pump,
    Compressor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceState {
    pub id: String,
    pub kind: DeviceKind,
    pub on: bool,
    /// Power drawn, χ·P.
    pub power_kw: f64,
    pub rated_kw: f64,
    /// Flow through the device branch, m³/h.
    pub flow: f64,
}

impl DeviceState {
    pub fn percent(&self) -> f64 {
        100.0 * self.power_kw / self.rated_kw
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub id: String,
    pub pipe: bool,
    /// m³/h.
    pub flow: f64,
    /// Head loss (m) or pressure-squared drop from `from` to `to`.
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialState {
    pub id: NodeId,
    /// Head (m) or pressure squared.
    pub value: f64,
    /// Reservoir or source outflow, m³/h.
    pub supply: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestorationPlan {
    pub scenario: String,
    pub objective: f64,
    pub branches: Vec<BranchState>,
    pub nodes: Vec<NodeState>,
    pub generators: Vec<DgState>,
    pub customers: Vec<CustomerState>,
    pub devices: Vec<DeviceState>,
    pub water_branches: Vec<FlowState>,
    pub water_nodes: Vec<PotentialState>,
    pub gas_branches: Vec<FlowState>,
    pub gas_nodes: Vec<PotentialState>,
}

/// Flows within solver noise of zero, relative to the branch limit.
const FLOW_NOISE: f64 = 1e-8;

fn snap(flow: f64, limit: f64) -> f64 {
    if flow.abs() <= FLOW_NOISE * limit.max(1.0) {
        0.0
    } else {
        flow
    }
}

impl RestorationPlan {
    /// Reads every modelled quantity out of a solution vector. Missing
    /// columns decode as zero (open, off, unserved); water and gas flows
    /// below 1e-8 of their branch limit decode as zero.
    pub fn decode(system: &IntegratedSystem, form: &Formulation, x: &[f64], objective: f64) -> Self {
        let vm = &form.varmap;
        let val = |s: Symbol| vm.value(x, s);
        let wflow = |b: usize| snap(val(Symbol::WaterFlow(b)), system.water.branches[b].w_max);
        let gflow = |b: usize| snap(val(Symbol::GasFlow(b)), system.gas.branches[b].g_max);
        let on = |s: Symbol| vm.get(s).is_some_and(|i| x[i] > 0.5);
        let el = &form.topology.electric;

        let branches = system
            .electric
            .branches
            .iter()
            .enumerate()
            .map(|(k, b)| BranchState {
                id: b.id.clone(),
                closed: on(Symbol::Switch(k)),
                p: val(Symbol::BranchP(k)),
                q: val(Symbol::BranchQ(k)),
                l: val(Symbol::BranchL(k)),
                fict_flow: val(Symbol::FictFlow(k)),
            })
            .collect();
        let nodes = system
            .electric
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| NodeState {
                id: n.id,
                energized: el.in_component[i],
                v: val(Symbol::Voltage(n.id)),
                p_inj: val(Symbol::InjP(n.id)),
                q_inj: val(Symbol::InjQ(n.id)),
            })
            .collect();
        let generators = system
            .electric
            .dgs
            .iter()
            .enumerate()
            .map(|(d, g)| DgState { node: g.node, p: val(Symbol::DgP(d)), q: val(Symbol::DgQ(d)) })
            .collect();
        let customers = system
            .customers
            .iter()
            .map(|c| CustomerState {
                id: c.id,
                restored: on(Symbol::Restore(c.id)),
                water: val(Symbol::WaterServed(c.id)),
                gas: val(Symbol::GasServed(c.id)),
                t: val(Symbol::Epigraph(c.id)),
            })
            .collect();

        let mut devices = Vec::new();
        for (d, p) in system.water.pumps.iter().enumerate() {
            let dev = DeviceRef::Pump(d);
            let flow = system.pump_branch_index(p).map_or(0.0, wflow);
            devices.push(DeviceState {
                id: p.id.clone(),
                kind: DeviceKind::Pump,
                on: on(Symbol::DeviceOn(dev)),
                power_kw: val(Symbol::DeviceProduct(dev)),
                rated_kw: p.rated_power_kw,
                flow,
            });
        }
        for (d, c) in system.gas.compressors.iter().enumerate() {
            let dev = DeviceRef::Compressor(d);
            let flow = system.compressor_branch_index(c).map_or(0.0, gflow);
            devices.push(DeviceState {
                id: c.id.clone(),
                kind: DeviceKind::Compressor,
                on: on(Symbol::DeviceOn(dev)),
                power_kw: val(Symbol::DeviceProduct(dev)),
                rated_kw: c.rated_power_kw,
                flow,
            });
        }

        let water_branches = system
            .water
            .branches
            .iter()
            .enumerate()
            .map(|(b, br)| FlowState {
                id: br.id.clone(),
                pipe: matches!(br.kind, WaterBranchKind::Pipe { .. }),
                flow: wflow(b),
                drop: val(Symbol::HeadLoss(b)),
            })
            .collect();
        let water_nodes = system
            .water
            .nodes
            .iter()
            .map(|n| PotentialState { id: n.id, value: val(Symbol::Head(n.id)), supply: val(Symbol::ReservoirOut(n.id)) })
            .collect();
        let gas_branches = system
            .gas
            .branches
            .iter()
            .enumerate()
            .map(|(b, br)| FlowState {
                id: br.id.clone(),
                pipe: matches!(br.kind, GasBranchKind::Pipe { .. }),
                flow: gflow(b),
                drop: val(Symbol::Pressure(br.from)) - val(Symbol::Pressure(br.to)),
            })
            .collect();
        let gas_nodes = system
            .gas
            .nodes
            .iter()
            .map(|n| PotentialState { id: n.id, value: val(Symbol::Pressure(n.id)), supply: val(Symbol::SourceOut(n.id)) })
            .collect();

        RestorationPlan {
            scenario: system.name.clone(),
            objective,
            branches,
            nodes,
            generators,
            customers,
            devices,
            water_branches,
            water_nodes,
            gas_branches,
            gas_nodes,
        }
    }

    /// Everything open, off and unserved; voltages and potentials at zero.
    pub fn zero(system: &IntegratedSystem) -> Self {
        RestorationPlan {
            scenario: system.name.clone(),
            objective: 0.0,
            branches: system
                .electric
                .branches
                .iter()
                .map(|b| BranchState { id: b.id.clone(), closed: false, p: 0.0, q: 0.0, l: 0.0, fict_flow: 0.0 })
                .collect(),
            nodes: system
                .electric
                .nodes
                .iter()
                .map(|n| NodeState { id: n.id, energized: false, v: 0.0, p_inj: 0.0, q_inj: 0.0 })
                .collect(),
            generators: system.electric.dgs.iter().map(|g| DgState { node: g.node, p: 0.0, q: 0.0 }).collect(),
            customers: system
                .customers
                .iter()
                .map(|c| CustomerState { id: c.id, restored: false, water: 0.0, gas: 0.0, t: 0.0 })
                .collect(),
            devices: system
                .water
                .pumps
                .iter()
                .map(|p| (p.id.clone(), DeviceKind::Pump, p.rated_power_kw))
                .chain(system.gas.compressors.iter().map(|c| (c.id.clone(), DeviceKind::Compressor, c.rated_power_kw)))
                .map(|(id, kind, rated_kw)| DeviceState { id, kind, on: false, power_kw: 0.0, rated_kw, flow: 0.0 })
                .collect(),
            water_branches: system
                .water
                .branches
                .iter()
                .map(|b| FlowState {
                    id: b.id.clone(),
                    pipe: matches!(b.kind, WaterBranchKind::Pipe { .. }),
                    flow: 0.0,
                    drop: 0.0,
                })
                .collect(),
            water_nodes: system.water.nodes.iter().map(|n| PotentialState { id: n.id, value: 0.0, supply: 0.0 }).collect(),
            gas_branches: system
                .gas
                .branches
                .iter()
                .map(|b| FlowState {
                    id: b.id.clone(),
                    pipe: matches!(b.kind, GasBranchKind::Pipe { .. }),
                    flow: 0.0,
                    drop: 0.0,
                })
                .collect(),
            gas_nodes: system.gas.nodes.iter().map(|n| PotentialState { id: n.id, value: 0.0, supply: 0.0 }).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("plans always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self, serde_json::Error> {
        serde_json::from_slice(bytes)
    }

    /// P1: total head loss over pipes.
    pub fn head_loss_sum(&self) -> f64 {
        self.water_branches.iter().filter(|b| b.pipe).map(|b| b.drop).sum()
    }

    /// P2: total pressure-squared drop over pipes.
    pub fn pressure_drop_sum(&self) -> f64 {
        self.gas_branches.iter().filter(|b| b.pipe).map(|b| b.drop).sum()
    }

    pub fn summary(&self, system: &IntegratedSystem) -> PlanSummary {
        let mut s = PlanSummary::default();
        for c in &system.customers {
            let Some(state) = self.customers.iter().find(|x| x.id == c.id) else { continue };
            if c.electric_node.is_some() {
                s.electric_customers += 1;
                if state.restored {
                    s.restored_customers += 1;
                    s.customer_load_kw += c.s_rate.p_kw;
                }
            }
            if c.water_node.is_some() {
                s.water_demand += c.w_rate;
                s.water_served += state.water;
            }
            if c.gas_node.is_some() {
                s.gas_demand += c.g_rate;
                s.gas_served += state.gas;
            }
        }
        for d in &self.devices {
            if d.on {
                s.device_load_kw += d.power_kw;
            }
        }
        s.closed_switches = self.branches.iter().filter(|b| b.closed).count();
        s
    }
}

/// Totals for reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PlanSummary {
    pub electric_customers: usize,
    pub restored_customers: usize,
    pub customer_load_kw: f64,
    pub device_load_kw: f64,
    pub water_demand: f64,
    pub water_served: f64,
    pub gas_demand: f64,
    pub gas_served: f64,
    pub closed_switches: usize,
}

impl PlanSummary {
    pub fn water_percent(&self) -> f64 {
        if self.water_demand > 0.0 {
            100.0 * self.water_served / self.water_demand
        } else {
            0.0
        }
    }

    pub fn gas_percent(&self) -> f64 {
        if self.gas_demand > 0.0 {
            100.0 * self.gas_served / self.gas_demand
        } else {
            0.0
        }
    }
}
