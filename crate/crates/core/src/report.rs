//! Plot-ready CSV tables for a restoration plan.

use std::path::Path;

use crate::network::IntegratedSystem;
use crate::oracle::FeasibilityReport;
use crate::plan::{DeviceKind, RestorationPlan};

/// File name and contents of each table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportBundle {
    pub customers: String,
    pub voltages: String,
    pub devices: String,
    pub summary: String,
    pub feasibility: String,
}

impl ReportBundle {
    pub fn files(&self) -> [(&'static str, &str); 5] {
        [
            ("customers.csv", &self.customers),
            ("voltages.csv", &self.voltages),
            ("devices.csv", &self.devices),
            ("summary.csv", &self.summary),
            ("feasibility.csv", &self.feasibility),
        ]
    }

    pub fn write_to(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, text) in self.files() {
            std::fs::write(dir.join(name), text)?;
        }
        Ok(())
    }
}

fn table<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

fn num(x: f64) -> String {
    format!("{}", x + 0.0)
}

fn flag(b: bool) -> String {
    u8::from(b).to_string()
}

fn ratio(served: f64, demand: f64) -> String {
    if demand > 0.0 {
        num(served / demand)
    } else {
        String::new()
    }
}

/// Builds every table. Rows are sorted by id; ratios for services a
/// customer does not use are left empty.
pub fn export_report(system: &IntegratedSystem, plan: &RestorationPlan, report: &FeasibilityReport) -> ReportBundle {
    let mut customers: Vec<_> = system
        .customers
        .iter()
        .filter_map(|c| plan.customers.iter().find(|s| s.id == c.id).map(|s| (c, s)))
        .collect();
    customers.sort_by_key(|(c, _)| c.id);
    let customers = table(
        ["id", "priority", "restored", "water_fraction", "gas_fraction"],
        customers.iter().map(|(c, s)| {
            [
                c.id.to_string(),
                num(c.priority),
                if c.electric_node.is_some() { flag(s.restored) } else { String::new() },
                if c.water_node.is_some() { ratio(s.water, c.w_rate) } else { String::new() },
                if c.gas_node.is_some() { ratio(s.gas, c.g_rate) } else { String::new() },
            ]
        }),
    );

    let mut nodes: Vec<_> = plan.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    let voltages = table(
        ["node", "energized", "v_squared", "v_pu"],
        nodes.iter().map(|n| [n.id.to_string(), flag(n.energized), num(n.v), num(n.v.max(0.0).sqrt())]),
    );

    let mut devices: Vec<_> = plan.devices.iter().collect();
    devices.sort_by(|a, b| a.id.cmp(&b.id));
    let devices = table(
        ["id", "kind", "on", "power_kw", "rated_kw", "percent_rated", "flow"],
        devices.iter().map(|d| {
            let kind = match d.kind {
                DeviceKind::Pump => "pump",
                DeviceKind::Compressor => "compressor",
            };
            [
                d.id.clone(),
                kind.to_string(),
                flag(d.on),
                num(d.power_kw),
                num(d.rated_kw),
                num(d.percent()),
                num(d.flow),
            ]
        }),
    );

    let s = plan.summary(system);
    let summary = table(
        ["metric", "value"],
        [
            ("objective", num(plan.objective)),
            ("electric_customers", s.electric_customers.to_string()),
            ("restored_customers", s.restored_customers.to_string()),
            ("customer_load_kw", num(s.customer_load_kw)),
            ("device_load_kw", num(s.device_load_kw)),
            ("water_served", num(s.water_served)),
            ("water_demand", num(s.water_demand)),
            ("water_percent", num(s.water_percent())),
            ("gas_served", num(s.gas_served)),
            ("gas_demand", num(s.gas_demand)),
            ("gas_percent", num(s.gas_percent())),
            ("head_loss_sum", num(plan.head_loss_sum())),
            ("pressure_drop_sum", num(plan.pressure_drop_sum())),
            ("closed_branches", s.closed_switches.to_string()),
            ("exactness_gap", num(report.exactness_gap)),
            ("feasible", flag(report.pass)),
        ]
        .map(|(k, v)| [k.to_string(), v]),
    );

    let mut fams: Vec<_> = report.families.iter().collect();
    fams.sort_by(|a, b| a.family.cmp(&b.family));
    let mut rows: Vec<[String; 5]> = fams
        .iter()
        .map(|f| [f.family.clone(), num(f.max_residual), num(f.tolerance), flag(f.ok()), f.location.clone()])
        .collect();
    let c = &report.conditions;
    for (name, ok) in [("spanning-tree", report.spanning_tree), ("cond1", c.cond1), ("cond2", c.cond2), ("cond3", c.cond3)] {
        rows.push([name.to_string(), String::new(), String::new(), flag(ok), String::new()]);
    }
    let feasibility = table(["family", "max_residual", "tolerance", "ok", "location"], rows);

    ReportBundle { customers, voltages, devices, summary, feasibility }
}
