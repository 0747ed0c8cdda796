use std::collections::HashMap;

use crate::network::{CustomerId, NodeId};

/// A pump or compressor, by position in its network's device list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DeviceRef {
    Pump(usize),
    Compressor(usize),
}

/// Model symbols. Branch and DG symbols carry list indices; node and customer
/// symbols carry ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Switch(usize),
    FictFlow(usize),
    BranchP(usize),
    BranchQ(usize),
    BranchL(usize),
    Voltage(NodeId),
    InjP(NodeId),
    InjQ(NodeId),
    DgP(usize),
    DgQ(usize),
    Restore(CustomerId),
    WaterServed(CustomerId),
    GasServed(CustomerId),
    Epigraph(CustomerId),
    DeviceOn(DeviceRef),
    DevicePower(DeviceRef),
    /// `χ·P` of a device.
    DeviceProduct(DeviceRef),
    WaterFlow(usize),
    Head(NodeId),
    HeadLoss(usize),
    ReservoirOut(NodeId),
    GasFlow(usize),
    Pressure(NodeId),
    PressureDrop(usize),
    SourceOut(NodeId),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VariableMap {
    index: HashMap<Symbol, usize>,
    symbols: Vec<Symbol>,
}

impl VariableMap {
    /// Registers `symbol` as the next column. Panics on a duplicate or an
    /// out-of-order column, both of which are builder bugs.
    pub(crate) fn insert(&mut self, symbol: Symbol, column: usize) {
        assert_eq!(column, self.symbols.len(), "columns must be registered in order");
        let prev = self.index.insert(symbol, column);
        assert!(prev.is_none(), "symbol {symbol:?} registered twice");
        self.symbols.push(symbol);
    }

    pub fn get(&self, symbol: Symbol) -> Option<usize> {
        self.index.get(&symbol).copied()
    }

    pub fn symbol(&self, column: usize) -> Option<Symbol> {
        self.symbols.get(column).copied()
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    /// Value of `symbol` in `x`, or 0 when the symbol has no column.
    pub fn value(&self, x: &[f64], symbol: Symbol) -> f64 {
        self.get(symbol).map_or(0.0, |i| x[i])
    }
}
