//! Name-keyed registries for the interchangeable algorithm families.
//!
//! | family          | trait                              | names                                  |
//! |-----------------|------------------------------------|----------------------------------------|
//! | eavesdroppers   | [`Eavesdropper`]                   | `measured_resend`, `conclusive_fixed`  |
//! | Grover backends | [`GroverBackend`]                  | `statevector`, `subspace`              |
//! | period finders  | [`PeriodFinder`]                   | `classical`, `quantum`                 |

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grover::{GroverBackend, StatevectorBackend, SubspaceBackend};
use crate::noisechan::{ConclusiveFixed, Eavesdropper, MeasuredResend};
use crate::qsim::DEFAULT_QUBIT_CAP;
use crate::shor::{ClassicalOrder, PeriodFinder, QuantumPeriodFinder, DEFAULT_PERIOD_SAMPLES};

/// Settings handed to every factory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub qubit_cap: usize,
    /// Period-finding circuit runs per Shor attempt.
    pub period_samples: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            qubit_cap: DEFAULT_QUBIT_CAP,
            period_samples: DEFAULT_PERIOD_SAMPLES,
        }
    }
}

pub type Factory<T> = fn(&SimConfig) -> Box<T>;

pub struct Registry<T: ?Sized> {
    kind: &'static str,
    entries: BTreeMap<&'static str, Factory<T>>,
}

impl<T: ?Sized> Registry<T> {
    pub fn new(kind: &'static str) -> Self {
        Registry {
            kind,
            entries: BTreeMap::new(),
        }
    }

    /// Registers `factory` under `name`, replacing any previous entry.
    pub fn register(&mut self, name: &'static str, factory: Factory<T>) -> &mut Self {
        self.entries.insert(name, factory);
        self
    }

    pub fn create(&self, name: &str, config: &SimConfig) -> Result<Box<T>> {
        self.entries
            .get(name)
            .map(|f| f(config))
            .ok_or_else(|| Error::UnknownStrategy {
                kind: self.kind,
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    /// Registered names in sorted order.
    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

pub fn eavesdroppers() -> Registry<dyn Eavesdropper> {
    let mut r: Registry<dyn Eavesdropper> = Registry::new("eavesdropper");
    r.register("measured_resend", |_| Box::new(MeasuredResend))
        .register("conclusive_fixed", |_| Box::new(ConclusiveFixed));
    r
}

pub fn grover_backends() -> Registry<dyn GroverBackend> {
    let mut r: Registry<dyn GroverBackend> = Registry::new("grover backend");
    r.register("statevector", |c| Box::new(StatevectorBackend::new(c.qubit_cap)))
        .register("subspace", |_| Box::new(SubspaceBackend));
    r
}

pub fn period_finders() -> Registry<dyn PeriodFinder> {
    let mut r: Registry<dyn PeriodFinder> = Registry::new("period finder");
    r.register("classical", |_| Box::new(ClassicalOrder))
        .register("quantum", |c| {
            Box::new(QuantumPeriodFinder::new(c.qubit_cap, c.period_samples))
        });
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_sorted_and_complete() {
        assert_eq!(eavesdroppers().names(), ["conclusive_fixed", "measured_resend"]);
        assert_eq!(grover_backends().names(), ["statevector", "subspace"]);
        assert_eq!(period_finders().names(), ["classical", "quantum"]);
    }

    #[test]
    fn created_objects_report_their_name() {
        let cfg = SimConfig::default();
        for name in eavesdroppers().names() {
            assert_eq!(eavesdroppers().create(name, &cfg).unwrap().name(), name);
        }
        for name in grover_backends().names() {
            assert_eq!(grover_backends().create(name, &cfg).unwrap().name(), name);
        }
        for name in period_finders().names() {
            assert_eq!(period_finders().create(name, &cfg).unwrap().name(), name);
        }
    }

    #[test]
    fn unknown_name_lists_alternatives() {
        let err = period_finders()
            .create("lattice", &SimConfig::default())
            .err()
            .unwrap();
        let msg = err.to_string();
        assert!(msg.contains("lattice") && msg.contains("classical, quantum"), "{msg}");
    }
}
