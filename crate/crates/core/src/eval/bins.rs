//! Head / torso / tail popularity strata of roughly equal request mass.

use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Bin {
    Tail,
    Torso,
    Head,
}

impl Bin {
    pub const ALL: [Bin; 3] = [Bin::Tail, Bin::Torso, Bin::Head];

    pub fn as_str(self) -> &'static str {
        match self {
            Bin::Tail => "tail",
            Bin::Torso => "torso",
            Bin::Head => "head",
        }
    }
}

impl fmt::Display for Bin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequencyBinAssignment {
    bins: BTreeMap<String, Bin>,
    frequencies: BTreeMap<String, u64>,
}

impl FrequencyBinAssignment {
    pub fn bin(&self, qid: &str) -> Option<Bin> {
        self.bins.get(qid).copied()
    }

    pub fn frequency(&self, qid: &str) -> Option<u64> {
        self.frequencies.get(qid).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Bin)> {
        self.bins.iter().map(|(q, b)| (q.as_str(), *b))
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    /// Total historical frequency assigned to `bin`.
    pub fn mass(&self, bin: Bin) -> u64 {
        self.bins
            .iter()
            .filter(|(_, b)| **b == bin)
            .map(|(q, _)| self.frequencies[q])
            .sum()
    }
}

/// Sorts queries by ascending frequency (ties by id) and cuts the running
/// total at one and two thirds of the overall mass: a query whose running
/// total stays within the first third is Tail, within two thirds Torso, and
/// Head otherwise.
pub fn assign_bins(frequencies: &BTreeMap<String, u64>) -> FrequencyBinAssignment {
    if frequencies.len() < 3 {
        log::warn!("binning {} queries; some bins will be empty", frequencies.len());
    }
    let total: u128 = frequencies.values().map(|&f| u128::from(f)).sum();
    let mut order: Vec<(&String, u64)> = frequencies.iter().map(|(q, &f)| (q, f)).collect();
    order.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
    let mut running: u128 = 0;
    let mut bins = BTreeMap::new();
    for (q, f) in order {
        running += u128::from(f);
        let bin = if 3 * running <= total {
            Bin::Tail
        } else if 3 * running <= 2 * total {
            Bin::Torso
        } else {
            Bin::Head
        };
        bins.insert(q.clone(), bin);
    }
    FrequencyBinAssignment { bins, frequencies: frequencies.clone() }
}
