use std::collections::{BTreeMap, BTreeSet};

use super::link::{dbm_to_watts, Link, LinkConfig};
use crate::channel::Vec3;
use crate::error::Result;

/// Per-node feasible neighbor sets and the links that back them.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSets {
    /// Every `j != g` meeting the power, SNR and deadline constraints.
    pub feasible: Vec<BTreeSet<usize>>,
    /// Subset of `feasible` whose summed transmit power fits the node budget.
    pub budgeted: Vec<BTreeSet<usize>>,
    /// Link for every feasible ordered pair.
    pub links: BTreeMap<(usize, usize), Link>,
    pub union_covers_all: bool,
}

impl FeasibleSets {
    /// Evaluate all ordered pairs of a layout.
    pub fn compute(positions: &[Vec3], cfg: &LinkConfig) -> Result<Self> {
        let n = positions.len();
        let mut feasible = Vec::with_capacity(n);
        let mut links = BTreeMap::new();
        for g in 0..n {
            let set = feasible_set(g, positions, cfg)?;
            for &j in &set {
                links.insert((g, j), Link::from_budget(&cfg.budget(positions[g], positions[j])?));
            }
            feasible.push(set);
        }
        let budgeted = (0..n).map(|g| budgeted_subset(g, &feasible[g], &links, cfg.max_power_dbm)).collect();
        Ok(Self::assemble(feasible, budgeted, links))
    }

    /// Sets given directly; every feasible pair gets a unit placeholder link.
    pub fn from_sets(feasible: Vec<BTreeSet<usize>>) -> Self {
        let links = feasible
            .iter()
            .enumerate()
            .flat_map(|(g, s)| s.iter().map(move |&j| ((g, j), Link { tx_power_dbm: 0.0, path_loss_db: 0.0, rate_bps: 1.0 })))
            .collect();
        let budgeted = feasible.clone();
        Self::assemble(feasible, budgeted, links)
    }

    fn assemble(
        feasible: Vec<BTreeSet<usize>>,
        budgeted: Vec<BTreeSet<usize>>,
        links: BTreeMap<(usize, usize), Link>,
    ) -> Self {
        let n = feasible.len();
        let covered: BTreeSet<usize> = feasible.iter().flatten().copied().collect();
        let union_covers_all = n > 0 && covered.len() == n && feasible.iter().all(|s| !s.is_empty());
        Self { feasible, budgeted, links, union_covers_all }
    }

    pub fn len(&self) -> usize {
        self.feasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feasible.is_empty()
    }

    pub fn link(&self, g: usize, j: usize) -> Option<&Link> {
        self.links.get(&(g, j))
    }
}

/// Nodes `g` may share with: power within limit, SNR above threshold and
/// the per-round payload delivered before the deadline.
pub fn feasible_set(node: usize, positions: &[Vec3], cfg: &LinkConfig) -> Result<BTreeSet<usize>> {
    let mut out = BTreeSet::new();
    for (j, &pos) in positions.iter().enumerate() {
        if j == node {
            continue;
        }
        let budget = cfg.budget(positions[node], pos)?;
        let rate = Link::from_budget(&budget).rate_bps;
        let in_power = budget.tx_power_dbm <= cfg.max_power_dbm;
        let in_time = rate > 0.0 && cfg.payload(node) / rate <= cfg.share_deadline_s;
        if in_power && budget.meets_threshold() && in_time {
            out.insert(j);
        }
    }
    Ok(out)
}

/// Greedy by descending rate while the summed link power stays within the node budget.
fn budgeted_subset(
    g: usize,
    feasible: &BTreeSet<usize>,
    links: &BTreeMap<(usize, usize), Link>,
    max_power_dbm: f64,
) -> BTreeSet<usize> {
    let mut ranked: Vec<(usize, Link)> = feasible.iter().map(|&j| (j, links[&(g, j)])).collect();
    ranked.sort_by(|a, b| b.1.rate_bps.total_cmp(&a.1.rate_bps).then(a.0.cmp(&b.0)));
    let cap = dbm_to_watts(max_power_dbm);
    let mut used = 0.0;
    let mut out = BTreeSet::new();
    for (j, link) in ranked {
        let p = dbm_to_watts(link.tx_power_dbm);
        if used + p <= cap * (1.0 + 1e-12) {
            used += p;
            out.insert(j);
        }
    }
    out
}

/// Union of the feasible sets covers every node and none is empty.
pub fn check_necessary_condition(sets: &FeasibleSets) -> bool {
    sets.union_covers_all
}
