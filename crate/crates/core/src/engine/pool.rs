use crate::agents::{CustomerAgent, CustomerId, CustomerState};
use crate::config::{CustomerType, PickPolicy, ScenarioConfig};
use crate::stochastic::RandomStream;
use rand::seq::{index, SliceRandom};
use std::collections::BTreeMap;

/// Splits `n` into integer parts proportional to `shares` (largest
/// remainder; ties go to the earlier key).
pub fn largest_remainder<K: Copy + Ord>(shares: &BTreeMap<K, f64>, n: usize) -> BTreeMap<K, usize> {
    let total: f64 = shares.values().sum();
    let mut parts: BTreeMap<K, usize> = BTreeMap::new();
    let mut remainders: Vec<(K, f64)> = Vec::new();
    for (&k, &s) in shares {
        let exact = if total > 0.0 { s / total * n as f64 } else { 0.0 };
        parts.insert(k, exact.floor() as usize);
        remainders.push((k, exact - exact.floor()));
    }
    let assigned: usize = parts.values().sum();
    remainders.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    for (k, _) in remainders.into_iter().take(n.saturating_sub(assigned)) {
        *parts.get_mut(&k).expect("key present") += 1;
    }
    parts
}

/// Creates the customer population with exact type counts.
pub fn populate(config: &ScenarioConfig) -> Vec<CustomerAgent> {
    let counts = largest_remainder(&config.customer_type_split, config.pool_size);
    counts
        .iter()
        .flat_map(|(&kind, &n)| std::iter::repeat_n(kind, n))
        .enumerate()
        .map(|(id, kind)| CustomerAgent::new(id, kind, config))
        .collect()
}

/// Chooses up to `n` resting customers for today's visits, in random
/// order. Returns every resting customer when fewer than `n` are resting.
pub fn pick_customers(
    customers: &[CustomerAgent],
    n: usize,
    policy: &PickPolicy,
    stream: &mut RandomStream,
) -> Vec<CustomerId> {
    let resting: Vec<CustomerId> = customers
        .iter()
        .filter(|c| c.state == CustomerState::Resting)
        .map(|c| c.id)
        .collect();
    if n == 0 {
        return Vec::new();
    }
    if n >= resting.len() {
        let mut all = resting;
        all.shuffle(stream.rng());
        return all;
    }
    match policy {
        PickPolicy::Uniform => index::sample(stream.rng(), resting.len(), n)
            .into_iter()
            .map(|i| resting[i])
            .collect(),
        PickPolicy::SatisfactionBiased => {
            let weight = |i: usize| (1 + customers[resting[i]].lifetime_score).max(1) as f64;
            index::sample_weighted(stream.rng(), resting.len(), weight, n)
                .expect("positive finite weights")
                .into_iter()
                .map(|i| resting[i])
                .collect()
        }
        PickPolicy::TypeQuota(quota) => {
            let targets = largest_remainder(quota, n);
            let mut by_type: BTreeMap<CustomerType, Vec<CustomerId>> = BTreeMap::new();
            for &id in &resting {
                by_type.entry(customers[id].kind).or_default().push(id);
            }
            let mut picked = Vec::with_capacity(n);
            for (kind, &target) in &targets {
                let Some(ids) = by_type.get_mut(kind) else {
                    continue;
                };
                let take = target.min(ids.len());
                let chosen = index::sample(stream.rng(), ids.len(), take).into_vec();
                let mut chosen_flags = vec![false; ids.len()];
                for i in chosen {
                    chosen_flags[i] = true;
                    picked.push(ids[i]);
                }
                let mut flags = chosen_flags.into_iter();
                ids.retain(|_| !flags.next().unwrap_or(false));
            }
            if picked.len() < n {
                let rest: Vec<CustomerId> = by_type.into_values().flatten().collect();
                let extra = (n - picked.len()).min(rest.len());
                picked.extend(index::sample(stream.rng(), rest.len(), extra).into_iter().map(|i| rest[i]));
            }
            picked.shuffle(stream.rng());
            picked
        }
    }
}
