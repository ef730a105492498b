//! φ-entropy budget for Protocol 3.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::profile::{attribute_entropy, Attribute, PopulationStats};

/// Greedily picks candidate attribute sets in ascending order of the entropy
/// they add to the union, stopping once the cheapest remaining one would push
/// the union past `phi`. Categories unknown to `stats` count as infinite.
///
/// Returns indices into `candidates` in selection order.
pub fn select_entropy_bounded<S: AsRef<[Attribute]>>(
    candidates: &[S],
    phi: f64,
    stats: &PopulationStats,
) -> Vec<usize> {
    if phi.is_nan() || phi <= 0.0 {
        return Vec::new();
    }
    let mut entropy: BTreeMap<&str, f64> = BTreeMap::new();
    for c in candidates {
        for a in c.as_ref() {
            entropy
                .entry(a.category())
                .or_insert_with(|| attribute_entropy(a.category(), stats).unwrap_or(f64::INFINITY));
        }
    }

    let mut used: BTreeSet<&str> = BTreeSet::new();
    let mut total = 0.0;
    let mut chosen = Vec::new();
    let mut remaining: Vec<usize> = (0..candidates.len()).collect();
    while !remaining.is_empty() {
        let (pos, inc) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &i)| {
                let cats: BTreeSet<&str> = candidates[i]
                    .as_ref()
                    .iter()
                    .map(|a| a.category())
                    .collect();
                (pos, cats.difference(&used).map(|c| entropy[c]).sum::<f64>())
            })
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if total + inc > phi {
            break;
        }
        let i = remaining.remove(pos);
        total += inc;
        used.extend(candidates[i].as_ref().iter().map(|a| a.category()));
        chosen.push(i);
    }
    chosen
}

/// Budget under which at least `k` of `n` users are expected to share any
/// disclosed subset: `log2(n / k)`.
pub fn phi_k_anonymity(n: usize, k: usize) -> f64 {
    libm::log2(n as f64 / k as f64).max(0.0)
}

/// Budget that never covers a whole sensitive category: the smallest entropy
/// among them. Unknown categories are ignored; no categories gives infinity.
pub fn phi_sensitive<'a, I: IntoIterator<Item = &'a str>>(
    sensitive: I,
    stats: &PopulationStats,
) -> f64 {
    sensitive
        .into_iter()
        .filter_map(|c| attribute_entropy(c, stats).ok())
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::profile_entropy;
    use alloc::collections::BTreeMap;
    use alloc::string::ToString;
    use alloc::vec;

    fn stats() -> PopulationStats {
        let mut counts = BTreeMap::new();
        // city: 4 equiprobable values (2 bits); tag: 2 values (1 bit); job: 8 values (3 bits)
        for (cat, k) in [("city", 4), ("tag", 2), ("job", 8)] {
            let m: BTreeMap<_, _> = (0..k).map(|i| (i.to_string(), 10u64)).collect();
            counts.insert(cat.to_string(), m);
        }
        PopulationStats::from_counts(80, counts)
    }

    fn a(cat: &str, v: &str) -> Attribute {
        Attribute::new(cat, v).unwrap()
    }

    #[test]
    fn zero_budget_selects_nothing() {
        let c = vec![vec![a("tag", "x")]];
        assert!(select_entropy_bounded(&c, 0.0, &stats()).is_empty());
    }

    #[test]
    fn shared_category_counted_once() {
        let c = vec![
            vec![a("city", "a")],
            vec![a("city", "b")],
            vec![a("city", "c"), a("city", "d")],
        ];
        assert_eq!(select_entropy_bounded(&c, 2.0, &stats()), vec![0, 1, 2]);
    }

    #[test]
    fn greedy_by_increment_and_bound_holds() {
        let s = stats();
        let c = vec![
            vec![a("job", "1")],
            vec![a("tag", "x")],
            vec![a("city", "a"), a("tag", "y")],
            vec![a("zzz", "q")],
        ];
        let got = select_entropy_bounded(&c, 3.5, &s);
        assert_eq!(got, vec![1, 2]);
        let union: Vec<&Attribute> = got.iter().flat_map(|&i| c[i].iter()).collect();
        assert!(profile_entropy(union, &s).unwrap() <= 3.5);
        // the unknown category is never affordable
        assert!(!select_entropy_bounded(&c, 1e9, &s).contains(&3));
    }

    #[test]
    fn budgets() {
        assert_eq!(phi_k_anonymity(1024, 16), 6.0);
        assert_eq!(phi_sensitive(["job", "city"], &stats()), 2.0);
        assert_eq!(phi_sensitive([], &stats()), f64::INFINITY);
    }
}
