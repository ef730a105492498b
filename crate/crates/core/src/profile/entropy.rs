use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};

use super::{Attribute, Profile, ProfileError};

/// Empirical value counts per category over a population.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PopulationStats {
    n: usize,
    counts: BTreeMap<String, BTreeMap<String, u64>>,
}

impl PopulationStats {
    pub fn from_profiles<'a, I: IntoIterator<Item = &'a Profile>>(profiles: I) -> Self {
        let mut stats = PopulationStats::default();
        for p in profiles {
            stats.n += 1;
            for a in p.iter() {
                stats.record(a, 1);
            }
        }
        stats
    }

    /// Builds stats from explicit counts. Zero counts are dropped.
    pub fn from_counts(n: usize, counts: BTreeMap<String, BTreeMap<String, u64>>) -> Self {
        let counts = counts
            .into_iter()
            .map(|(c, vals)| {
                (
                    c,
                    vals.into_iter()
                        .filter(|(_, k)| *k > 0)
                        .collect::<BTreeMap<_, _>>(),
                )
            })
            .filter(|(_, vals)| !vals.is_empty())
            .collect();
        PopulationStats { n, counts }
    }

    pub fn record(&mut self, attr: &Attribute, count: u64) {
        *self
            .counts
            .entry(attr.category().to_string())
            .or_default()
            .entry(attr.value().to_string())
            .or_default() += count;
    }

    pub fn population_size(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &BTreeMap<String, BTreeMap<String, u64>> {
        &self.counts
    }

    pub fn categories(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn has_category(&self, category: &str) -> bool {
        self.counts.contains_key(category)
    }

    /// Empirical probability of each value within `category`.
    pub fn probabilities(&self, category: &str) -> Option<impl Iterator<Item = f64> + '_> {
        let vals = self.counts.get(category)?;
        let total: u64 = vals.values().sum();
        Some(vals.values().map(move |&k| k as f64 / total as f64))
    }
}

/// Shannon entropy (bits) of the category's value distribution.
pub fn attribute_entropy(category: &str, stats: &PopulationStats) -> Result<f64, ProfileError> {
    let probs = stats
        .probabilities(category)
        .ok_or_else(|| ProfileError::UnknownCategory(category.to_string()))?;
    let h: f64 = probs.filter(|&p| p > 0.0).map(|p| -p * libm::log2(p)).sum();
    // Clamp the -0.0 of a single-valued category.
    Ok(h.max(0.0))
}

/// Sum of category entropies over the distinct categories in `attrs`.
pub fn profile_entropy<'a, I>(attrs: I, stats: &PopulationStats) -> Result<f64, ProfileError>
where
    I: IntoIterator<Item = &'a Attribute>,
{
    let cats: BTreeSet<&str> = attrs.into_iter().map(Attribute::category).collect();
    cats.into_iter().map(|c| attribute_entropy(c, stats)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn stats_from(spec: &[(&str, &[(&str, u64)])]) -> PopulationStats {
        let mut counts = BTreeMap::new();
        for (cat, vals) in spec {
            let m: BTreeMap<String, u64> = vals.iter().map(|(v, k)| (v.to_string(), *k)).collect();
            counts.insert(cat.to_string(), m);
        }
        PopulationStats::from_counts(100, counts)
    }

    #[test]
    fn closed_form_entropies() {
        let s = stats_from(&[
            ("uni", &[("a", 1), ("b", 1), ("c", 1), ("d", 1)]),
            ("one", &[("a", 9)]),
            ("skew", &[("a", 2), ("b", 1), ("c", 1)]),
        ]);
        assert!((attribute_entropy("uni", &s).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(attribute_entropy("one", &s).unwrap(), 0.0);
        // -(.5 log .5 + 2 * .25 log .25) = 1.5
        assert!((attribute_entropy("skew", &s).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(
            attribute_entropy("nope", &s),
            Err(ProfileError::UnknownCategory("nope".into()))
        );
    }

    #[test]
    fn profile_entropy_counts_categories_once() {
        let s = stats_from(&[
            ("c1", &[("a", 1), ("b", 1), ("c", 1), ("d", 1)]),
            ("c2", &[("a", 1), ("b", 1), ("c", 1), ("d", 1)]),
        ]);
        let none: Vec<Attribute> = vec![];
        assert_eq!(profile_entropy(&none, &s).unwrap(), 0.0);
        let two = [
            Attribute::new("c1", "a").unwrap(),
            Attribute::new("c2", "b").unwrap(),
        ];
        assert!((profile_entropy(&two, &s).unwrap() - 4.0).abs() < 1e-12);
        let dup = [
            Attribute::new("c1", "a").unwrap(),
            Attribute::new("c1", "b").unwrap(),
        ];
        assert!((profile_entropy(&dup, &s).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let s = stats_from(&[("c", &[("a", 3), ("b", 7), ("z", 11)])]);
        let total: f64 = s.probabilities("c").unwrap().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn bounded_by_log_of_value_count() {
        for k in 1..20u64 {
            let vals: Vec<(String, u64)> = (0..k)
                .map(|i| (alloc::format!("v{i}"), i * i + 1))
                .collect();
            let mut counts = BTreeMap::new();
            counts.insert("c".to_string(), vals.into_iter().collect());
            let s = PopulationStats::from_counts(1, counts);
            let h = attribute_entropy("c", &s).unwrap();
            assert!(h >= 0.0 && h <= libm::log2(k as f64) + 1e-12);
        }
    }
}
