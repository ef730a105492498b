//! Synthetic populations with Zipf-distributed attribute popularity.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Poisson, Zipf};

use super::{Attribute, PopulationStats, Profile, ProfileError};

/// How many attributes each generated user holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AttrCount {
    Fixed(usize),
    /// `1 + Poisson(mean - 1)`, capped at `max`.
    Poisson {
        mean: f64,
        max: usize,
    },
}

impl AttrCount {
    fn max(&self) -> usize {
        match *self {
            AttrCount::Fixed(k) => k,
            AttrCount::Poisson { max, .. } => max,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PopulationParams {
    pub n: usize,
    /// Number of attribute categories; a single category is named `tag`.
    pub categories: usize,
    pub values_per_category: usize,
    /// Zipf exponent of value popularity within a category; 0 is uniform.
    pub zipf_s: f64,
    pub attrs_per_user: AttrCount,
    pub seed: u64,
}

impl Default for PopulationParams {
    /// Shaped after a microblog tag dataset: about 6 tags per user, at most 20.
    fn default() -> Self {
        PopulationParams {
            n: 52_248,
            categories: 1,
            values_per_category: 4096,
            zipf_s: 1.0,
            attrs_per_user: AttrCount::Poisson { mean: 6.0, max: 20 },
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub profiles: Vec<Profile>,
    pub stats: PopulationStats,
}

impl Population {
    pub fn from_profiles(profiles: Vec<Profile>) -> Self {
        let stats = PopulationStats::from_profiles(&profiles);
        Population { profiles, stats }
    }

    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

pub fn category_name(params: &PopulationParams, idx: usize) -> alloc::string::String {
    if params.categories == 1 {
        "tag".into()
    } else {
        format!("c{idx}")
    }
}

pub fn generate_population(params: &PopulationParams) -> Result<Population, ProfileError> {
    if params.n == 0 {
        return Err(ProfileError::InvalidParameter("n must be at least 1"));
    }
    if params.categories == 0 || params.values_per_category == 0 {
        return Err(ProfileError::InvalidParameter("empty attribute vocabulary"));
    }
    if !params.zipf_s.is_finite() || params.zipf_s < 0.0 {
        return Err(ProfileError::InvalidParameter(
            "zipf exponent must be finite and >= 0",
        ));
    }
    let max = params.attrs_per_user.max();
    if max == 0 || max > params.categories * params.values_per_category {
        return Err(ProfileError::InvalidParameter(
            "attribute count outside vocabulary size",
        ));
    }
    let poisson = match params.attrs_per_user {
        AttrCount::Fixed(_) => None,
        AttrCount::Poisson { mean, .. } => {
            if !mean.is_finite() || mean < 1.0 {
                return Err(ProfileError::InvalidParameter(
                    "mean attribute count must be >= 1",
                ));
            }
            // Poisson::new rejects a zero rate; mean == 1 means exactly one attribute.
            if mean > 1.0 {
                Some(
                    Poisson::new(mean - 1.0)
                        .map_err(|_| ProfileError::InvalidParameter("poisson"))?,
                )
            } else {
                None
            }
        }
    };
    let zipf = Zipf::new(params.values_per_category as f64, params.zipf_s)
        .map_err(|_| ProfileError::InvalidParameter("zipf"))?;

    // Pre-normalized names; normalization of "v123" is the identity.
    let names: Vec<alloc::string::String> = (0..params.categories)
        .map(|c| category_name(params, c))
        .collect();

    let mut rng = ChaCha20Rng::seed_from_u64(params.seed);
    let mut profiles = Vec::with_capacity(params.n);
    for _ in 0..params.n {
        let k = match (params.attrs_per_user, &poisson) {
            (AttrCount::Fixed(k), _) => k,
            (AttrCount::Poisson { max, .. }, Some(dist)) => {
                let extra: f64 = dist.sample(&mut rng);
                (1 + extra as usize).min(max)
            }
            (AttrCount::Poisson { .. }, None) => 1,
        };
        let mut picked: BTreeSet<(usize, usize)> = BTreeSet::new();
        while picked.len() < k {
            let cat = rng.random_range(0..params.categories);
            let val = zipf.sample(&mut rng) as usize - 1;
            picked.insert((cat, val));
        }
        let attrs = picked
            .into_iter()
            .map(|(c, v)| Attribute::new(&names[c], &format!("v{v}")))
            .collect::<Result<Vec<_>, _>>()?;
        profiles.push(Profile::with_limit(
            attrs,
            max.max(super::DEFAULT_MAX_ATTRIBUTES),
        )?);
    }
    Ok(Population::from_profiles(profiles))
}

/// Fraction of profiles whose attribute set occurs exactly once.
pub fn uniqueness_fraction(profiles: &[Profile]) -> f64 {
    if profiles.is_empty() {
        return 0.0;
    }
    let mut seen: BTreeMap<&Profile, usize> = BTreeMap::new();
    for p in profiles {
        *seen.entry(p).or_default() += 1;
    }
    let unique = seen.values().filter(|&&c| c == 1).count();
    unique as f64 / profiles.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> PopulationParams {
        PopulationParams {
            n: 500,
            seed,
            ..PopulationParams::default()
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            generate_population(&small(7)).unwrap(),
            generate_population(&small(7)).unwrap()
        );
        assert_ne!(
            generate_population(&small(7)).unwrap(),
            generate_population(&small(8)).unwrap()
        );
    }

    #[test]
    fn fixed_counts() {
        let params = PopulationParams {
            n: 2000,
            attrs_per_user: AttrCount::Fixed(6),
            ..small(1)
        };
        let pop = generate_population(&params).unwrap();
        assert!(pop.profiles.iter().all(|p| p.len() == 6));
        assert_eq!(pop.stats.population_size(), 2000);
    }

    #[test]
    fn default_shape_mean_and_max() {
        let pop = generate_population(&PopulationParams {
            n: 5000,
            ..small(3)
        })
        .unwrap();
        let mean = pop.profiles.iter().map(Profile::len).sum::<usize>() as f64 / 5000.0;
        assert!((mean - 6.0).abs() < 0.3, "mean {mean}");
        assert!(pop.profiles.iter().all(|p| p.len() <= 20));
    }

    #[test]
    fn zero_exponent_is_near_uniform() {
        let params = PopulationParams {
            n: 20_000,
            values_per_category: 10,
            zipf_s: 0.0,
            attrs_per_user: AttrCount::Fixed(1),
            ..small(4)
        };
        let pop = generate_population(&params).unwrap();
        for &c in pop.stats.counts()["tag"].values() {
            assert!((1700..2300).contains(&c), "count {c}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_population(&PopulationParams { n: 0, ..small(0) }).is_err());
        let tiny = PopulationParams {
            values_per_category: 3,
            attrs_per_user: AttrCount::Fixed(4),
            ..small(0)
        };
        assert!(generate_population(&tiny).is_err());
    }

    #[test]
    fn uniqueness_counts_singletons() {
        let a = Profile::new([Attribute::tag("a").unwrap()]).unwrap();
        let b = Profile::new([Attribute::tag("b").unwrap()]).unwrap();
        assert_eq!(uniqueness_fraction(&[a.clone(), a, b]), 1.0 / 3.0);
    }
}
