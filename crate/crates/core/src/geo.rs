//! Hexagonal-lattice location hashing and vicinity sets.
//!
//! Lattice vectors are `a1 = (d, 0)` and `a2 = (d/2, √3·d/2)`. A vicinity of
//! `K` rings holds every lattice point within hexagonal distance `K` of the
//! center, `3K(K+1)+1` points in all.

use alloc::format;
use alloc::vec::Vec;

use crate::digest::Digest;
use crate::profile::{Attribute, RequestSpec};

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

pub const GEO_CATEGORY: &str = "geo";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeConfig {
    pub origin: (f64, f64),
    pub d: f64,
}

impl LatticeConfig {
    pub fn new(origin: (f64, f64), d: f64) -> Self {
        assert!(d > 0.0 && d.is_finite(), "lattice spacing must be positive");
        LatticeConfig { origin, d }
    }

    pub fn position(&self, pt: LatticePoint) -> (f64, f64) {
        let (u1, u2) = (pt.u1 as f64, pt.u2 as f64);
        (
            self.origin.0 + self.d * (u1 + 0.5 * u2),
            self.origin.1 + self.d * SQRT3_2 * u2,
        )
    }

    fn same_as(&self, other: &LatticeConfig) -> bool {
        self.origin.0.to_bits() == other.origin.0.to_bits()
            && self.origin.1.to_bits() == other.origin.1.to_bits()
            && self.d.to_bits() == other.d.to_bits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticePoint {
    pub u1: i64,
    pub u2: i64,
}

impl LatticePoint {
    pub const fn new(u1: i64, u2: i64) -> Self {
        LatticePoint { u1, u2 }
    }

    /// Number of hexagonal steps between two lattice points.
    pub fn hex_distance(self, other: LatticePoint) -> i64 {
        let (a, b) = (self.u1 - other.u1, self.u2 - other.u2);
        a.abs().max(b.abs()).max((a + b).abs())
    }

    /// Canonical text `"u1,u2"`, signs included.
    pub fn canonical(self) -> alloc::string::String {
        format!("{},{}", self.u1, self.u2)
    }
}

fn dist2(cfg: &LatticeConfig, pt: LatticePoint, loc: (f64, f64)) -> f64 {
    let (x, y) = cfg.position(pt);
    (x - loc.0) * (x - loc.0) + (y - loc.1) * (y - loc.1)
}

/// Nearest lattice point; exact ties go to the lexicographically smaller point.
pub fn hash_location(cfg: &LatticeConfig, location: (f64, f64)) -> LatticePoint {
    let x = (location.0 - cfg.origin.0) / cfg.d;
    let y = (location.1 - cfg.origin.1) / cfg.d;
    let f2 = y / SQRT3_2;
    let f1 = x - 0.5 * f2;
    let (b1, b2) = (libm::floor(f1) as i64, libm::floor(f2) as i64);
    let mut best = LatticePoint::new(b1, b2);
    let mut best_d = f64::INFINITY;
    // The containing rhombus plus one ring around it always holds the nearest point.
    for du1 in -1..=2 {
        for du2 in -1..=2 {
            let pt = LatticePoint::new(b1 + du1, b2 + du2);
            let d = dist2(cfg, pt, location);
            if d < best_d || (d == best_d && pt < best) {
                best = pt;
                best_d = d;
            }
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct VicinitySet {
    pub config: LatticeConfig,
    pub rings: u32,
    pub center: LatticePoint,
    /// Sorted by `(u1, u2)`.
    pub points: Vec<LatticePoint>,
}

impl VicinitySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn centered_hexagonal(rings: u32) -> usize {
    let k = rings as usize;
    3 * k * (k + 1) + 1
}

pub fn vicinity_around(cfg: &LatticeConfig, center: LatticePoint, rings: u32) -> VicinitySet {
    let k = i64::from(rings);
    let mut points = Vec::with_capacity(centered_hexagonal(rings));
    for a in -k..=k {
        for b in (-k).max(-a - k)..=k.min(-a + k) {
            points.push(LatticePoint::new(center.u1 + a, center.u2 + b));
        }
    }
    VicinitySet {
        config: *cfg,
        rings,
        center,
        points,
    }
}

pub fn vicinity_set(cfg: &LatticeConfig, location: (f64, f64), rings: u32) -> VicinitySet {
    assert!(rings >= 1, "a vicinity needs at least one ring");
    vicinity_around(cfg, hash_location(cfg, location), rings)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum GeoError {
    #[error("vicinity sets were built on different lattices")]
    ConfigMismatch,
}

/// `|Vi ∩ Vk| / |Vk|`.
pub fn vicinity_similarity(vi: &VicinitySet, vk: &VicinitySet) -> Result<f64, GeoError> {
    if !vi.config.same_as(&vk.config) {
        return Err(GeoError::ConfigMismatch);
    }
    if vk.points.is_empty() {
        return Ok(0.0);
    }
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < vi.points.len() && j < vk.points.len() {
        match vi.points[i].cmp(&vk.points[j]) {
            core::cmp::Ordering::Less => i += 1,
            core::cmp::Ordering::Greater => j += 1,
            core::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(common as f64 / vk.points.len() as f64)
}

pub fn lattice_attribute(pt: LatticePoint) -> Attribute {
    Attribute::verbatim(GEO_CATEGORY, &pt.canonical()).expect("canonical lattice text is valid")
}

/// One `geo` attribute per lattice point, sorted.
pub fn vicinity_request_attributes(v: &VicinitySet) -> Vec<Attribute> {
    let mut attrs: Vec<Attribute> = v.points.iter().map(|&p| lattice_attribute(p)).collect();
    attrs.sort();
    attrs
}

/// A fuzzy request that matches anyone sharing at least `ceil(threshold·|V|)`
/// lattice points with `v`.
pub fn vicinity_request(
    v: &VicinitySet,
    threshold: f64,
) -> Result<RequestSpec, crate::profile::ProfileError> {
    let attrs = vicinity_request_attributes(v);
    let beta = libm::ceil(threshold * attrs.len() as f64 - 1e-9) as usize;
    RequestSpec::new(Vec::new(), attrs, beta.clamp(1, v.len()))
}

/// `H("geo-dyn" ∥ u1 ∥ u2)` with coordinates as 64-bit big-endian.
pub fn dynamic_key(pt: LatticePoint) -> Digest {
    Digest::hash_parts(&[b"geo-dyn", &pt.u1.to_be_bytes(), &pt.u2.to_be_bytes()])
}

pub fn derive_dynamic_keys(v: &VicinitySet) -> Vec<Digest> {
    v.points.iter().map(|&p| dynamic_key(p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> LatticeConfig {
        LatticeConfig::new((0.0, 0.0), 1.0)
    }

    /// Independent oracle: scan a wide box of lattice points.
    fn brute_nearest(cfg: &LatticeConfig, loc: (f64, f64)) -> (LatticePoint, f64) {
        let v = libm::round((loc.1 - cfg.origin.1) / (cfg.d * SQRT3_2));
        let u = libm::round((loc.0 - cfg.origin.0) / cfg.d - 0.5 * v);
        let guess = LatticePoint::new(u as i64, v as i64);
        let mut best = (guess, f64::INFINITY);
        for a in -2..=2 {
            for b in -2..=2 {
                let pt = LatticePoint::new(guess.u1 + a, guess.u2 + b);
                let d = dist2(cfg, pt, loc);
                if d < best.1 {
                    best = (pt, d);
                }
            }
        }
        best
    }

    #[test]
    fn hashing_examples() {
        let c = unit();
        assert_eq!(hash_location(&c, (0.6, 0.0)), LatticePoint::new(1, 0));
        assert_eq!(hash_location(&c, (0.4, 0.9)), LatticePoint::new(0, 1));
        let on = c.position(LatticePoint::new(-3, 2));
        assert_eq!(hash_location(&c, on), LatticePoint::new(-3, 2));
    }

    #[test]
    fn hashing_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = LatticeConfig::new((13.5, -7.25), 2.5);
        for _ in 0..10_000 {
            let loc = (
                rng.random_range(-500.0..500.0),
                rng.random_range(-500.0..500.0),
            );
            let got = hash_location(&cfg, loc);
            let (_, want_d) = brute_nearest(&cfg, loc);
            assert!((dist2(&cfg, got, loc) - want_d).abs() < 1e-9);
            assert!(libm::sqrt(dist2(&cfg, got, loc)) <= cfg.d / libm::sqrt(3.0) + 1e-9);
        }
    }

    #[test]
    fn vicinity_sizes() {
        for k in 1..=10u32 {
            let v = vicinity_set(&unit(), (0.2, 0.1), k);
            assert_eq!(v.len(), centered_hexagonal(k));
            assert!(v.points.contains(&v.center));
            assert!(v.points.windows(2).all(|w| w[0] < w[1]));
        }
        assert_eq!(centered_hexagonal(1), 7);
        assert_eq!(centered_hexagonal(2), 19);
        assert_eq!(centered_hexagonal(3), 37);
    }

    #[test]
    fn three_rings_by_enumeration() {
        let mut n = 0;
        for a in -5i64..=5 {
            for b in -5i64..=5 {
                if LatticePoint::new(a, b).hex_distance(LatticePoint::new(0, 0)) <= 3 {
                    n += 1;
                }
            }
        }
        assert_eq!(n, 37);
        assert_eq!(
            vicinity_around(&unit(), LatticePoint::new(0, 0), 3).len(),
            n
        );
    }

    #[test]
    fn similarity_cases() {
        let c = unit();
        let a = vicinity_around(&c, LatticePoint::new(0, 0), 2);
        let b = vicinity_around(&c, LatticePoint::new(2, 0), 2);
        let far = vicinity_around(&c, LatticePoint::new(10, 0), 2);
        assert_eq!(vicinity_similarity(&a, &a).unwrap(), 1.0);
        assert_eq!(vicinity_similarity(&a, &far).unwrap(), 0.0);
        assert!((vicinity_similarity(&a, &b).unwrap() - 9.0 / 19.0).abs() < 1e-12);
        let other = vicinity_around(
            &LatticeConfig::new((0.0, 0.0), 2.0),
            LatticePoint::new(0, 0),
            2,
        );
        assert_eq!(
            vicinity_similarity(&a, &other),
            Err(GeoError::ConfigMismatch)
        );
    }

    #[test]
    fn request_shape_and_salts() {
        let v = vicinity_set(&unit(), (0.0, 0.0), 2);
        let spec = vicinity_request(&v, 9.0 / 19.0).unwrap();
        assert_eq!((spec.m_t(), spec.alpha(), spec.beta()), (19, 0, 9));
        assert_eq!(derive_dynamic_keys(&v).len(), 19);
        assert!(vicinity_request_attributes(&v)
            .iter()
            .any(|a| a.value() == "-1,0"));
        // Same point from two locations in the same cell.
        assert_eq!(
            dynamic_key(hash_location(&unit(), (0.1, 0.0))),
            dynamic_key(hash_location(&unit(), (-0.1, 0.05)))
        );
    }

    #[test]
    fn similarity_is_translation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let la = (rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0));
            let lb = (
                la.0 + rng.random_range(-4.0..4.0),
                la.1 + rng.random_range(-4.0..4.0),
            );
            let shift = (
                rng.random_range(-100.0..100.0),
                rng.random_range(-100.0..100.0),
            );
            let c0 = unit();
            let c1 = LatticeConfig::new(shift, 1.0);
            let s0 =
                vicinity_similarity(&vicinity_set(&c0, la, 2), &vicinity_set(&c0, lb, 2)).unwrap();
            let moved = |l: (f64, f64)| (l.0 + shift.0, l.1 + shift.1);
            let s1 = vicinity_similarity(
                &vicinity_set(&c1, moved(la), 2),
                &vicinity_set(&c1, moved(lb), 2),
            )
            .unwrap();
            assert_eq!(s0, s1);
        }
    }
}
