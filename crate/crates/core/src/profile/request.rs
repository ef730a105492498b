use alloc::vec::Vec;

use crate::digest::Digest;

use super::{hash_attribute, Attribute, ProfileError};

/// What an initiator asks for: all `necessary` attributes and at least
/// `beta` of the `optional` ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RequestSpec {
    necessary: Vec<Attribute>,
    optional: Vec<Attribute>,
    beta: usize,
}

impl RequestSpec {
    pub fn new(
        mut necessary: Vec<Attribute>,
        mut optional: Vec<Attribute>,
        beta: usize,
    ) -> Result<Self, ProfileError> {
        necessary.sort();
        optional.sort();
        if necessary.windows(2).any(|w| w[0] == w[1]) || optional.windows(2).any(|w| w[0] == w[1]) {
            return Err(ProfileError::InvalidRequest("duplicate attribute"));
        }
        if necessary.iter().any(|a| optional.binary_search(a).is_ok()) {
            return Err(ProfileError::InvalidRequest(
                "attribute is both necessary and optional",
            ));
        }
        if beta > optional.len() {
            return Err(ProfileError::InvalidRequest(
                "beta exceeds the optional attribute count",
            ));
        }
        if necessary.len() + beta == 0 {
            return Err(ProfileError::InvalidRequest(
                "similarity threshold must be positive",
            ));
        }
        if necessary.len() + optional.len() > usize::from(u16::MAX) {
            return Err(ProfileError::InvalidRequest("too many attributes"));
        }
        Ok(RequestSpec {
            necessary,
            optional,
            beta,
        })
    }

    /// Picks the smallest `beta` with `(alpha + beta) / m_t >= theta`.
    pub fn with_threshold(
        necessary: Vec<Attribute>,
        optional: Vec<Attribute>,
        theta: f64,
    ) -> Result<Self, ProfileError> {
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(ProfileError::InvalidRequest("theta must lie in (0, 1]"));
        }
        let m_t = necessary.len() + optional.len();
        let needed = libm::ceil(theta * m_t as f64 - 1e-9) as usize;
        let beta = needed.saturating_sub(necessary.len()).min(optional.len());
        Self::new(necessary, optional, beta)
    }

    pub fn necessary(&self) -> &[Attribute] {
        &self.necessary
    }

    pub fn optional(&self) -> &[Attribute] {
        &self.optional
    }

    pub fn alpha(&self) -> usize {
        self.necessary.len()
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn gamma(&self) -> usize {
        self.optional.len() - self.beta
    }

    pub fn m_t(&self) -> usize {
        self.necessary.len() + self.optional.len()
    }

    pub fn theta(&self) -> f64 {
        (self.alpha() + self.beta) as f64 / self.m_t() as f64
    }

    /// With `beta == 0` the optional attributes constrain nothing; drop them
    /// so their hashes never have to be published through a hint matrix.
    pub fn without_free_optionals(&self) -> Self {
        if self.beta == 0 && !self.optional.is_empty() {
            RequestSpec {
                necessary: self.necessary.clone(),
                optional: Vec::new(),
                beta: 0,
            }
        } else {
            self.clone()
        }
    }

    /// Hashes in request order: necessary block then optional block, each ascending.
    pub fn request_hashes(&self, salt: Option<&Digest>) -> Vec<Digest> {
        let mut nec: Vec<Digest> = self
            .necessary
            .iter()
            .map(|a| hash_attribute(a, salt))
            .collect();
        let mut opt: Vec<Digest> = self
            .optional
            .iter()
            .map(|a| hash_attribute(a, salt))
            .collect();
        nec.sort_unstable();
        opt.sort_unstable();
        nec.extend(opt);
        nec
    }

    pub fn attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.necessary.iter().chain(self.optional.iter())
    }
}
