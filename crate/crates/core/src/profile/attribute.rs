use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{normalize_attribute, ProfileError};

/// Separator byte between category, value and salt in the hash encoding.
pub const SEPARATOR: u8 = 0x1F;

pub const DEFAULT_MAX_ATTRIBUTES: usize = 128;

/// A `(category, value)` descriptor. Bare tags use the category `"tag"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Attribute {
    category: String,
    value: String,
}

impl Attribute {
    /// Normalizes `raw_value`; the category is kept verbatim (trimmed).
    pub fn new(category: &str, raw_value: &str) -> Result<Self, ProfileError> {
        let category = check_category(category)?;
        let value = normalize_attribute(raw_value)?;
        Ok(Attribute { category, value })
    }

    pub fn tag(raw_value: &str) -> Result<Self, ProfileError> {
        Self::new("tag", raw_value)
    }

    /// Builds an attribute from machine-generated text that must not pass
    /// through normalization (lattice coordinates keep their sign and comma).
    pub fn verbatim(category: &str, value: &str) -> Result<Self, ProfileError> {
        let category = check_category(category)?;
        if value.is_empty() {
            return Err(ProfileError::EmptyAfterNormalization);
        }
        if value.as_bytes().contains(&SEPARATOR) {
            return Err(ProfileError::InvalidCategory);
        }
        Ok(Attribute {
            category,
            value: value.to_string(),
        })
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn value(&self) -> &str {
        &self.value
    }

    /// `category ∥ 0x1F ∥ value`, the unsalted hash input.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.category.len() + 1 + self.value.len());
        out.extend_from_slice(self.category.as_bytes());
        out.push(SEPARATOR);
        out.extend_from_slice(self.value.as_bytes());
        out
    }
}

fn check_category(category: &str) -> Result<String, ProfileError> {
    let c = category.trim();
    if c.is_empty() || c.as_bytes().contains(&SEPARATOR) {
        return Err(ProfileError::InvalidCategory);
    }
    Ok(c.to_string())
}

/// A user's attribute set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Profile {
    attributes: BTreeSet<Attribute>,
}

impl Profile {
    pub fn new<I: IntoIterator<Item = Attribute>>(attrs: I) -> Result<Self, ProfileError> {
        Self::with_limit(attrs, DEFAULT_MAX_ATTRIBUTES)
    }

    pub fn with_limit<I: IntoIterator<Item = Attribute>>(
        attrs: I,
        max: usize,
    ) -> Result<Self, ProfileError> {
        let attributes: BTreeSet<Attribute> = attrs.into_iter().collect();
        if attributes.is_empty() {
            return Err(ProfileError::EmptyProfile);
        }
        if attributes.len() > max {
            return Err(ProfileError::TooManyAttributes {
                got: attributes.len(),
                max,
            });
        }
        Ok(Profile { attributes })
    }

    pub fn attributes(&self) -> &BTreeSet<Attribute> {
        &self.attributes
    }

    pub fn iter(&self) -> impl Iterator<Item = &Attribute> {
        self.attributes.iter()
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn contains(&self, attr: &Attribute) -> bool {
        self.attributes.contains(attr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn attribute_normalizes_value_only() {
        let a = Attribute::new(" major ", "Computer Science").unwrap();
        assert_eq!(a.category(), "major");
        assert_eq!(a.value(), "computerscience");
    }

    #[test]
    fn category_rules() {
        assert_eq!(Attribute::new("", "x"), Err(ProfileError::InvalidCategory));
        assert_eq!(
            Attribute::new("a\u{1f}b", "x"),
            Err(ProfileError::InvalidCategory)
        );
    }

    #[test]
    fn profile_is_a_set() {
        let p = Profile::new([
            Attribute::tag("Dogs").unwrap(),
            Attribute::tag("dog").unwrap(),
        ])
        .unwrap();
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn profile_limits() {
        assert_eq!(Profile::new([]), Err(ProfileError::EmptyProfile));
        let many = (0..5).map(|i| Attribute::tag(&alloc::format!("t{i}")).unwrap());
        assert_eq!(
            Profile::with_limit(many, 4),
            Err(ProfileError::TooManyAttributes { got: 5, max: 4 })
        );
    }

    #[test]
    fn verbatim_keeps_punctuation() {
        let a = Attribute::verbatim("geo", "-1,2").unwrap();
        assert_eq!(a.value(), "-1,2");
    }
}
