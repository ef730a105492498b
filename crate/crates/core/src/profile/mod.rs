//! Attributes, profiles, profile vectors and keys, population statistics.

mod attribute;
mod entropy;
mod normalize;
mod population;
mod request;
mod vector;

pub use attribute::{Attribute, Profile, DEFAULT_MAX_ATTRIBUTES, SEPARATOR};
pub use entropy::{attribute_entropy, profile_entropy, PopulationStats};
pub use normalize::normalize_attribute;
pub use population::{
    generate_population, uniqueness_fraction, AttrCount, Population, PopulationParams,
};
pub use request::RequestSpec;
pub use vector::{
    build_profile_vector, derive_profile_key, hash_attribute, key_of_sequence, ProfileKey,
    ProfileVector,
};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProfileError {
    #[error("attribute text is empty after normalization")]
    EmptyAfterNormalization,
    #[error("attribute category is empty or contains the separator byte")]
    InvalidCategory,
    #[error("profile has no attributes")]
    EmptyProfile,
    #[error("profile has {got} attributes, limit is {max}")]
    TooManyAttributes { got: usize, max: usize },
    #[error("profile vector is empty")]
    EmptyVector,
    #[error("two attributes hash to the same value")]
    DuplicateHash,
    #[error("unknown attribute category `{0}`")]
    UnknownCategory(String),
    #[error("invalid request: {0}")]
    InvalidRequest(&'static str),
    #[error("invalid population parameter: {0}")]
    InvalidParameter(&'static str),
}
