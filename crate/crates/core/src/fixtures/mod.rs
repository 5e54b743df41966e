//! Bundled problems and their expected outcomes.

use std::path::PathBuf;

use serde::Deserialize;

use crate::spec_io::{parse_problem, Problem};

const MANIFEST: &str = include_str!("../../fixtures/manifest.toml");

const SOURCES: &[(&str, &str)] = &[
    ("eq1.feq", include_str!("../../fixtures/eq1.feq")),
    ("u6.feq", include_str!("../../fixtures/u6.feq")),
    ("u10.feq", include_str!("../../fixtures/u10.feq")),
    ("india.feq", include_str!("../../fixtures/india.feq")),
    ("shift.feq", include_str!("../../fixtures/shift.feq")),
    ("shift_square.feq", include_str!("../../fixtures/shift_square.feq")),
    ("shift_pinned.feq", include_str!("../../fixtures/shift_pinned.feq")),
    ("shift_positive.feq", include_str!("../../fixtures/shift_positive.feq")),
    ("reflect.feq", include_str!("../../fixtures/reflect.feq")),
    ("homogeneous.feq", include_str!("../../fixtures/homogeneous.feq")),
    ("swap.feq", include_str!("../../fixtures/swap.feq")),
    ("nested_linear.feq", include_str!("../../fixtures/nested_linear.feq")),
];

#[derive(Debug, Clone, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub file: String,
    /// `reference` or `authored`.
    pub origin: String,
    pub template: String,
    pub candidate: String,
    /// Expected closing stage under default options.
    pub stage: String,
    #[serde(default)]
    pub notes: String,
    #[serde(skip)]
    pub source: String,
}

impl Fixture {
    pub fn problem(&self) -> Problem {
        parse_problem(&self.source).expect("bundled fixture parses")
    }

    pub fn path(&self) -> PathBuf {
        fixtures_dir().join(&self.file)
    }
}

#[derive(Deserialize)]
struct Manifest {
    fixture: Vec<Fixture>,
}

/// Every bundled fixture in manifest order.
pub fn load_fixtures() -> Vec<Fixture> {
    let m: Manifest = toml::from_str(MANIFEST).expect("bundled manifest parses");
    m.fixture
        .into_iter()
        .map(|mut f| {
            f.source = SOURCES
                .iter()
                .find(|(n, _)| *n == f.file)
                .map(|(_, s)| s.to_string())
                .unwrap_or_else(|| panic!("fixture file {} is not bundled", f.file));
            f
        })
        .collect()
}

pub fn fixture(name: &str) -> Option<Fixture> {
    load_fixtures().into_iter().find(|f| f.name == name)
}

/// The fixture directory of the source tree.
pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}
