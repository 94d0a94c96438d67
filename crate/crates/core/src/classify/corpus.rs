//! Bundled example systems.

use super::system::{SystemFile, SystemFileError};

macro_rules! corpus {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../../corpus/", $name, ".toml")))),*]
    };
}

/// `(name, TOML source)` for every bundled system.
pub const CORPUS: &[(&str, &str)] = corpus!(
    "linear",
    "quasihomogeneous",
    "andreev",
    "algaba",
    "dccd",
    "armengol",
    "ultimo",
    "manosa1",
    "manosa2",
    "hamiltonian_cubic",
);

pub fn corpus_names() -> impl Iterator<Item = &'static str> {
    CORPUS.iter().map(|(n, _)| *n)
}

pub fn corpus_system(name: &str) -> Option<Result<SystemFile, SystemFileError>> {
    CORPUS.iter().find(|(n, _)| *n == name).map(|(_, src)| SystemFile::parse(src))
}
