//! Bundled example specifications.

use crate::system::{parse_spec, SubstitutionSpec, SystemError};

/// Valid systems, by name.
pub const SYSTEMS: &[(&str, &str)] = &[
    ("fibonacci", include_str!("../corpus/fibonacci.toml")),
    (
        "period-doubling",
        include_str!("../corpus/period-doubling.toml"),
    ),
    ("thue-morse", include_str!("../corpus/thue-morse.toml")),
    ("tribonacci", include_str!("../corpus/tribonacci.toml")),
    ("doubling", include_str!("../corpus/doubling.toml")),
    (
        "square-lattice",
        include_str!("../corpus/square-lattice.toml"),
    ),
    ("table", include_str!("../corpus/table.toml")),
    ("dominoes", include_str!("../corpus/dominoes.toml")),
    ("chair", include_str!("../corpus/chair.toml")),
];

/// Documents that must be rejected.
pub const INVALID: &[(&str, &str)] = &[
    (
        "reducible-minpoly",
        include_str!("../corpus/invalid/reducible-minpoly.toml"),
    ),
    (
        "empty-column",
        include_str!("../corpus/invalid/empty-column.toml"),
    ),
    (
        "overlapping-pieces",
        include_str!("../corpus/invalid/overlapping-pieces.toml"),
    ),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SYSTEMS.iter().map(|(n, _)| *n)
}

pub fn document(name: &str) -> Option<&'static str> {
    SYSTEMS
        .iter()
        .chain(INVALID)
        .find(|(n, _)| *n == name)
        .map(|(_, d)| *d)
}

/// Parses a bundled system. Panics on an unknown name.
pub fn load(name: &str) -> Result<SubstitutionSpec, SystemError> {
    parse_spec(document(name).unwrap_or_else(|| panic!("no bundled system named '{name}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::solve_adjoint;

    #[test]
    fn valid_systems_parse_and_solve() {
        for name in names() {
            let spec = load(name).unwrap_or_else(|e| panic!("{name}: {e}"));
            solve_adjoint(&spec).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn invalid_documents_fail() {
        for (name, doc) in INVALID {
            let res = parse_spec(doc).and_then(|s| solve_adjoint(&s).map(|_| ()));
            assert!(res.is_err(), "{name}");
        }
    }
}
