use std::path::Path;

use serde::{Deserialize, Serialize};

use super::base::{BaseGroup, FiniteTable, GroupKind};
use super::Group;
use crate::error::{Error, Result};

/// TOML description of a base group.
///
/// ```toml
/// kind = "finite"
/// elements = ["e", "s"]
/// table = [[0, 1], [1, 0]]
/// generators = ["s"]
/// ```
///
/// Other kinds: `{ kind = "cyclic", order = 3 }`, `{ kind = "integers", rank = 1 }`,
/// `{ kind = "free", rank = 2 }` and `{ kind = "product", factors = [..two specs..] }`.
/// Table rows index into `elements`; `table[i][j]` is the product `elements[i]·elements[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Finite {
        elements: Vec<String>,
        table: Vec<Vec<usize>>,
        generators: Vec<String>,
    },
    Cyclic {
        order: usize,
    },
    Integers {
        rank: usize,
    },
    Free {
        rank: usize,
    },
    Product {
        factors: Vec<GroupSpec>,
    },
}

impl GroupSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<BaseGroup> {
        match self {
            GroupSpec::Finite {
                elements,
                table,
                generators,
            } => {
                let table = FiniteTable::new(elements.clone(), table.clone())?;
                let gens: Vec<&str> = generators.iter().map(String::as_str).collect();
                BaseGroup::finite(table, &gens)
            }
            GroupSpec::Cyclic { order } => BaseGroup::cyclic(*order),
            GroupSpec::Integers { rank } => BaseGroup::integers(*rank),
            GroupSpec::Free { rank } => BaseGroup::free(*rank),
            GroupSpec::Product { factors } => match factors.as_slice() {
                [a, b] => Ok(BaseGroup::product(a.build()?, b.build()?)),
                _ => Err(Error::Config("a product needs exactly two factors".into())),
            },
        }
    }

    /// Spec that rebuilds `group`; finite groups list their full symmetric generating set.
    pub fn describe(group: &BaseGroup) -> Self {
        match group.kind() {
            GroupKind::Finite(t) => GroupSpec::Finite {
                elements: t.names().to_vec(),
                table: t.rows().to_vec(),
                generators: group.generators().iter().map(|g| group.label(g)).collect(),
            },
            GroupKind::Integers { rank } => GroupSpec::Integers { rank: *rank },
            GroupKind::Free { rank } => GroupSpec::Free { rank: *rank },
            GroupKind::Product(a, b) => GroupSpec::Product {
                factors: vec![Self::describe(a), Self::describe(b)],
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KLEIN: &str = r#"
kind = "finite"
elements = ["e", "a", "b", "c"]
table = [[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]]
generators = ["a", "b"]
"#;

    #[test]
    fn finite_spec_builds_and_round_trips() {
        let spec = GroupSpec::parse(KLEIN).unwrap();
        let g = spec.build().unwrap();
        assert_eq!(g.generators().len(), 2);
        let once = spec.to_toml().unwrap();
        let twice = GroupSpec::parse(&once).unwrap().to_toml().unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn product_spec_round_trips() {
        let spec = GroupSpec::Product {
            factors: vec![GroupSpec::Cyclic { order: 2 }, GroupSpec::Integers { rank: 2 }],
        };
        let text = spec.to_toml().unwrap();
        assert_eq!(GroupSpec::parse(&text).unwrap(), spec);
        assert!(spec.build().is_ok());
    }

    #[test]
    fn describe_rebuilds_the_same_group() {
        let g = GroupSpec::parse(KLEIN).unwrap().build().unwrap();
        let again = GroupSpec::describe(&g).build().unwrap();
        assert_eq!(g, again);
    }

    #[test]
    fn unknown_kind_is_a_parse_error() {
        assert!(matches!(
            GroupSpec::parse("kind = \"lattice\"\nrank = 2\n"),
            Err(Error::Parse(_))
        ));
    }
}
