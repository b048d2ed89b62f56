use std::path::Path;

use serde::{Deserialize, Serialize};

use super::amalgam::Amalgam;
use super::free_product::FreeProduct;
use super::hnn::{CosetApparatus, Hnn};
use crate::error::{Error, Result};
use crate::groups::{BaseGroup, GroupSpec};

/// TOML description of a constructed group.
///
/// ```toml
/// kind = "amalgam"
/// subgroup = [["0", "0"], ["2", "3"]]
///
/// [g1]
/// kind = "cyclic"
/// order = 4
///
/// [g2]
/// kind = "cyclic"
/// order = 6
/// ```
///
/// `subgroup` pairs are element labels: `(f, φ(f))` for an amalgam and
/// `(f, θ(f))` for an HNN-extension over `h`. `baumslag_solitar` takes `n`
/// and builds `HNN(ℤ, ℤ, k ↦ nk)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstructionSpec {
    FreeProduct {
        g1: GroupSpec,
        g2: GroupSpec,
    },
    Amalgam {
        subgroup: Vec<[String; 2]>,
        g1: GroupSpec,
        g2: GroupSpec,
    },
    Hnn {
        subgroup: Vec<[String; 2]>,
        h: GroupSpec,
    },
    BaumslagSolitar {
        n: i64,
    },
}

#[derive(Clone, Debug)]
pub enum Construction {
    FreeProduct(FreeProduct),
    Amalgam(Amalgam),
    Hnn(Hnn),
}

fn parse_pairs(
    a: &BaseGroup,
    b: &BaseGroup,
    pairs: &[[String; 2]],
) -> Result<Vec<(crate::groups::GroupElement, crate::groups::GroupElement)>> {
    pairs
        .iter()
        .map(|[x, y]| Ok((a.parse_element(x)?, b.parse_element(y)?)))
        .collect()
}

impl ConstructionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn build(&self) -> Result<Construction> {
        Ok(match self {
            ConstructionSpec::FreeProduct { g1, g2 } => {
                Construction::FreeProduct(FreeProduct::new(g1.build()?, g2.build()?))
            }
            ConstructionSpec::Amalgam { subgroup, g1, g2 } => {
                let (g1, g2) = (g1.build()?, g2.build()?);
                let pairs = parse_pairs(&g1, &g2, subgroup)?;
                Construction::Amalgam(Amalgam::new(g1, g2, pairs)?)
            }
            ConstructionSpec::Hnn { subgroup, h } => {
                let h = h.build()?;
                let (f, theta) = parse_pairs(&h, &h, subgroup)?.into_iter().unzip();
                Construction::Hnn(Hnn::new(h, CosetApparatus::Finite { f, theta })?)
            }
            ConstructionSpec::BaumslagSolitar { n } => Construction::Hnn(Hnn::baumslag_solitar(*n)?),
        })
    }
}
