//! Free products, amalgamated products over finite subgroups and
//! HNN-extensions, with their normal forms, metrics and Bass-Serre trees.

mod amalgam;
mod blocklength;
mod free_product;
mod hnn;
mod spec;
mod tree;

use crate::error::{Error, Result};

pub(crate) use amalgam::is_subgroup;
pub use amalgam::{Amalgam, AmalgamElem, AmalgamNormalForm};
pub use blocklength::{amalgam_blocklength, hnn_blocklength, pinch_condition_holds, reduced_word_length};
pub use free_product::{
    common_part, fp_distance, reduce_free_product, CommonPartDecomposition, FreeProduct, FreeProductWord,
    Letter,
};
pub use hnn::{BrittonForm, CosetApparatus, Hnn, HnnElem, HnnLetter};
pub use spec::{Construction, ConstructionSpec};
pub use tree::{
    alpha_orbit_meeting, alpha_step, remark_decomposition, tree_check, tree_distance, tree_path, TreeCheck,
    TreeVertex,
};

/// Which factor of a two-factor construction a letter lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    G1,
    G2,
}

impl Factor {
    pub fn from_index(i: usize) -> Result<Self> {
        match i {
            1 => Ok(Factor::G1),
            2 => Ok(Factor::G2),
            _ => Err(Error::BadLetter(format!("no factor with index {i}"))),
        }
    }

    pub fn index(self) -> usize {
        match self {
            Factor::G1 => 1,
            Factor::G2 => 2,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Factor::G1 => Factor::G2,
            Factor::G2 => Factor::G1,
        }
    }
}
