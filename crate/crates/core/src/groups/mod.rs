//! Base groups, the group interface every construction implements, Cayley
//! graph searches and the group-spec document.

mod base;
mod cayley;
mod spec;

use std::fmt::Debug;
use std::hash::Hash;

pub use base::{BaseGroup, FiniteTable, GroupElement, GroupKind};
pub use cayley::{
    enumerate_ball, verify_length_axioms, word_length, AxiomViolation, Ball, LengthAxiomReport,
    LengthFunction,
};
pub use spec::GroupSpec;

/// A finitely generated group with decidable equality on canonical elements.
///
/// `Elem` values are canonical: two values compare equal exactly when they
/// denote the same group element. The derived `Ord` is the payload order used
/// to break ties between elements of equal length.
pub trait Group: Clone + Send + Sync {
    type Elem: Clone + Eq + Hash + Ord + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;

    fn op(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    fn inverse(&self, a: &Self::Elem) -> Self::Elem;

    /// Symmetric generating set, identity excluded, in canonical order.
    fn generators(&self) -> Vec<Self::Elem>;

    /// Canonical letter string for an element.
    fn label(&self, a: &Self::Elem) -> String;

    /// Word length in closed form, when one is known to agree with BFS.
    fn closed_form_length(&self, _a: &Self::Elem) -> Option<usize> {
        None
    }

    /// `d(x, y)` in closed form; defaults to the closed-form length of `x⁻¹y`.
    fn closed_form_distance(&self, x: &Self::Elem, y: &Self::Elem) -> Option<usize> {
        self.closed_form_length(&self.difference(x, y))
    }

    fn is_identity(&self, a: &Self::Elem) -> bool {
        *a == self.identity()
    }

    /// `x⁻¹y`, the element whose length is `d(x, y)`.
    fn difference(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem {
        self.op(&self.inverse(x), y)
    }

    fn product<'a, I>(&self, items: I) -> Self::Elem
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items.into_iter().fold(self.identity(), |acc, x| self.op(&acc, x))
    }
}
