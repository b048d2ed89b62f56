use std::collections::{HashMap, HashSet};

use super::Factor;
use crate::error::{Error, Result};
use crate::groups::{BaseGroup, Group, GroupElement};

/// `G₁ ∗_F G₂` for a finite `F ≤ G₁` embedded in `G₂` by an explicit map φ.
#[derive(Clone, Debug)]
pub struct Amalgam {
    g1: BaseGroup,
    g2: BaseGroup,
    /// `F` as elements of `G₁`, in canonical order.
    f1: Vec<GroupElement>,
    /// `φ(f1[i])` in `G₂`.
    f2: Vec<GroupElement>,
    to_g2: HashMap<GroupElement, usize>,
    from_g2: HashMap<GroupElement, usize>,
}

/// Normal form `c₁c₂…c_m·f`: alternating nonidentity left-coset
/// representatives followed by `f ∈ F`, stored in `G₁` coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AmalgamElem {
    blocks: Vec<(Factor, GroupElement)>,
    f: GroupElement,
}

impl AmalgamElem {
    pub fn blocks(&self) -> &[(Factor, GroupElement)] {
        &self.blocks
    }

    pub fn terminal(&self) -> &GroupElement {
        &self.f
    }
}

/// `x = α₁β₁…α_kβ_k·f`, with `α₁` or `β_k` allowed to be the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgamNormalForm {
    pub alphas: Vec<GroupElement>,
    pub betas: Vec<GroupElement>,
    pub f: GroupElement,
}

impl AmalgamNormalForm {
    pub fn k(&self) -> usize {
        self.alphas.len()
    }
}

impl Amalgam {
    /// `pairs` lists `(f, φ(f))` for every `f ∈ F`.
    pub fn new(g1: BaseGroup, g2: BaseGroup, pairs: Vec<(GroupElement, GroupElement)>) -> Result<Self> {
        let mut pairs = pairs;
        pairs.sort();
        let (f1, f2): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let to_g2: HashMap<_, _> = f1.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        let from_g2: HashMap<_, _> = f2.iter().cloned().enumerate().map(|(i, f)| (f, i)).collect();
        if to_g2.len() != f1.len() {
            return Err(Error::Config("F lists an element twice".into()));
        }
        if from_g2.len() != f2.len() {
            return Err(Error::Config(
                "the embedding of F into G2 is not injective".into(),
            ));
        }
        if f1.iter().any(|f| !g1.contains(f)) || f2.iter().any(|f| !g2.contains(f)) {
            return Err(Error::Config("F images must be elements of their factors".into()));
        }
        if to_g2.get(&g1.identity()).map(|&i| &f2[i]) != Some(&g2.identity()) {
            return Err(Error::Config(
                "F must contain the identity, mapped to the identity".into(),
            ));
        }
        for (i, a) in f1.iter().enumerate() {
            for (j, b) in f1.iter().enumerate() {
                let ab = g1.op(a, b);
                let k = *to_g2
                    .get(&ab)
                    .ok_or_else(|| Error::Config("F is not closed under multiplication".into()))?;
                if g2.op(&f2[i], &f2[j]) != f2[k] {
                    return Err(Error::Config(
                        "the images of F disagree: φ is not a homomorphism".into(),
                    ));
                }
            }
        }
        Ok(Self {
            g1,
            g2,
            f1,
            f2,
            to_g2,
            from_g2,
        })
    }

    /// Free product, `F` trivial.
    pub fn free(g1: BaseGroup, g2: BaseGroup) -> Result<Self> {
        let pair = (g1.identity(), g2.identity());
        Self::new(g1, g2, vec![pair])
    }

    pub fn factor(&self, f: Factor) -> &BaseGroup {
        match f {
            Factor::G1 => &self.g1,
            Factor::G2 => &self.g2,
        }
    }

    /// `F` as a subset of the given factor.
    pub fn subgroup(&self, f: Factor) -> &[GroupElement] {
        match f {
            Factor::G1 => &self.f1,
            Factor::G2 => &self.f2,
        }
    }

    /// Image in `factor` of `f ∈ F` given in `G₁` coordinates.
    pub fn embed_f(&self, factor: Factor, f: &GroupElement) -> GroupElement {
        match factor {
            Factor::G1 => f.clone(),
            Factor::G2 => self.f2[self.to_g2[f]].clone(),
        }
    }

    /// `G₁` coordinates of an element of `F` lying in `factor`.
    pub fn pull_f(&self, factor: Factor, x: &GroupElement) -> Option<GroupElement> {
        match factor {
            Factor::G1 => self.to_g2.contains_key(x).then(|| x.clone()),
            Factor::G2 => self.from_g2.get(x).map(|&i| self.f1[i].clone()),
        }
    }

    /// `y = rep·φ(f)` with `rep` the (length, order)-minimal element of `yF`.
    pub fn decompose(&self, factor: Factor, y: &GroupElement) -> (GroupElement, GroupElement) {
        let g = self.factor(factor);
        let mut best: Option<(usize, GroupElement, usize)> = None;
        for (i, f) in self.subgroup(factor).iter().enumerate() {
            let cand = g.op(y, f);
            let key = (g.length(&cand), cand, i);
            if best.as_ref().map_or(true, |b| (key.0, &key.1) < (b.0, &b.1)) {
                best = Some(key);
            }
        }
        let (_, rep, i) = best.expect("F contains the identity");
        // y = rep·f⁻¹
        let f_inv = self.g1.inverse(&self.f1[i]);
        (rep, f_inv)
    }

    pub fn coset_rep(&self, factor: Factor, y: &GroupElement) -> GroupElement {
        self.decompose(factor, y).0
    }

    /// Right multiplication by a single factor element.
    pub fn mul_letter(&self, x: &AmalgamElem, factor: Factor, a: &GroupElement) -> AmalgamElem {
        let g = self.factor(factor);
        let y = g.op(&self.embed_f(factor, &x.f), a);
        let mut blocks = x.blocks.clone();
        let combined = match blocks.last() {
            Some((side, c)) if *side == factor => {
                let c = g.op(c, &y);
                blocks.pop();
                c
            }
            _ => y,
        };
        let (rep, f) = self.decompose(factor, &combined);
        if !g.is_identity(&rep) {
            blocks.push((factor, rep));
        }
        AmalgamElem { blocks, f }
    }

    pub fn from_letters<'a, I>(&self, letters: I) -> Result<AmalgamElem>
    where
        I: IntoIterator<Item = &'a (Factor, GroupElement)>,
    {
        let mut x = self.identity();
        for (side, a) in letters {
            if !self.factor(*side).contains(a) {
                return Err(Error::BadLetter(format!(
                    "{a:?} is not in factor {}",
                    side.index()
                )));
            }
            x = self.mul_letter(&x, *side, a);
        }
        Ok(x)
    }

    /// The product of the normal form's letters, as a letter sequence.
    pub fn letters(&self, x: &AmalgamElem) -> Vec<(Factor, GroupElement)> {
        let mut out = x.blocks.clone();
        if !self.g1.is_identity(&x.f) {
            out.push((Factor::G1, x.f.clone()));
        }
        out
    }

    pub fn normal_form(&self, x: &AmalgamElem) -> AmalgamNormalForm {
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        let mut blocks = x.blocks.iter().peekable();
        if let Some((Factor::G2, _)) = blocks.peek() {
            alphas.push(self.g1.identity());
        }
        for (side, c) in blocks {
            match side {
                Factor::G1 => alphas.push(c.clone()),
                Factor::G2 => betas.push(c.clone()),
            }
        }
        if alphas.len() > betas.len() {
            betas.push(self.g2.identity());
        }
        AmalgamNormalForm {
            alphas,
            betas,
            f: x.f.clone(),
        }
    }

    /// Parses `e` or space separated `i:x` tokens (and an optional `f:x`
    /// terminal in `G₁` coordinates), multiplying them out.
    pub fn parse(&self, text: &str) -> Result<AmalgamElem> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(self.identity());
        }
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let (i, x) = tok
                .split_once(':')
                .ok_or_else(|| Error::BadLetter(format!("expected `factor:element`, got `{tok}`")))?;
            let factor = match i {
                "f" | "1" => Factor::G1,
                "2" => Factor::G2,
                _ => return Err(Error::BadLetter(format!("bad factor tag in `{tok}`"))),
            };
            letters.push((factor, self.factor(factor).parse_element(x)?));
        }
        self.from_letters(&letters)
    }

    /// `max l_i(c)` over `c ∈ F` in either factor.
    pub fn max_f_length(&self) -> usize {
        self.f1
            .iter()
            .map(|f| self.g1.length(f))
            .chain(self.f2.iter().map(|f| self.g2.length(f)))
            .max()
            .unwrap_or(0)
    }
}

impl Group for Amalgam {
    type Elem = AmalgamElem;

    fn identity(&self) -> AmalgamElem {
        AmalgamElem {
            blocks: vec![],
            f: self.g1.identity(),
        }
    }

    fn op(&self, a: &AmalgamElem, b: &AmalgamElem) -> AmalgamElem {
        self.letters(b)
            .iter()
            .fold(a.clone(), |acc, (side, x)| self.mul_letter(&acc, *side, x))
    }

    fn inverse(&self, a: &AmalgamElem) -> AmalgamElem {
        self.letters(a)
            .iter()
            .rev()
            .fold(self.identity(), |acc, (side, x)| {
                self.mul_letter(&acc, *side, &self.factor(*side).inverse(x))
            })
    }

    fn generators(&self) -> Vec<AmalgamElem> {
        let mut out: Vec<AmalgamElem> = [Factor::G1, Factor::G2]
            .into_iter()
            .flat_map(|side| self.factor(side).generators().into_iter().map(move |s| (side, s)))
            .map(|(side, s)| self.mul_letter(&self.identity(), side, &s))
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn label(&self, a: &AmalgamElem) -> String {
        let mut toks: Vec<String> = a
            .blocks
            .iter()
            .map(|(side, c)| format!("{}:{}", side.index(), self.factor(*side).label(c)))
            .collect();
        if !self.g1.is_identity(&a.f) {
            toks.push(format!("f:{}", self.g1.label(&a.f)));
        }
        if toks.is_empty() {
            "e".into()
        } else {
            toks.join(" ")
        }
    }
}

/// Checks that `S ⊆ G₁` is a subgroup: contains 1, closed under products.
pub(crate) fn is_subgroup(g: &BaseGroup, s: &[GroupElement]) -> bool {
    let set: HashSet<&GroupElement> = s.iter().collect();
    set.contains(&g.identity()) && s.iter().all(|a| s.iter().all(|b| set.contains(&g.op(a, b))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::LengthFunction;

    fn t(i: usize) -> GroupElement {
        GroupElement::Table(i)
    }

    fn dinf() -> Amalgam {
        let z2 = BaseGroup::cyclic(2).unwrap();
        Amalgam::free(z2.clone(), z2).unwrap()
    }

    #[test]
    fn dihedral_normal_form() {
        let g = dinf();
        let rsr = g.parse("1:1 2:1 1:1").unwrap();
        let nf = g.normal_form(&rsr);
        assert_eq!(nf.alphas, vec![t(1), t(1)]);
        assert_eq!(nf.betas, vec![t(1), t(0)]);
        assert_eq!(nf.f, t(0));
        let e = g.normal_form(&g.identity());
        assert_eq!(e.k(), 0);
    }

    #[test]
    fn rejects_inconsistent_embedding() {
        let z4 = BaseGroup::cyclic(4).unwrap();
        let z6 = BaseGroup::cyclic(6).unwrap();
        // {0,2} ≤ ℤ₄ sent to {0,2} ⊂ ℤ₆ is not a subgroup map
        let bad = Amalgam::new(z4.clone(), z6.clone(), vec![(t(0), t(0)), (t(2), t(2))]);
        assert!(matches!(bad, Err(Error::Config(_))));
        let good = Amalgam::new(z4, z6, vec![(t(0), t(0)), (t(2), t(3))]);
        assert!(good.is_ok());
    }

    #[test]
    fn group_axioms_on_a_ball_with_nontrivial_f() {
        let z4 = BaseGroup::cyclic(4).unwrap();
        let z6 = BaseGroup::cyclic(6).unwrap();
        let g = Amalgam::new(z4, z6, vec![(t(0), t(0)), (t(2), t(3))]).unwrap();
        let ball = LengthFunction::new(g.clone()).ball(3).unwrap();
        for x in ball.elements() {
            assert!(g.is_identity(&g.op(x, &g.inverse(x))));
            for y in ball.elements().iter().take(20) {
                for z in ball.elements().iter().take(20) {
                    assert_eq!(g.op(&g.op(x, y), z), g.op(x, &g.op(y, z)));
                }
            }
        }
        // the amalgamation relation: 2 ∈ ℤ₄ equals 3 ∈ ℤ₆
        let a = g.parse("1:2").unwrap();
        let b = g.parse("2:3").unwrap();
        assert_eq!(a, b);
    }
}
