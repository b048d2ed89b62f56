use std::collections::{BTreeSet, HashMap};

use super::amalgam::is_subgroup;
use crate::error::{Error, Result};
use crate::groups::{BaseGroup, Group, GroupElement, GroupKind};

/// The associated subgroup `F ≤ H` together with `θ : F → H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CosetApparatus {
    /// `F` finite, listed with its images: `theta[i] = θ(f[i])`.
    Finite {
        f: Vec<GroupElement>,
        theta: Vec<GroupElement>,
    },
    /// `H = ℤ`, `F = pℤ`, `θ(pk) = qk`. `p = 1, q = 2` gives BS(1,2).
    Scaled { p: i64, q: i64 },
}

/// `HNN(H, F, θ) = ⟨H, t | t⁻¹ f t = θ(f)⟩` with generating set `S ∪ {t, t⁻¹}`.
#[derive(Clone, Debug)]
pub struct Hnn {
    h: BaseGroup,
    app: CosetApparatus,
    theta_of: HashMap<GroupElement, GroupElement>,
    theta_inv: HashMap<GroupElement, GroupElement>,
}

/// Britton normal form `γ₁t^{i₁}…γ_kt^{i_k}·tail`.
///
/// `γ_j` is the minimal representative of `γ_jF` when `i_j = 1` and of
/// `γ_jθ(F)` when `i_j = -1`; no `t⁻¹·1·t` or `t·1·t⁻¹` pinch remains.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HnnElem {
    blocks: Vec<(GroupElement, i8)>,
    tail: GroupElement,
}

impl HnnElem {
    pub fn blocks(&self) -> &[(GroupElement, i8)] {
        &self.blocks
    }

    pub fn tail(&self) -> &GroupElement {
        &self.tail
    }

    /// Number of stable letters `k`.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }
}

/// `g = γ₁t^{i₁}…γ_kt^{i_k}·α·f` with `α` the representative of `tail·F`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrittonForm {
    pub gammas: Vec<(GroupElement, i8)>,
    pub alpha: GroupElement,
    pub f: GroupElement,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HnnLetter {
    H(GroupElement),
    T,
    TInv,
}

fn balanced_residue(n: i64, m: i64) -> i64 {
    let r = n.rem_euclid(m);
    if 2 * r > m {
        r - m
    } else {
        r
    }
}

impl Hnn {
    pub fn new(h: BaseGroup, app: CosetApparatus) -> Result<Self> {
        let mut theta_of = HashMap::new();
        let mut theta_inv = HashMap::new();
        match &app {
            CosetApparatus::Finite { f, theta } => {
                if f.len() != theta.len() {
                    return Err(Error::Config("θ must be given on every element of F".into()));
                }
                if f.iter().chain(theta).any(|x| !h.contains(x)) {
                    return Err(Error::Config("F and θ(F) must lie in H".into()));
                }
                for (a, b) in f.iter().zip(theta) {
                    theta_of.insert(a.clone(), b.clone());
                    theta_inv.insert(b.clone(), a.clone());
                }
                if theta_of.len() != f.len() || theta_inv.len() != f.len() {
                    return Err(Error::Config("θ must be an injective map on F".into()));
                }
                if !is_subgroup(&h, f) {
                    return Err(Error::Config("F is not a subgroup of H".into()));
                }
                for a in f {
                    for b in f {
                        if theta_of[&h.op(a, b)] != h.op(&theta_of[a], &theta_of[b]) {
                            return Err(Error::Config("θ is not a homomorphism".into()));
                        }
                    }
                }
            }
            CosetApparatus::Scaled { p, q } => {
                if h.kind() != &(GroupKind::Integers { rank: 1 }) {
                    return Err(Error::Config("a scaled apparatus needs H = ℤ".into()));
                }
                if *p < 1 || *q < 1 {
                    return Err(Error::Config("scale factors must be positive".into()));
                }
            }
        }
        Ok(Self {
            h,
            app,
            theta_of,
            theta_inv,
        })
    }

    /// BS(1, n) = HNN(ℤ, ℤ, k ↦ nk).
    pub fn baumslag_solitar(n: i64) -> Result<Self> {
        Self::new(BaseGroup::integers(1)?, CosetApparatus::Scaled { p: 1, q: n })
    }

    pub fn base(&self) -> &BaseGroup {
        &self.h
    }

    pub fn apparatus(&self) -> &CosetApparatus {
        &self.app
    }

    fn int(x: &GroupElement) -> i64 {
        match x {
            GroupElement::Ints(v) => v[0],
            _ => unreachable!("scaled apparatus over ℤ"),
        }
    }

    pub fn theta(&self, f: &GroupElement) -> Result<GroupElement> {
        match &self.app {
            CosetApparatus::Finite { .. } => self
                .theta_of
                .get(f)
                .cloned()
                .ok_or_else(|| Error::Config(format!("θ undefined on {}", self.h.label(f)))),
            CosetApparatus::Scaled { p, q } => {
                let n = Self::int(f);
                if n % p != 0 {
                    return Err(Error::Config(format!("θ undefined on {n}")));
                }
                Ok(GroupElement::Ints(vec![n / p * q]))
            }
        }
    }

    pub fn theta_inverse(&self, x: &GroupElement) -> Result<GroupElement> {
        match &self.app {
            CosetApparatus::Finite { .. } => self
                .theta_inv
                .get(x)
                .cloned()
                .ok_or_else(|| Error::Config(format!("θ⁻¹ undefined on {}", self.h.label(x)))),
            CosetApparatus::Scaled { p, q } => {
                let n = Self::int(x);
                if n % q != 0 {
                    return Err(Error::Config(format!("θ⁻¹ undefined on {n}")));
                }
                Ok(GroupElement::Ints(vec![n / q * p]))
            }
        }
    }

    pub fn in_f(&self, x: &GroupElement) -> bool {
        match &self.app {
            CosetApparatus::Finite { .. } => self.theta_of.contains_key(x),
            CosetApparatus::Scaled { p, .. } => Self::int(x) % p == 0,
        }
    }

    pub fn in_theta_f(&self, x: &GroupElement) -> bool {
        match &self.app {
            CosetApparatus::Finite { .. } => self.theta_inv.contains_key(x),
            CosetApparatus::Scaled { q, .. } => Self::int(x) % q == 0,
        }
    }

    fn min_rep<I: Iterator<Item = (GroupElement, GroupElement)>>(
        &self,
        cands: I,
    ) -> (GroupElement, GroupElement) {
        cands
            .min_by(|(a, _), (b, _)| (self.h.length(a), a).cmp(&(self.h.length(b), b)))
            .expect("subgroup contains the identity")
    }

    /// `x = γ·f` with `γ` the minimal element of `xF`, `f ∈ F`.
    pub fn split_f(&self, x: &GroupElement) -> (GroupElement, GroupElement) {
        match &self.app {
            CosetApparatus::Finite { f, .. } => {
                self.min_rep(f.iter().map(|g| (self.h.op(x, g), self.h.inverse(g))))
            }
            CosetApparatus::Scaled { p, .. } => {
                let n = Self::int(x);
                let r = balanced_residue(n, *p);
                (GroupElement::Ints(vec![r]), GroupElement::Ints(vec![n - r]))
            }
        }
    }

    /// `x = γ·θ(f)` with `γ` the minimal element of `xθ(F)`; returns `(γ, f)`.
    pub fn split_theta_f(&self, x: &GroupElement) -> (GroupElement, GroupElement) {
        match &self.app {
            CosetApparatus::Finite { f, theta } => self.min_rep(
                f.iter()
                    .zip(theta)
                    .map(|(g, tg)| (self.h.op(x, tg), self.h.inverse(g))),
            ),
            CosetApparatus::Scaled { p, q } => {
                let n = Self::int(x);
                let r = balanced_residue(n, *q);
                (
                    GroupElement::Ints(vec![r]),
                    GroupElement::Ints(vec![(n - r) / q * p]),
                )
            }
        }
    }

    pub fn mul_h(&self, x: &HnnElem, a: &GroupElement) -> HnnElem {
        let mut y = x.clone();
        self.push_h(&mut y, a);
        y
    }

    /// Right multiplication by `t^e`, `e = ±1`, with the pinch moves
    /// `t⁻¹ f t = θ(f)` and `t θ(f) t⁻¹ = f`.
    pub fn mul_t(&self, x: &HnnElem, e: i8) -> HnnElem {
        let mut y = x.clone();
        self.push_t(&mut y, e);
        y
    }

    fn push_h(&self, x: &mut HnnElem, a: &GroupElement) {
        x.tail = self.h.op(&x.tail, a);
    }

    fn push_t(&self, x: &mut HnnElem, e: i8) {
        let (gamma, f) = if e > 0 {
            self.split_f(&x.tail)
        } else {
            self.split_theta_f(&x.tail)
        };
        let carried = if e > 0 {
            self.theta(&f).expect("f ∈ F")
        } else {
            f
        };
        let pinch = self.h.is_identity(&gamma) && x.blocks.last().is_some_and(|b| b.1 == -e);
        x.tail = if pinch {
            let (g, _) = x.blocks.pop().expect("pinch needs a block");
            self.h.op(&g, &carried)
        } else {
            x.blocks.push((gamma, e));
            carried
        };
    }

    /// An element from blocks already in normal form.
    pub(super) fn from_normal_blocks(&self, blocks: Vec<(GroupElement, i8)>, tail: GroupElement) -> HnnElem {
        HnnElem { blocks, tail }
    }

    fn push_letter(&self, x: &mut HnnElem, l: &HnnLetter) {
        match l {
            HnnLetter::H(a) => self.push_h(x, a),
            HnnLetter::T => self.push_t(x, 1),
            HnnLetter::TInv => self.push_t(x, -1),
        }
    }

    pub fn mul_letter(&self, x: &HnnElem, l: &HnnLetter) -> HnnElem {
        match l {
            HnnLetter::H(a) => self.mul_h(x, a),
            HnnLetter::T => self.mul_t(x, 1),
            HnnLetter::TInv => self.mul_t(x, -1),
        }
    }

    pub fn from_letters<'a, I>(&self, letters: I) -> Result<HnnElem>
    where
        I: IntoIterator<Item = &'a HnnLetter>,
    {
        let mut x = self.identity();
        for l in letters {
            if let HnnLetter::H(a) = l {
                if !self.h.contains(a) {
                    return Err(Error::BadLetter(format!("{a:?} is not an element of H")));
                }
            }
            self.push_letter(&mut x, l);
        }
        Ok(x)
    }

    /// Letters spelling the normal form.
    pub fn letters(&self, x: &HnnElem) -> Vec<HnnLetter> {
        let mut out = Vec::new();
        for (g, e) in &x.blocks {
            if !self.h.is_identity(g) {
                out.push(HnnLetter::H(g.clone()));
            }
            out.push(if *e > 0 { HnnLetter::T } else { HnnLetter::TInv });
        }
        if !self.h.is_identity(&x.tail) {
            out.push(HnnLetter::H(x.tail.clone()));
        }
        out
    }

    pub fn britton_form(&self, x: &HnnElem) -> BrittonForm {
        let (alpha, f) = self.split_f(&x.tail);
        BrittonForm {
            gammas: x.blocks.clone(),
            alpha,
            f,
        }
    }

    /// Embeds `h ∈ H`.
    pub fn from_h(&self, a: GroupElement) -> HnnElem {
        HnnElem {
            blocks: vec![],
            tail: a,
        }
    }

    pub fn t(&self) -> HnnElem {
        self.mul_t(&self.identity(), 1)
    }

    /// Parses `e` or space separated tokens: `t`, `t^-1` (or `T`), or an `H` label.
    pub fn parse(&self, text: &str) -> Result<HnnElem> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(self.identity());
        }
        let letters = text
            .split_whitespace()
            .map(|tok| match tok {
                "t" => Ok(HnnLetter::T),
                "t^-1" | "T" => Ok(HnnLetter::TInv),
                _ => self.h.parse_element(tok).map(HnnLetter::H),
            })
            .collect::<Result<Vec<_>>>()?;
        self.from_letters(&letters)
    }

    /// `A = ⟨F ∪ θ(F)⟩`, when finite.
    pub fn vanishing_subgroup(&self) -> Result<Vec<GroupElement>> {
        let CosetApparatus::Finite { f, theta } = &self.app else {
            return Err(Error::Precondition(
                "⟨F ∪ θ(F)⟩ is infinite for a scaled apparatus".into(),
            ));
        };
        const CAP: usize = 100_000;
        let gens: Vec<&GroupElement> = f.iter().chain(theta).collect();
        let mut set: BTreeSet<GroupElement> = gens.iter().map(|g| (*g).clone()).collect();
        set.insert(self.h.identity());
        let mut frontier: Vec<GroupElement> = set.iter().cloned().collect();
        while let Some(x) = frontier.pop() {
            for g in &gens {
                let y = self.h.op(&x, g);
                if set.insert(y.clone()) {
                    frontier.push(y);
                    if set.len() > CAP {
                        return Err(Error::Precondition("⟨F ∪ θ(F)⟩ appears to be infinite".into()));
                    }
                }
            }
        }
        Ok(set.into_iter().collect())
    }

    /// One more than the largest minimal coset-representative length of `F`
    /// and `θ(F)` in `H`.
    pub fn z_constant(&self) -> Result<usize> {
        match &self.app {
            CosetApparatus::Scaled { p, q } => Ok(1 + (*p.max(q) / 2) as usize),
            CosetApparatus::Finite { .. } => {
                let elems = self
                    .h
                    .elements()
                    .ok_or_else(|| Error::IncompleteCosets("F has infinite index in an infinite H".into()))?;
                let mut max = 0;
                for x in &elems {
                    max = max
                        .max(self.h.length(&self.split_f(x).0))
                        .max(self.h.length(&self.split_theta_f(x).0));
                }
                Ok(max + 1)
            }
        }
    }
}

impl Group for Hnn {
    type Elem = HnnElem;

    fn identity(&self) -> HnnElem {
        self.from_h(self.h.identity())
    }

    fn op(&self, a: &HnnElem, b: &HnnElem) -> HnnElem {
        let mut x = a.clone();
        for (g, e) in &b.blocks {
            self.push_h(&mut x, g);
            self.push_t(&mut x, *e);
        }
        self.push_h(&mut x, &b.tail);
        x
    }

    fn inverse(&self, a: &HnnElem) -> HnnElem {
        let mut x = self.from_h(self.h.inverse(&a.tail));
        for (g, e) in a.blocks.iter().rev() {
            self.push_t(&mut x, -e);
            self.push_h(&mut x, &self.h.inverse(g));
        }
        x
    }

    /// Strips the common block prefix first: if `x = σy` and `x′ = σy′`
    /// share the blocks of `σ`, the suffixes are normal forms themselves.
    fn difference(&self, x: &HnnElem, y: &HnnElem) -> HnnElem {
        let m = x.blocks.iter().zip(&y.blocks).take_while(|(a, b)| a == b).count();
        let strip = |z: &HnnElem| HnnElem {
            blocks: z.blocks[m..].to_vec(),
            tail: z.tail.clone(),
        };
        let (xs, ys) = (strip(x), strip(y));
        self.op(&self.inverse(&xs), &ys)
    }

    fn generators(&self) -> Vec<HnnElem> {
        let mut out: Vec<HnnElem> = self.h.generators().into_iter().map(|s| self.from_h(s)).collect();
        out.push(self.mul_t(&self.identity(), 1));
        out.push(self.mul_t(&self.identity(), -1));
        out.sort();
        out
    }

    fn label(&self, a: &HnnElem) -> String {
        let toks: Vec<String> = self
            .letters(a)
            .iter()
            .map(|l| match l {
                HnnLetter::H(x) => self.h.label(x),
                HnnLetter::T => "t".into(),
                HnnLetter::TInv => "t^-1".into(),
            })
            .collect();
        if toks.is_empty() {
            "e".into()
        } else {
            toks.join(" ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::LengthFunction;

    fn int(n: i64) -> GroupElement {
        GroupElement::Ints(vec![n])
    }

    #[test]
    fn bs12_pinch_and_rewrite() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        assert_eq!(g.parse("t^-1 1 t").unwrap(), g.from_h(int(2)));
        // a ∈ F = ℤ slides through t as θ(a) = a²
        assert_eq!(g.label(&g.parse("1 t").unwrap()), "t 2");
        assert_eq!(g.label(&g.parse("1 t^-1").unwrap()), "1 t^-1");
        let x = g.parse("3 t^-1").unwrap();
        assert_eq!(g.label(&x), "1 t^-1 1");
        let bf = g.britton_form(&x);
        assert_eq!(bf.gammas, vec![(int(1), -1)]);
        assert_eq!((bf.alpha, bf.f), (int(0), int(1)));
    }

    #[test]
    fn bs12_lengths() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        let lf = LengthFunction::new(g.clone());
        assert_eq!(lf.bfs_length(&g.from_h(int(4))).unwrap(), 4);
        assert_eq!(lf.bfs_length(&g.t()).unwrap(), 1);
        assert_eq!(lf.bfs_length(&g.identity()).unwrap(), 0);
        assert_eq!(g.z_constant().unwrap(), 2);
    }

    #[test]
    fn finite_instance_z() {
        let z2 = BaseGroup::cyclic(2).unwrap();
        let h = BaseGroup::product(z2.clone(), z2);
        let e = GroupElement::pair(GroupElement::Table(0), GroupElement::Table(0));
        let a = GroupElement::pair(GroupElement::Table(1), GroupElement::Table(0));
        let b = GroupElement::pair(GroupElement::Table(0), GroupElement::Table(1));
        let app = CosetApparatus::Finite {
            f: vec![e.clone(), a],
            theta: vec![e.clone(), b],
        };
        let g = Hnn::new(h.clone(), app).unwrap();
        assert_eq!(g.z_constant().unwrap(), 2);
        assert_eq!(g.vanishing_subgroup().unwrap().len(), 4);
        let whole = CosetApparatus::Finite {
            f: h.elements().unwrap(),
            theta: h.elements().unwrap(),
        };
        assert_eq!(Hnn::new(h, whole).unwrap().z_constant().unwrap(), 1);
    }

    #[test]
    fn rejects_non_homomorphism() {
        let z4 = BaseGroup::cyclic(4).unwrap();
        let t = GroupElement::Table;
        let app = CosetApparatus::Finite {
            f: vec![t(0), t(1), t(2), t(3)],
            theta: vec![t(0), t(2), t(1), t(3)],
        };
        assert!(matches!(Hnn::new(z4, app), Err(Error::Config(_))));
    }

    #[test]
    fn inverse_and_associativity_on_bs12_ball() {
        let g = Hnn::baumslag_solitar(2).unwrap();
        let ball = LengthFunction::new(g.clone()).ball(3).unwrap();
        for x in ball.elements() {
            assert!(g.is_identity(&g.op(x, &g.inverse(x))));
            assert!(g.is_identity(&g.op(&g.inverse(x), x)));
        }
        let few = &ball.elements()[..30];
        for x in few {
            for y in few {
                for z in few {
                    assert_eq!(g.op(&g.op(x, y), z), g.op(x, &g.op(y, z)));
                }
            }
        }
    }
}
