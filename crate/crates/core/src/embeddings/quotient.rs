use std::collections::HashSet;
use std::sync::Arc;

use crate::cnd::CndFunction;
use crate::constructions::is_subgroup;
use crate::error::{Error, Result};
use crate::groups::{enumerate_ball, BaseGroup, Group, GroupElement};

const CHECK_RADIUS: usize = 4;

/// `H/F` for a finite normal subgroup `F`, generated by the images of the
/// generators of `H`. Each coset is represented by its least element in
/// (length, payload) order, so the quotient length of `x̄` is `min l(xf)`.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    h: BaseGroup,
    f: Arc<Vec<GroupElement>>,
}

impl QuotientGroup {
    pub fn new(h: BaseGroup, f: Vec<GroupElement>) -> Result<Self> {
        if !is_subgroup(&h, &f) {
            return Err(Error::Precondition("F is not a finite subgroup of H".into()));
        }
        let set: HashSet<&GroupElement> = f.iter().collect();
        for s in h.generators() {
            let si = h.inverse(&s);
            for x in &f {
                if !set.contains(&h.op(&h.op(&si, x), &s)) {
                    return Err(Error::Precondition(format!(
                        "F is not normal: {} conjugates {} out of F",
                        h.label(&s),
                        h.label(x)
                    )));
                }
            }
        }
        Ok(Self { h, f: Arc::new(f) })
    }

    pub fn base(&self) -> &BaseGroup {
        &self.h
    }

    pub fn kernel(&self) -> &[GroupElement] {
        &self.f
    }

    /// The representative of `xF`.
    pub fn project(&self, x: &GroupElement) -> GroupElement {
        self.f
            .iter()
            .map(|f| self.h.op(x, f))
            .min_by(|a, b| self.h.length(a).cmp(&self.h.length(b)).then_with(|| a.cmp(b)))
            .expect("F contains the identity")
    }

    /// The coset `xF` of a representative.
    pub fn coset(&self, x: &GroupElement) -> Vec<GroupElement> {
        self.f.iter().map(|f| self.h.op(x, f)).collect()
    }
}

impl Group for QuotientGroup {
    type Elem = GroupElement;

    fn identity(&self) -> GroupElement {
        self.h.identity()
    }

    fn op(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        self.project(&self.h.op(a, b))
    }

    fn inverse(&self, a: &GroupElement) -> GroupElement {
        self.project(&self.h.inverse(a))
    }

    fn generators(&self) -> Vec<GroupElement> {
        let e = self.identity();
        let mut out: Vec<_> = self
            .h
            .generators()
            .iter()
            .map(|s| self.project(s))
            .filter(|s| *s != e)
            .collect();
        out.sort();
        out.dedup();
        out
    }

    fn label(&self, a: &GroupElement) -> String {
        self.h.label(a)
    }

    /// A word in the image generators lifts to a word of the same length in
    /// some element of the coset, so the quotient length is the least
    /// length in the coset, which the representative attains.
    fn closed_form_length(&self, a: &GroupElement) -> Option<usize> {
        Some(self.h.length(a))
    }
}

fn check_points(h: &BaseGroup) -> Result<Vec<GroupElement>> {
    match h.elements() {
        Some(e) => Ok(e),
        None => Ok(enumerate_ball(h, CHECK_RADIUS)?.elements().to_vec()),
    }
}

/// `ψ(x) = ψ′(x̄)`, constant on every coset `xF` and vanishing on `F`.
pub fn lift_cnd(q: &QuotientGroup, psi: &CndFunction<QuotientGroup>) -> CndFunction<BaseGroup> {
    let (q2, p2) = (q.clone(), psi.clone());
    CndFunction::new(q.base().clone(), format!("lift [{}]", psi.name()), move |x| {
        p2.eval(&q2.project(x))
    })
    .with_vanishing(q.kernel().to_vec())
}

/// `ψ′(x̄) = ψ(x)` for a `ψ` that vanishes on `F` and is `F`-bi-invariant;
/// both are checked on every element of a finite `H`, else on a ball.
pub fn push_cnd(q: &QuotientGroup, psi: &CndFunction<BaseGroup>) -> Result<CndFunction<QuotientGroup>> {
    let h = q.base();
    for f in q.kernel() {
        if psi.eval(f) != 0.0 {
            return Err(Error::Precondition(format!("ψ({}) ≠ 0 on F", h.label(f))));
        }
    }
    for x in check_points(h)? {
        let v = psi.eval(&x);
        for f in q.kernel() {
            for g in q.kernel() {
                if psi.eval(&h.op(&h.op(f, &x), g)) != v {
                    return Err(Error::Precondition(format!(
                        "ψ is not F-bi-invariant at {}",
                        h.label(&x)
                    )));
                }
            }
        }
    }
    let p2 = psi.clone();
    Ok(CndFunction::new(
        q.clone(),
        format!("push [{}]", psi.name()),
        move |x| p2.eval(x),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransferDirection {
    /// From `H/F` to `H`.
    Lift,
    /// From `H` to `H/F`.
    Push,
}

/// A conditionally negative definite function on one side of `H → H/F`.
#[derive(Clone, Debug)]
pub enum Transferable {
    OnBase(CndFunction<BaseGroup>),
    OnQuotient(CndFunction<QuotientGroup>),
}

/// Moves `psi` across `H → H/F` in the given direction. Lifting needs a
/// function on `H/F`, pushing one on `H`.
pub fn quotient_transfer(
    q: &QuotientGroup,
    psi: &Transferable,
    direction: TransferDirection,
) -> Result<Transferable> {
    match (direction, psi) {
        (TransferDirection::Lift, Transferable::OnQuotient(p)) => Ok(Transferable::OnBase(lift_cnd(q, p))),
        (TransferDirection::Push, Transferable::OnBase(p)) => Ok(Transferable::OnQuotient(push_cnd(q, p)?)),
        _ => Err(Error::Precondition(
            "the transfer direction does not match the side ψ lives on".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{FiniteTable, LengthFunction};

    fn z_times_z2() -> (BaseGroup, Vec<GroupElement>) {
        let h = BaseGroup::product(BaseGroup::integers(1).unwrap(), BaseGroup::cyclic(2).unwrap());
        let f = vec![
            h.parse_element("(0,0)").unwrap(),
            h.parse_element("(0,1)").unwrap(),
        ];
        (h, f)
    }

    fn s3() -> BaseGroup {
        let perms: Vec<[usize; 3]> = vec![[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0], [1, 2, 0], [2, 0, 1]];
        let idx = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
        let table = perms
            .iter()
            .map(|a| perms.iter().map(|b| idx([a[b[0]], a[b[1]], a[b[2]]])).collect())
            .collect();
        let names = (0..6).map(|i| format!("p{i}")).collect();
        BaseGroup::finite(FiniteTable::new(names, table).unwrap(), &["p1", "p2"]).unwrap()
    }

    #[test]
    fn lifted_function_is_constant_on_cosets() {
        let (h, f) = z_times_z2();
        let q = QuotientGroup::new(h.clone(), f).unwrap();
        let sq = CndFunction::new(q.clone(), "n²", |x: &GroupElement| {
            let l = 0.0
                + match x {
                    GroupElement::Pair(a, _) => match a.as_ref() {
                        GroupElement::Ints(v) => v[0] as f64,
                        _ => unreachable!(),
                    },
                    _ => unreachable!(),
                };
            l * l
        });
        let lifted = lift_cnd(&q, &sq);
        for x in enumerate_ball(&h, 6).unwrap().elements() {
            let c = q.coset(x);
            assert!(c.iter().all(|y| lifted.eval(y) == lifted.eval(x)));
            assert!(q.base().length(&q.project(x)) <= h.length(x));
        }
        let back = push_cnd(&q, &lifted).unwrap();
        let x = q.project(&h.parse_element("(3,1)").unwrap());
        assert_eq!(back.eval(&x), 9.0);
    }

    #[test]
    fn quotient_length_matches_bfs() {
        let (h, f) = z_times_z2();
        let q = QuotientGroup::new(h.clone(), f).unwrap();
        let lf = LengthFunction::new(q.clone());
        for x in enumerate_ball(&h, 5).unwrap().elements() {
            let y = q.project(x);
            assert_eq!(lf.bfs_length(&y).unwrap(), h.length(&y));
        }
    }

    #[test]
    fn non_normal_subgroup_is_rejected() {
        let g = s3();
        let f = vec![g.identity(), g.parse_element("p1").unwrap()];
        assert!(matches!(
            QuotientGroup::new(g.clone(), f),
            Err(Error::Precondition(_))
        ));
        let a3 = ["p0", "p4", "p5"].map(|s| g.parse_element(s).unwrap()).to_vec();
        let q = QuotientGroup::new(g, a3).unwrap();
        assert_eq!(q.generators().len(), 1);
    }

    #[test]
    fn push_requires_vanishing_on_f() {
        let (h, f) = z_times_z2();
        let q = QuotientGroup::new(h.clone(), f).unwrap();
        let len = CndFunction::new(h, "l", |x: &GroupElement| match x {
            GroupElement::Pair(_, b) => (**b != GroupElement::Table(0)) as u8 as f64,
            _ => unreachable!(),
        });
        assert!(push_cnd(&q, &len).is_err());
        let t = Transferable::OnBase(len);
        assert!(quotient_transfer(&q, &t, TransferDirection::Lift).is_err());
    }
}
