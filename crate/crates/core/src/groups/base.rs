use std::cmp::Ordering;
use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use super::Group;
use crate::error::{Error, Result};

/// Canonical payload of a base-group element.
///
/// Free-group letters are signed generator indices (`+g` for generator `g`,
/// `-g` for its inverse, `g >= 1`) and are always stored freely reduced.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum GroupElement {
    Table(usize),
    Ints(Vec<i64>),
    Word(Vec<i32>),
    Pair(Box<GroupElement>, Box<GroupElement>),
}

/// Order key for an integer coordinate: 0, 1, -1, 2, -2, ...
fn zigzag(n: i64) -> u64 {
    if n > 0 {
        2 * n as u64 - 1
    } else {
        2 * n.unsigned_abs()
    }
}

/// Order key for a free-group letter: a, A, b, B, ...
fn letter_key(l: i32) -> u32 {
    (l.unsigned_abs() - 1) * 2 + u32::from(l < 0)
}

impl GroupElement {
    fn rank(&self) -> u8 {
        match self {
            GroupElement::Table(_) => 0,
            GroupElement::Ints(_) => 1,
            GroupElement::Word(_) => 2,
            GroupElement::Pair(..) => 3,
        }
    }

    pub fn pair(a: GroupElement, b: GroupElement) -> Self {
        GroupElement::Pair(Box::new(a), Box::new(b))
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> Ordering {
        use GroupElement::*;
        match (self, other) {
            (Table(a), Table(b)) => a.cmp(b),
            (Ints(a), Ints(b)) => a.iter().map(|&x| zigzag(x)).cmp(b.iter().map(|&x| zigzag(x))),
            (Word(a), Word(b)) => a
                .iter()
                .map(|&x| letter_key(x))
                .cmp(b.iter().map(|&x| letter_key(x))),
            (Pair(a1, a2), Pair(b1, b2)) => a1.cmp(b1).then_with(|| a2.cmp(b2)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Table(i) => write!(f, "#{i}"),
            GroupElement::Ints(v) => write!(f, "{v:?}"),
            GroupElement::Word(w) => write!(f, "{}", word_label(w)),
            GroupElement::Pair(a, b) => write!(f, "({a:?},{b:?})"),
        }
    }
}

fn word_label(w: &[i32]) -> String {
    if w.is_empty() {
        return "e".to_string();
    }
    w.iter()
        .map(|&l| {
            let c = (b'a' + (l.unsigned_abs() - 1) as u8) as char;
            if l < 0 {
                c.to_ascii_uppercase()
            } else {
                c
            }
        })
        .collect()
}

/// Finite group given by its full multiplication table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTable {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteTable {
    /// Validates the table: square, Latin, two-sided identity, inverses,
    /// and associativity.
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        if n == 0 {
            return Err(Error::Config("finite group with no elements".into()));
        }
        if table.len() != n || table.iter().any(|row| row.len() != n) {
            return Err(Error::Config(format!("multiplication table must be {n}x{n}")));
        }
        if table.iter().flatten().any(|&x| x >= n) {
            return Err(Error::Config("table entry out of range".into()));
        }
        let distinct: BTreeSet<&String> = names.iter().collect();
        if distinct.len() != n {
            return Err(Error::Config("duplicate element names".into()));
        }
        for i in 0..n {
            let row: BTreeSet<usize> = table[i].iter().copied().collect();
            let col: BTreeSet<usize> = (0..n).map(|j| table[j][i]).collect();
            if row.len() != n || col.len() != n {
                return Err(Error::Config(format!(
                    "table is not a Latin square at `{}`",
                    names[i]
                )));
            }
        }
        let t = Self::from_parts_unchecked(names, table)?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if t.table[t.table[a][b]][c] != t.table[a][t.table[b][c]] {
                        return Err(Error::Config(format!(
                            "table is not associative at ({}, {}, {})",
                            t.names[a], t.names[b], t.names[c]
                        )));
                    }
                }
            }
        }
        Ok(t)
    }

    /// Builds a table with only an identity/inverse scan. Test fixtures use
    /// this to exercise the axiom checker on deliberately broken tables.
    #[doc(hidden)]
    pub fn from_parts_unchecked(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = names.len();
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::Config("table has no two-sided identity".into()))?;
        let mut inverses = Vec::with_capacity(n);
        for x in 0..n {
            let inv = (0..n)
                .find(|&y| table[x][y] == identity)
                .ok_or_else(|| Error::Config(format!("`{}` has no inverse", names[x])))?;
            inverses.push(inv);
        }
        Ok(Self {
            names,
            table,
            identity,
            inverses,
        })
    }

    /// Cyclic group of order `n` with elements named `0..n`.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("cyclic group of order 0".into()));
        }
        let names = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n).map(|i| (0..n).map(|j| (i + j) % n).collect()).collect();
        Self::new(names, table)
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    Finite(FiniteTable),
    Integers { rank: usize },
    Free { rank: usize },
    Product(Box<BaseGroup>, Box<BaseGroup>),
}

/// A base group with exact arithmetic and a proper word-length function.
///
/// Generating sets are symmetric and exclude the identity. For finite groups
/// the word lengths are computed once by BFS over the table at construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseGroup {
    kind: GroupKind,
    generators: Vec<GroupElement>,
    finite_lengths: Option<Arc<Vec<usize>>>,
}

impl BaseGroup {
    /// Finite group from a validated table and a generating subset given by
    /// element names. The subset is closed under inverses.
    pub fn finite(table: FiniteTable, generators: &[&str]) -> Result<Self> {
        let mut gens = BTreeSet::new();
        for g in generators {
            let i = table
                .index_of(g)
                .ok_or_else(|| Error::Config(format!("unknown generator `{g}`")))?;
            if i == table.identity {
                return Err(Error::Config("generating set must exclude the identity".into()));
            }
            gens.insert(i);
            gens.insert(table.inverses[i]);
        }
        Self::finite_from_indices(table, gens.into_iter().collect())
    }

    fn finite_from_indices(table: FiniteTable, gens: Vec<usize>) -> Result<Self> {
        let n = table.order();
        let mut dist = vec![usize::MAX; n];
        dist[table.identity] = 0;
        let mut queue = VecDeque::from([table.identity]);
        while let Some(x) = queue.pop_front() {
            for &s in &gens {
                let y = table.table[x][s];
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        if dist.iter().any(|&d| d == usize::MAX) {
            return Err(Error::Config(
                "generators do not generate the finite group".into(),
            ));
        }
        Ok(Self {
            generators: gens.into_iter().map(GroupElement::Table).collect(),
            kind: GroupKind::Finite(table),
            finite_lengths: Some(Arc::new(dist)),
        })
    }

    /// Cyclic group ℤ_n generated by `1` (and its inverse).
    pub fn cyclic(n: usize) -> Result<Self> {
        let table = FiniteTable::cyclic(n)?;
        if n == 1 {
            return Self::finite_from_indices(table, vec![]);
        }
        Self::finite(table, &["1"])
    }

    /// ℤ^rank with the standard generators ±e_i.
    pub fn integers(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Config("integer lattice of rank 0".into()));
        }
        let mut generators = Vec::with_capacity(2 * rank);
        for i in 0..rank {
            for sign in [1i64, -1] {
                let mut v = vec![0; rank];
                v[i] = sign;
                generators.push(GroupElement::Ints(v));
            }
        }
        generators.sort();
        Ok(Self {
            kind: GroupKind::Integers { rank },
            generators,
            finite_lengths: None,
        })
    }

    /// Free group on `rank` generators named a, b, c, ...
    pub fn free(rank: usize) -> Result<Self> {
        if rank == 0 || rank > 26 {
            return Err(Error::Config("free group rank must be in 1..=26".into()));
        }
        let mut generators = Vec::with_capacity(2 * rank);
        for g in 1..=rank as i32 {
            generators.push(GroupElement::Word(vec![g]));
            generators.push(GroupElement::Word(vec![-g]));
        }
        Ok(Self {
            kind: GroupKind::Free { rank },
            generators,
            finite_lengths: None,
        })
    }

    pub fn product(left: BaseGroup, right: BaseGroup) -> Self {
        let mut generators = Vec::new();
        for s in &left.generators {
            generators.push(GroupElement::pair(s.clone(), right.identity()));
        }
        for s in &right.generators {
            generators.push(GroupElement::pair(left.identity(), s.clone()));
        }
        generators.sort();
        Self {
            kind: GroupKind::Product(Box::new(left), Box::new(right)),
            generators,
            finite_lengths: None,
        }
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn is_finite(&self) -> bool {
        match &self.kind {
            GroupKind::Finite(_) => true,
            GroupKind::Product(a, b) => a.is_finite() && b.is_finite(),
            _ => false,
        }
    }

    /// All elements of a finite group in canonical order.
    pub fn elements(&self) -> Option<Vec<GroupElement>> {
        let mut out = match &self.kind {
            GroupKind::Finite(t) => (0..t.order()).map(GroupElement::Table).collect::<Vec<_>>(),
            GroupKind::Product(a, b) => {
                let (ea, eb) = (a.elements()?, b.elements()?);
                let mut v = Vec::with_capacity(ea.len() * eb.len());
                for x in &ea {
                    for y in &eb {
                        v.push(GroupElement::pair(x.clone(), y.clone()));
                    }
                }
                v
            }
            _ => return None,
        };
        out.sort_by(|x, y| self.length(x).cmp(&self.length(y)).then_with(|| x.cmp(y)));
        Some(out)
    }

    /// Exact word length with respect to the generating set.
    pub fn length(&self, x: &GroupElement) -> usize {
        match (&self.kind, x) {
            (GroupKind::Finite(_), GroupElement::Table(i)) => {
                self.finite_lengths.as_ref().expect("finite lengths")[*i]
            }
            (GroupKind::Integers { .. }, GroupElement::Ints(v)) => {
                v.iter().map(|c| c.unsigned_abs() as usize).sum()
            }
            (GroupKind::Free { .. }, GroupElement::Word(w)) => w.len(),
            (GroupKind::Product(a, b), GroupElement::Pair(x, y)) => a.length(x) + b.length(y),
            _ => panic!("element {x:?} does not belong to this group"),
        }
    }

    /// Membership test for payloads (kind, range and reducedness).
    pub fn contains(&self, x: &GroupElement) -> bool {
        match (&self.kind, x) {
            (GroupKind::Finite(t), GroupElement::Table(i)) => *i < t.order(),
            (GroupKind::Integers { rank }, GroupElement::Ints(v)) => v.len() == *rank,
            (GroupKind::Free { rank }, GroupElement::Word(w)) => {
                w.iter().all(|&l| l != 0 && l.unsigned_abs() as usize <= *rank)
                    && w.windows(2).all(|p| p[0] != -p[1])
            }
            (GroupKind::Product(a, b), GroupElement::Pair(x, y)) => a.contains(x) && b.contains(y),
            _ => false,
        }
    }

    /// Parses a canonical label (the inverse of [`Group::label`]).
    pub fn parse_element(&self, s: &str) -> Result<GroupElement> {
        let s = s.trim();
        let bad = || Error::Parse(format!("`{s}` is not an element of this group"));
        match &self.kind {
            GroupKind::Finite(t) => t.index_of(s).map(GroupElement::Table).ok_or_else(bad),
            GroupKind::Integers { rank } => {
                let body = if *rank == 1 {
                    s
                } else {
                    s.strip_prefix('(')
                        .and_then(|r| r.strip_suffix(')'))
                        .ok_or_else(bad)?
                };
                let v = body
                    .split(',')
                    .map(|c| c.trim().parse::<i64>().map_err(|_| bad()))
                    .collect::<Result<Vec<_>>>()?;
                if v.len() != *rank {
                    return Err(bad());
                }
                Ok(GroupElement::Ints(v))
            }
            GroupKind::Free { rank } => {
                if s == "e" {
                    return Ok(GroupElement::Word(vec![]));
                }
                let mut w = Vec::new();
                for c in s.chars() {
                    if !c.is_ascii_alphabetic() {
                        return Err(bad());
                    }
                    let g = (c.to_ascii_lowercase() as u8 - b'a') as i32 + 1;
                    if g as usize > *rank {
                        return Err(bad());
                    }
                    push_reduced(&mut w, if c.is_ascii_uppercase() { -g } else { g });
                }
                Ok(GroupElement::Word(w))
            }
            GroupKind::Product(a, b) => {
                let inner = s
                    .strip_prefix('(')
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(bad)?;
                let split = top_level_comma(inner).ok_or_else(bad)?;
                Ok(GroupElement::pair(
                    a.parse_element(&inner[..split])?,
                    b.parse_element(&inner[split + 1..])?,
                ))
            }
        }
    }
}

fn top_level_comma(s: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Some(i),
            _ => {}
        }
    }
    None
}

fn push_reduced(w: &mut Vec<i32>, l: i32) {
    if w.last() == Some(&-l) {
        w.pop();
    } else {
        w.push(l);
    }
}

impl Group for BaseGroup {
    type Elem = GroupElement;

    fn identity(&self) -> GroupElement {
        match &self.kind {
            GroupKind::Finite(t) => GroupElement::Table(t.identity),
            GroupKind::Integers { rank } => GroupElement::Ints(vec![0; *rank]),
            GroupKind::Free { .. } => GroupElement::Word(vec![]),
            GroupKind::Product(a, b) => GroupElement::pair(a.identity(), b.identity()),
        }
    }

    fn op(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        match (&self.kind, x, y) {
            (GroupKind::Finite(t), GroupElement::Table(i), GroupElement::Table(j)) => {
                GroupElement::Table(t.table[*i][*j])
            }
            (GroupKind::Integers { .. }, GroupElement::Ints(a), GroupElement::Ints(b)) => {
                GroupElement::Ints(a.iter().zip(b).map(|(p, q)| p + q).collect())
            }
            (GroupKind::Free { .. }, GroupElement::Word(a), GroupElement::Word(b)) => {
                let mut w = a.clone();
                for &l in b {
                    push_reduced(&mut w, l);
                }
                GroupElement::Word(w)
            }
            (GroupKind::Product(ga, gb), GroupElement::Pair(x1, x2), GroupElement::Pair(y1, y2)) => {
                GroupElement::pair(ga.op(x1, y1), gb.op(x2, y2))
            }
            _ => panic!("elements {x:?}, {y:?} do not belong to this group"),
        }
    }

    fn inverse(&self, x: &GroupElement) -> GroupElement {
        match (&self.kind, x) {
            (GroupKind::Finite(t), GroupElement::Table(i)) => GroupElement::Table(t.inverses[*i]),
            (GroupKind::Integers { .. }, GroupElement::Ints(v)) => {
                GroupElement::Ints(v.iter().map(|c| -c).collect())
            }
            (GroupKind::Free { .. }, GroupElement::Word(w)) => {
                GroupElement::Word(w.iter().rev().map(|l| -l).collect())
            }
            (GroupKind::Product(a, b), GroupElement::Pair(x, y)) => {
                GroupElement::pair(a.inverse(x), b.inverse(y))
            }
            _ => panic!("element {x:?} does not belong to this group"),
        }
    }

    fn generators(&self) -> Vec<GroupElement> {
        self.generators.clone()
    }

    fn label(&self, x: &GroupElement) -> String {
        match (&self.kind, x) {
            (GroupKind::Finite(t), GroupElement::Table(i)) => t.names[*i].clone(),
            (GroupKind::Integers { rank }, GroupElement::Ints(v)) => {
                let parts: Vec<String> = v.iter().map(|c| c.to_string()).collect();
                if *rank == 1 {
                    parts[0].clone()
                } else {
                    format!("({})", parts.join(","))
                }
            }
            (GroupKind::Free { .. }, GroupElement::Word(w)) => word_label(w),
            (GroupKind::Product(a, b), GroupElement::Pair(x, y)) => {
                format!("({},{})", a.label(x), b.label(y))
            }
            _ => format!("{x:?}"),
        }
    }

    fn closed_form_length(&self, x: &GroupElement) -> Option<usize> {
        Some(self.length(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_order_is_zigzag() {
        let mut v: Vec<GroupElement> = [-2i64, -1, 0, 1, 2]
            .iter()
            .map(|&n| GroupElement::Ints(vec![n]))
            .collect();
        v.sort();
        let order: Vec<i64> = v
            .iter()
            .map(|e| match e {
                GroupElement::Ints(c) => c[0],
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(order, vec![0, 1, -1, 2, -2]);
    }

    #[test]
    fn free_group_reduces_on_multiplication() {
        let f2 = BaseGroup::free(2).unwrap();
        let x = f2.parse_element("abA").unwrap();
        let y = f2.parse_element("aBA").unwrap();
        assert_eq!(f2.label(&f2.op(&x, &y)), "e");
        assert_eq!(f2.length(&x), 3);
        assert_eq!(f2.label(&f2.inverse(&x)), "aBA");
    }

    #[test]
    fn rejects_non_latin_table() {
        let names = vec!["e".into(), "a".into()];
        let table = vec![vec![0, 1], vec![1, 1]];
        assert!(matches!(FiniteTable::new(names, table), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_identity_generator() {
        let t = FiniteTable::cyclic(3).unwrap();
        assert!(BaseGroup::finite(t, &["0"]).is_err());
    }

    #[test]
    fn generators_are_symmetrized() {
        let t = FiniteTable::cyclic(5).unwrap();
        let g = BaseGroup::finite(t, &["1"]).unwrap();
        let labels: Vec<String> = g.generators().iter().map(|s| g.label(s)).collect();
        assert_eq!(labels, vec!["1", "4"]);
    }

    #[test]
    fn labels_round_trip() {
        let g = BaseGroup::product(BaseGroup::cyclic(2).unwrap(), BaseGroup::integers(2).unwrap());
        let x = GroupElement::pair(GroupElement::Table(1), GroupElement::Ints(vec![3, -1]));
        let s = g.label(&x);
        assert_eq!(s, "(1,(3,-1))");
        assert_eq!(g.parse_element(&s).unwrap(), x);
    }

    #[test]
    fn non_generating_subset_is_rejected() {
        let t = FiniteTable::cyclic(4).unwrap();
        assert!(BaseGroup::finite(t, &["2"]).is_err());
    }
}
