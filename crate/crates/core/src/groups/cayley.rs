use std::collections::HashMap;
use std::sync::RwLock;

use super::Group;
use crate::config::{DEFAULT_BALL_CAP, DEFAULT_RADIUS_CAP};
use crate::error::{Error, Result};

/// Elements within word length `radius`, ordered by (length, payload).
#[derive(Clone, Debug)]
pub struct Ball<E> {
    radius: usize,
    elements: Vec<E>,
    lengths: Vec<usize>,
    index: HashMap<E, usize>,
}

impl<E: Clone + Eq + std::hash::Hash> Ball<E> {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn elements(&self) -> &[E] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn length_of(&self, x: &E) -> Option<usize> {
        self.index.get(x).map(|&i| self.lengths[i])
    }

    pub fn contains(&self, x: &E) -> bool {
        self.index.contains_key(x)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&E, usize)> {
        self.elements.iter().zip(self.lengths.iter().copied())
    }

    /// Elements of length exactly `r`.
    pub fn sphere(&self, r: usize) -> impl Iterator<Item = &E> {
        self.iter().filter(move |(_, l)| *l == r).map(|(e, _)| e)
    }
}

#[derive(Debug)]
struct BfsState<E> {
    dist: HashMap<E, usize>,
    frontier: Vec<E>,
    radius: usize,
    complete: bool,
}

/// Memoized BFS word length over a group's Cayley graph.
///
/// The memo grows monotonically, one BFS layer at a time, under a write lock;
/// lookups that hit the memo only take the read lock.
#[derive(Debug)]
pub struct LengthFunction<G: Group> {
    group: G,
    radius_cap: usize,
    ball_cap: usize,
    state: RwLock<BfsState<G::Elem>>,
}

impl<G: Group> LengthFunction<G> {
    pub fn new(group: G) -> Self {
        Self::with_caps(group, DEFAULT_RADIUS_CAP, DEFAULT_BALL_CAP)
    }

    pub fn with_caps(group: G, radius_cap: usize, ball_cap: usize) -> Self {
        let e = group.identity();
        let state = BfsState {
            dist: HashMap::from([(e.clone(), 0)]),
            frontier: vec![e],
            radius: 0,
            complete: false,
        };
        Self {
            group,
            radius_cap,
            ball_cap,
            state: RwLock::new(state),
        }
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn radius_cap(&self) -> usize {
        self.radius_cap
    }

    fn expand_to(&self, radius: usize) -> Result<()> {
        if self.state.read().unwrap().radius >= radius {
            return Ok(());
        }
        let mut st = self.state.write().unwrap();
        let gens = self.group.generators();
        while st.radius < radius && !st.complete {
            let mut next = Vec::new();
            let layer = st.radius + 1;
            let frontier = std::mem::take(&mut st.frontier);
            for x in &frontier {
                for s in &gens {
                    let y = self.group.op(x, s);
                    if !st.dist.contains_key(&y) {
                        st.dist.insert(y.clone(), layer);
                        next.push(y);
                    }
                }
            }
            if st.dist.len() > self.ball_cap {
                st.frontier = frontier;
                // roll back the partial layer
                st.dist.retain(|_, d| *d < layer);
                return Err(Error::BallTooLarge {
                    radius: layer,
                    cap: self.ball_cap,
                });
            }
            st.complete = next.is_empty();
            st.frontier = next;
            st.radius = layer;
        }
        Ok(())
    }

    /// BFS distance from the identity, never a closed form.
    pub fn bfs_length(&self, x: &G::Elem) -> Result<usize> {
        if let Some(&d) = self.state.read().unwrap().dist.get(x) {
            return Ok(d);
        }
        loop {
            let (radius, complete) = {
                let st = self.state.read().unwrap();
                if let Some(&d) = st.dist.get(x) {
                    return Ok(d);
                }
                (st.radius, st.complete)
            };
            if complete || radius >= self.radius_cap {
                return Err(Error::RadiusExceeded {
                    element: self.group.label(x),
                    cap: self.radius_cap,
                });
            }
            self.expand_to(radius + 1)?;
        }
    }

    /// Word length, using a closed form when the group provides one.
    pub fn length(&self, x: &G::Elem) -> Result<usize> {
        match self.group.closed_form_length(x) {
            Some(l) => Ok(l),
            None => self.bfs_length(x),
        }
    }

    /// Length if it is at most `r`, `None` if it is larger.
    pub fn length_within(&self, x: &G::Elem, r: usize) -> Result<Option<usize>> {
        if let Some(l) = self.group.closed_form_length(x) {
            return Ok((l <= r).then_some(l));
        }
        self.expand_to(r.min(self.radius_cap))?;
        let st = self.state.read().unwrap();
        Ok(st.dist.get(x).copied().filter(|&d| d <= r))
    }

    pub fn distance(&self, x: &G::Elem, y: &G::Elem) -> Result<usize> {
        match self.group.closed_form_distance(x, y) {
            Some(d) => Ok(d),
            None => self.bfs_length(&self.group.difference(x, y)),
        }
    }

    /// The ball of radius `r`, ordered by (length, payload).
    pub fn ball(&self, r: usize) -> Result<Ball<G::Elem>> {
        if r > self.radius_cap {
            return Err(Error::BallTooLarge {
                radius: r,
                cap: self.ball_cap,
            });
        }
        self.expand_to(r)?;
        let st = self.state.read().unwrap();
        let mut items: Vec<(usize, G::Elem)> = st
            .dist
            .iter()
            .filter(|(_, &d)| d <= r)
            .map(|(e, &d)| (d, e.clone()))
            .collect();
        items.sort();
        let index = items
            .iter()
            .enumerate()
            .map(|(i, (_, e))| (e.clone(), i))
            .collect();
        let (lengths, elements) = items.into_iter().unzip();
        Ok(Ball {
            radius: r,
            elements,
            lengths,
            index,
        })
    }
}

/// Word length of `x`: closed form where available, BFS otherwise.
pub fn word_length<G: Group>(group: &G, x: &G::Elem) -> Result<usize> {
    LengthFunction::new(group.clone()).length(x)
}

/// `{g : |g| <= r}` in canonical order.
pub fn enumerate_ball<G: Group>(group: &G, r: usize) -> Result<Ball<G::Elem>> {
    LengthFunction::new(group.clone()).ball(r)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomViolation {
    /// `l(x) = 0` exactly for the identity.
    ZeroLength { element: String, length: usize },
    /// `l(x) = l(x⁻¹)`.
    Asymmetric {
        element: String,
        length: usize,
        inverse_length: usize,
    },
    /// `l(xy) <= l(x) + l(y)`.
    Subadditivity {
        x: String,
        y: String,
        lxy: usize,
        lx: usize,
        ly: usize,
    },
}

#[derive(Clone, Debug, Default)]
pub struct LengthAxiomReport {
    pub checked_pairs: usize,
    pub violations: Vec<AxiomViolation>,
}

impl LengthAxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the length-function axioms on the given pairs.
pub fn verify_length_axioms<G, L>(group: &G, length: L, sample: &[(G::Elem, G::Elem)]) -> LengthAxiomReport
where
    G: Group,
    L: Fn(&G::Elem) -> Result<usize>,
{
    let mut report = LengthAxiomReport::default();
    let mut seen = std::collections::HashSet::new();
    let len = |x: &G::Elem| length(x).unwrap_or(usize::MAX);
    for (x, y) in sample {
        for z in [x, y] {
            if !seen.insert(z.clone()) {
                continue;
            }
            let lz = len(z);
            if (lz == 0) != group.is_identity(z) {
                report.violations.push(AxiomViolation::ZeroLength {
                    element: group.label(z),
                    length: lz,
                });
            }
            let li = len(&group.inverse(z));
            if li != lz {
                report.violations.push(AxiomViolation::Asymmetric {
                    element: group.label(z),
                    length: lz,
                    inverse_length: li,
                });
            }
        }
        let (lx, ly, lxy) = (len(x), len(y), len(&group.op(x, y)));
        if lxy > lx.saturating_add(ly) {
            report.violations.push(AxiomViolation::Subadditivity {
                x: group.label(x),
                y: group.label(y),
                lxy,
                lx,
                ly,
            });
        }
        report.checked_pairs += 1;
    }
    report
}
