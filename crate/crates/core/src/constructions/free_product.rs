use super::Factor;
use crate::error::{Error, Result};
use crate::groups::{BaseGroup, Group, GroupElement};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub factor: Factor,
    pub elem: GroupElement,
}

impl Letter {
    pub fn new(factor: Factor, elem: GroupElement) -> Self {
        Self { factor, elem }
    }
}

/// Reduced word in a free product: alternating factors, no identity letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FreeProductWord {
    letters: Vec<Letter>,
}

impl FreeProductWord {
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Factor of the first letter, `None` for the identity.
    pub fn first_factor(&self) -> Option<Factor> {
        self.letters.first().map(|l| l.factor)
    }
}

/// `G₁ ∗ G₂` with generating set `S₁ ∪ S₂`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeProduct {
    g1: BaseGroup,
    g2: BaseGroup,
}

impl FreeProduct {
    pub fn new(g1: BaseGroup, g2: BaseGroup) -> Self {
        Self { g1, g2 }
    }

    pub fn factor(&self, f: Factor) -> &BaseGroup {
        match f {
            Factor::G1 => &self.g1,
            Factor::G2 => &self.g2,
        }
    }

    pub fn letter(&self, factor: Factor, elem: GroupElement) -> Result<FreeProductWord> {
        reduce_free_product(self, [Letter::new(factor, elem)])
    }

    /// Parses the format produced by `label`: `e`, or space separated
    /// `i:x` tokens with `i ∈ {1,2}` and `x` a factor label.
    pub fn parse_word(&self, text: &str) -> Result<FreeProductWord> {
        let text = text.trim();
        if text == "e" || text.is_empty() {
            return Ok(FreeProductWord::default());
        }
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let (i, x) = tok
                .split_once(':')
                .ok_or_else(|| Error::BadLetter(format!("expected `factor:element`, got `{tok}`")))?;
            let i: usize = i
                .parse()
                .map_err(|_| Error::BadLetter(format!("bad factor index in `{tok}`")))?;
            let factor = Factor::from_index(i)?;
            letters.push(Letter::new(factor, self.factor(factor).parse_element(x)?));
        }
        reduce_free_product(self, letters)
    }

    /// Sum of factor lengths of the letters.
    pub fn letter_length_sum(&self, letters: &[Letter]) -> usize {
        letters
            .iter()
            .map(|l| self.factor(l.factor).length(&l.elem))
            .sum()
    }
}

/// Multiplies out a letter sequence into reduced form.
///
/// A stack merge reaches the fixpoint in one pass: merging may expose a
/// same-factor pair only at the top of the stack.
pub fn reduce_free_product<I>(fp: &FreeProduct, letters: I) -> Result<FreeProductWord>
where
    I: IntoIterator<Item = Letter>,
{
    let mut stack: Vec<Letter> = Vec::new();
    for l in letters {
        let g = fp.factor(l.factor);
        if !g.contains(&l.elem) {
            return Err(Error::BadLetter(format!(
                "{:?} is not an element of factor {}",
                l.elem,
                l.factor.index()
            )));
        }
        push_letter(fp, &mut stack, l);
    }
    Ok(FreeProductWord { letters: stack })
}

fn push_letter(fp: &FreeProduct, stack: &mut Vec<Letter>, l: Letter) {
    let g = fp.factor(l.factor);
    match stack.last_mut() {
        Some(top) if top.factor == l.factor => {
            let merged = g.op(&top.elem, &l.elem);
            if g.is_identity(&merged) {
                stack.pop();
            } else {
                top.elem = merged;
            }
        }
        _ => {
            if !g.is_identity(&l.elem) {
                stack.push(l);
            }
        }
    }
}

impl Group for FreeProduct {
    type Elem = FreeProductWord;

    fn identity(&self) -> FreeProductWord {
        FreeProductWord::default()
    }

    fn op(&self, a: &FreeProductWord, b: &FreeProductWord) -> FreeProductWord {
        let mut stack = a.letters.clone();
        for l in &b.letters {
            push_letter(self, &mut stack, l.clone());
        }
        FreeProductWord { letters: stack }
    }

    fn inverse(&self, a: &FreeProductWord) -> FreeProductWord {
        let letters = a
            .letters
            .iter()
            .rev()
            .map(|l| Letter::new(l.factor, self.factor(l.factor).inverse(&l.elem)))
            .collect();
        FreeProductWord { letters }
    }

    fn generators(&self) -> Vec<FreeProductWord> {
        let mut out = Vec::new();
        for f in [Factor::G1, Factor::G2] {
            for s in self.factor(f).generators() {
                out.push(FreeProductWord {
                    letters: vec![Letter::new(f, s)],
                });
            }
        }
        out
    }

    fn label(&self, a: &FreeProductWord) -> String {
        if a.letters.is_empty() {
            return "e".into();
        }
        a.letters
            .iter()
            .map(|l| format!("{}:{}", l.factor.index(), self.factor(l.factor).label(&l.elem)))
            .collect::<Vec<_>>()
            .join(" ")
    }

    fn closed_form_length(&self, a: &FreeProductWord) -> Option<usize> {
        Some(self.letter_length_sum(&a.letters))
    }

    fn closed_form_distance(&self, x: &FreeProductWord, y: &FreeProductWord) -> Option<usize> {
        let (xs, ys) = (&x.letters, &y.letters);
        let j = xs.iter().zip(ys).take_while(|(a, b)| a == b).count();
        Some(match (xs.get(j), ys.get(j)) {
            (Some(a), Some(b)) if a.factor == b.factor => {
                let g = self.factor(a.factor);
                g.length(&g.difference(&a.elem, &b.elem))
                    + self.letter_length_sum(&xs[j + 1..])
                    + self.letter_length_sum(&ys[j + 1..])
            }
            _ => self.letter_length_sum(&xs[j..]) + self.letter_length_sum(&ys[j..]),
        })
    }
}

/// `x = h·g_x·tail_x`, `y = h·g_y·tail_y` with `g_x, g_y` in one factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommonPartDecomposition {
    pub h: Vec<Letter>,
    pub factor: Factor,
    pub g_x: GroupElement,
    pub g_y: GroupElement,
    pub tail_x: Vec<Letter>,
    pub tail_y: Vec<Letter>,
}

impl CommonPartDecomposition {
    /// Rebuilds `(x, y)` from the pieces.
    pub fn recompose(&self, fp: &FreeProduct) -> Result<(FreeProductWord, FreeProductWord)> {
        let side = |g: &GroupElement, tail: &[Letter]| {
            let letters = self
                .h
                .iter()
                .cloned()
                .chain(std::iter::once(Letter::new(self.factor, g.clone())))
                .chain(tail.iter().cloned());
            reduce_free_product(fp, letters)
        };
        Ok((side(&self.g_x, &self.tail_x)?, side(&self.g_y, &self.tail_y)?))
    }
}

/// Splits two reduced words at their longest common prefix.
///
/// When the first letters after the prefix lie in different factors (possible
/// only for an empty prefix), the letter of `y` is pushed into its tail and
/// `g_y` becomes the identity of `x`'s factor.
pub fn common_part(fp: &FreeProduct, x: &FreeProductWord, y: &FreeProductWord) -> CommonPartDecomposition {
    let (xs, ys) = (&x.letters, &y.letters);
    let j = xs.iter().zip(ys).take_while(|(a, b)| a == b).count();
    let h = xs[..j].to_vec();
    let id = |f: Factor| fp.factor(f).identity();
    match (xs.get(j), ys.get(j)) {
        (None, None) => {
            let factor = h.last().map_or(Factor::G1, |l| l.factor.other());
            CommonPartDecomposition {
                h,
                factor,
                g_x: id(factor),
                g_y: id(factor),
                tail_x: vec![],
                tail_y: vec![],
            }
        }
        (None, Some(b)) => CommonPartDecomposition {
            h,
            factor: b.factor,
            g_x: id(b.factor),
            g_y: b.elem.clone(),
            tail_x: vec![],
            tail_y: ys[j + 1..].to_vec(),
        },
        (Some(a), None) => CommonPartDecomposition {
            h,
            factor: a.factor,
            g_x: a.elem.clone(),
            g_y: id(a.factor),
            tail_x: xs[j + 1..].to_vec(),
            tail_y: vec![],
        },
        (Some(a), Some(b)) if a.factor == b.factor => CommonPartDecomposition {
            h,
            factor: a.factor,
            g_x: a.elem.clone(),
            g_y: b.elem.clone(),
            tail_x: xs[j + 1..].to_vec(),
            tail_y: ys[j + 1..].to_vec(),
        },
        (Some(a), Some(_)) => CommonPartDecomposition {
            h,
            factor: a.factor,
            g_x: a.elem.clone(),
            g_y: id(a.factor),
            tail_x: xs[j + 1..].to_vec(),
            tail_y: ys[j..].to_vec(),
        },
    }
}

/// `Σ l(x_i) + d(g_x, g_y) + Σ l(y_j)` over the common-part decomposition.
pub fn fp_distance(fp: &FreeProduct, x: &FreeProductWord, y: &FreeProductWord) -> usize {
    let cp = common_part(fp, x, y);
    let g = fp.factor(cp.factor);
    fp.letter_length_sum(&cp.tail_x)
        + g.length(&g.difference(&cp.g_x, &cp.g_y))
        + fp.letter_length_sum(&cp.tail_y)
}
