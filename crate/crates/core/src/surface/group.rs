use super::SurfaceError;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Generator index with an inversion flag. Generators are ordered
/// a1, b1, a2, b2, ...; letters sort as a1 < A1 < b1 < B1 < a2 ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub gen: u8,
    pub inv: bool,
}

impl Letter {
    pub fn new(gen: u8, inv: bool) -> Self {
        Letter { gen, inv }
    }

    pub fn inverse(self) -> Self {
        Letter { gen: self.gen, inv: !self.inv }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = if self.gen % 2 == 0 { 'a' } else { 'b' };
        let c = if self.inv { base.to_ascii_uppercase() } else { base };
        write!(f, "{}{}", c, self.gen / 2 + 1)
    }
}

/// Freely reduced word in the generators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Build from letters, reducing freely.
    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word::from_letters(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn parse(s: &str, genus: usize) -> Result<Self, SurfaceError> {
        let s = s.trim();
        if s.is_empty() || s == "e" {
            return Ok(Word::empty());
        }
        let bad = || SurfaceError::BadWord(s.to_string());
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut letters = Vec::new();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            let (base, inv) = match c {
                'a' => (0, false),
                'A' => (0, true),
                'b' => (1, false),
                'B' => (1, true),
                _ => return Err(bad()),
            };
            k += 1;
            let start = k;
            while k < chars.len() && chars[k].is_ascii_digit() {
                k += 1;
            }
            let idx: usize = chars[start..k].iter().collect::<String>().parse().map_err(|_| bad())?;
            if idx == 0 || idx > genus {
                return Err(bad());
            }
            letters.push(Letter::new((2 * (idx - 1) + base) as u8, inv));
        }
        Ok(Word::from_letters(letters))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "e");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Fundamental group of the closed orientable surface of genus g ≥ 2 with
/// the presentation ⟨a1, b1, ..., ag, bg | [a1,b1]...[ag,bg]⟩.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceGroup {
    pub genus: usize,
}

/// Default cap on the number of words materialised by `enumerate_ball`.
pub const DEFAULT_BALL_CAP: usize = 2_000_000;

impl SurfaceGroup {
    pub fn new(genus: usize) -> Result<Self, SurfaceError> {
        if genus < 2 {
            return Err(SurfaceError::BadGenus(genus));
        }
        Ok(SurfaceGroup { genus })
    }

    pub fn num_generators(&self) -> usize {
        2 * self.genus
    }

    /// All letters in sorted order.
    pub fn letters(&self) -> Vec<Letter> {
        (0..self.num_generators() as u8)
            .flat_map(|g| [Letter::new(g, false), Letter::new(g, true)])
            .collect()
    }

    pub fn generator(&self, k: usize) -> Word {
        Word(vec![Letter::new(k as u8, false)])
    }

    pub fn commutator(&self, i: usize) -> Word {
        let a = Letter::new((2 * i) as u8, false);
        let b = Letter::new((2 * i + 1) as u8, false);
        Word(vec![a, b, a.inverse(), b.inverse()])
    }

    pub fn relator(&self) -> Word {
        Word((0..self.genus).flat_map(|i| self.commutator(i).0).collect())
    }

    /// Number of reduced words of length exactly n.
    pub fn sphere_size(&self, n: usize) -> usize {
        if n == 0 {
            return 1;
        }
        let k = 2 * self.num_generators();
        k * (k - 1).pow(n as u32 - 1)
    }

    pub fn ball_size(&self, radius: usize) -> usize {
        (0..=radius).map(|n| self.sphere_size(n)).sum()
    }

    /// Reduced words of length 1..=radius, ordered by length then lexicographically.
    pub fn enumerate_ball(&self, radius: usize, cap: usize) -> Result<Vec<Word>, SurfaceError> {
        let total = self.ball_size(radius) - 1;
        if total > cap {
            return Err(SurfaceError::BallTooLarge { requested: total, cap });
        }
        let letters = self.letters();
        let mut out = Vec::with_capacity(total);
        let mut layer: Vec<Word> = vec![Word::empty()];
        for _ in 0..radius {
            let mut next = Vec::with_capacity(layer.len() * (letters.len() - 1));
            for w in &layer {
                for &l in &letters {
                    if w.0.last() == Some(&l.inverse()) {
                        continue;
                    }
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(Word(v));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        Ok(out)
    }

    /// Depth-first walk over the reduced words of length 1..=radius, without
    /// materialising them. `f` receives the letters and, for each supplied
    /// generator image table, the product of images along the word.
    pub fn for_each_word<F>(&self, radius: usize, images: &[&[crate::MoebiusMap]], mut f: F)
    where
        F: FnMut(&[Letter], &[crate::MoebiusMap]),
    {
        let letters = self.letters();
        let tables: Vec<Vec<crate::MoebiusMap>> = images
            .iter()
            .map(|imgs| {
                letters
                    .iter()
                    .map(|l| {
                        let g = imgs[l.gen as usize];
                        if l.inv {
                            g.inverse_sl2()
                        } else {
                            g
                        }
                    })
                    .collect()
            })
            .collect();
        let mut word: Vec<Letter> = Vec::with_capacity(radius);
        let mut stack: Vec<Vec<crate::MoebiusMap>> = vec![vec![crate::MoebiusMap::identity(); tables.len()]];
        fn rec<F: FnMut(&[Letter], &[crate::MoebiusMap])>(
            letters: &[Letter],
            tables: &[Vec<crate::MoebiusMap>],
            radius: usize,
            word: &mut Vec<Letter>,
            stack: &mut Vec<Vec<crate::MoebiusMap>>,
            f: &mut F,
        ) {
            if word.len() == radius {
                return;
            }
            for (li, &l) in letters.iter().enumerate() {
                if word.last() == Some(&l.inverse()) {
                    continue;
                }
                let top = stack.last().unwrap();
                let prod: Vec<crate::MoebiusMap> =
                    top.iter().zip(tables).map(|(m, t)| m.mul_sl2(&t[li])).collect();
                word.push(l);
                f(word, &prod);
                stack.push(prod);
                rec(letters, tables, radius, word, stack, f);
                stack.pop();
                word.pop();
            }
        }
        rec(&letters, &tables, radius, &mut word, &mut stack, &mut f);
    }
}
