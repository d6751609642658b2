//! Matrix-presented monoids, canonical word reduction, and generator
//! classification.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// 1-based index of a generator `s_i`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorId(usize);

impl GeneratorId {
    pub fn new(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidInput(
                "generator indices are 1-based; 0 is not a generator".into(),
            ));
        }
        Ok(Self(index))
    }

    /// The 1-based index used in all I/O.
    pub fn index(self) -> usize {
        self.0
    }

    pub(crate) fn zero_based(self) -> usize {
        self.0 - 1
    }

    pub(crate) fn from_zero_based(i: usize) -> Self {
        Self(i + 1)
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// A word over the generators; the empty word is the identity `e`.
/// Comparisons look at the symbols only, never the bookkeeping flag.
#[derive(Clone, Debug)]
pub struct Word {
    symbols: Vec<GeneratorId>,
    reduced: bool,
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Word {}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.symbols.cmp(&other.symbols)
    }
}

impl std::hash::Hash for Word {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.symbols.hash(state);
    }
}

impl Word {
    pub fn identity() -> Self {
        Word { symbols: Vec::new(), reduced: true }
    }

    pub fn new(symbols: Vec<GeneratorId>) -> Self {
        let reduced = symbols.is_empty();
        Word { symbols, reduced }
    }

    /// Builds a word from 1-based indices.
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let symbols = indices
            .iter()
            .map(|&i| GeneratorId::new(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::new(symbols))
    }

    pub fn symbols(&self) -> &[GeneratorId] {
        &self.symbols
    }

    pub fn indices(&self) -> Vec<usize> {
        self.symbols.iter().map(|s| s.index()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn last(&self) -> Option<GeneratorId> {
        self.symbols.last().copied()
    }

    pub(crate) fn reduced_unchecked(symbols: Vec<GeneratorId>) -> Self {
        Word { symbols, reduced: true }
    }

    /// Extends a reduced word by one generator, keeping the reduced flag.
    pub(crate) fn child(&self, s: GeneratorId) -> Self {
        let mut symbols = self.symbols.clone();
        symbols.push(s);
        Word { symbols, reduced: true }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.symbols.is_empty() {
            return write!(f, "e");
        }
        for s in &self.symbols {
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

/// A monoid `<s_1..s_d | R_A>` with `s_i s_j = s_i` iff `A(i, j) = 0`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MonoidPresentation {
    d: usize,
    a: Vec<Vec<u8>>,
}

impl MonoidPresentation {
    pub fn new(d: usize, a: Vec<Vec<u8>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("generator count d must be >= 1".into()));
        }
        if a.len() != d || a.iter().any(|row| row.len() != d) {
            return Err(Error::InvalidInput(format!(
                "relation matrix must be {d}x{d}"
            )));
        }
        if a.iter().flatten().any(|&v| v > 1) {
            return Err(Error::InvalidInput("relation matrix entries must be 0 or 1".into()));
        }
        Ok(MonoidPresentation { d, a })
    }

    /// The free monoid on `d` generators (all-ones relation matrix).
    pub fn free_monoid(d: usize) -> Self {
        MonoidPresentation { d, a: vec![vec![1; d]; d] }
    }

    /// The two-generator presentation with `A = [[1,1],[1,0]]`.
    pub fn fibonacci() -> Self {
        MonoidPresentation { d: 2, a: vec![vec![1, 1], vec![1, 0]] }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &[Vec<u8>] {
        &self.a
    }

    /// `A(i, j) = 1`, i.e. `s_j` follows `s_i` length-additively.
    pub fn allows(&self, i: GeneratorId, j: GeneratorId) -> bool {
        self.a[i.zero_based()][j.zero_based()] == 1
    }

    pub fn generators(&self) -> impl Iterator<Item = GeneratorId> {
        (0..self.d).map(GeneratorId::from_zero_based)
    }

    fn check_symbol(&self, s: GeneratorId) -> Result<()> {
        if s.index() > self.d {
            return Err(Error::InvalidInput(format!(
                "symbol {} out of range 1..{}",
                s.index(),
                self.d
            )));
        }
        Ok(())
    }

    /// Canonical form by a single left-to-right absorption scan: a symbol
    /// survives iff it is the first symbol or follows the last survivor
    /// length-additively.
    pub fn reduce(&self, w: &Word) -> Result<Word> {
        let mut out: Vec<GeneratorId> = Vec::with_capacity(w.symbols().len());
        for &s in w.symbols() {
            self.check_symbol(s)?;
            match out.last() {
                None => out.push(s),
                Some(&t) => {
                    if self.allows(t, s) {
                        out.push(s);
                    }
                }
            }
        }
        Ok(Word::reduced_unchecked(out))
    }

    /// Length of the minimal presentation of `w`.
    pub fn length(&self, w: &Word) -> Result<usize> {
        Ok(self.reduce(w)?.symbols().len())
    }

    /// `S_R`: generators whose row of `A` is all ones.
    pub fn right_free_generators(&self) -> Vec<GeneratorId> {
        (0..self.d)
            .filter(|&i| self.a[i].iter().all(|&v| v == 1))
            .map(GeneratorId::from_zero_based)
            .collect()
    }

    pub fn is_right_free(&self, s: GeneratorId) -> bool {
        self.a[s.zero_based()].iter().all(|&v| v == 1)
    }

    /// `|g s| = |g| + 1` for reduced `g`.
    pub fn is_length_additive(&self, g: &Word, s: GeneratorId) -> bool {
        match g.last() {
            None => true,
            Some(t) => self.allows(t, s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // the three-generator presentation with relations s1^2 = s1, s2 s1 = s2, s2^2 = s2
    fn sample3() -> MonoidPresentation {
        MonoidPresentation::new(3, vec![vec![0, 1, 1], vec![0, 0, 1], vec![1, 1, 1]]).unwrap()
    }

    fn w(idx: &[usize]) -> Word {
        Word::from_indices(idx).unwrap()
    }

    #[test]
    fn reduce_applies_relations() {
        let p = sample3();
        assert_eq!(p.reduce(&w(&[1, 1])).unwrap(), w(&[1]));
        assert_eq!(p.reduce(&w(&[2, 1])).unwrap(), w(&[2]));
        assert_eq!(p.reduce(&Word::identity()).unwrap(), Word::identity());
        assert_eq!(p.reduce(&w(&[2, 1, 1, 3])).unwrap(), w(&[2, 3]));
    }

    #[test]
    fn reduce_rejects_out_of_range() {
        let p = sample3();
        assert!(matches!(p.reduce(&w(&[4])), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn length_examples() {
        let p = sample3();
        assert_eq!(p.length(&w(&[2, 1])).unwrap(), 1);
        assert_eq!(p.length(&Word::identity()).unwrap(), 0);
        assert_eq!(p.length(&w(&[1, 2, 3])).unwrap(), 3);
    }

    #[test]
    fn right_free_generator_examples() {
        let p = sample3();
        assert_eq!(p.right_free_generators(), vec![GeneratorId::new(3).unwrap()]);
        let free = MonoidPresentation::free_monoid(4);
        assert_eq!(free.right_free_generators().len(), 4);
        let fib = MonoidPresentation::fibonacci();
        assert_eq!(fib.right_free_generators(), vec![GeneratorId::new(1).unwrap()]);
    }

    #[test]
    fn length_additivity_examples() {
        let p = sample3();
        let s1 = GeneratorId::new(1).unwrap();
        let s2 = GeneratorId::new(2).unwrap();
        assert!(!p.is_length_additive(&w(&[2]), s1));
        assert!(p.is_length_additive(&Word::identity(), s1));
        assert!(p.is_length_additive(&w(&[1]), s2));
    }

    fn all_presentations(d: usize) -> Vec<MonoidPresentation> {
        let cells = d * d;
        (0..(1u32 << cells))
            .map(|bits| {
                let a = (0..d)
                    .map(|i| (0..d).map(|j| ((bits >> (i * d + j)) & 1) as u8).collect())
                    .collect();
                MonoidPresentation::new(d, a).unwrap()
            })
            .collect()
    }

    fn all_words(d: usize, max_len: usize) -> Vec<Word> {
        let mut out = vec![Word::identity()];
        let mut level = vec![Vec::<usize>::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for prefix in &level {
                for s in 1..=d {
                    let mut v = prefix.clone();
                    v.push(s);
                    out.push(Word::from_indices(&v).unwrap());
                    next.push(v);
                }
            }
            level = next;
        }
        out
    }

    #[test]
    fn reduce_is_idempotent_exhaustive() {
        for d in 1..=4usize {
            // cap word length to keep the exhaustive sweep quick for d = 4
            let max_len = if d <= 2 { 8 } else { 5 };
            let words = all_words(d, max_len);
            for p in all_presentations(d) {
                for w in &words {
                    let r = p.reduce(w).unwrap();
                    assert_eq!(p.reduce(&r).unwrap(), r);
                    assert!(r.symbols().len() <= w.symbols().len());
                    if !w.is_identity() {
                        assert_eq!(r.symbols()[0], w.symbols()[0]);
                    }
                }
            }
        }
    }

    #[test]
    fn reduce_absorbs_left_factors_exhaustive() {
        // reduce(u v) = reduce(reduce(u) v): the scan only remembers the
        // last survivor. The stronger two-sided form with reduce(v) glued
        // on the right fails for some matrices: with A = [[1,0],[0,1]],
        // u = s1 and v = s2 s1, the relations derive s1 s1 = s1 s2 s1 = s1
        // even though A(1,1) = 1, so the right factor cannot be reduced
        // out of context.
        for d in 1..=3usize {
            let words = all_words(d, if d < 3 { 5 } else { 3 });
            for p in all_presentations(d) {
                for u in &words {
                    for v in &words {
                        let mut uv = u.symbols().to_vec();
                        uv.extend_from_slice(v.symbols());
                        let direct = p.reduce(&Word::new(uv)).unwrap();
                        let mut glued = p.reduce(u).unwrap().symbols().to_vec();
                        glued.extend_from_slice(v.symbols());
                        assert_eq!(p.reduce(&Word::new(glued)).unwrap(), direct);
                    }
                }
            }
        }
    }

    #[test]
    fn reduce_is_multiplicative_on_examples() {
        for p in [sample3(), MonoidPresentation::fibonacci(), MonoidPresentation::free_monoid(3)] {
            let words = all_words(p.d(), 4);
            for u in &words {
                for v in &words {
                    let mut uv = u.symbols().to_vec();
                    uv.extend_from_slice(v.symbols());
                    let direct = p.reduce(&Word::new(uv)).unwrap();
                    let mut glued = p.reduce(u).unwrap().symbols().to_vec();
                    glued.extend_from_slice(p.reduce(v).unwrap().symbols());
                    assert_eq!(p.reduce(&Word::new(glued)).unwrap(), direct);
                }
            }
        }
    }

    #[test]
    fn right_free_iff_nothing_absorbed_after() {
        // s is right free exactly when reduce(s w) = s reduce(w) always
        for p in all_presentations(3) {
            for s in p.generators() {
                let commutes = all_words(3, 4).iter().all(|w| {
                    let mut sw = vec![s];
                    sw.extend_from_slice(w.symbols());
                    let left = p.reduce(&Word::new(sw)).unwrap();
                    let mut glued = vec![s];
                    glued.extend_from_slice(p.reduce(w).unwrap().symbols());
                    left.symbols() == glued
                });
                assert_eq!(commutes, p.is_right_free(s));
            }
        }
    }

    proptest! {
        #[test]
        fn reduce_idempotent_random(d in 1usize..=5, bits in any::<u32>(), word in proptest::collection::vec(1usize..=5, 0..12)) {
            let a: Vec<Vec<u8>> = (0..d)
                .map(|i| (0..d).map(|j| ((bits >> ((i * d + j) % 32)) & 1) as u8).collect())
                .collect();
            let p = MonoidPresentation::new(d, a).unwrap();
            let word: Vec<usize> = word.into_iter().map(|s| (s - 1) % d + 1).collect();
            let w = Word::from_indices(&word).unwrap();
            let r = p.reduce(&w).unwrap();
            prop_assert_eq!(p.reduce(&r).unwrap(), r);
        }
    }
}
