//! Free-group words and endomorphisms.
//!
//! A letter is a nonzero `i32`: `+i` is the generator `x_i`, `-i` its inverse.
//! Generators are numbered from 1. Every [`Word`] is kept freely reduced.

use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

pub type Letter = i32;

pub const DEFAULT_MAX_WORD_LENGTH: usize = 1_000_000;

static MAX_WORD_LENGTH: AtomicUsize = AtomicUsize::new(DEFAULT_MAX_WORD_LENGTH);

/// Sets the process-wide length guard. Any reduced word (including reduced
/// intermediates while applying a map) longer than this aborts the operation
/// with [`WordError::Overflow`].
pub fn set_max_word_length(limit: usize) {
    MAX_WORD_LENGTH.store(limit.max(1), Ordering::Relaxed);
}

pub fn max_word_length() -> usize {
    MAX_WORD_LENGTH.load(Ordering::Relaxed)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("letter {letter} out of range for rank {rank}")]
    IndexOutOfRange { letter: Letter, rank: usize },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("word-growth overflow: length {length} exceeds limit {limit}")]
    Overflow { length: usize, limit: usize },
    #[error("cannot parse word {0:?}")]
    Syntax(String),
    #[error("maps are not mutually inverse")]
    NotInverse,
}

pub type Result<T, E = WordError> = std::result::Result<T, E>;

/// Single-pass stack reduction with the length guard.
struct Reducer {
    stack: Vec<Letter>,
    limit: usize,
}

impl Reducer {
    fn new() -> Self {
        Self::with_capacity(0)
    }

    fn with_capacity(n: usize) -> Self {
        Reducer { stack: Vec::with_capacity(n), limit: max_word_length() }
    }

    #[inline]
    fn push(&mut self, l: Letter) -> Result<()> {
        if self.stack.last() == Some(&-l) {
            self.stack.pop();
        } else {
            self.stack.push(l);
            if self.stack.len() > self.limit {
                return Err(WordError::Overflow { length: self.stack.len(), limit: self.limit });
            }
        }
        Ok(())
    }

    fn push_all(&mut self, ls: &[Letter]) -> Result<()> {
        ls.iter().try_for_each(|&l| self.push(l))
    }

    fn push_inverse(&mut self, ls: &[Letter]) -> Result<()> {
        ls.iter().rev().try_for_each(|&l| self.push(-l))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: usize,
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        Word { rank, letters: Vec::new() }
    }

    pub fn generator(rank: usize, index: usize) -> Result<Self> {
        Self::reduce(rank, [index as Letter])
    }

    /// Freely reduces a raw letter sequence, checking every index against `rank`.
    pub fn reduce<I: IntoIterator<Item = Letter>>(rank: usize, raw: I) -> Result<Self> {
        let mut r = Reducer::new();
        for l in raw {
            if l == 0 || l.unsigned_abs() as usize > rank {
                return Err(WordError::IndexOutOfRange { letter: l, rank });
            }
            r.push(l)?;
        }
        Ok(Word { rank, letters: r.stack })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn check_rank(&self, other: &Word) -> Result<()> {
        if self.rank != other.rank {
            return Err(WordError::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        self.check_rank(other)?;
        let mut r = Reducer::with_capacity(self.len() + other.len());
        r.stack.extend_from_slice(&self.letters);
        r.push_all(&other.letters)?;
        Ok(Word { rank: self.rank, letters: r.stack })
    }

    pub fn inverse(&self) -> Word {
        Word { rank: self.rank, letters: self.letters.iter().rev().map(|l| -l).collect() }
    }

    /// `by · self · by⁻¹`
    pub fn conjugate(&self, by: &Word) -> Result<Word> {
        self.check_rank(by)?;
        let mut r = Reducer::with_capacity(self.len() + 2 * by.len());
        r.push_all(&by.letters)?;
        r.push_all(&self.letters)?;
        r.push_inverse(&by.letters)?;
        Ok(Word { rank: self.rank, letters: r.stack })
    }

    pub fn pow(&self, n: i64) -> Result<Word> {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut r = Reducer::new();
        for _ in 0..n.unsigned_abs() {
            r.push_all(&base.letters)?;
        }
        Ok(Word { rank: self.rank, letters: r.stack })
    }

    /// Exponent sum of generator `index` (1-based).
    pub fn exponent_sum(&self, index: usize) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.unsigned_abs() as usize == index)
            .map(|&l| l.signum() as i64)
            .sum()
    }

    /// Parses `"x1 x2^-1 x3^2"`; `""` and `"1"` denote the empty word.
    pub fn parse(rank: usize, src: &str) -> Result<Word> {
        let bad = || WordError::Syntax(src.to_string());
        let mut raw = Vec::new();
        for tok in src.split_whitespace() {
            if tok == "1" {
                continue;
            }
            let body = tok.strip_prefix('x').ok_or_else(bad)?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e.parse::<i64>().map_err(|_| bad())?),
                None => (body, 1),
            };
            let idx: Letter = idx.parse().map_err(|_| bad())?;
            if idx <= 0 {
                return Err(bad());
            }
            let l = if exp < 0 { -idx } else { idx };
            raw.extend(std::iter::repeat_n(l, exp.unsigned_abs() as usize));
        }
        Word::reduce(rank, raw)
    }
}

impl fmt::Display for Word {
    /// Runs of a repeated letter are printed with an exponent: `x1^2 x2^-1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.letters.len() {
            let l = self.letters[i];
            let mut run = 1;
            while i + run < self.letters.len() && self.letters[i + run] == l {
                run += 1;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            let exp = run as i64 * l.signum() as i64;
            if exp == 1 {
                write!(f, "x{}", l.abs())?;
            } else {
                write!(f, "x{}^{}", l.abs(), exp)?;
            }
            i += run;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word[{}]({})", self.rank, self)
    }
}

/// A word up to rotation; cyclically reduced on construction.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct CyclicWord {
    word: Word,
}

impl CyclicWord {
    pub fn new(w: &Word) -> Self {
        let ls = &w.letters;
        let (mut lo, mut hi) = (0, ls.len());
        while hi - lo > 1 && ls[lo] == -ls[hi - 1] {
            lo += 1;
            hi -= 1;
        }
        CyclicWord { word: Word { rank: w.rank, letters: ls[lo..hi].to_vec() } }
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    fn min_rotation(ls: &[Letter]) -> Vec<Letter> {
        (0..ls.len().max(1))
            .map(|r| ls[r..].iter().chain(&ls[..r]).copied().collect::<Vec<_>>())
            .min()
            .unwrap_or_default()
    }

    /// Canonical representative over rotations of the word and of its inverse,
    /// i.e. a key for unoriented free homotopy classes.
    pub fn unoriented_key(&self) -> Vec<Letter> {
        let fwd = Self::min_rotation(&self.word.letters);
        let bwd = Self::min_rotation(&self.word.inverse().letters);
        fwd.min(bwd)
    }

    pub fn same_unoriented(&self, other: &CyclicWord) -> bool {
        self.word.rank == other.word.rank && self.unoriented_key() == other.unoriented_key()
    }
}

/// Endomorphism of the free group given by generator images.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FreeMap {
    images: Vec<Word>,
}

impl FreeMap {
    pub fn new(images: Vec<Word>) -> Result<Self> {
        let rank = images.len();
        for w in &images {
            if w.rank != rank {
                return Err(WordError::RankMismatch { left: rank, right: w.rank });
            }
        }
        Ok(FreeMap { images })
    }

    /// Builds a map from raw image letter sequences, reducing each.
    pub fn from_raw(rank: usize, images: Vec<Vec<Letter>>) -> Result<Self> {
        if images.len() != rank {
            return Err(WordError::RankMismatch { left: rank, right: images.len() });
        }
        let images = images.into_iter().map(|ls| Word::reduce(rank, ls)).collect::<Result<_>>()?;
        Ok(FreeMap { images })
    }

    pub fn identity(rank: usize) -> Self {
        FreeMap { images: (1..=rank).map(|i| Word { rank, letters: vec![i as Letter] }).collect() }
    }

    pub fn rank(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    /// Image of generator `index` (1-based).
    pub fn image(&self, index: usize) -> &Word {
        &self.images[index - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, w)| w.letters == [i as Letter + 1])
    }

    pub fn max_image_len(&self) -> usize {
        self.images.iter().map(Word::len).max().unwrap_or(0)
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.rank != self.rank() {
            return Err(WordError::RankMismatch { left: self.rank(), right: w.rank });
        }
        let mut r = Reducer::with_capacity(w.len());
        for &l in &w.letters {
            let img = &self.images[l.unsigned_abs() as usize - 1].letters;
            if l > 0 {
                r.push_all(img)?;
            } else {
                r.push_inverse(img)?;
            }
        }
        Ok(Word { rank: w.rank, letters: r.stack })
    }

    /// `self ∘ g`, i.e. apply `g` first.
    pub fn compose(&self, g: &FreeMap) -> Result<FreeMap> {
        if self.rank() != g.rank() {
            return Err(WordError::RankMismatch { left: self.rank(), right: g.rank() });
        }
        let images = g.images.iter().map(|w| self.apply(w)).collect::<Result<_>>()?;
        Ok(FreeMap { images })
    }

    /// Index (1-based) of the first generator whose images differ.
    pub fn first_difference(&self, other: &FreeMap) -> Option<usize> {
        if self.rank() != other.rank() {
            return Some(1);
        }
        self.images.iter().zip(&other.images).position(|(a, b)| a != b).map(|i| i + 1)
    }
}

impl fmt::Debug for FreeMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (i, w) in self.images.iter().enumerate() {
            m.entry(&format_args!("x{}", i + 1), &format_args!("{}", w));
        }
        m.finish()
    }
}

/// True iff `f ∘ g` and `g ∘ f` both fix every generator.
pub fn verify_inverse(f: &FreeMap, g: &FreeMap) -> bool {
    matches!(f.compose(g), Ok(h) if h.is_identity()) && matches!(g.compose(f), Ok(h) if h.is_identity())
}

/// An automorphism carried together with its inverse.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AutWitness {
    forward: FreeMap,
    backward: FreeMap,
}

impl AutWitness {
    pub fn new(forward: FreeMap, backward: FreeMap) -> Result<Self> {
        if !verify_inverse(&forward, &backward) {
            return Err(WordError::NotInverse);
        }
        Ok(AutWitness { forward, backward })
    }

    /// Skips the inverse check; used for deliberately corrupted tables.
    pub fn new_unchecked(forward: FreeMap, backward: FreeMap) -> Self {
        AutWitness { forward, backward }
    }

    pub fn identity(rank: usize) -> Self {
        AutWitness { forward: FreeMap::identity(rank), backward: FreeMap::identity(rank) }
    }

    pub fn forward(&self) -> &FreeMap {
        &self.forward
    }

    pub fn backward(&self) -> &FreeMap {
        &self.backward
    }

    pub fn rank(&self) -> usize {
        self.forward.rank()
    }

    pub fn inverse(&self) -> AutWitness {
        AutWitness { forward: self.backward.clone(), backward: self.forward.clone() }
    }

    /// `self ∘ other`, with inverse `other⁻¹ ∘ self⁻¹`.
    pub fn compose(&self, other: &AutWitness) -> Result<AutWitness> {
        Ok(AutWitness {
            forward: self.forward.compose(&other.forward)?,
            backward: other.backward.compose(&self.backward)?,
        })
    }

    pub fn is_consistent(&self) -> bool {
        verify_inverse(&self.forward, &self.backward)
    }

    /// `self ∘ inner ∘ self⁻¹`
    pub fn conjugate(&self, inner: &AutWitness) -> Result<AutWitness> {
        self.compose(inner)?.compose(&self.inverse())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(rank: usize, ls: &[Letter]) -> Word {
        Word::reduce(rank, ls.iter().copied()).unwrap()
    }

    /// Rewrites any adjacent cancelling pair, in every possible order.
    fn brute_force_normal_forms(ls: &[Letter]) -> std::collections::BTreeSet<Vec<Letter>> {
        let mut out = std::collections::BTreeSet::new();
        let mut any = false;
        for i in 0..ls.len().saturating_sub(1) {
            if ls[i] == -ls[i + 1] {
                any = true;
                let mut next = ls[..i].to_vec();
                next.extend_from_slice(&ls[i + 2..]);
                out.extend(brute_force_normal_forms(&next));
            }
        }
        if !any {
            out.insert(ls.to_vec());
        }
        out
    }

    #[test]
    fn reduce_examples() {
        assert!(w(2, &[1, -1]).is_empty());
        assert_eq!(w(2, &[1, 2, -2, 1]).letters(), &[1, 1]);
        let raw = [1, -2, 2, -2, -1, 1];
        assert_eq!(w(2, &raw).letters(), &[1, -2]);
        let forms = brute_force_normal_forms(&raw);
        assert_eq!(forms.len(), 1);
        assert_eq!(forms.into_iter().next().unwrap(), vec![1, -2]);
    }

    #[test]
    fn reduce_rejects_bad_index() {
        assert!(matches!(Word::reduce(2, [3]), Err(WordError::IndexOutOfRange { .. })));
        assert!(matches!(Word::reduce(2, [0]), Err(WordError::IndexOutOfRange { .. })));
    }

    #[test]
    fn multiply_and_conjugate() {
        assert!(w(3, &[1]).multiply(&w(3, &[-1])).unwrap().is_empty());
        assert_eq!(w(3, &[1, 2]).multiply(&w(3, &[-2, 3])).unwrap().letters(), &[1, 3]);
        assert_eq!(w(3, &[2]).conjugate(&w(3, &[1])).unwrap().letters(), &[1, 2, -1]);
        assert_eq!(w(3, &[1]).conjugate(&w(3, &[1])).unwrap().letters(), &[1]);
        let expected = w(3, &[1, 2]).multiply(&w(3, &[2, 3])).unwrap().multiply(&w(3, &[-2, -1])).unwrap();
        assert_eq!(w(3, &[2, 3]).conjugate(&w(3, &[1, 2])).unwrap(), expected);
        assert_eq!(expected.letters(), &[1, 2, 2, 3, -2, -1]);
        assert!(matches!(w(2, &[1]).multiply(&w(3, &[1])), Err(WordError::RankMismatch { .. })));
    }

    #[test]
    fn invert() {
        assert_eq!(w(2, &[1, 2]).inverse().letters(), &[-2, -1]);
        assert!(Word::identity(2).inverse().is_empty());
    }

    #[test]
    fn apply_examples() {
        let f = FreeMap::from_raw(2, vec![vec![1, 2], vec![2]]).unwrap();
        assert_eq!(f.apply(&w(2, &[1, -2])).unwrap().letters(), &[1]);
        assert_eq!(f.apply(&w(2, &[-1])).unwrap().letters(), &[-2, -1]);
        let id = FreeMap::identity(2);
        assert_eq!(id.apply(&w(2, &[1, -2, 1])).unwrap(), w(2, &[1, -2, 1]));
    }

    #[test]
    fn compose_examples() {
        let f = FreeMap::from_raw(2, vec![vec![1, 2], vec![2]]).unwrap();
        let g = FreeMap::from_raw(2, vec![vec![1], vec![2, 1]]).unwrap();
        let fg = f.compose(&g).unwrap();
        assert_eq!(fg.image(1).letters(), &[1, 2]);
        assert_eq!(fg.image(2).letters(), &[2, 1, 2]);
        // oracle: apply g, then f, generator by generator
        for i in 1..=2 {
            assert_eq!(fg.image(i), &f.apply(g.image(i)).unwrap());
        }
        assert_eq!(FreeMap::identity(2).compose(&f).unwrap(), f);
    }

    #[test]
    fn inverse_checks() {
        let id = FreeMap::identity(2);
        assert!(verify_inverse(&id, &id));
        let f = FreeMap::from_raw(2, vec![vec![1, 2], vec![2]]).unwrap();
        let g = FreeMap::from_raw(2, vec![vec![1, -2], vec![2]]).unwrap();
        assert!(verify_inverse(&f, &g));
        assert!(!verify_inverse(&f, &id));
        let unreduced = FreeMap::from_raw(2, vec![vec![1, 2, -2], vec![2]]).unwrap();
        assert_eq!(id, unreduced);
        assert_ne!(f, g);
        let wit = AutWitness::new(f.clone(), g).unwrap();
        assert!(wit.forward().compose(wit.backward()).unwrap().is_identity());
        assert!(AutWitness::new(f, id).is_err());
    }

    #[test]
    fn overflow_guard() {
        let x = w(1, &[1]);
        let limit = max_word_length();
        assert!(matches!(x.pow(limit as i64 + 1), Err(WordError::Overflow { .. })));
    }

    #[test]
    fn display_and_parse() {
        let word = w(3, &[1, 1, 2, -3, -3]);
        assert_eq!(word.to_string(), "x1^2 x2 x3^-2");
        assert_eq!(Word::parse(3, &word.to_string()).unwrap(), word);
        assert_eq!(Word::parse(3, "x1 x2^-1").unwrap().letters(), &[1, -2]);
        assert!(Word::parse(3, "").unwrap().is_empty());
        assert!(Word::parse(3, "y1").is_err());
    }

    #[test]
    fn cyclic_words() {
        let a = CyclicWord::new(&w(3, &[-3, 1, 2, 3]));
        assert_eq!(a.word().letters(), &[1, 2]);
        let b = CyclicWord::new(&w(3, &[2, 1]));
        assert!(a.same_unoriented(&b));
        let c = CyclicWord::new(&w(3, &[-1, -2]));
        assert!(a.same_unoriented(&c));
        assert!(!a.same_unoriented(&CyclicWord::new(&w(3, &[1, 3]))));
    }
}
