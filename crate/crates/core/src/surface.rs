//! The disc-with-crosscaps model `N_{k,1}` and its elementary mapping classes.
//!
//! `π₁` is free on `x_1..x_k`, where `x_i` runs once through crosscap `i`.
//! The boundary reads `x_1² x_2² ··· x_k²` and every generator is one-sided.
//! The curve `c(i,j)` is represented by `x_i x_{i+1} ··· x_j`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapclass::MappingClass;
use crate::word::{verify_inverse, AutWitness, CyclicWord, FreeMap, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SurfaceModel {
    crosscaps: usize,
}

impl SurfaceModel {
    pub fn new(crosscaps: usize) -> Result<Self> {
        if crosscaps == 0 {
            return Err(Error::NoCrosscaps);
        }
        Ok(SurfaceModel { crosscaps })
    }

    pub fn crosscaps(&self) -> usize {
        self.crosscaps
    }

    pub fn rank(&self) -> usize {
        self.crosscaps
    }

    pub fn boundary(&self) -> Word {
        let k = self.crosscaps as Letter;
        Word::reduce(self.crosscaps, (1..=k).flat_map(|i| [i, i])).expect("in range")
    }

    pub fn character(&self) -> OrientationCharacter {
        OrientationCharacter { values: vec![1; self.crosscaps] }
    }

    /// Every two-sided basic interval, ordered by `(i, j)`.
    pub fn two_sided_intervals(&self) -> Vec<Interval> {
        let k = self.crosscaps;
        (1..=k)
            .flat_map(|i| (i + 1..=k).step_by(2).map(move |j| Interval { i, j }))
            .collect()
    }

    pub fn interval(&self, i: usize, j: usize) -> Result<Interval> {
        Interval::new(i, j, self.crosscaps)
    }
}

impl fmt::Display for SurfaceModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "N{},1", self.crosscaps)
    }
}

impl std::str::FromStr for SurfaceModel {
    type Err = Error;

    /// Accepts `N5,1`, `N5` or `5`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let body = s.strip_prefix('N').or_else(|| s.strip_prefix('n')).unwrap_or(s);
        let body = body.strip_suffix(",1").unwrap_or(body);
        let k = body
            .trim()
            .parse::<usize>()
            .map_err(|_| Error::Description(format!("bad surface {s:?}, expected Nk,1")))?;
        SurfaceModel::new(k)
    }
}

/// Homomorphism `F_k → ℤ/2`; value 1 marks an orientation-reversing loop.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrientationCharacter {
    values: Vec<u8>,
}

impl OrientationCharacter {
    pub fn new(values: Vec<u8>) -> Self {
        OrientationCharacter { values: values.into_iter().map(|v| v & 1).collect() }
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn eval(&self, w: &Word) -> u8 {
        w.letters().iter().fold(0, |acc, &l| acc ^ self.values[l.unsigned_abs() as usize - 1])
    }
}

/// A closed crosscap range `[i, j]`, `1 ≤ i ≤ j ≤ k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Interval {
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Linking {
    Disjointable,
    OnceLinked,
    Nested,
    /// Partial overlap in an even number of crosscaps: the curves meet
    /// more than once and their twists satisfy neither relation.
    Overlapping,
}

impl Interval {
    pub fn new(i: usize, j: usize, k: usize) -> Result<Self> {
        if i == 0 || i > j || j > k {
            return Err(Error::InvalidInterval { i, j, k });
        }
        Ok(Interval { i, j })
    }

    pub fn is_two_sided(&self) -> bool {
        (self.j - self.i) % 2 == 1
    }

    pub fn len(&self) -> usize {
        self.j - self.i + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.i <= other.i && other.j <= self.j
    }

    pub fn word(&self, rank: usize) -> Word {
        Word::reduce(rank, (self.i as Letter)..=(self.j as Letter)).expect("interval within rank")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.i, self.j)
    }
}

pub fn linked(a: Interval, b: Interval) -> Linking {
    if a.j < b.i || b.j < a.i {
        return Linking::Disjointable;
    }
    if a.contains(&b) || b.contains(&a) {
        return Linking::Nested;
    }
    let overlap = a.j.min(b.j) - a.i.max(b.i) + 1;
    if overlap % 2 == 1 {
        Linking::OnceLinked
    } else {
        Linking::Overlapping
    }
}

/// A circle on the model: a basic `c(i,j)` or the image of one under a class.
#[derive(Clone, Debug)]
pub enum CurveSpec {
    Basic(Interval),
    Pushed { base: Box<CurveSpec>, by: MappingClass },
}

impl CurveSpec {
    pub fn basic(i: usize, j: usize, k: usize) -> Result<Self> {
        Ok(CurveSpec::Basic(Interval::new(i, j, k)?))
    }

    pub fn pushed(self, by: MappingClass) -> Self {
        CurveSpec::Pushed { base: Box::new(self), by }
    }

    /// The innermost basic interval.
    pub fn root(&self) -> Interval {
        match self {
            CurveSpec::Basic(iv) => *iv,
            CurveSpec::Pushed { base, .. } => base.root(),
        }
    }

    pub fn curve_word(&self, model: &SurfaceModel) -> Result<Word> {
        match self {
            CurveSpec::Basic(iv) => {
                Interval::new(iv.i, iv.j, model.crosscaps())?;
                Ok(iv.word(model.rank()))
            }
            CurveSpec::Pushed { base, by } => {
                if by.model() != *model {
                    return Err(Error::ModelMismatch { left: model.crosscaps(), right: by.crosscaps() });
                }
                let w = base.curve_word(model)?;
                Ok(by.witness()?.forward().apply(&w)?)
            }
        }
    }

    pub fn is_two_sided(&self, model: &SurfaceModel) -> Result<bool> {
        Ok(model.character().eval(&self.curve_word(model)?) == 0)
    }

    /// Same unoriented circle, up to rotation and inversion of the cyclic word.
    pub fn same_circle(&self, other: &CurveSpec, model: &SurfaceModel) -> Result<bool> {
        let a = CyclicWord::new(&self.curve_word(model)?);
        let b = CyclicWord::new(&other.curve_word(model)?);
        Ok(a.same_unoriented(&b))
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Basic(iv) => write!(f, "c({},{})", iv.i, iv.j),
            CurveSpec::Pushed { base, by } => write!(f, "({by})({base})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Elementary {
    Twist(Interval),
    Transposition,
    BoundaryTwist,
}

impl fmt::Display for Elementary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Elementary::Twist(iv) => write!(f, "T({},{})", iv.i, iv.j),
            Elementary::Transposition => f.write_str("U"),
            Elementary::BoundaryTwist => f.write_str("B"),
        }
    }
}

impl std::str::FromStr for Elementary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        match compact.as_str() {
            "U" => return Ok(Elementary::Transposition),
            "B" => return Ok(Elementary::BoundaryTwist),
            _ => {}
        }
        let inner = compact
            .strip_prefix("T(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::MissingEntry(s.to_string()))?;
        let (i, j) = inner.split_once(',').ok_or_else(|| Error::MissingEntry(s.to_string()))?;
        let parse = |t: &str| t.parse::<usize>().map_err(|_| Error::MissingEntry(s.to_string()));
        Ok(Elementary::Twist(Interval { i: parse(i)?, j: parse(j)? }))
    }
}

/// Twist about `c(i,j)`.
///
/// With `a = x_i···x_j` and `P_l = x_i···x_l`, the prefixes are sent to
/// `P_l a⁻¹` (odd length), `a P_l a⁻¹` (even length) and `a` (full), and
/// `x_l ↦ TP(l-1)⁻¹ TP(l)`. The inverse swaps `a` and `a⁻¹`.
pub fn elementary_twist(model: &SurfaceModel, i: usize, j: usize) -> Result<AutWitness> {
    let iv = model.interval(i, j)?;
    if !iv.is_two_sided() {
        return Err(Error::OneSided { i, j });
    }
    let forward = twist_map(model, iv, false)?;
    let backward = twist_map(model, iv, true)?;
    Ok(AutWitness::new(forward, backward)?)
}

fn twist_map(model: &SurfaceModel, iv: Interval, inverse: bool) -> Result<FreeMap> {
    let k = model.rank();
    let a = iv.word(k);
    let s = if inverse { a.clone() } else { a.inverse() };
    let prefix = |l: usize| -> Result<Word> {
        let m = l + 1 - iv.i;
        if m == 0 {
            return Ok(Word::identity(k));
        }
        if l == iv.j {
            return Ok(a.clone());
        }
        let p = Interval { i: iv.i, j: l }.word(k);
        Ok(if m % 2 == 1 { p.multiply(&s)? } else { s.inverse().multiply(&p)?.multiply(&s)? })
    };
    let mut images: Vec<Word> = (1..=k).map(|l| Word::generator(k, l)).collect::<Result<_, _>>()?;
    let mut prev = prefix(iv.i - 1)?;
    for l in iv.i..=iv.j {
        let cur = prefix(l)?;
        images[l - 1] = prev.inverse().multiply(&cur)?;
        prev = cur;
    }
    Ok(FreeMap::new(images)?)
}

/// Transposition of crosscaps `k-1` and `k`:
/// `x_{k-1} ↦ x_{k-1}² x_k x_{k-1}⁻²`, `x_k ↦ x_{k-1}`.
pub fn crosscap_transposition(model: &SurfaceModel) -> Result<AutWitness> {
    let k = model.rank();
    if k < 2 {
        return Err(Error::NoTransposition);
    }
    let (p, q) = ((k - 1) as Letter, k as Letter);
    let mut fwd: Vec<Vec<Letter>> = (1..=k as Letter).map(|l| vec![l]).collect();
    let mut bwd = fwd.clone();
    fwd[k - 2] = vec![p, p, q, -p, -p];
    fwd[k - 1] = vec![p];
    bwd[k - 2] = vec![q];
    bwd[k - 1] = vec![-q, -q, p, q, q];
    Ok(AutWitness::new(FreeMap::from_raw(k, fwd)?, FreeMap::from_raw(k, bwd)?)?)
}

/// Twist about a boundary-parallel circle: conjugation by the boundary word.
pub fn boundary_twist(model: &SurfaceModel) -> Result<AutWitness> {
    let d = model.boundary();
    let k = model.rank();
    let conj = |by: &Word| -> Result<FreeMap> {
        let images = (1..=k).map(|l| Word::generator(k, l)?.conjugate(by)).collect::<Result<Vec<_>, _>>()?;
        Ok(FreeMap::new(images)?)
    };
    Ok(AutWitness::new(conj(&d)?, conj(&d.inverse())?)?)
}

/// The automorphisms backing each elementary name on one model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementaryTable {
    model: SurfaceModel,
    entries: BTreeMap<Elementary, AutWitness>,
}

impl ElementaryTable {
    pub fn standard(model: SurfaceModel) -> Self {
        let mut entries = BTreeMap::new();
        for iv in model.two_sided_intervals() {
            entries.insert(Elementary::Twist(iv), elementary_twist(&model, iv.i, iv.j).expect("two-sided"));
        }
        if model.crosscaps() >= 2 {
            entries.insert(Elementary::Transposition, crosscap_transposition(&model).expect("k >= 2"));
        }
        entries.insert(Elementary::BoundaryTwist, boundary_twist(&model).expect("boundary"));
        ElementaryTable { model, entries }
    }

    pub fn for_crosscaps(k: usize) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::standard(SurfaceModel::new(k)?)))
    }

    pub fn model(&self) -> SurfaceModel {
        self.model
    }

    pub fn get(&self, name: &Elementary) -> Result<&AutWitness> {
        self.entries.get(name).ok_or_else(|| Error::MissingEntry(name.to_string()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Elementary, &AutWitness)> {
        self.entries.iter()
    }

    /// Overwrites one entry without any checks; pair with [`validate_table`].
    pub fn replace(&mut self, name: Elementary, witness: AutWitness) {
        self.entries.insert(name, witness);
    }

    pub fn twist(&self, iv: Interval) -> Result<&AutWitness> {
        self.get(&Elementary::Twist(iv))
    }

    pub fn describe(&self) -> ModelDescription {
        let show = |m: &FreeMap| m.images().iter().map(Word::to_string).collect();
        ModelDescription {
            crosscaps: self.model.crosscaps(),
            boundary: self.model.boundary().to_string(),
            entries: self
                .entries
                .iter()
                .map(|(name, w)| EntryDescription {
                    name: name.to_string(),
                    images: show(w.forward()),
                    inverse_images: show(w.backward()),
                })
                .collect(),
        }
    }

    pub fn from_description(desc: &ModelDescription) -> Result<Self> {
        let model = SurfaceModel::new(desc.crosscaps)?;
        let k = model.rank();
        if !desc.boundary.is_empty() && crate::word::Word::parse(k, &desc.boundary)? != model.boundary() {
            return Err(Error::Description(format!("boundary must be {}", model.boundary())));
        }
        let parse_map = |imgs: &[String]| -> Result<FreeMap> {
            if imgs.len() != k {
                return Err(Error::Description(format!("expected {k} images, got {}", imgs.len())));
            }
            Ok(FreeMap::new(imgs.iter().map(|s| Word::parse(k, s)).collect::<Result<_, _>>()?)?)
        };
        let mut entries = BTreeMap::new();
        for e in &desc.entries {
            let name: Elementary = e.name.parse()?;
            if let Elementary::Twist(iv) = name {
                let iv = model.interval(iv.i, iv.j)?;
                if !iv.is_two_sided() {
                    return Err(Error::OneSided { i: iv.i, j: iv.j });
                }
            }
            let fwd = parse_map(&e.images)?;
            let bwd = parse_map(&e.inverse_images)?;
            if !verify_inverse(&fwd, &bwd) {
                return Err(Error::Description(format!("{} images are not mutually inverse", e.name)));
            }
            entries.insert(name, AutWitness::new_unchecked(fwd, bwd));
        }
        Ok(ElementaryTable { model, entries })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDescription {
    pub crosscaps: usize,
    pub boundary: String,
    pub entries: Vec<EntryDescription>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDescription {
    pub name: String,
    pub images: Vec<String>,
    pub inverse_images: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub crosscaps: usize,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.failures.first().map(String::as_str)
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn product(table: &ElementaryTable, word: &[(Elementary, bool)]) -> Result<FreeMap> {
    let mut acc = FreeMap::identity(table.model.rank());
    for (name, inv) in word.iter().rev() {
        let w = table.get(name)?;
        let f = if *inv { w.backward() } else { w.forward() };
        acc = f.compose(&acc)?;
    }
    Ok(acc)
}

/// Certifies a table: witness law, boundary word, character, support,
/// braid/commute per [`Linking`], and `U T U⁻¹ = T⁻¹` for `T = T(k-1,k)`.
pub fn validate_table(table: &ElementaryTable) -> ValidationReport {
    let model = table.model;
    let k = model.rank();
    let boundary = model.boundary();
    let chi = model.character();
    let mut report = ValidationReport { crosscaps: k, ..Default::default() };

    for (name, w) in table.entries() {
        report.check(w.is_consistent(), || format!("{name}: witness is not an inverse"));
        for (dir, f) in [("", w.forward()), ("^-1", w.backward())] {
            let fixes = matches!(f.apply(&boundary), Ok(b) if b == boundary);
            report.check(fixes, || format!("{name}{dir} does not fix the boundary word"));
            let keeps = f.images().iter().all(|img| chi.eval(img) == 1);
            report.check(keeps, || format!("{name}{dir} does not preserve the orientation character"));
        }
        if let Elementary::Twist(iv) = name {
            let outside = (1..=k).filter(|l| *l < iv.i || *l > iv.j).all(|l| w.forward().image(l).letters() == [l as Letter]);
            report.check(outside, || format!("{name} moves a generator outside {iv}"));
        }
    }

    let ivs = model.two_sided_intervals();
    for (n, &a) in ivs.iter().enumerate() {
        for &b in &ivs[n + 1..] {
            let (ta, tb) = ((Elementary::Twist(a), false), (Elementary::Twist(b), false));
            let lhs_rhs = match linked(a, b) {
                Linking::OnceLinked => Some(("braid", vec![ta, tb, ta], vec![tb, ta, tb])),
                Linking::Disjointable | Linking::Nested => Some(("commute", vec![ta, tb], vec![tb, ta])),
                Linking::Overlapping => None,
            };
            if let Some((rel, l, r)) = lhs_rhs {
                let ok = matches!((product(table, &l), product(table, &r)), (Ok(x), Ok(y)) if x == y);
                report.check(ok, || format!("T{a} and T{b} fail to {rel}"));
            }
        }
    }

    if k >= 2 {
        let t = Elementary::Twist(Interval { i: k - 1, j: k });
        let u = Elementary::Transposition;
        let l = product(table, &[(u, false), (t, false), (u, true)]);
        let r = product(table, &[(t, true)]);
        let ok = matches!((l, r), (Ok(x), Ok(y)) if x == y);
        report.check(ok, || format!("U T({},{}) U^-1 != T({},{})^-1", k - 1, k, k - 1, k));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(k: usize) -> SurfaceModel {
        SurfaceModel::new(k).unwrap()
    }

    #[test]
    fn build_models() {
        assert_eq!(model(3).boundary().to_string(), "x1^2 x2^2 x3^2");
        assert_eq!(model(1).boundary().to_string(), "x1^2");
        assert!(SurfaceModel::new(0).is_err());
        let m4 = model(4);
        assert_eq!(m4.character().eval(&Word::parse(4, "x1 x2 x3 x4").unwrap()), 0);
        assert_eq!(m4.character().eval(&m4.boundary()), 0);
        assert_eq!("N5,1".parse::<SurfaceModel>().unwrap(), model(5));
    }

    #[test]
    fn basic_curve_words() {
        let m = model(5);
        assert_eq!(CurveSpec::basic(1, 2, 5).unwrap().curve_word(&m).unwrap().to_string(), "x1 x2");
        let c33 = CurveSpec::basic(3, 3, 5).unwrap();
        assert_eq!(c33.curve_word(&m).unwrap().to_string(), "x3");
        assert!(!c33.is_two_sided(&m).unwrap());
        assert!(CurveSpec::basic(3, 2, 5).is_err());
        assert!(CurveSpec::basic(1, 6, 5).is_err());
    }

    #[test]
    fn linking_examples() {
        let iv = |i, j| Interval { i, j };
        assert_eq!(linked(iv(1, 2), iv(2, 3)), Linking::OnceLinked);
        assert_eq!(linked(iv(1, 2), iv(3, 4)), Linking::Disjointable);
        assert_eq!(linked(iv(1, 4), iv(2, 3)), Linking::Nested);
        assert_eq!(linked(iv(1, 4), iv(1, 2)), Linking::Nested);
        assert_eq!(linked(iv(1, 4), iv(2, 5)), Linking::OnceLinked);
        assert_eq!(linked(iv(1, 4), iv(3, 6)), Linking::Overlapping);
        for (a, b) in [(iv(1, 2), iv(2, 5)), (iv(2, 3), iv(1, 6))] {
            assert_eq!(linked(a, b), linked(b, a));
        }
    }

    #[test]
    fn twist_support_and_boundary() {
        let m = model(3);
        let t = elementary_twist(&m, 1, 2).unwrap();
        assert_eq!(t.forward().image(3).to_string(), "x3");
        assert_eq!(t.forward().image(1).to_string(), "x1 x2^-1 x1^-1");
        assert_eq!(t.forward().image(2).to_string(), "x1 x2^2");
        assert!(t.forward().compose(t.backward()).unwrap().is_identity());
        assert_eq!(t.forward().apply(&m.boundary()).unwrap(), m.boundary());
        assert!(matches!(elementary_twist(&m, 1, 3), Err(Error::OneSided { .. })));
    }

    #[test]
    fn transposition_examples() {
        let m = model(3);
        let u = crosscap_transposition(&m).unwrap();
        assert_eq!(u.forward().image(1).to_string(), "x1");
        let m2 = model(2);
        let u2 = crosscap_transposition(&m2).unwrap();
        assert_eq!(u2.forward().image(1).to_string(), "x1^2 x2 x1^-2");
        assert_eq!(u2.forward().image(2).to_string(), "x1");
        assert!(crosscap_transposition(&model(1)).is_err());
    }

    #[test]
    fn tables_validate() {
        for k in 1..=6 {
            let r = validate_table(&ElementaryTable::standard(model(k)));
            assert!(r.passed(), "k={k}: {:?}", r.failures);
        }
        assert!(validate_table(&ElementaryTable::standard(model(1))).passed());
    }

    #[test]
    fn corrupted_table_fails_braid() {
        let m = model(5);
        let mut t = ElementaryTable::standard(m);
        t.replace(Elementary::Twist(Interval { i: 2, j: 3 }), AutWitness::identity(5));
        let r = validate_table(&t);
        assert!(!r.passed());
        assert!(r.failures.iter().any(|f| f.contains("braid")));
    }

    #[test]
    fn description_round_trip() {
        let t = ElementaryTable::standard(model(4));
        let json = serde_json::to_string(&t.describe()).unwrap();
        let back: ModelDescription = serde_json::from_str(&json).unwrap();
        assert_eq!(ElementaryTable::from_description(&back).unwrap(), t);
    }
}
