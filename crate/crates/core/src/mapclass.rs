//! Mapping classes as factorizations over an [`ElementaryTable`].
//!
//! A product `f_1 f_2 ··· f_n` acts on `π₁` as `f_1 ∘ f_2 ∘ ··· ∘ f_n`, so the
//! rightmost factor is applied first. Two classes are equal when their
//! actions on `π₁` agree; the basepoint sits on the fixed boundary, where
//! that action is faithful.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::surface::{CurveSpec, Elementary, ElementaryTable, Interval, SurfaceModel};
use crate::word::{AutWitness, FreeMap};

/// `by ∘ T(base) ∘ by⁻¹`, kept as one factor.
#[derive(Clone, Debug)]
pub struct ConjugatedTwist {
    pub base: Interval,
    pub by: MappingClass,
}

#[derive(Clone, Debug)]
pub enum Atom {
    Elementary(Elementary),
    Conjugated(Arc<ConjugatedTwist>),
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Elementary(e) => write!(f, "{e}"),
            Atom::Conjugated(c) => write!(f, "CONJ(T({},{}), {})", c.base.i, c.base.j, c.by),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Factor {
    pub atom: Atom,
    pub inverse: bool,
}

impl Factor {
    pub fn new(atom: Atom, inverse: bool) -> Self {
        Factor { atom, inverse }
    }

    pub fn elementary(e: Elementary) -> Self {
        Factor { atom: Atom::Elementary(e), inverse: false }
    }

    fn inverted(&self) -> Factor {
        Factor { atom: self.atom.clone(), inverse: !self.inverse }
    }
}

#[derive(Clone)]
pub struct MappingClass {
    table: Arc<ElementaryTable>,
    factors: Vec<Factor>,
    cache: OnceLock<AutWitness>,
}

impl fmt::Debug for MappingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MappingClass[{}]({})", self.table.model(), self)
    }
}

impl fmt::Display for MappingClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("1");
        }
        for (n, fac) in self.factors.iter().enumerate() {
            if n > 0 {
                f.write_str("*")?;
            }
            write!(f, "{}", fac.atom)?;
            if fac.inverse {
                f.write_str("^-1")?;
            }
        }
        Ok(())
    }
}

impl MappingClass {
    pub fn identity(table: Arc<ElementaryTable>) -> Self {
        Self::from_factors(table, Vec::new())
    }

    pub fn from_factors(table: Arc<ElementaryTable>, factors: Vec<Factor>) -> Self {
        MappingClass { table, factors, cache: OnceLock::new() }
    }

    pub fn elementary(table: Arc<ElementaryTable>, e: Elementary) -> Result<Self> {
        table.get(&e)?;
        Ok(Self::from_factors(table, vec![Factor::elementary(e)]))
    }

    pub fn twist(table: Arc<ElementaryTable>, i: usize, j: usize) -> Result<Self> {
        let iv = table.model().interval(i, j)?;
        if !iv.is_two_sided() {
            return Err(Error::OneSided { i, j });
        }
        Self::elementary(table, Elementary::Twist(iv))
    }

    pub fn transposition(table: Arc<ElementaryTable>) -> Result<Self> {
        if table.model().crosscaps() < 2 {
            return Err(Error::NoTransposition);
        }
        Self::elementary(table, Elementary::Transposition)
    }

    pub fn conjugated_twist(base: Interval, by: MappingClass) -> Result<Self> {
        if !base.is_two_sided() {
            return Err(Error::OneSided { i: base.i, j: base.j });
        }
        let table = by.table.clone();
        table.twist(base)?;
        let atom = Atom::Conjugated(Arc::new(ConjugatedTwist { base, by }));
        Ok(Self::from_factors(table, vec![Factor::new(atom, false)]))
    }

    pub fn table(&self) -> &Arc<ElementaryTable> {
        &self.table
    }

    pub fn model(&self) -> SurfaceModel {
        self.table.model()
    }

    pub fn crosscaps(&self) -> usize {
        self.table.model().crosscaps()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    /// Same factors over a different table (e.g. a corrupted copy).
    pub fn with_table(&self, table: Arc<ElementaryTable>) -> Result<Self> {
        let factors = self.factors.iter().map(|f| rebind(f, &table)).collect::<Result<_>>()?;
        Ok(Self::from_factors(table, factors))
    }

    fn same_model(&self, other: &MappingClass) -> Result<()> {
        if self.model() != other.model() {
            return Err(Error::ModelMismatch { left: self.crosscaps(), right: other.crosscaps() });
        }
        Ok(())
    }

    fn atom_witness(&self, atom: &Atom) -> Result<AutWitness> {
        match atom {
            Atom::Elementary(e) => Ok(self.table.get(e)?.clone()),
            Atom::Conjugated(c) => {
                let by = c.by.witness()?;
                Ok(by.conjugate(self.table.twist(c.base)?)?)
            }
        }
    }

    fn compute(&self) -> Result<AutWitness> {
        let rank = self.table.model().rank();
        let mut fwd = FreeMap::identity(rank);
        let mut bwd = FreeMap::identity(rank);
        let ws = self.factors.iter().map(|f| Ok((self.atom_witness(&f.atom)?, f.inverse))).collect::<Result<Vec<_>>>()?;
        for (w, inv) in ws.iter().rev() {
            let f = if *inv { w.backward() } else { w.forward() };
            fwd = f.compose(&fwd)?;
        }
        for (w, inv) in &ws {
            let g = if *inv { w.forward() } else { w.backward() };
            bwd = g.compose(&bwd)?;
        }
        Ok(AutWitness::new_unchecked(fwd, bwd))
    }

    /// The evaluated automorphism with its inverse; cached after first success.
    pub fn witness(&self) -> Result<&AutWitness> {
        if let Some(w) = self.cache.get() {
            return Ok(w);
        }
        let w = self.compute()?;
        debug_assert!({
            let d = self.model().boundary();
            w.forward().apply(&d).map(|b| b == d).unwrap_or(true)
        });
        let _ = self.cache.set(w);
        Ok(self.cache.get().expect("just set"))
    }

    pub fn evaluate(&self) -> Result<FreeMap> {
        Ok(self.witness()?.forward().clone())
    }

    pub fn mul(&self, other: &MappingClass) -> Result<MappingClass> {
        self.same_model(other)?;
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        Ok(Self::from_factors(self.table.clone(), factors))
    }

    pub fn inverse(&self) -> MappingClass {
        let factors = self.factors.iter().rev().map(Factor::inverted).collect();
        let out = Self::from_factors(self.table.clone(), factors);
        if let Some(w) = self.cache.get() {
            let _ = out.cache.set(w.inverse());
        }
        out
    }

    pub fn power(&self, n: i64) -> MappingClass {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut factors = Vec::with_capacity(base.factors.len() * n.unsigned_abs() as usize);
        for _ in 0..n.unsigned_abs() {
            factors.extend(base.factors.iter().cloned());
        }
        Self::from_factors(self.table.clone(), factors)
    }

    /// `self · inner · self⁻¹`
    pub fn conjugate(&self, inner: &MappingClass) -> Result<MappingClass> {
        self.mul(inner)?.mul(&self.inverse())
    }

    /// Drops factor `n`; used to build mutants.
    pub fn without_factor(&self, n: usize) -> MappingClass {
        let mut factors = self.factors.clone();
        factors.remove(n);
        Self::from_factors(self.table.clone(), factors)
    }

    pub fn is_identity(&self) -> Result<bool> {
        Ok(self.witness()?.forward().is_identity())
    }
}

fn rebind(f: &Factor, table: &Arc<ElementaryTable>) -> Result<Factor> {
    let atom = match &f.atom {
        Atom::Elementary(e) => Atom::Elementary(*e),
        Atom::Conjugated(c) => {
            Atom::Conjugated(Arc::new(ConjugatedTwist { base: c.base, by: c.by.with_table(table.clone())? }))
        }
    };
    Ok(Factor::new(atom, f.inverse))
}

pub fn mc_equal(a: &MappingClass, b: &MappingClass) -> Result<bool> {
    a.same_model(b)?;
    Ok(a.witness()?.forward() == b.witness()?.forward())
}

/// First generator (1-based) on which the two actions differ.
pub fn first_difference(a: &MappingClass, b: &MappingClass) -> Result<Option<usize>> {
    a.same_model(b)?;
    Ok(a.witness()?.forward().first_difference(b.witness()?.forward()))
}

pub fn commutes(a: &MappingClass, b: &MappingClass) -> Result<bool> {
    mc_equal(&a.mul(b)?, &b.mul(a)?)
}

pub fn braid_with(a: &MappingClass, b: &MappingClass) -> Result<bool> {
    mc_equal(&a.mul(b)?.mul(a)?, &b.mul(a)?.mul(b)?)
}

/// Twist about a circle; `Pushed(c, f)` gives `f · t_c · f⁻¹`.
pub fn twist_about(table: &Arc<ElementaryTable>, c: &CurveSpec) -> Result<MappingClass> {
    match c {
        CurveSpec::Basic(iv) => MappingClass::twist(table.clone(), iv.i, iv.j),
        CurveSpec::Pushed { base, by } => {
            let inner = twist_about(table, base)?;
            by.conjugate(&inner)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(k: usize) -> Arc<ElementaryTable> {
        ElementaryTable::for_crosscaps(k).unwrap()
    }

    #[test]
    fn evaluate_basics() {
        let t = table(3);
        assert!(MappingClass::identity(t.clone()).is_identity().unwrap());
        let a = MappingClass::twist(t.clone(), 1, 2).unwrap();
        assert!(a.mul(&a.inverse()).unwrap().is_identity().unwrap());
        let b = MappingClass::twist(t.clone(), 2, 3).unwrap();
        assert!(braid_with(&a, &b).unwrap());
        assert!(!commutes(&a, &b).unwrap());
        assert!(!a.is_identity().unwrap());
        assert!(commutes(&a, &a).unwrap());
        let id = MappingClass::identity(t);
        assert!(braid_with(&id, &id).unwrap());
    }

    #[test]
    fn disjoint_twists() {
        let t = table(4);
        let a = MappingClass::twist(t.clone(), 1, 2).unwrap();
        let c = MappingClass::twist(t.clone(), 3, 4).unwrap();
        assert!(commutes(&a, &c).unwrap());
        assert!(!braid_with(&a, &c).unwrap());
        assert!(matches!(MappingClass::twist(t, 1, 3), Err(Error::OneSided { .. })));
    }

    #[test]
    fn powers() {
        let t = table(3);
        let a = MappingClass::twist(t.clone(), 1, 2).unwrap();
        assert!(a.power(0).is_identity().unwrap());
        assert!(a.power(-1).mul(&a).unwrap().is_identity().unwrap());
        assert!(mc_equal(&a.power(3), &a.mul(&a).unwrap().mul(&a).unwrap()).unwrap());
    }

    #[test]
    fn transposition_square_is_not_the_basic_twist() {
        let t = table(3);
        let u2 = MappingClass::transposition(t.clone()).unwrap().power(2);
        let a = MappingClass::twist(t.clone(), 2, 3).unwrap();
        assert!(!mc_equal(&u2, &a).unwrap());
        assert!(!mc_equal(&u2, &a.inverse()).unwrap());
        // u² is the twist about the circle bounding crosscaps 2 and 3:
        // conjugation of x2, x3 by x2² x3².
        let m = u2.evaluate().unwrap();
        let d = crate::word::Word::parse(3, "x2^2 x3^2").unwrap();
        for l in 2..=3 {
            let g = crate::word::Word::generator(3, l).unwrap();
            assert_eq!(m.image(l), &g.conjugate(&d).unwrap());
        }
        assert_eq!(m.image(1).to_string(), "x1");
    }

    #[test]
    fn twist_about_pushed() {
        let t = table(5);
        let by = MappingClass::twist(t.clone(), 4, 5).unwrap().mul(&MappingClass::transposition(t.clone()).unwrap().inverse()).unwrap();
        let c = CurveSpec::Basic(Interval { i: 1, j: 4 }).pushed(by.clone());
        let tw = twist_about(&t, &c).unwrap();
        let hat = by.witness().unwrap();
        let expected = hat.conjugate(t.twist(Interval { i: 1, j: 4 }).unwrap()).unwrap();
        assert_eq!(tw.witness().unwrap().forward(), expected.forward());
        let same = CurveSpec::Basic(Interval { i: 1, j: 4 }).pushed(MappingClass::identity(t.clone()));
        assert!(mc_equal(&twist_about(&t, &same).unwrap(), &MappingClass::twist(t.clone(), 1, 4).unwrap()).unwrap());
        let conj = MappingClass::conjugated_twist(Interval { i: 1, j: 4 }, by).unwrap();
        assert!(mc_equal(&conj, &tw).unwrap());
    }

    #[test]
    fn model_mismatch() {
        let a = MappingClass::twist(table(3), 1, 2).unwrap();
        let b = MappingClass::twist(table(4), 1, 2).unwrap();
        assert!(matches!(mc_equal(&a, &b), Err(Error::ModelMismatch { .. })));
    }
}
