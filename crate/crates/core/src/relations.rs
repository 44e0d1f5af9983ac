//! The relation catalog: named identities between twist words, each checked
//! by exact comparison of automorphisms of `π₁`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{bind_all, mapping_class, Bindings};
use crate::homology::{double_cover_h1, transvection_rank_lower_bound, IntMatrix};
use crate::mapclass::{braid_with, first_difference, mc_equal, twist_about, Atom, Factor, MappingClass};
use crate::surface::{CurveSpec, Elementary, ElementaryTable, Interval, SurfaceModel};
use crate::word::{AutWitness, CyclicWord, Letter, WordError};

pub const CATALOG_VERSION: u32 = 1;

const BUILTIN: &str = include_str!("../data/relations.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub name: String,
    pub expr: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub lhs: String,
    pub rhs: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// `find_triangle` must return a witness within `depth`.
    Triangle { depth: usize },
    /// Every elementary twist `t`: `(M−I)² = 0`, `tᵐ ≡ I` and `t ≢ I` mod `m`.
    Gamma { moduli: Vec<i64> },
    /// Each family commutes pairwise, every member acts nontrivially on the
    /// double cover, and the span bound is at least 1.
    Rank { families: Vec<Vec<String>> },
    /// `element` fixes the listed generators and the boundary word.
    Fixes { element: String, generators: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationFixture {
    pub id: String,
    pub surface: usize,
    #[serde(default)]
    pub bindings: Vec<Binding>,
    #[serde(default)]
    pub equations: Vec<Equation>,
    #[serde(default)]
    pub checks: Vec<Check>,
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    pub version: u32,
    pub fixtures: Vec<RelationFixture>,
}

impl Catalog {
    pub fn builtin() -> Catalog {
        Catalog::from_json(BUILTIN).expect("bundled catalog is valid")
    }

    pub fn from_json(src: &str) -> Result<Catalog> {
        let cat: Catalog = serde_json::from_str(src).map_err(|e| Error::Catalog(e.to_string()))?;
        if cat.version != CATALOG_VERSION {
            return Err(Error::Catalog(format!("unsupported version {}", cat.version)));
        }
        let mut seen = BTreeSet::new();
        for f in &cat.fixtures {
            if !seen.insert(f.id.as_str()) {
                return Err(Error::Catalog(format!("duplicate id {}", f.id)));
            }
            if f.equations.is_empty() && f.checks.is_empty() {
                return Err(Error::Catalog(format!("{} checks nothing", f.id)));
            }
        }
        Ok(cat)
    }

    pub fn load(path: &std::path::Path) -> Result<Catalog> {
        let src = std::fs::read_to_string(path).map_err(|e| Error::Catalog(format!("{}: {e}", path.display())))?;
        Catalog::from_json(&src)
    }

    pub fn filtered(&self, prefix: Option<&str>) -> Vec<&RelationFixture> {
        self.fixtures.iter().filter(|f| prefix.is_none_or(|p| f.id.starts_with(p))).collect()
    }

    pub fn get(&self, id: &str) -> Option<&RelationFixture> {
        self.fixtures.iter().find(|f| f.id == id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Overflow,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureResult {
    pub id: String,
    pub surface: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub values: Option<serde_json::Value>,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl FixtureResult {
    /// Everything but timing.
    pub fn same_outcome(&self, other: &FixtureResult) -> bool {
        self.id == other.id
            && self.status == other.status
            && self.detail == other.detail
            && self.values == other.values
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub version: u32,
    pub passed: usize,
    pub failed: usize,
    pub overflow: usize,
    pub errors: usize,
    pub fixtures: Vec<FixtureResult>,
}

impl SuiteReport {
    fn new(fixtures: Vec<FixtureResult>) -> Self {
        let count = |s| fixtures.iter().filter(|f| f.status == s).count();
        SuiteReport {
            version: CATALOG_VERSION,
            passed: count(Status::Pass),
            failed: count(Status::Fail),
            overflow: count(Status::Overflow),
            errors: count(Status::Error),
            fixtures,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.passed == self.fixtures.len()
    }

    pub fn same_outcome(&self, other: &SuiteReport) -> bool {
        self.fixtures.len() == other.fixtures.len()
            && self.fixtures.iter().zip(&other.fixtures).all(|(a, b)| a.same_outcome(b))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.fixtures {
            let tag = match f.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Overflow => "OVERFLOW",
                Status::Error => "ERROR",
            };
            let _ = write!(out, "{tag:<8} {:<40} N{},1 {:>9.2} ms", f.id, f.surface, f.elapsed.as_secs_f64() * 1e3);
            if let Some(d) = &f.detail {
                let _ = write!(out, "  {d}");
            }
            if let Some(v) = &f.values {
                let _ = write!(out, "  {v}");
            }
            out.push('\n');
        }
        let _ = write!(
            out,
            "{} fixtures: {} passed, {} failed, {} overflow, {} errors",
            self.fixtures.len(),
            self.passed,
            self.failed,
            self.overflow,
            self.errors
        );
        out
    }
}

enum Outcome {
    Pass(Option<serde_json::Value>),
    Fail(String),
}

fn clip(s: String) -> String {
    const MAX: usize = 96;
    if s.len() <= MAX {
        s
    } else {
        let cut = (0..=MAX).rev().find(|&i| s.is_char_boundary(i)).unwrap_or(0);
        format!("{}… ({} chars)", &s[..cut], s.len())
    }
}

fn check_equation(n: usize, eq: &Equation, table: &Arc<ElementaryTable>, env: &Bindings) -> Result<Option<String>> {
    let lhs = mapping_class(&eq.lhs, table, env)?;
    let rhs = mapping_class(&eq.rhs, table, env)?;
    equation_holds(n, &lhs, &rhs)
}

fn equation_holds(n: usize, lhs: &MappingClass, rhs: &MappingClass) -> Result<Option<String>> {
    Ok(first_difference(lhs, rhs)?.map(|g| {
        let l = lhs.witness().map(|w| w.forward().image(g).to_string()).unwrap_or_default();
        let r = rhs.witness().map(|w| w.forward().image(g).to_string()).unwrap_or_default();
        clip(format!("equation {n}: first difference at x{g}: {l} vs {r}"))
    }))
}

fn run_checks(fx: &RelationFixture, table: &Arc<ElementaryTable>, env: &Bindings) -> Result<Outcome> {
    for (n, eq) in fx.equations.iter().enumerate() {
        if let Some(d) = check_equation(n + 1, eq, table, env)? {
            return Ok(Outcome::Fail(d));
        }
    }
    let mut values = serde_json::Map::new();
    for check in &fx.checks {
        match check {
            Check::Triangle { depth } => match find_triangle(table, *depth)? {
                Some(t) => {
                    values.insert("triangle".into(), serde_json::json!(t.describe()));
                }
                None => return Ok(Outcome::Fail(format!("no triangle within depth {depth}"))),
            },
            Check::Gamma { moduli } => {
                if let Some(d) = gamma_check(table, moduli)? {
                    return Ok(Outcome::Fail(d));
                }
            }
            Check::Rank { families } => {
                let mut ranks = Vec::new();
                for fam in families {
                    let classes = fam.iter().map(|s| mapping_class(s, table, env)).collect::<Result<Vec<_>>>()?;
                    for (c, src) in classes.iter().zip(fam) {
                        if transvection_rank_lower_bound(std::slice::from_ref(c))? != 1 {
                            return Ok(Outcome::Fail(format!("{src} acts trivially on the double cover")));
                        }
                    }
                    let r = match transvection_rank_lower_bound(&classes) {
                        Ok(r) => r,
                        Err(Error::NonCommuting(a, b)) => {
                            return Ok(Outcome::Fail(format!("{} and {} do not commute", fam[a], fam[b])))
                        }
                        Err(e) => return Err(e),
                    };
                    if r < 1 {
                        return Ok(Outcome::Fail(format!("rank bound 0 for {fam:?}")));
                    }
                    ranks.push(serde_json::json!({"family": fam, "rank": r}));
                }
                values.insert("ranks".into(), serde_json::Value::Array(ranks));
            }
            Check::Fixes { element, generators } => {
                let mc = mapping_class(element, table, env)?;
                let f = mc.evaluate()?;
                let k = table.model().rank();
                for &g in generators {
                    if g == 0 || g > k {
                        return Err(Error::Catalog(format!("{}: generator x{g} out of range", fx.id)));
                    }
                    if f.image(g).letters() != [g as Letter] {
                        return Ok(Outcome::Fail(clip(format!("{element} moves x{g} to {}", f.image(g)))));
                    }
                }
                let d = table.model().boundary();
                if f.apply(&d)? != d {
                    return Ok(Outcome::Fail(format!("{element} moves the boundary word")));
                }
            }
        }
    }
    Ok(Outcome::Pass((!values.is_empty()).then_some(serde_json::Value::Object(values))))
}

fn gamma_check(table: &Arc<ElementaryTable>, moduli: &[i64]) -> Result<Option<String>> {
    for iv in table.model().two_sided_intervals() {
        let t = MappingClass::twist(table.clone(), iv.i, iv.j)?;
        let m = double_cover_h1(&t)?;
        let n = &m - &IntMatrix::identity(m.rows());
        if !(&n * &n).is_zero() {
            return Ok(Some(format!("T({},{}) is not unipotent", iv.i, iv.j)));
        }
        if m.determinant().abs() != 1 {
            return Ok(Some(format!("T({},{}) has determinant {}", iv.i, iv.j, m.determinant())));
        }
        for &p in moduli {
            if p < 2 {
                return Err(Error::InvalidModulus(p));
            }
            if m.congruent_identity(p) {
                return Ok(Some(format!("T({},{}) is already trivial mod {p}", iv.i, iv.j)));
            }
            if !double_cover_h1(&t.power(p))?.congruent_identity(p) {
                return Ok(Some(format!("T({},{})^{p} is not trivial mod {p}", iv.i, iv.j)));
            }
        }
    }
    Ok(None)
}

fn is_overflow(e: &Error) -> bool {
    matches!(e, Error::Word(WordError::Overflow { .. }))
}

/// Checks one fixture against `table` (the standard table when `None`).
pub fn verify_with(fx: &RelationFixture, table: Option<Arc<ElementaryTable>>) -> FixtureResult {
    let start = Instant::now();
    let outcome = (|| -> Result<Outcome> {
        let table = match table {
            Some(t) => t,
            None => ElementaryTable::for_crosscaps(fx.surface)?,
        };
        if table.model().crosscaps() != fx.surface {
            return Err(Error::ModelMismatch { left: fx.surface, right: table.model().crosscaps() });
        }
        let env = bind_all(fx.bindings.iter().map(|b| (b.name.as_str(), b.expr.as_str())), &table)?;
        run_checks(fx, &table, &env)
    })();
    let (status, detail, values) = match outcome {
        Ok(Outcome::Pass(v)) => (Status::Pass, None, v),
        Ok(Outcome::Fail(d)) => (Status::Fail, Some(d), None),
        Err(e) if is_overflow(&e) => (Status::Overflow, Some(e.to_string()), None),
        Err(e) => (Status::Error, Some(e.to_string()), None),
    };
    FixtureResult { id: fx.id.clone(), surface: fx.surface, status, detail, values, elapsed: start.elapsed() }
}

pub fn verify_relation(fx: &RelationFixture) -> FixtureResult {
    verify_with(fx, None)
}

pub fn run_suite(catalog: &Catalog, filter: Option<&str>, parallel: bool) -> SuiteReport {
    let fixtures = catalog.filtered(filter);
    let results = if parallel {
        fixtures.par_iter().map(|f| verify_relation(f)).collect()
    } else {
        fixtures.iter().map(|f| verify_relation(f)).collect()
    };
    SuiteReport::new(results)
}

/// Three circles whose twists satisfy `aba = bab`, `aca = cac` and
/// `c⁻¹bc⁻¹ = bc⁻¹b`.
#[derive(Clone, Debug)]
pub struct Triangle {
    pub a: CurveSpec,
    pub b: CurveSpec,
    pub c: CurveSpec,
}

impl Triangle {
    /// Recomputes all three relations from scratch.
    pub fn verify(&self, table: &Arc<ElementaryTable>) -> Result<bool> {
        let fresh = |c: &CurveSpec| -> Result<MappingClass> {
            let t = twist_about(table, c)?;
            Ok(MappingClass::from_factors(table.clone(), t.factors().to_vec()))
        };
        let (a, b, c) = (fresh(&self.a)?, fresh(&self.b)?, fresh(&self.c)?);
        let ci = c.inverse();
        Ok(braid_with(&a, &b)? && braid_with(&a, &c)? && braid_with(&ci, &b)?)
    }

    pub fn describe(&self) -> [String; 3] {
        [self.a.to_string(), self.b.to_string(), self.c.to_string()]
    }
}

fn pushing_atoms(table: &ElementaryTable) -> Vec<Factor> {
    table
        .entries()
        .map(|(e, _)| *e)
        .filter(|e| *e != Elementary::BoundaryTwist)
        .flat_map(|e| [Factor::new(Atom::Elementary(e), false), Factor::new(Atom::Elementary(e), true)])
        .collect()
}

/// Breadth-first over pushing words of length `≤ depth`, with `a`, `b` a
/// braiding pair of basic curves and `c` any pushed two-sided basic curve.
/// Every witness is re-verified before it is returned.
pub fn find_triangle(table: &Arc<ElementaryTable>, depth: usize) -> Result<Option<Triangle>> {
    let model = table.model();
    let basics = model.two_sided_intervals();
    let twists = basics.iter().map(|iv| MappingClass::twist(table.clone(), iv.i, iv.j)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    for (x, tx) in twists.iter().enumerate() {
        for (y, ty) in twists.iter().enumerate() {
            if x != y && braid_with(tx, ty)? {
                pairs.push((x, y));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(None);
    }
    let atoms = pushing_atoms(table);
    let mut seen: BTreeSet<Vec<Letter>> = BTreeSet::new();
    let mut frontier = vec![MappingClass::identity(table.clone())];
    for d in 0..=depth {
        let mut candidates = Vec::new();
        for by in &frontier {
            for iv in &basics {
                let c = CurveSpec::Basic(*iv).pushed(by.clone());
                let key = CyclicWord::new(&c.curve_word(&model)?).unoriented_key();
                if seen.insert(key) {
                    candidates.push(c);
                }
            }
        }
        for c in &candidates {
            let tc = twist_about(table, c)?;
            for &(x, y) in &pairs {
                let (ta, tb) = (&twists[x], &twists[y]);
                if braid_with(ta, &tc)? && braid_with(&tc.inverse(), tb)? {
                    let tri = Triangle { a: CurveSpec::Basic(basics[x]), b: CurveSpec::Basic(basics[y]), c: simplify(c) };
                    if tri.verify(table)? {
                        return Ok(Some(tri));
                    }
                }
            }
        }
        if d == depth {
            break;
        }
        frontier = frontier
            .iter()
            .flat_map(|w| atoms.iter().map(move |a| MappingClass::from_factors(w.table().clone(), [vec![a.clone()], w.factors().to_vec()].concat())))
            .collect();
    }
    Ok(None)
}

/// `Pushed(c, id)` becomes `c`.
fn simplify(c: &CurveSpec) -> CurveSpec {
    match c {
        CurveSpec::Pushed { base, by } if by.is_empty() => simplify(base),
        other => other.clone(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationResult {
    pub id: String,
    pub mutants: usize,
    /// Mutants that still passed; empty means the fixture is sensitive.
    pub survivors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl MutationResult {
    pub fn killed_all(&self) -> bool {
        self.error.is_none() && self.mutants > 0 && self.survivors.is_empty()
    }
}

fn corrupted(table: &ElementaryTable, victim: Interval) -> Arc<ElementaryTable> {
    let mut t = table.clone();
    t.replace(Elementary::Twist(victim), AutWitness::identity(table.model().rank()));
    Arc::new(t)
}

/// Equation fixtures: delete each factor of each left side in turn.
/// Check-only fixtures: replace one elementary twist by the identity.
pub fn mutate_fixture(fx: &RelationFixture) -> MutationResult {
    let mut res = MutationResult { id: fx.id.clone(), mutants: 0, survivors: Vec::new(), error: None };
    let run = |res: &mut MutationResult| -> Result<()> {
        let table = ElementaryTable::for_crosscaps(fx.surface)?;
        if !fx.equations.is_empty() {
            let env = bind_all(fx.bindings.iter().map(|b| (b.name.as_str(), b.expr.as_str())), &table)?;
            for (n, eq) in fx.equations.iter().enumerate() {
                let lhs = mapping_class(&eq.lhs, &table, &env)?;
                let rhs = mapping_class(&eq.rhs, &table, &env)?;
                for pos in 0..lhs.len() {
                    res.mutants += 1;
                    let mutant = lhs.without_factor(pos);
                    match mc_equal(&mutant, &rhs) {
                        Ok(false) => {}
                        Err(e) if is_overflow(&e) => {}
                        Ok(true) => res.survivors.push(format!("equation {}: drop factor {pos}", n + 1)),
                        Err(e) => return Err(e),
                    }
                }
            }
        } else {
            let victim = if fx.checks.iter().any(|c| matches!(c, Check::Triangle { .. })) {
                Interval { i: 2, j: 3 }
            } else {
                Interval { i: 1, j: 2 }
            };
            res.mutants += 1;
            let r = verify_with(fx, Some(corrupted(&ElementaryTable::standard(SurfaceModel::new(fx.surface)?), victim)));
            if r.status == Status::Pass {
                res.survivors.push(format!("T({},{}) replaced by identity", victim.i, victim.j));
            }
        }
        Ok(())
    };
    if let Err(e) = run(&mut res) {
        res.error = Some(e.to_string());
    }
    res
}

pub fn mutation_sweep(catalog: &Catalog, filter: Option<&str>) -> Vec<MutationResult> {
    catalog.filtered(filter).par_iter().map(|f| mutate_fixture(f)).collect()
}

/// Ranks for every family, keyed by the family's display form.
pub fn family_ranks(report: &FixtureResult) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    if let Some(arr) = report.values.as_ref().and_then(|v| v.get("ranks")).and_then(|v| v.as_array()) {
        for item in arr {
            let fam = item["family"].as_array().map(|a| a.iter().filter_map(|s| s.as_str()).collect::<Vec<_>>().join(" "));
            if let (Some(f), Some(r)) = (fam, item["rank"].as_u64()) {
                out.insert(f, r as usize);
            }
        }
    }
    out
}
