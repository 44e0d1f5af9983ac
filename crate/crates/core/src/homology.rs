//! Integer shadows of mapping classes: the action on `H₁` of the surface and
//! of its orientation double cover, congruence tests mod `m`, and rank
//! lower bounds for abelian twist groups.
//!
//! The double cover corresponds to the kernel of the orientation character.
//! With Schreier transversal `{1, x1}` its free basis is, in order,
//! `x1·x1, x1·x2, …, x1·xk, x2·x1⁻¹, …, xk·x1⁻¹` (rank `2k−1`).

use std::fmt;
use std::ops::{Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mapclass::{commutes, MappingClass};
use crate::surface::OrientationCharacter;
use crate::word::{FreeMap, Letter, Word};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<Vec<i64>>", try_from = "Vec<Vec<i64>>")]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> std::result::Result<Self, String> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err("ragged matrix rows".into());
        }
        Ok(IntMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.cols.max(1)).take(self.rows).map(<[i64]>::to_vec).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.rows)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    /// Entries reduced into `0..m`.
    pub fn reduce_mod(&self, m: i64) -> IntMatrix {
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.rem_euclid(m)).collect() }
    }

    pub fn congruent_identity(&self, m: i64) -> bool {
        self.is_square() && self.reduce_mod(m) == Self::identity(self.rows).reduce_mod(m)
    }

    pub fn pow(&self, n: u32) -> IntMatrix {
        let mut acc = Self::identity(self.rows);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    fn as_i128_rows(&self) -> Vec<Vec<i128>> {
        self.to_rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect()
    }

    /// Bareiss fraction-free determinant.
    pub fn determinant(&self) -> i128 {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.as_i128_rows();
        let mut sign = 1;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&r| a[r][k] != 0) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        if n == 0 {
            1
        } else {
            sign * a[n - 1][n - 1]
        }
    }

    /// Rank over ℚ by fraction-free elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.as_i128_rows();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        let mut prev = 1i128;
        for c in 0..cols {
            let Some(p) = (rank..rows).find(|&r| a[r][c] != 0) else { continue };
            a.swap(rank, p);
            for i in rank + 1..rows {
                for j in c + 1..cols {
                    a[i][j] = (a[i][j] * a[rank][c] - a[i][c] * a[rank][j]) / prev;
                }
                a[i][c] = 0;
            }
            prev = a[rank][c];
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = i64;
    fn index(&self, (r, c): (usize, usize)) -> &i64 {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut i64 {
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self[(i, l)];
                if a == 0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(l, j)];
                }
            }
        }
        out
    }
}

impl Sub for &IntMatrix {
    type Output = IntMatrix;
    fn sub(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "dimension mismatch");
        IntMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl From<IntMatrix> for Vec<Vec<i64>> {
    fn from(m: IntMatrix) -> Self {
        m.to_rows()
    }
}

impl TryFrom<Vec<Vec<i64>>> for IntMatrix {
    type Error = String;
    fn try_from(rows: Vec<Vec<i64>>) -> std::result::Result<Self, String> {
        IntMatrix::from_rows(rows)
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.data.iter().map(|x| x.to_string().len()).max().unwrap_or(1);
        for (n, row) in self.to_rows().iter().enumerate() {
            if n > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>width$}")).collect();
            write!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Column `c` holds the exponent sums of the image of generator `c+1`.
pub fn abelianize(f: &FreeMap) -> IntMatrix {
    let n = f.rank();
    let mut m = IntMatrix::zeros(n, n);
    for (c, img) in f.images().iter().enumerate() {
        for &l in img.letters() {
            m[(l.unsigned_abs() as usize - 1, c)] += l.signum() as i64;
        }
    }
    m
}

pub fn preserves_character(f: &FreeMap, chi: &OrientationCharacter) -> bool {
    f.images().iter().enumerate().all(|(n, img)| chi.eval(img) == chi.values()[n])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DoubleCoverBasis {
    k: usize,
    words: Vec<Word>,
}

impl DoubleCoverBasis {
    pub fn new(k: usize) -> Self {
        let x = |i: usize| i as Letter;
        let mut raw: Vec<Vec<Letter>> = (1..=k).map(|i| vec![1, x(i)]).collect();
        raw.extend((2..=k).map(|i| vec![x(i), -1]));
        let words = raw.into_iter().map(|r| Word::reduce(k, r).expect("in range")).collect();
        DoubleCoverBasis { k, words }
    }

    pub fn rank(&self) -> usize {
        2 * self.k - 1
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    /// Basis index (1-based) of `x1·x_i`.
    fn upper(&self, i: usize) -> Letter {
        i as Letter
    }

    /// Basis index (1-based) of `x_i·x1⁻¹`, `i ≥ 2`.
    fn lower(&self, i: usize) -> Letter {
        (self.k + i - 1) as Letter
    }

    /// Reidemeister–Schreier rewriting of a kernel word into the basis.
    pub fn rewrite(&self, w: &Word) -> Result<Word> {
        if w.rank() != self.k {
            return Err(crate::word::WordError::RankMismatch { left: self.k, right: w.rank() }.into());
        }
        let mut out = Vec::with_capacity(w.len());
        let mut odd = false;
        for &l in w.letters() {
            let i = l.unsigned_abs() as usize;
            match (l > 0, odd) {
                (true, false) => {
                    if i != 1 {
                        out.push(self.lower(i));
                    }
                }
                (true, true) => out.push(self.upper(i)),
                (false, false) => out.push(-self.upper(i)),
                (false, true) => {
                    if i != 1 {
                        out.push(-self.lower(i));
                    }
                }
            }
            odd = !odd;
        }
        if odd {
            return Err(Error::CharacterNotPreserved);
        }
        Ok(Word::reduce(self.rank(), out)?)
    }
}

/// The restriction of `f` to the kernel of the orientation character.
pub fn double_cover_lift(f: &FreeMap) -> Result<FreeMap> {
    let k = f.rank();
    if !preserves_character(f, &OrientationCharacter::new(vec![1; k])) {
        return Err(Error::CharacterNotPreserved);
    }
    let basis = DoubleCoverBasis::new(k);
    let images = basis.words().iter().map(|b| basis.rewrite(&f.apply(b)?)).collect::<Result<Vec<_>>>()?;
    Ok(FreeMap::new(images)?)
}

pub fn double_cover_h1(mc: &MappingClass) -> Result<IntMatrix> {
    Ok(abelianize(&double_cover_lift(mc.witness()?.forward())?))
}

pub fn gamma_prime_member(mc: &MappingClass, m: i64) -> Result<bool> {
    if m < 2 {
        return Err(Error::InvalidModulus(m));
    }
    Ok(double_cover_h1(mc)?.congruent_identity(m))
}

/// `rank_ℚ span{M_i − I}`; a lower bound for the rank of the abelian group
/// the classes generate.
pub fn transvection_rank_lower_bound(classes: &[MappingClass]) -> Result<usize> {
    for (a, x) in classes.iter().enumerate() {
        for (b, y) in classes.iter().enumerate().skip(a + 1) {
            if !commutes(x, y)? {
                return Err(Error::NonCommuting(a, b));
            }
        }
    }
    let mut rows = Vec::with_capacity(classes.len());
    for c in classes {
        let m = double_cover_h1(c)?;
        let d = &m - &IntMatrix::identity(m.rows());
        rows.push(d.to_rows().concat());
    }
    if rows.is_empty() {
        return Ok(0);
    }
    Ok(IntMatrix::from_rows(rows).map_err(Error::Catalog)?.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::ElementaryTable;

    fn mat(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn abelianize_examples() {
        assert!(abelianize(&FreeMap::identity(3)).is_identity());
        let f = FreeMap::from_raw(2, vec![vec![1, 2], vec![2]]).unwrap();
        assert_eq!(abelianize(&f), mat(&[&[1, 0], &[1, 1]]));
    }

    #[test]
    fn determinant_and_rank() {
        assert_eq!(mat(&[&[2, 1], &[1, 1]]).determinant(), 1);
        assert_eq!(mat(&[&[0, 1], &[1, 0]]).determinant(), -1);
        assert_eq!(mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).determinant(), 0);
        assert_eq!(mat(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).rank(), 2);
        assert_eq!(mat(&[&[0, 0], &[0, 0]]).rank(), 0);
        assert_eq!(mat(&[&[0, 2, 4], &[0, 1, 2]]).rank(), 1);
        assert_eq!(IntMatrix::identity(4).rank(), 4);
    }

    #[test]
    fn character_examples() {
        let t = ElementaryTable::standard(crate::surface::SurfaceModel::new(3).unwrap());
        let chi = OrientationCharacter::new(vec![1, 1, 1]);
        for (_, w) in t.entries() {
            assert!(preserves_character(w.forward(), &chi));
        }
        let f = FreeMap::from_raw(2, vec![vec![1, 2], vec![2]]).unwrap();
        assert!(!preserves_character(&f, &OrientationCharacter::new(vec![1, 1])));
        assert!(double_cover_lift(&f).is_err());
    }

    #[test]
    fn rewriting() {
        let b = DoubleCoverBasis::new(3);
        assert_eq!(b.rank(), 5);
        for (n, w) in b.words().iter().enumerate() {
            assert_eq!(b.rewrite(w).unwrap().letters(), &[n as Letter + 1]);
        }
        assert!(b.rewrite(&Word::parse(3, "x2").unwrap()).is_err());
        assert!(double_cover_lift(&FreeMap::identity(3)).unwrap().is_identity());
    }

    #[test]
    fn json_rows() {
        let m = mat(&[&[1, 0], &[3, 1]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[[1,0],[3,1]]");
        assert_eq!(serde_json::from_str::<IntMatrix>(&s).unwrap(), m);
    }
}
