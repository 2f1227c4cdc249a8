//! Matrices over the coefficient ring: flat conjugation, the doubled complex
//! representation, rank factorization and generator/mode classification.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::cmat::{self, CMat};
use crate::dring::{DNum, ModeInvariants};
use crate::error::{Error, Result};

/// Dense row-major matrix with ring-valued entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DMatrix {
    rows: usize,
    cols: usize,
    data: Vec<DNum>,
}

impl DMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DMatrix {
            rows,
            cols,
            data: vec![DNum::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            m[(j, j)] = DNum::E;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> DNum) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DMatrix { rows, cols, data }
    }

    pub fn from_row_slice(rows: usize, cols: usize, entries: &[DNum]) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must match shape");
        DMatrix {
            rows,
            cols,
            data: entries.to_vec(),
        }
    }

    /// 1x1 matrix holding a single ring element.
    pub fn scalar(p: DNum) -> Self {
        DMatrix::from_row_slice(1, 1, &[p])
    }

    pub fn diagonal(entries: &[DNum]) -> Self {
        let mut m = DMatrix::zeros(entries.len(), entries.len());
        for (j, p) in entries.iter().enumerate() {
            m[(j, j)] = *p;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Flat conjugate: transpose with entrywise flat, `J^-1 A^dag J` in
    /// doubled form.
    pub fn flat(&self) -> Self {
        DMatrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)].flat())
    }

    pub fn scale(&self, x: f64) -> Self {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)].scale(x))
    }

    pub fn scale_left(&self, p: DNum) -> Self {
        DMatrix::from_fn(self.rows, self.cols, |r, c| p * self[(r, c)])
    }

    pub fn scale_right(&self, p: DNum) -> Self {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] * p)
    }

    /// Frobenius norm of the doubled complex form.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|p| p.norm_sq()).sum::<f64>().sqrt()
    }

    pub fn approx_eq(&self, other: &DMatrix, tol: f64) -> bool {
        self.shape() == other.shape()
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(p, q)| p.approx_eq(q, tol))
    }

    /// Interleaves the 2x2 matrix forms into a `2 rows x 2 cols` complex
    /// matrix.
    pub fn to_doubled(&self) -> CMat {
        let mut m = CMat::zeros(2 * self.rows, 2 * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let b = self[(r, c)].to_matrix();
                m[(2 * r, 2 * c)] = b[(0, 0)];
                m[(2 * r, 2 * c + 1)] = b[(0, 1)];
                m[(2 * r + 1, 2 * c)] = b[(1, 0)];
                m[(2 * r + 1, 2 * c + 1)] = b[(1, 1)];
            }
        }
        m
    }

    /// Rebuilds from a doubled complex matrix, verifying the block structure.
    pub fn from_doubled(m: &CMat) -> Result<Self> {
        let defect = doubled_defect(m)?;
        let scale = m.norm().max(1.0);
        if defect > 1e-8 * scale {
            return Err(Error::NotDoubledForm { defect });
        }
        Ok(Self::from_doubled_symmetrized(m))
    }

    /// Like [`from_doubled`](Self::from_doubled) but averages away rounding
    /// asymmetry instead of checking it. Only for matrices produced by
    /// structure-preserving operations.
    pub(crate) fn from_doubled_symmetrized(m: &CMat) -> Self {
        let rows = m.nrows() / 2;
        let cols = m.ncols() / 2;
        DMatrix::from_fn(rows, cols, |r, c| {
            let alpha = 0.5 * (m[(2 * r, 2 * c)] + m[(2 * r + 1, 2 * c + 1)].conj());
            let beta = 0.5 * (m[(2 * r, 2 * c + 1)] + m[(2 * r + 1, 2 * c)].conj());
            DNum::from_complex(alpha, beta)
        })
    }

    /// Builds the matrix with entry `(j, k) = Delta((A-)_jk, (A+)_jk)`,
    /// the permutation-equivalent of the stacked block convention.
    pub fn from_blockform(a_minus: &CMat, a_plus: &CMat) -> Result<Self> {
        if a_minus.shape() != a_plus.shape() {
            return Err(Error::ShapeMismatch {
                context: "from_blockform",
                expected: format!("{:?}", a_minus.shape()),
                got: format!("{:?}", a_plus.shape()),
            });
        }
        Ok(DMatrix::from_fn(a_minus.nrows(), a_minus.ncols(), |r, c| {
            DNum::from_complex(a_minus[(r, c)], a_plus[(r, c)])
        }))
    }

    /// Splits into the `(A-, A+)` complex pair (inverse of
    /// [`from_blockform`](Self::from_blockform)).
    pub fn to_blockform(&self) -> (CMat, CMat) {
        let minus = CMat::from_fn(self.rows, self.cols, |r, c| self[(r, c)].alpha());
        let plus = CMat::from_fn(self.rows, self.cols, |r, c| self[(r, c)].beta());
        (minus, plus)
    }

    /// `|A\flat + A| <= tol * max(1, |A|)`.
    pub fn is_skew_flat_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (&self.flat() + self).norm() <= tol * self.norm().max(1.0)
    }

    /// `|A\flat - A| <= tol * max(1, |A|)`.
    pub fn is_flat_hermitian(&self, tol: f64) -> bool {
        self.is_square() && (&self.flat() - self).norm() <= tol * self.norm().max(1.0)
    }

    /// `|A\flat A - I| <= tol`.
    pub fn is_flat_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&(&self.flat() * self) - &DMatrix::identity(self.rows)).norm() <= tol
    }

    /// Unitarity in the plain complex sense of the doubled form.
    pub fn is_complex_unitary(&self, tol: f64) -> bool {
        if !self.is_square() {
            return false;
        }
        let d = self.to_doubled();
        (d.adjoint() * &d - CMat::identity(2 * self.rows, 2 * self.rows)).norm() <= tol
    }

    /// Matrix inverse computed on the doubled form, gated on conditioning.
    pub fn try_inverse(&self, max_cond: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::ShapeMismatch {
                context: "inverse",
                expected: "square".into(),
                got: format!("{}x{}", self.rows, self.cols),
            });
        }
        let inv = cmat::inv_gated(&self.to_doubled(), max_cond)?;
        Ok(Self::from_doubled_symmetrized(&inv))
    }

    /// `exp(self * t)` via the doubled form.
    pub fn exp(&self, t: f64) -> Self {
        let d = self.to_doubled() * Complex64::new(t, 0.0);
        Self::from_doubled_symmetrized(&d.exp())
    }

    pub fn submatrix(&self, r0: usize, c0: usize, nrows: usize, ncols: usize) -> Self {
        DMatrix::from_fn(nrows, ncols, |r, c| self[(r0 + r, c0 + c)])
    }

    pub fn hcat(blocks: &[&DMatrix]) -> Self {
        assert!(!blocks.is_empty());
        let rows = blocks[0].rows;
        assert!(blocks.iter().all(|b| b.rows == rows), "row counts differ");
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = DMatrix::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            for r in 0..rows {
                for c in 0..b.cols {
                    m[(r, off + c)] = b[(r, c)];
                }
            }
            off += b.cols;
        }
        m
    }

    pub fn vcat(blocks: &[&DMatrix]) -> Self {
        assert!(!blocks.is_empty());
        let cols = blocks[0].cols;
        assert!(blocks.iter().all(|b| b.cols == cols), "column counts differ");
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut m = DMatrix::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..cols {
                    m[(off + r, c)] = b[(r, c)];
                }
            }
            off += b.rows;
        }
        m
    }

    pub fn block2x2(a: &DMatrix, b: &DMatrix, c: &DMatrix, d: &DMatrix) -> Self {
        DMatrix::vcat(&[&DMatrix::hcat(&[a, b]), &DMatrix::hcat(&[c, d])])
    }

    pub fn block_diag(blocks: &[&DMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = DMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    m[(r0 + r, c0 + c)] = b[(r, c)];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }
}

/// Structural defect of a complex matrix against the doubled-block form.
fn doubled_defect(m: &CMat) -> Result<f64> {
    if !m.nrows().is_multiple_of(2) || !m.ncols().is_multiple_of(2) {
        return Err(Error::NotDoubledForm { defect: f64::INFINITY });
    }
    let mut defect = 0.0_f64;
    for r in 0..m.nrows() / 2 {
        for c in 0..m.ncols() / 2 {
            let d1 = (m[(2 * r, 2 * c)].conj() - m[(2 * r + 1, 2 * c + 1)]).norm_sqr();
            let d2 = (m[(2 * r, 2 * c + 1)].conj() - m[(2 * r + 1, 2 * c)]).norm_sqr();
            defect += d1 + d2;
        }
    }
    Ok(defect.sqrt())
}

impl std::ops::Index<(usize, usize)> for DMatrix {
    type Output = DNum;
    fn index(&self, (r, c): (usize, usize)) -> &DNum {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut DNum {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &DMatrix {
    type Output = DMatrix;
    fn add(self, other: &DMatrix) -> DMatrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in sum");
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] + other[(r, c)])
    }
}

impl Sub for &DMatrix {
    type Output = DMatrix;
    fn sub(self, other: &DMatrix) -> DMatrix {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in difference");
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)] - other[(r, c)])
    }
}

impl Neg for &DMatrix {
    type Output = DMatrix;
    fn neg(self) -> DMatrix {
        DMatrix::from_fn(self.rows, self.cols, |r, c| -self[(r, c)])
    }
}

impl Mul for &DMatrix {
    type Output = DMatrix;
    fn mul(self, other: &DMatrix) -> DMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        DMatrix::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = DNum::ZERO;
            for k in 0..self.cols {
                acc = acc + self[(r, k)] * other[(k, c)];
            }
            acc
        })
    }
}

impl fmt::Display for DMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for r in 0..self.rows {
            if r > 0 {
                write!(f, " ; ")?;
            }
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(r, c)])?;
            }
        }
        write!(f, "]")
    }
}

/// Skew flat-Hermitian generator of a closed linear network.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    matrix: DMatrix,
}

impl Generator {
    /// Validates `P\flat = -P` to `1e-12 * max(1, |P|)`.
    pub fn new(matrix: DMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::ShapeMismatch {
                context: "generator",
                expected: "square".into(),
                got: format!("{}x{}", matrix.rows(), matrix.cols()),
            });
        }
        if !matrix.is_skew_flat_hermitian(1e-12) {
            return Err(Error::ShapeMismatch {
                context: "generator",
                expected: "skew flat-Hermitian".into(),
                got: "matrix with P\u{266d} != -P".into(),
            });
        }
        Ok(Generator { matrix })
    }

    pub fn modes(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix {
        self.matrix
    }
}

/// Result of the rank factorization `C = E * D\flat`.
#[derive(Debug, Clone)]
pub struct ColumnDecomposition {
    pub e: DMatrix,
    pub d: DMatrix,
    pub rank: usize,
}

/// Rank factorization by Gaussian elimination with invertible ring pivots.
///
/// Each round picks the remaining entry with the largest `|det|`, peels off
/// the rank-one update `col * pivot^-1 * row`, and records the pair. A
/// nonzero residual whose entries are all zero divisors cannot be eliminated
/// and raises [`Error::DegenerateCoupling`].
pub fn d_column_decompose(c: &DMatrix) -> Result<ColumnDecomposition> {
    let (m, n) = c.shape();
    let scale = c.norm().max(1.0);
    let zero_tol = 1e-12 * scale;
    let det_tol = 1e-12 * (scale * scale).max(1.0);

    let mut r = c.clone();
    let mut e_cols: Vec<DMatrix> = Vec::new();
    let mut f_rows: Vec<DMatrix> = Vec::new();

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        let mut residual_sq = 0.0;
        for i in 0..m {
            for j in 0..n {
                let p = r[(i, j)];
                residual_sq += p.norm_sq();
                let det = p.det().abs();
                if best.map(|(_, _, d)| det > d).unwrap_or(true) {
                    best = Some((i, j, det));
                }
            }
        }
        if residual_sq.sqrt() <= zero_tol {
            break;
        }
        let (pi, pj, det) = best.expect("nonempty matrix");
        if det <= det_tol {
            return Err(Error::DegenerateCoupling { row: pi, col: pj });
        }

        let pivot_inv = r[(pi, pj)].inv()?;
        let col = DMatrix::from_fn(m, 1, |i, _| r[(i, pj)]);
        let row = DMatrix::from_fn(1, n, |_, j| pivot_inv * r[(pi, j)]);
        r = &r - &(&col * &row);
        e_cols.push(col);
        f_rows.push(row);
    }

    let rank = e_cols.len();
    let e = if rank == 0 {
        DMatrix::zeros(m, 0)
    } else {
        DMatrix::hcat(&e_cols.iter().collect::<Vec<_>>())
    };
    let f = if rank == 0 {
        DMatrix::zeros(0, n)
    } else {
        DMatrix::vcat(&f_rows.iter().collect::<Vec<_>>())
    };
    Ok(ColumnDecomposition { e, d: f.flat(), rank })
}

/// Per-mode invariants extracted from the doubled-form spectrum.
///
/// Eigenvalues are grouped into pairs; each pair `(l1, l2)` yields
/// `a = Re((l1 + l2) / 2)` and `C = ((l1 - l2) / 2)^2`.
///
/// For a skew flat-Hermitian input the spectrum obeys `l <-> -conj(l)` and
/// every class has `a = 0`, so eigenvalues off the axes are paired with
/// their reflection `-conj(l)` (shared imaginary part); otherwise complex
/// eigenvalues are matched with their conjugates. Real leftovers are paired
/// symmetrically about zero when possible, else by the unique pairing with
/// pairwise-distinct means; anything else is reported as ambiguous.
pub fn classify_modes(p: &DMatrix) -> Result<Vec<ModeInvariants>> {
    if !p.is_square() {
        return Err(Error::ShapeMismatch {
            context: "classify_modes",
            expected: "square".into(),
            got: format!("{}x{}", p.rows(), p.cols()),
        });
    }
    let skew = p.is_skew_flat_hermitian(1e-10);
    let eigs = cmat::eigenvalues(&p.to_doubled())?;
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let tol = 1e-8 * scale;

    let mut pairs: Vec<(Complex64, Complex64)> = Vec::new();
    let mut complex_eigs: Vec<Complex64> = Vec::new();
    let mut reals: Vec<f64> = Vec::new();
    for z in &eigs {
        if z.im.abs() > tol {
            complex_eigs.push(*z);
        } else {
            reals.push(z.re);
        }
    }

    if skew {
        // Off-axis quadruples pair across the imaginary axis (a = 0).
        let mut off_axis: Vec<Complex64> = Vec::new();
        let mut axis: Vec<Complex64> = Vec::new();
        for z in complex_eigs {
            if z.re.abs() > tol {
                off_axis.push(z);
            } else {
                axis.push(z);
            }
        }
        let (pos, neg): (Vec<_>, Vec<_>) = off_axis.into_iter().partition(|z| z.re > 0.0);
        greedy_match(&pos, &neg, scale, |z| -z.conj(), &mut pairs)?;
        let (pos, neg): (Vec<_>, Vec<_>) = axis.into_iter().partition(|z| z.im > 0.0);
        greedy_match(&pos, &neg, scale, |z| z.conj(), &mut pairs)?;
    } else {
        let (pos, neg): (Vec<_>, Vec<_>) = complex_eigs.into_iter().partition(|z| z.im > 0.0);
        greedy_match(&pos, &neg, scale, |z| z.conj(), &mut pairs)?;
    }

    pair_reals(&reals, tol, scale, &mut pairs)?;

    let mut modes: Vec<ModeInvariants> = pairs
        .iter()
        .map(|(l1, l2)| {
            let mean = 0.5 * (l1 + l2);
            let half = 0.5 * (l1 - l2);
            let csq = half * half;
            ModeInvariants { a: mean.re, c: csq.re }
        })
        .collect();
    modes.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap().then(x.c.partial_cmp(&y.c).unwrap()));
    Ok(modes)
}

/// Pairs each element of `pos` with its nearest unused image under `f`
/// among `neg`.
fn greedy_match(
    pos: &[Complex64],
    neg: &[Complex64],
    scale: f64,
    f: impl Fn(Complex64) -> Complex64,
    pairs: &mut Vec<(Complex64, Complex64)>,
) -> Result<()> {
    if pos.len() != neg.len() {
        return Err(Error::AmbiguousPairing(
            "spectrum halves have different sizes".into(),
        ));
    }
    let mut used = vec![false; neg.len()];
    for z in pos {
        let target = f(*z);
        let mut best: Option<(usize, f64)> = None;
        for (idx, w) in neg.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let d = (target - w).norm();
            if best.map(|(_, bd)| d < bd).unwrap_or(true) {
                best = Some((idx, d));
            }
        }
        let (idx, dist) =
            best.ok_or_else(|| Error::AmbiguousPairing("no partner available".into()))?;
        if dist > 1e-6 * scale {
            return Err(Error::AmbiguousPairing(format!(
                "eigenvalue {z} has no partner (closest at distance {dist:.3e})"
            )));
        }
        used[idx] = true;
        pairs.push((*z, neg[idx]));
    }
    Ok(())
}

fn pair_reals(
    reals: &[f64],
    tol: f64,
    scale: f64,
    pairs: &mut Vec<(Complex64, Complex64)>,
) -> Result<()> {
    let as_pair = |x: f64, y: f64| (Complex64::new(x, 0.0), Complex64::new(y, 0.0));
    if reals.is_empty() {
        return Ok(());
    }
    if !reals.len().is_multiple_of(2) {
        return Err(Error::AmbiguousPairing("odd number of real eigenvalues".into()));
    }
    if reals.len() == 2 {
        pairs.push(as_pair(reals[0], reals[1]));
        return Ok(());
    }

    // Symmetric layout r <-> -r (means all zero), as produced by skew
    // flat-Hermitian generators with several squeezed modes.
    let mut sorted = reals.to_vec();
    sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let symmetric = (0..sorted.len() / 2)
        .all(|i| (sorted[i] + sorted[sorted.len() - 1 - i]).abs() <= 1e-6 * scale);
    if symmetric {
        for i in 0..sorted.len() / 2 {
            pairs.push(as_pair(sorted[sorted.len() - 1 - i], sorted[i]));
        }
        return Ok(());
    }

    // Otherwise search for the unique perfect matching whose pair means are
    // pairwise distinct.
    let mut valid: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    let mut items = sorted.clone();
    enumerate_matchings(&mut items, &mut current, &mut valid, tol.max(1e-9 * scale));
    match valid.len() {
        1 => {
            for (x, y) in &valid[0] {
                pairs.push(as_pair(*x, *y));
            }
            Ok(())
        }
        0 => Err(Error::AmbiguousPairing(
            "no real-eigenvalue pairing with distinct pair means".into(),
        )),
        n => Err(Error::AmbiguousPairing(format!(
            "{n} real-eigenvalue pairings with distinct pair means"
        ))),
    }
}

fn enumerate_matchings(
    items: &mut Vec<f64>,
    current: &mut Vec<(f64, f64)>,
    valid: &mut Vec<Vec<(f64, f64)>>,
    mean_tol: f64,
) {
    if items.is_empty() {
        let means: Vec<f64> = current.iter().map(|(x, y)| 0.5 * (x + y)).collect();
        let distinct = means
            .iter()
            .enumerate()
            .all(|(i, m)| means.iter().skip(i + 1).all(|m2| (m - m2).abs() > mean_tol));
        if distinct {
            valid.push(current.clone());
        }
        return;
    }
    let first = items.remove(0);
    for idx in 0..items.len() {
        let partner = items.remove(idx);
        current.push((first, partner));
        enumerate_matchings(items, current, valid, mean_tol);
        current.pop();
        items.insert(idx, partner);
    }
    items.insert(0, first);
}
