//! Banded LU with partial pivoting and a bordered solver built on top of it.
//!
//! The travelling-wave Jacobians are banded (finite differences plus shifts of
//! bounded length) apart from a handful of dense rows and columns: the wave
//! speed column, phase conditions and normalization rows.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Square matrix with `kl` sub- and `ku` super-diagonals.
///
/// Row `i` stores columns `i - kl ..= i + kl + ku`; the extra `kl` columns hold
/// the fill produced by row interchanges during factorization.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self { n, kl, ku, width, data: vec![0.0; n * width] }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    pub fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.kl >= i && j <= i + self.ku
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl >= i && j <= i + self.kl + self.ku {
            self.data[self.idx(i, j)]
        } else {
            0.0
        }
    }

    /// Adds `v` to entry `(i, j)`; panics outside the declared band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band kl={} ku={}", self.kl, self.ku);
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn clear_row(&mut self, i: usize) {
        let s = i * self.width;
        self.data[s..s + self.width].iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.data[self.idx(i, j)] * x[j]).sum()
            })
            .collect()
    }

    /// `x^T A`.
    pub fn vec_mul(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                out[j] += x[i] * self.data[self.idx(i, j)];
            }
        }
        out
    }

    /// Row `i` restricted to the declared band, as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> Vec<(usize, f64)> {
        let lo = i.saturating_sub(self.kl);
        let hi = (i + self.ku).min(self.n - 1);
        (lo..=hi).map(|j| (j, self.data[self.idx(i, j)])).filter(|(_, v)| *v != 0.0).collect()
    }

    pub fn transpose(&self) -> BandMatrix {
        let mut t = BandMatrix::zeros(self.n, self.ku, self.kl);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.set(j, i, v);
            }
        }
        t
    }

    pub fn factor(mut self) -> Result<BandLu> {
        let n = self.n;
        let kl = self.kl;
        let reach = kl + self.ku;
        let mut piv = vec![0usize; n];
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            if best == 0.0 {
                return Err(Error::Singular("zero pivot in banded LU"));
            }
            let jmax = (k + reach).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= l * kj;
                    }
                }
            }
        }
        let min_pivot = (0..n).map(|k| self.data[self.idx(k, k)].abs()).fold(f64::INFINITY, f64::min);
        Ok(BandLu { m: self, piv, min_pivot_ratio: min_pivot / scale })
    }
}

/// Factorization `P A = L U` in band storage.
#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
    min_pivot_ratio: f64,
}

impl BandLu {
    pub fn size(&self) -> usize {
        self.m.n
    }

    /// Smallest |U_kk| relative to the largest matrix entry.
    pub fn min_pivot_ratio(&self) -> f64 {
        self.min_pivot_ratio
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = &self.m;
        let n = m.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for i in k + 1..=(k + m.kl).min(n - 1) {
                    b[i] -= m.data[m.idx(i, k)] * bk;
                }
            }
        }
        let reach = m.kl + m.ku;
        for k in (0..n).rev() {
            let mut s = b[k];
            for j in k + 1..=(k + reach).min(n - 1) {
                s -= m.data[m.idx(k, j)] * b[j];
            }
            b[k] = s / m.data[m.idx(k, k)];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Dense border of a bordered system
/// `[A B; C D] [x; y] = [f; g]` with banded `A`.
#[derive(Debug, Clone, Default)]
pub struct Border {
    /// Columns of `B`, each of length `n`.
    pub columns: Vec<Vec<f64>>,
    /// Rows of `C`, each of length `n`.
    pub rows: Vec<Vec<f64>>,
    /// `D`, row-major `k x k`.
    pub corner: Vec<f64>,
}

/// Solves the bordered system through a deflated banded factorization.
///
/// `A` is typically close to singular (translation invariance). Row `pivot` of
/// `A` is replaced by the unit row `e_pivot`, which removes the near-kernel
/// when `pivot` is chosen where that kernel is large; the displaced row and the
/// border rows are then solved as a small dense Schur system.
pub struct BorderedSolver {
    lu: BandLu,
    pivot: usize,
    displaced_row: Vec<(usize, f64)>,
    border: Border,
    // A~^{-1} applied to the border columns (with row pivot zeroed) and to e_pivot.
    solved_columns: Vec<Vec<f64>>,
    solved_unit: Vec<f64>,
    schur: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    matrix: BandMatrix,
}

impl BorderedSolver {
    pub fn new(a: &BandMatrix, border: Border, pivot: usize) -> Result<Self> {
        let n = a.size();
        let k = border.columns.len();
        if border.rows.len() != k || border.corner.len() != k * k {
            return Err(Error::Config("bordered system must be square".into()));
        }
        let displaced_row = a.row(pivot);
        let mut deflated = a.clone();
        deflated.clear_row(pivot);
        deflated.set(pivot, pivot, 1.0);
        let lu = deflated.factor()?;

        let solved_columns: Vec<Vec<f64>> = border
            .columns
            .iter()
            .map(|col| {
                let mut c = col.clone();
                c[pivot] = 0.0;
                lu.solve(&c)
            })
            .collect();
        let mut unit = vec![0.0; n];
        unit[pivot] = 1.0;
        let solved_unit = lu.solve(&unit);

        // Unknowns (y_0..y_{k-1}, t) with x = X0 - XB y + Xe t.
        let mut s = DMatrix::<f64>::zeros(k + 1, k + 1);
        let row_dot = |row: &[(usize, f64)], v: &[f64]| row.iter().map(|(j, a)| a * v[*j]).sum::<f64>();
        for (c, xb) in solved_columns.iter().enumerate() {
            s[(0, c)] = border.columns[c][pivot] - row_dot(&displaced_row, xb);
        }
        s[(0, k)] = row_dot(&displaced_row, &solved_unit);
        for r in 0..k {
            let crow = &border.rows[r];
            for (c, xb) in solved_columns.iter().enumerate() {
                s[(r + 1, c)] = border.corner[r * k + c] - dot(crow, xb);
            }
            s[(r + 1, k)] = dot(crow, &solved_unit);
        }
        let schur = s.lu();
        if !schur.is_invertible() {
            return Err(Error::Singular("bordered Schur complement"));
        }
        Ok(Self { lu, pivot, displaced_row, border, solved_columns, solved_unit, schur, matrix: a.clone() })
    }

    /// Returns `(x, y)`.
    pub fn solve(&self, f: &[f64], g: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let k = self.border.columns.len();
        let mut ft = f.to_vec();
        let f_pivot = ft[self.pivot];
        ft[self.pivot] = 0.0;
        let x0 = self.lu.solve(&ft);
        let mut rhs = DVector::<f64>::zeros(k + 1);
        rhs[0] = f_pivot - self.displaced_row.iter().map(|(j, a)| a * x0[*j]).sum::<f64>();
        for r in 0..k {
            rhs[r + 1] = g[r] - dot(&self.border.rows[r], &x0);
        }
        let sol = self.schur.solve(&rhs).ok_or(Error::Singular("bordered Schur complement"))?;
        let y: Vec<f64> = (0..k).map(|i| sol[i]).collect();
        let t = sol[k];
        let mut x = x0;
        for (c, xb) in self.solved_columns.iter().enumerate() {
            for (xi, b) in x.iter_mut().zip(xb) {
                *xi -= y[c] * b;
            }
        }
        for (xi, e) in x.iter_mut().zip(&self.solved_unit) {
            *xi += t * e;
        }
        Ok((x, y))
    }
}

impl BorderedSolver {
    /// [`BorderedSolver::solve`] followed by `steps` rounds of iterative refinement
    /// against the undeflated system.
    pub fn solve_refined(&self, f: &[f64], g: &[f64], steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let (mut x, mut y) = self.solve(f, g)?;
        let k = y.len();
        for _ in 0..steps {
            let ax = self.matrix.mul_vec(&x);
            let mut rf: Vec<f64> = f.iter().zip(&ax).map(|(a, b)| a - b).collect();
            for (c, col) in self.border.columns.iter().enumerate() {
                for (r, b) in rf.iter_mut().zip(col) {
                    *r -= y[c] * b;
                }
            }
            let rg: Vec<f64> = (0..k)
                .map(|r| {
                    g[r] - dot(&self.border.rows[r], &x)
                        - (0..k).map(|c| self.border.corner[r * k + c] * y[c]).sum::<f64>()
                })
                .collect();
            let (dx, dy) = self.solve(&rf, &rg)?;
            x.iter_mut().zip(&dx).for_each(|(a, b)| *a += b);
            y.iter_mut().zip(&dy).for_each(|(a, b)| *a += b);
        }
        Ok((x, y))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
