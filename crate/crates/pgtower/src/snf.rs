//! Smith-type diagonalization of integer relation matrices for finite abelian p-groups.
//!
//! The quotient Z^n / L is known to be a finite p-group of order at most p^bound, so
//! L contains p^bound Z^n and elimination can run in the local ring Z/p^N with N > bound.
//! Pivots are chosen by minimal p-adic valuation, which keeps all divisions exact.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct Diagonalization {
    p: u32,
    modulus: u128,
    /// Column transform: coordinates of x are `x * v`.
    v: Vec<Vec<u128>>,
    /// Valuations of the diagonal, one per column (`n_cols` entries).
    vals: Vec<u32>,
}

fn valuation(mut x: u128, p: u128) -> u32 {
    let mut k = 0;
    while x.is_multiple_of(p) {
        x /= p;
        k += 1;
    }
    k
}

fn inv_unit(a: u128, m: u128) -> u128 {
    // extended Euclid on i128
    let (mut r0, mut r1) = (m as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(m as i128) as u128
}

impl Diagonalization {
    /// `rows` are relations over `ncols` generators; `bound` bounds log_p of the quotient order.
    pub fn new(p: u32, rows: &[Vec<i64>], ncols: usize, bound: usize) -> Result<Self> {
        let pp = p as u128;
        let n_exp = bound as u32 + 1;
        let mut modulus: u128 = 1;
        for _ in 0..n_exp {
            modulus = modulus.checked_mul(pp).ok_or_else(|| Error::Overflow("modulus".into()))?;
        }
        if modulus > (1u128 << 62) {
            return Err(Error::Overflow(format!("p^{n_exp} exceeds the local-ring range")));
        }
        let m = modulus;
        let red = |x: i64| -> u128 { (x as i128).rem_euclid(m as i128) as u128 };
        let mut a: Vec<Vec<u128>> = rows.iter().map(|r| r.iter().map(|&x| red(x)).collect()).collect();
        let mut v: Vec<Vec<u128>> = (0..ncols)
            .map(|i| (0..ncols).map(|j| if i == j { 1 } else { 0 }).collect())
            .collect();
        let nrows = a.len();
        let mut vals = vec![n_exp; ncols];
        let mut t = 0;
        while t < ncols.min(nrows) {
            // pivot of minimal valuation
            let mut best: Option<(u32, usize, usize)> = None;
            for (i, row) in a.iter().enumerate().skip(t) {
                for (j, &x) in row.iter().enumerate().skip(t) {
                    if x != 0 {
                        let val = valuation(x, pp);
                        if best.is_none_or(|b| val < b.0) {
                            best = Some((val, i, j));
                            if val == 0 {
                                break;
                            }
                        }
                    }
                }
                if matches!(best, Some((0, _, _))) {
                    break;
                }
            }
            let Some((val, bi, bj)) = best else { break };
            a.swap(t, bi);
            if bj != t {
                for row in a.iter_mut() {
                    row.swap(t, bj);
                }
                for row in v.iter_mut() {
                    row.swap(t, bj);
                }
            }
            let pv = pp.pow(val);
            let unit = a[t][t] / pv;
            let uinv = inv_unit(unit % m, m);
            for x in a[t].iter_mut() {
                *x = *x * uinv % m;
            }
            // rows
            let pivot_row = a[t].clone();
            for (i, row) in a.iter_mut().enumerate() {
                if i == t || row[t] == 0 {
                    continue;
                }
                let f = row[t] / pv;
                for (x, &y) in row.iter_mut().zip(&pivot_row) {
                    *x = (*x + m - f * y % m) % m;
                }
            }
            // columns
            for j in 0..ncols {
                if j == t || a[t][j] == 0 {
                    continue;
                }
                let f = a[t][j] / pv;
                a[t][j] = 0;
                for row in v.iter_mut() {
                    row[j] = (row[j] + m - f * row[t] % m) % m;
                }
            }
            vals[t] = val;
            t += 1;
        }
        Ok(Diagonalization { p, modulus: m, v, vals })
    }

    /// Logarithmic abelian invariants, non-increasing.
    pub fn invariants(&self) -> Vec<u32> {
        let mut e: Vec<u32> = self.vals.iter().copied().filter(|&x| x > 0).collect();
        e.sort_unstable_by(|a, b| b.cmp(a));
        e
    }

    /// Columns with nontrivial cyclic factor, ordered to match `invariants()`.
    fn factor_columns(&self) -> Vec<usize> {
        let mut cols: Vec<usize> = (0..self.vals.len()).filter(|&j| self.vals[j] > 0).collect();
        cols.sort_by(|&a, &b| self.vals[b].cmp(&self.vals[a]).then(a.cmp(&b)));
        cols
    }

    /// Coordinates of the image of the generator-exponent vector `x`, matching `invariants()`.
    pub fn coordinates(&self, x: &[i64]) -> Vec<u64> {
        let m = self.modulus;
        let pp = self.p as u128;
        self.factor_columns()
            .into_iter()
            .map(|j| {
                let mut s: u128 = 0;
                for (i, &xi) in x.iter().enumerate() {
                    let xi = (xi as i128).rem_euclid(m as i128) as u128;
                    s = (s + xi * self.v[i][j]) % m;
                }
                (s % pp.pow(self.vals[j])) as u64
            })
            .collect()
    }
}
