//! Linear algebra over the prime field F_p.

pub fn inv_mod(a: u32, p: u32) -> u32 {
    let a = a % p;
    assert!(a != 0, "zero has no inverse");
    let mut r = 1u64;
    let mut b = a as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

fn axpy(dst: &mut [u32], f: u32, src: &[u32], p: u32) {
    if f == 0 {
        return;
    }
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = (*d + (p - f) * s % p) % p;
    }
}

fn scale(v: &mut [u32], f: u32, p: u32) {
    for x in v.iter_mut() {
        *x = *x * f % p;
    }
}

#[derive(Clone, Debug)]
struct Row {
    v: Vec<u32>,
    pivot: usize,
    coeffs: Vec<u32>,
}

/// Reduced row echelon basis of a subspace of F_p^dim, remembering how each row
/// combines the vectors that were inserted.
#[derive(Clone, Debug)]
pub struct Echelon {
    p: u32,
    dim: usize,
    rows: Vec<Row>,
    inserted: usize,
}

impl Echelon {
    pub fn new(dim: usize, p: u32) -> Self {
        Echelon { p, dim, rows: Vec::new(), inserted: 0 }
    }

    pub fn from_vectors(dim: usize, p: u32, vs: &[Vec<u32>]) -> Self {
        let mut e = Echelon::new(dim, p);
        for v in vs {
            e.insert(v);
        }
        e
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.pivot).collect()
    }

    /// Basis rows sorted by pivot (canonical for the subspace).
    pub fn basis(&self) -> Vec<Vec<u32>> {
        self.rows.iter().map(|r| r.v.clone()).collect()
    }

    /// Inserts `v`; returns `Some(null vector over inserted vectors)` when dependent.
    pub fn insert(&mut self, v: &[u32]) -> Option<Vec<u32>> {
        let p = self.p;
        let k = self.inserted;
        self.inserted += 1;
        for r in self.rows.iter_mut() {
            r.coeffs.push(0);
        }
        let mut w: Vec<u32> = v.iter().map(|x| x % p).collect();
        let mut c = vec![0u32; self.inserted];
        c[k] = 1;
        for r in &self.rows {
            let f = w[r.pivot];
            if f != 0 {
                axpy(&mut w, f, &r.v, p);
                axpy(&mut c, f, &r.coeffs, p);
            }
        }
        match w.iter().position(|&x| x != 0) {
            None => Some(c),
            Some(piv) => {
                let f = inv_mod(w[piv], p);
                scale(&mut w, f, p);
                scale(&mut c, f, p);
                for r in self.rows.iter_mut() {
                    let g = r.v[piv];
                    if g != 0 {
                        axpy(&mut r.v, g, &w, p);
                        axpy(&mut r.coeffs, g, &c, p);
                    }
                }
                let pos = self.rows.iter().position(|r| r.pivot > piv).unwrap_or(self.rows.len());
                self.rows.insert(pos, Row { v: w, pivot: piv, coeffs: c });
                None
            }
        }
    }

    /// Canonical representative of `v` modulo the subspace (zero at every pivot).
    pub fn reduce(&self, v: &[u32]) -> Vec<u32> {
        let mut w: Vec<u32> = v.iter().map(|x| x % self.p).collect();
        for r in &self.rows {
            let f = w[r.pivot];
            if f != 0 {
                axpy(&mut w, f, &r.v, self.p);
            }
        }
        w
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }

    /// Coefficients over the inserted vectors expressing `v`, if `v` lies in the span.
    pub fn solve(&self, v: &[u32]) -> Option<Vec<u32>> {
        let p = self.p;
        let mut w: Vec<u32> = v.iter().map(|x| x % p).collect();
        let mut c = vec![0u32; self.inserted];
        for r in &self.rows {
            let f = w[r.pivot];
            if f != 0 {
                axpy(&mut w, f, &r.v, p);
                for (ci, &rc) in c.iter_mut().zip(&r.coeffs) {
                    *ci = (*ci + f * rc) % p;
                }
            }
        }
        if w.iter().all(|&x| x == 0) {
            Some(c)
        } else {
            None
        }
    }
}

/// Basis of `{c : sum c_i v_i = 0}`.
pub fn nullspace(vs: &[Vec<u32>], dim: usize, p: u32) -> Vec<Vec<u32>> {
    let mut e = Echelon::new(dim, p);
    let mut out: Vec<Vec<u32>> = Vec::new();
    for v in vs {
        if let Some(c) = e.insert(v) {
            out.push(c);
        }
    }
    let m = vs.len();
    for c in out.iter_mut() {
        c.resize(m, 0);
    }
    out
}

/// All vectors of F_p^dim in lexicographic order.
pub fn all_vectors(dim: usize, p: u32) -> Vec<Vec<u32>> {
    let total = (p as usize).pow(dim as u32);
    (0..total)
        .map(|mut k| {
            let mut v = vec![0u32; dim];
            for i in (0..dim).rev() {
                v[i] = (k % p as usize) as u32;
                k /= p as usize;
            }
            v
        })
        .collect()
}

/// All `k`-dimensional subspaces of F_p^dim, each as its reduced echelon basis.
pub fn subspaces(dim: usize, k: usize, p: u32) -> Vec<Vec<Vec<u32>>> {
    let mut out = Vec::new();
    if k > dim {
        return out;
    }
    let mut pivots = Vec::with_capacity(k);
    choose_pivots(dim, k, 0, &mut pivots, &mut |piv| {
        // free positions: row r may be nonzero at columns > piv[r] that are not pivots
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (r, &pc) in piv.iter().enumerate() {
            for c in pc + 1..dim {
                if !piv.contains(&c) {
                    free.push((r, c));
                }
            }
        }
        for fill in all_vectors(free.len(), p) {
            let mut rows = vec![vec![0u32; dim]; k];
            for (r, &pc) in piv.iter().enumerate() {
                rows[r][pc] = 1;
            }
            for (&(r, c), &x) in free.iter().zip(&fill) {
                rows[r][c] = x;
            }
            out.push(rows);
        }
    });
    out
}

fn choose_pivots(dim: usize, k: usize, start: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if cur.len() == k {
        f(cur);
        return;
    }
    for c in start..dim {
        if dim - c < k - cur.len() {
            break;
        }
        cur.push(c);
        choose_pivots(dim, k, c + 1, cur, f);
        cur.pop();
    }
}

/// All invertible d x d matrices over F_p (rows as vectors), in lexicographic order.
pub fn general_linear(d: usize, p: u32) -> Vec<Vec<Vec<u32>>> {
    let vecs = all_vectors(d, p);
    let mut out = Vec::new();
    let mut cur: Vec<Vec<u32>> = Vec::new();
    gl_rec(d, p, &vecs, &mut cur, &mut out);
    out
}

fn gl_rec(d: usize, p: u32, vecs: &[Vec<u32>], cur: &mut Vec<Vec<u32>>, out: &mut Vec<Vec<Vec<u32>>>) {
    if cur.len() == d {
        out.push(cur.clone());
        return;
    }
    let e = Echelon::from_vectors(d, p, cur);
    for v in vecs {
        if !e.contains(v) {
            cur.push(v.clone());
            gl_rec(d, p, vecs, cur, out);
            cur.pop();
        }
    }
}

pub fn is_zero(v: &[u32]) -> bool {
    v.iter().all(|&x| x == 0)
}
