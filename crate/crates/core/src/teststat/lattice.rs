//! Exact fast evaluation of `Σ_j P((x_j − t)/h) w_j` over a lattice index set.
//!
//! When every pair is `(k/N, l/N)` and the template `P` is a polynomial on `[0,1)`,
//! write `x = (c + v)/N` with cell `c = k + m` and local coordinate `v ∈ [0,1)`.
//! Then `P((m+v)/l) = Σ_p A_p(m, l) v^p` with `A_p(m,l) = P^{(p)}(m/l) / (p! l^p)`,
//! so every pair reduces to short dot products against per-cell moments
//! `μ_p(c) = Σ_{x_j ∈ cell c} w_j v_j^p`. This is an algebraic rearrangement,
//! not an approximation.

use super::{IndexKind, ScaleLocationSet, Template, TemplatePlan};
use crate::kernels::Polynomial;
use std::collections::HashMap;

/// Integer coordinates of an index set on a grid of `cells` cells.
#[derive(Clone, Debug)]
pub(crate) struct Lattice {
    pub cells: usize,
    /// `(k, l)` per pair.
    pub coords: Vec<(usize, usize)>,
}

pub(crate) fn lattice_of(set: &ScaleLocationSet) -> Option<Lattice> {
    let cells = match set.kind() {
        IndexKind::Triangular { n_grid, .. } => *n_grid,
        IndexKind::Circle { k } => *k,
        IndexKind::Dyadic { j1, .. } => 1usize << j1,
        IndexKind::Custom => return None,
    };
    let mut coords = Vec::with_capacity(set.len());
    for &(t, h) in set.pairs() {
        let k = (t * cells as f64).round();
        let l = (h * cells as f64).round();
        if (k - t * cells as f64).abs() > 1e-6 || (l - h * cells as f64).abs() > 1e-6 || l < 1.0 {
            return None;
        }
        let (k, l) = (k as usize, l as usize);
        if k + l > cells {
            return None;
        }
        coords.push((k, l));
    }
    Some(Lattice { cells, coords })
}

/// `A_p(m, l)` for `m < l`, stored as `a[p][m]`.
#[derive(Clone, Debug)]
pub(crate) struct TaylorTable {
    pub l: usize,
    pub a: Vec<Vec<f64>>,
}

pub(crate) fn taylor_table(poly: &Polynomial, l: usize, degree: usize) -> TaylorTable {
    let mut a = vec![vec![0.0; l]; degree + 1];
    let mut deriv = poly.clone();
    let mut fact = 1.0;
    for (p, row) in a.iter_mut().enumerate() {
        if p > 0 {
            deriv = deriv.derivative();
            fact *= p as f64;
        }
        let scale = 1.0 / (fact * (l as f64).powi(p as i32));
        for (m, slot) in row.iter_mut().enumerate() {
            *slot = deriv.eval(m as f64 / l as f64) * scale;
        }
    }
    TaylorTable { l, a }
}

/// Per-cell moments `mom[p][c]`.
#[derive(Clone, Debug)]
pub(crate) struct CellMoments {
    pub mom: Vec<Vec<f64>>,
}

impl CellMoments {
    pub fn zeros(cells: usize, degree: usize) -> Self {
        CellMoments { mom: vec![vec![0.0; cells]; degree + 1] }
    }

    /// Unit-weight points; those outside `[0, 1)` are ignored.
    pub fn from_points(xs: &[f64], cells: usize, degree: usize) -> Self {
        let mut out = CellMoments::zeros(cells, degree);
        for &x in xs {
            let pos = x * cells as f64;
            if !(pos >= 0.0) || pos >= cells as f64 {
                continue;
            }
            let c = (pos.floor() as usize).min(cells - 1);
            let v = pos - c as f64;
            let mut pw = 1.0;
            for row in out.mom.iter_mut() {
                row[c] += pw;
                pw *= v;
            }
        }
        out
    }

    /// Grid increments where node `j0 + c·sub + i` sits at local coordinate `i/sub` of cell `c`.
    pub fn fill_from_increments(&mut self, incr: &[f64], j0: usize, sub: usize, powers: &[Vec<f64>]) {
        let cells = self.mom[0].len();
        for c in 0..cells {
            let chunk = &incr[j0 + c * sub..j0 + (c + 1) * sub];
            for (row, pw) in self.mom.iter_mut().zip(powers) {
                row[c] = chunk.iter().zip(pw).map(|(a, b)| a * b).sum();
            }
        }
    }
}

/// `(i/sub)^p` for `p ≤ degree`, `i < sub`.
pub(crate) fn local_powers(sub: usize, degree: usize) -> Vec<Vec<f64>> {
    (0..=degree)
        .map(|p| (0..sub).map(|i| (i as f64 / sub as f64).powi(p as i32)).collect())
        .collect()
}

/// Precomputed lattice evaluation for a template plan.
#[derive(Clone, Debug)]
pub(crate) struct LatticePlan {
    pub lattice: Lattice,
    pub degree: usize,
    tables: Vec<TaylorTable>,
    pair_table: Vec<usize>,
}

impl LatticePlan {
    /// Available when the set is a lattice and all templates are polynomials.
    pub fn new(set: &ScaleLocationSet, plan: &TemplatePlan) -> Option<Self> {
        let lattice = lattice_of(set)?;
        let mut degree = 0;
        for t in &plan.templates {
            match t {
                Template::Polynomial(p) => degree = degree.max(p.degree()),
                Template::Sampled { .. } => return None,
            }
        }
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut tables = Vec::new();
        let mut pair_table = Vec::with_capacity(set.len());
        for (i, &(_, l)) in lattice.coords.iter().enumerate() {
            let ti = plan.pair_template[i];
            let idx = *cache.entry((ti, l)).or_insert_with(|| {
                let Template::Polynomial(p) = &plan.templates[ti] else { unreachable!() };
                tables.push(taylor_table(p, l, degree));
                tables.len() - 1
            });
            pair_table.push(idx);
        }
        Some(LatticePlan { lattice, degree, tables, pair_table })
    }

    /// Writes the windowed sum of every pair into `out`.
    pub fn evaluate_into(&self, moments: &CellMoments, out: &mut [f64]) {
        for (i, &(k, _)) in self.lattice.coords.iter().enumerate() {
            let tab = &self.tables[self.pair_table[i]];
            let mut s = 0.0;
            for (arow, mrow) in tab.a.iter().zip(&moments.mom) {
                s += dot(arow, &mrow[k..k + tab.l]);
            }
            out[i] = s;
        }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for i in 0..chunks {
        let j = 4 * i;
        acc[0] += a[j] * b[j];
        acc[1] += a[j + 1] * b[j + 1];
        acc[2] += a[j + 2] * b[j + 2];
        acc[3] += a[j + 3] * b[j + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for j in 4 * chunks..n {
        s += a[j] * b[j];
    }
    s
}
