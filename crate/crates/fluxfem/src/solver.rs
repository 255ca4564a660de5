//! Direct and iterative solvers for the assembled systems.
//!
//! Square SPD systems go through a bandwidth-reducing reverse Cuthill-McKee
//! permutation followed by a banded Cholesky factorization. Rectangular
//! least-squares systems offer three interchangeable methods:
//!
//! * `Svd` - dense SVD, kept as a cross-validation path for small systems;
//! * `SparseQr` - row-wise Givens QR against a banded R factor (George-Heath),
//!   preceded by the same RCM permutation applied to the column graph;
//! * `NormalCg` - CGLS (conjugate gradients on the normal equations in
//!   factored form) with column equilibration.
//!
//! All paths are deterministic: identical inputs give bitwise identical
//! solutions.

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, SparseMatrix};

/// Method selector for [`solve_least_squares`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LsqMethod {
    Svd,
    SparseQr,
    NormalCg,
}

impl std::str::FromStr for LsqMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svd" => Ok(Self::Svd),
            "sparse-qr" => Ok(Self::SparseQr),
            "normal-cg" => Ok(Self::NormalCg),
            other => Err(Error::Parameter(format!(
                "unknown least-squares method '{other}' (svd, sparse-qr, normal-cg)"
            ))),
        }
    }
}

const RANK_TOL: f64 = 1e-12;
const SVD_MAX_COLS: usize = 2000;

/// Reverse Cuthill-McKee ordering of an undirected graph given through a
/// neighbor enumerator. Returns `order` with `order[k]` = original index at
/// new position `k`. Ties break on the original index, so the ordering is
/// deterministic.
fn rcm_order<F: FnMut(usize, &mut Vec<usize>)>(n: usize, mut neighbors_of: F) -> Vec<usize> {
    let mut degree = vec![0usize; n];
    let mut buf = Vec::new();
    for i in 0..n {
        buf.clear();
        neighbors_of(i, &mut buf);
        degree[i] = buf.len();
    }
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    loop {
        // Start each component from its minimum-degree node.
        let start = (0..n)
            .filter(|&i| !visited[i])
            .min_by_key(|&i| (degree[i], i));
        let Some(start) = start else { break };
        visited[start] = true;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            buf.clear();
            neighbors_of(u, &mut buf);
            let mut next: Vec<usize> = buf.iter().copied().filter(|&v| !visited[v]).collect();
            next.sort_by_key(|&v| (degree[v], v));
            for v in next {
                visited[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Solves the square SPD system `A x = b` by banded Cholesky after an RCM
/// permutation. Errors if `A` is not square, not symmetric within 1e-12
/// relative to its largest entry, or a non-positive pivot appears.
pub fn solve_spd(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n_rows();
    if n != a.n_cols() {
        return Err(Error::Dimension(format!(
            "solve_spd: matrix is {}x{}, expected square",
            a.n_rows(),
            a.n_cols()
        )));
    }
    if b.len() != n {
        return Err(Error::Dimension(format!(
            "solve_spd: rhs has length {}, expected {n}",
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = a.max_abs();
    for (r, c, v) in a.entries() {
        if (v - a.get(c, r)).abs() > 1e-12 * scale {
            return Err(Error::NotSpd(format!(
                "entry ({r}, {c}) = {v} differs from its transpose {}",
                a.get(c, r)
            )));
        }
    }

    let order = rcm_order(n, |i, buf| {
        let (cols, _) = a.row(i);
        buf.extend(cols.iter().copied().filter(|&c| c != i));
    });
    let mut inv = vec![0usize; n];
    for (k, &old) in order.iter().enumerate() {
        inv[old] = k;
    }
    let mut bw = 0usize;
    for (r, c, _) in a.entries() {
        bw = bw.max(inv[r].abs_diff(inv[c]));
    }

    // Lower band, row-major: slot (i, j) for i-bw <= j <= i lives at
    // band[i * (bw+1) + (j - i + bw)].
    let stride = bw + 1;
    let mut band = vec![0.0f64; n * stride];
    for (r, c, v) in a.entries() {
        let (i, j) = (inv[r], inv[c]);
        if j <= i {
            band[i * stride + (j + bw - i)] = v;
        }
    }

    // In-place banded Cholesky.
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let kmin = lo.max(j.saturating_sub(bw));
            let mut sum = band[i * stride + (j + bw - i)];
            for k in kmin..j {
                sum -= band[i * stride + (k + bw - i)] * band[j * stride + (k + bw - j)];
            }
            if j < i {
                band[i * stride + (j + bw - i)] = sum / band[j * stride + bw];
            } else if sum <= 0.0 {
                return Err(Error::NotSpd(format!(
                    "non-positive pivot {sum} at position {i}"
                )));
            } else {
                band[i * stride + bw] = sum.sqrt();
            }
        }
    }

    // Permute rhs, solve L y = b then L^T x = y, un-permute.
    let mut y = vec![0.0; n];
    for k in 0..n {
        y[k] = b[order[k]];
    }
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        let mut sum = y[i];
        for k in lo..i {
            sum -= band[i * stride + (k + bw - i)] * y[k];
        }
        y[i] = sum / band[i * stride + bw];
    }
    for i in (0..n).rev() {
        let hi = (i + bw).min(n - 1);
        let mut sum = y[i];
        for k in (i + 1)..=hi {
            sum -= band[k * stride + (i + bw - k)] * y[k];
        }
        y[i] = sum / band[i * stride + bw];
    }
    let mut x = vec![0.0; n];
    for k in 0..n {
        x[order[k]] = y[k];
    }
    Ok(x)
}

/// Solves `min ||A x - b||_2` for a full-column-rank rectangular system.
pub fn solve_least_squares(a: &SparseMatrix, b: &[f64], method: LsqMethod) -> Result<Vec<f64>> {
    let (m, n) = (a.n_rows(), a.n_cols());
    if n == 0 {
        return Err(Error::Parameter("least squares: zero columns".into()));
    }
    if m < n {
        return Err(Error::Dimension(format!(
            "least squares: {m} rows < {n} columns"
        )));
    }
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "least squares: rhs has length {}, expected {m}",
            b.len()
        )));
    }
    match method {
        LsqMethod::Svd => solve_lsq_svd(a, b),
        LsqMethod::SparseQr => solve_lsq_qr(a, b),
        LsqMethod::NormalCg => solve_lsq_cgls(a, b),
    }
}

fn solve_lsq_svd(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if a.n_cols() > SVD_MAX_COLS {
        return Err(Error::Parameter(format!(
            "svd method is a dense cross-validation path limited to {SVD_MAX_COLS} columns; \
             system has {} (use sparse-qr or normal-cg)",
            a.n_cols()
        )));
    }
    let dense = a.to_dense();
    let svd = dense.svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &s| m.max(s));
    let smin = svd
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, &s| m.min(s));
    if smin <= RANK_TOL * smax {
        return Err(Error::RankDeficient(format!(
            "smallest singular value {smin} below {RANK_TOL} * largest {smax}"
        )));
    }
    let rhs = nalgebra::DVector::from_column_slice(b);
    let x = svd
        .solve(&rhs, 0.0)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    Ok(x.as_slice().to_vec())
}

/// Row-wise Givens QR with the R factor kept in a band whose width is the
/// largest column span of any row after the RCM column permutation. Each
/// incoming row is rotated against the stored R rows until it either
/// becomes zero or occupies an empty R slot.
fn solve_lsq_qr(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let (m, n) = (a.n_rows(), a.n_cols());

    // Column co-occurrence graph: columns are adjacent when some row holds
    // both. Enumerated through a CSC row index to avoid forming A^T A.
    let mut col_rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (r, c, _) in a.entries() {
        col_rows[c].push(r);
    }
    let mut stamp = vec![usize::MAX; n];
    let order = rcm_order(n, |c, buf| {
        for &r in &col_rows[c] {
            let (cols, _) = a.row(r);
            for &c2 in cols {
                if c2 != c && stamp[c2] != c {
                    stamp[c2] = c;
                    buf.push(c2);
                }
            }
        }
    });
    let mut inv = vec![0usize; n];
    for (k, &old) in order.iter().enumerate() {
        inv[old] = k;
    }

    // Permuted rows and the resulting band width.
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut width = 1usize;
    for r in 0..m {
        let (cols, vals) = a.row(r);
        let mut row: Vec<(usize, f64)> = cols
            .iter()
            .zip(vals)
            .map(|(&c, &v)| (inv[c], v))
            .collect();
        row.sort_by_key(|e| e.0);
        if let (Some(first), Some(last)) = (row.first(), row.last()) {
            width = width.max(last.0 - first.0 + 1);
        }
        rows.push(row);
    }

    // R stored row-major: slot k of row i is column i + k.
    let mut r_band = vec![0.0f64; n * width];
    let mut occupied = vec![false; n];
    let mut y = vec![0.0f64; n];
    let mut work = vec![0.0f64; width];

    for (r, row) in rows.iter().enumerate() {
        if row.is_empty() {
            continue;
        }
        let mut lead = row[0].0;
        work.iter_mut().for_each(|w| *w = 0.0);
        for &(c, v) in row {
            work[c - lead] = v;
        }
        let mut rhs = b[r];
        loop {
            if !occupied[lead] {
                r_band[lead * width..(lead + 1) * width].copy_from_slice(&work);
                y[lead] = rhs;
                occupied[lead] = true;
                break;
            }
            // Givens rotation zeroing work[0] against R row `lead`.
            let rr = r_band[lead * width];
            let wv = work[0];
            let hyp = rr.hypot(wv);
            let (cs, sn) = (rr / hyp, wv / hyp);
            for k in 0..width {
                let rv = r_band[lead * width + k];
                let wk = work[k];
                r_band[lead * width + k] = cs * rv + sn * wk;
                work[k] = -sn * rv + cs * wk;
            }
            work[0] = 0.0;
            let new_rhs = -sn * y[lead] + cs * rhs;
            y[lead] = cs * y[lead] + sn * rhs;
            rhs = new_rhs;
            // Advance to the next remaining nonzero, if any.
            match (1..width).find(|&k| work[k] != 0.0) {
                None => break,
                Some(k) => {
                    lead += k;
                    work.copy_within(k.., 0);
                    work[width - k..].iter_mut().for_each(|w| *w = 0.0);
                }
            }
        }
    }

    if let Some(i) = (0..n).find(|&i| !occupied[i]) {
        return Err(Error::RankDeficient(format!(
            "column {} received no pivot",
            order[i]
        )));
    }
    let dmax = (0..n).fold(0.0f64, |mx, i| mx.max(r_band[i * width].abs()));
    for i in 0..n {
        let d = r_band[i * width].abs();
        if d <= RANK_TOL * dmax {
            return Err(Error::RankDeficient(format!(
                "R diagonal {d} at column {} below {RANK_TOL} * largest {dmax}",
                order[i]
            )));
        }
    }

    // Back substitution on the banded R, then undo the permutation.
    let mut xp = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in 1..width.min(n - i) {
            sum -= r_band[i * width + k] * xp[i + k];
        }
        xp[i] = sum / r_band[i * width];
    }
    let mut x = vec![0.0f64; n];
    for k in 0..n {
        x[order[k]] = xp[k];
    }
    Ok(x)
}

/// CGLS on the column-equilibrated system. Detects only the rank
/// deficiencies an iterative method can see (degenerate column norms).
fn solve_lsq_cgls(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.n_cols();
    let norms = a.column_norms();
    let nmax = norms.iter().fold(0.0f64, |m, &v| m.max(v));
    if let Some(j) = norms.iter().position(|&v| v <= RANK_TOL * nmax) {
        return Err(Error::RankDeficient(format!(
            "column {j} has norm {} below {RANK_TOL} * largest {nmax}",
            norms[j]
        )));
    }
    let scale: Vec<f64> = norms.iter().map(|&v| 1.0 / v).collect();

    let scaled_tr = |r: &[f64]| -> Result<Vec<f64>> {
        let mut s = a.mul_transpose_vec(r)?;
        s.iter_mut().zip(&scale).for_each(|(v, &sc)| *v *= sc);
        Ok(s)
    };
    let scaled_mul = |z: &[f64]| -> Result<Vec<f64>> {
        let zs: Vec<f64> = z.iter().zip(&scale).map(|(&v, &sc)| v * sc).collect();
        a.mul_vec(&zs)
    };

    let mut x = vec![0.0f64; n];
    let mut r = b.to_vec();
    let mut s = scaled_tr(&r)?;
    let s0 = norm2(&s);
    if s0 == 0.0 {
        return Ok(x);
    }
    let tol = 1e-13 * s0;
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let max_iter = 4 * n + 100;
    for _ in 0..max_iter {
        let q = scaled_mul(&p)?;
        let delta = dot(&q, &q);
        if delta == 0.0 {
            break;
        }
        let alpha = gamma / delta;
        x.iter_mut().zip(&p).for_each(|(xv, &pv)| *xv += alpha * pv);
        r.iter_mut().zip(&q).for_each(|(rv, &qv)| *rv -= alpha * qv);
        s = scaled_tr(&r)?;
        let gamma_new = dot(&s, &s);
        if gamma_new.sqrt() <= tol {
            break;
        }
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        p.iter_mut().zip(&s).for_each(|(pv, &sv)| *pv = sv + beta * *pv);
    }
    x.iter_mut().zip(&scale).for_each(|(xv, &sc)| *xv *= sc);

    // Optimality check in the original scaling.
    let resid = {
        let ax = a.mul_vec(&x)?;
        let rv: Vec<f64> = b.iter().zip(&ax).map(|(&bv, &av)| bv - av).collect();
        a.mul_transpose_vec(&rv)?
    };
    let atb = a.mul_transpose_vec(b)?;
    if norm2(&resid) > 1e-8 * norm2(&atb).max(f64::MIN_POSITIVE) {
        return Err(Error::NoConvergence(format!(
            "cgls stalled: ||A^T(Ax-b)|| = {} vs ||A^T b|| = {}",
            norm2(&resid),
            norm2(&atb)
        )));
    }
    Ok(x)
}
