//! Exact Gaussian elimination with numeric matrices and symbolic right-hand
//! sides.

use super::coef::Coef;
use super::quad::{FieldMismatch, Quad};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinearOutcome {
    /// One solution; free unknowns are set to zero.
    Solved(Vec<Coef>),
    Inconsistent,
}

/// Solves `m·x = rhs`, returning a particular solution.
pub fn solve(mut m: Vec<Vec<Quad>>, mut rhs: Vec<Coef>) -> Result<LinearOutcome, FieldMismatch> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        rhs.swap(r, p);
        let inv = m[r][c].recip();
        for j in c..cols {
            m[r][j] = m[r][j].try_mul(&inv)?;
        }
        rhs[r] = rhs[r].try_scale(&inv)?;
        for i in 0..rows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].clone();
            for j in c..cols {
                let d = m[r][j].try_mul(&f)?;
                m[i][j] = m[i][j].try_sub(&d)?;
            }
            let d = rhs[r].try_scale(&f)?;
            rhs[i] = rhs[i].try_add(&d.neg())?;
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    if rhs[r..].iter().any(|v| !v.is_zero()) {
        return Ok(LinearOutcome::Inconsistent);
    }
    let mut x = vec![Coef::zero(); cols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rhs[i].clone();
    }
    Ok(LinearOutcome::Solved(x))
}

/// Rank of a numeric matrix.
pub fn rank(m: Vec<Vec<Quad>>) -> Result<usize, FieldMismatch> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut m = m;
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for i in r + 1..rows {
            if m[i][c].is_zero() {
                continue;
            }
            let f = m[i][c].try_mul(&inv)?;
            for j in c..cols {
                let d = m[r][j].try_mul(&f)?;
                m[i][j] = m[i][j].try_sub(&d)?;
            }
        }
        r += 1;
    }
    Ok(r)
}
