//! Exact solution of sparse integer M-matrix systems `A x = b`.
//!
//! Dense rational elimination is cubic with growing entries, which is far too
//! slow for a thousand states. Instead the solution is computed to as many
//! bits as needed by iterative refinement with exact integer residuals
//! (floating-point conjugate gradients only ever see the residual), then
//! each entry is recovered as the simplest rational inside its error bound
//! and the candidate is checked against the integer system exactly. Only a
//! candidate with `A x = b` exactly is returned, so the floating-point part
//! affects speed, never correctness.
//!
//! `A` must be symmetric positive definite with non-positive off-diagonal
//! entries (a Dirichlet graph Laplacian is the intended case); the error
//! bound uses `‖A⁻¹‖_∞ = ‖A⁻¹·1‖_∞`, which holds for such matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::ExactScalar;
use crate::{Error, Result};

/// Bits gained per refinement round.
const STEP_BITS: u32 = 20;
/// Give up after this many bits of precision.
const MAX_BITS: u32 = 4000;
const MIN_BITS_BEFORE_RECONSTRUCTION: u32 = 40;

/// Compressed-row integer matrix.
#[derive(Debug, Clone)]
pub struct IntMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<i64>,
}

impl IntMatrix {
    pub fn from_rows<I, R>(dim: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = (usize, i64)>,
    {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                if v != 0 {
                    cols.push(j as u32);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        assert_eq!(row_ptr.len(), dim + 1, "row count must equal dimension");
        Self { dim, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().zip(&self.vals[range]).map(|(&j, &v)| (j as usize, v))
    }

    pub fn to_dense_rational(&self) -> Vec<Vec<ExactScalar>> {
        (0..self.dim)
            .map(|i| {
                let mut row = vec![ExactScalar::zero(); self.dim];
                for (j, v) in self.row(i) {
                    row[j] = ExactScalar::from_integer(v.into());
                }
                row
            })
            .collect()
    }

    fn mul_f64(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(j, v)| v as f64 * x[j]).sum();
        }
    }

    fn mul_i128(&self, x: &[i128]) -> Option<Vec<i128>> {
        (0..self.dim)
            .map(|i| {
                self.row(i)
                    .try_fold(0i128, |acc, (j, v)| acc.checked_add((v as i128).checked_mul(x[j])?))
            })
            .collect()
    }

    fn mul_big(&self, x: &[BigInt]) -> Vec<BigInt> {
        (0..self.dim).map(|i| self.row(i).map(|(j, v)| &x[j] * v).sum()).collect()
    }
}

/// Plain conjugate gradients; returns the iterate and its relative residual.
pub fn conjugate_gradient(a: &IntMatrix, b: &[f64], rel_tol: f64, max_iter: usize) -> (Vec<f64>, f64) {
    let dim = a.dim();
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; dim];
    if b_norm == 0.0 {
        return (x, 0.0);
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; dim];
    let mut rr = b_norm * b_norm;
    for _ in 0..max_iter {
        a.mul_f64(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(u, v)| u * v).sum();
        if pap <= 0.0 || !pap.is_finite() {
            break;
        }
        let alpha = rr / pap;
        for i in 0..dim {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if rr_new.sqrt() <= rel_tol * b_norm {
            rr = rr_new;
            break;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..dim {
            p[i] = r[i] + beta * p[i];
        }
    }
    (x, rr.sqrt() / b_norm)
}

fn cg_default(a: &IntMatrix, b: &[f64]) -> Vec<f64> {
    conjugate_gradient(a, b, 1e-14, 4 * a.dim() + 100).0
}

/// Exact solution of `a · x = b` for a non-singular M-matrix `a`.
pub fn solve_exact(a: &IntMatrix, b: &[i64]) -> Result<Vec<ExactScalar>> {
    let dim = a.dim();
    if b.len() != dim {
        return Err(Error::Domain(format!("right-hand side has {} entries, expected {dim}", b.len())));
    }
    if dim == 0 {
        return Ok(Vec::new());
    }

    // ‖A⁻¹‖_∞ estimate from A⁻¹·1, padded for floating-point error
    let inv_norm = cg_default(a, &vec![1.0; dim]).into_iter().fold(0.0f64, f64::max) * 1.01 + 1e-9;
    if !inv_norm.is_finite() {
        return Err(Error::Certification("inverse norm estimate is not finite".into()));
    }
    let row_bound: i128 = (0..dim).map(|i| a.row(i).map(|(_, v)| (v as i128).abs()).sum::<i128>()).max().unwrap_or(1);

    let mut residual: Vec<i128> = b.iter().map(|&v| v as i128).collect();
    let mut acc: Vec<BigInt> = vec![BigInt::zero(); dim];
    let mut shift = 0u32;
    let b_big: Vec<BigInt> = b.iter().map(|&v| BigInt::from(v)).collect();

    while shift < MAX_BITS {
        let r_max = residual.iter().map(|v| v.abs()).max().unwrap_or(0);
        if r_max == 0 {
            // acc / 2^shift is exact
            return reconstruct_and_verify(a, &b_big, &acc, shift, &BigInt::zero())
                .ok_or_else(|| Error::Certification("exact dyadic solution failed verification".into()));
        }

        let scale = r_max as f64;
        let rhs: Vec<f64> = residual.iter().map(|&v| v as f64 / scale).collect();
        let z = cg_default(a, &rhs);
        let step = (1u64 << STEP_BITS) as f64 * scale;
        let mut correction = Vec::with_capacity(dim);
        for zi in z {
            let y = (zi * step).round();
            if !y.is_finite() || y.abs() > 1e30 {
                return Err(Error::Certification("floating-point correction overflowed".into()));
            }
            correction.push(y as i128);
        }

        let a_corr = a
            .mul_i128(&correction)
            .ok_or_else(|| Error::Certification("integer overflow in residual update".into()))?;
        let mut next = Vec::with_capacity(dim);
        for (r, ay) in residual.iter().zip(&a_corr) {
            let shifted = r
                .checked_mul(1i128 << STEP_BITS)
                .and_then(|v| v.checked_sub(*ay))
                .ok_or_else(|| Error::Certification("integer overflow in residual update".into()))?;
            next.push(shifted);
        }
        let next_max = next.iter().map(|v| v.abs()).max().unwrap_or(0);
        if next_max > (r_max << (STEP_BITS - 4)).max(8 * row_bound) {
            return Err(Error::Certification(format!(
                "refinement stalled after {shift} bits (residual {r_max} -> {next_max})"
            )));
        }

        for (x, y) in acc.iter_mut().zip(&correction) {
            *x = (&*x << STEP_BITS) + BigInt::from(*y);
        }
        shift += STEP_BITS;
        residual = next;

        if shift >= MIN_BITS_BEFORE_RECONSTRUCTION {
            let r_max = residual.iter().map(|v| v.abs()).max().unwrap_or(0);
            let err_numer = BigInt::from((2.0 * inv_norm * r_max as f64).ceil() as u128) + 1;
            if let Some(x) = reconstruct_and_verify(a, &b_big, &acc, shift, &err_numer) {
                return Ok(x);
            }
        }
    }
    Err(Error::Certification(format!("no verified solution within {MAX_BITS} bits")))
}

/// Simplest fraction `p/q` (first continued-fraction convergent) with
/// `|num/2^shift − p/q| ≤ err/2^shift`.
fn simplest_within(num: &BigInt, shift: u32, err: &BigInt) -> (BigInt, BigInt) {
    let den = BigInt::one() << shift;
    let (mut a, mut b) = (num.clone(), den.clone());
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    loop {
        let (q, r) = a.div_mod_floor(&b);
        let h_next = &q * &h + &h_prev;
        let k_next = &q * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        // |num·k − h·2^shift| ≤ err·k
        if (num * &k - &h * &den).abs() <= err * &k || r.is_zero() {
            return (h, k);
        }
        a = b;
        b = r;
    }
}

fn reconstruct_and_verify(
    a: &IntMatrix,
    b: &[BigInt],
    acc: &[BigInt],
    shift: u32,
    err: &BigInt,
) -> Option<Vec<ExactScalar>> {
    // a denominator q is only trustworthy while 2·err·q² < 2^shift
    let limit = BigInt::one() << shift;
    let mut fractions = Vec::with_capacity(acc.len());
    let mut common = BigInt::one();
    for x in acc {
        let (p, q) = simplest_within(x, shift, err);
        if BigInt::from(2) * err.max(&BigInt::one()) * &q * &q >= limit {
            return None;
        }
        common = common.lcm(&q);
        fractions.push((p, q));
    }
    let scaled: Vec<BigInt> = fractions.iter().map(|(p, q)| p * (&common / q)).collect();

    let verified = match (to_i128_all(&scaled), common.to_i128()) {
        (Some(h), Some(d)) => {
            let lhs = a.mul_i128(&h);
            let rhs: Option<Vec<i128>> = b.iter().map(|v| v.to_i128()?.checked_mul(d)).collect();
            match (lhs, rhs) {
                (Some(lhs), Some(rhs)) => lhs == rhs,
                _ => big_check(a, b, &scaled, &common),
            }
        }
        _ => big_check(a, b, &scaled, &common),
    };
    verified.then(|| fractions.into_iter().map(|(p, q)| ExactScalar::new(p, q)).collect())
}

fn big_check(a: &IntMatrix, b: &[BigInt], scaled: &[BigInt], common: &BigInt) -> bool {
    a.mul_big(scaled).iter().zip(b).all(|(lhs, bi)| *lhs == bi * common)
}

fn to_i128_all(values: &[BigInt]) -> Option<Vec<i128>> {
    values.iter().map(|v| v.to_i128()).collect()
}
