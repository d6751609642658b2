//! Exact polynomial helpers (trace recursion, Sturm chains) and the power
//! iteration used for spectral radii of nonnegative integer matrices.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

/// Characteristic polynomial of a square integer matrix via the trace
/// recursion, returned monic with coefficients in descending degree order.
/// Every division in the recursion must be exact.
pub(crate) fn char_poly_descending(m: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
    let n = m.len();
    if n == 0 {
        return Ok(vec![BigInt::one()]);
    }
    // traces of powers A^1..A^n
    let mut traces = Vec::with_capacity(n);
    let mut power = m.to_vec();
    traces.push(trace(&power));
    for _ in 1..n {
        power = mat_mul(&power, m);
        traces.push(trace(&power));
    }
    // b_0 = (-1)^n, b_k = -(1/k) (b_{k-1} A_1 + ... + b_1 A_{k-1} + (-1)^n A_k)
    let sign = if n % 2 == 0 { BigInt::one() } else { -BigInt::one() };
    let mut b = vec![BigInt::zero(); n + 1];
    b[0] = sign.clone();
    for k in 1..=n {
        let mut acc = &sign * &traces[k - 1];
        for i in 1..k {
            acc += &b[i] * &traces[k - i - 1];
        }
        let kk = BigInt::from(k);
        if (&acc % &kk) != BigInt::zero() {
            return Err(Error::Numerical(format!(
                "trace recursion division by {k} is not exact"
            )));
        }
        b[k] = -acc / kk;
    }
    // normalize to monic
    Ok(b.into_iter().map(|c| &sign * c).collect())
}

fn trace(m: &[Vec<BigInt>]) -> BigInt {
    (0..m.len()).map(|i| m[i][i].clone()).sum()
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for l in 0..n {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[l][j].is_zero() {
                    out[i][j] += &a[i][l] * &b[l][j];
                }
            }
        }
    }
    out
}

/// Natural log of a big unsigned integer; 0 maps to negative infinity.
pub(crate) fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shifted = x >> (bits - 53);
    let mantissa = shifted.to_f64().expect("53 bits fit in f64");
    mantissa.ln() + (bits - 53) as f64 * std::f64::consts::LN_2
}

/// Power iteration on `M + I` from the all-ones vector; the identity shift
/// keeps the iteration positive and convergent for reducible matrices.
/// Returns the radius of `M` and the iteration count used.
pub(crate) fn power_iteration_radius(
    m: &[Vec<u64>],
    tol: f64,
    max_iter: usize,
) -> Result<(f64, usize)> {
    let n = m.len();
    if n == 0 {
        return Ok((0.0, 0));
    }
    let b: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| m[i][j] as f64 + if i == j { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut x = vec![1.0f64; n];
    let mut prev = f64::NAN;
    let mut stable = 0;
    for iter in 1..=max_iter {
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            let row = &b[i];
            let mut acc = 0.0;
            for j in 0..n {
                acc += row[j] * x[j];
            }
            y[i] = acc;
        }
        let norm = y.iter().cloned().fold(0.0f64, f64::max);
        if norm == 0.0 {
            return Ok((0.0, iter));
        }
        let lam = norm;
        for v in &mut y {
            *v /= norm;
        }
        x = y;
        if (lam - prev).abs() <= tol * lam.max(1.0) {
            stable += 1;
            if stable >= 4 {
                return Ok(((lam - 1.0).max(0.0), iter));
            }
        } else {
            stable = 0;
        }
        prev = lam;
    }
    Err(Error::Numerical(format!(
        "power iteration did not converge in {max_iter} iterations"
    )))
}

/// Exact spectral radius of a nonnegative integer matrix: the radius is the
/// largest real root of the characteristic polynomial (Perron-Frobenius),
/// isolated by a Sturm chain on the square-free part and refined by bisection.
pub(crate) fn exact_spectral_radius(m: &[Vec<u64>], tol: f64) -> Result<f64> {
    let n = m.len();
    if n == 0 {
        return Ok(0.0);
    }
    let big: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let coeffs = char_poly_descending(&big)?;
    let max_row_sum = m
        .iter()
        .map(|row| row.iter().sum::<u64>())
        .max()
        .unwrap_or(0);
    Ok(largest_real_root_in(&coeffs, BigRational::from(BigInt::from(max_row_sum + 1)), tol))
}

/// Largest real root of the (monic, descending) integer polynomial inside
/// `(0, hi]`, or 0 when there is none. All roots of interest are simple after
/// passing to the square-free part, so sign bisection is safe.
pub(crate) fn largest_real_root_in(coeffs_desc: &[BigInt], hi: BigRational, tol: f64) -> f64 {
    // ascending rational coefficients
    let asc: Vec<BigRational> = coeffs_desc
        .iter()
        .rev()
        .map(|c| BigRational::from(c.clone()))
        .collect();
    let p = trim(asc);
    if degree(&p) == 0 {
        return 0.0;
    }
    let sqfree = square_free(&p);
    let chain = sturm_chain(&sqfree);
    let zero = BigRational::zero();
    let at_hi = variations(&chain, &hi);
    let roots_above = |x: &BigRational| variations(&chain, x) - at_hi;
    if roots_above(&zero) == 0 {
        return 0.0;
    }
    let mut lo = zero;
    let mut hi = hi;
    for _ in 0..80 {
        let mid = (&lo + &hi) / BigRational::from(BigInt::from(2));
        if roots_above(&mid) >= 1 {
            lo = mid;
        } else {
            hi = mid;
        }
        let width = (&hi - &lo).to_f64().unwrap_or(0.0);
        if width <= tol {
            break;
        }
    }
    ((&lo + &hi) / BigRational::from(BigInt::from(2)))
        .to_f64()
        .unwrap_or(0.0)
}

type Poly = Vec<BigRational>; // ascending

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && p.last().map(|c| c.is_zero()).unwrap_or(false) {
        p.pop();
    }
    p
}

fn degree(p: &Poly) -> usize {
    p.len() - 1
}

fn derivative(p: &Poly) -> Poly {
    if p.len() <= 1 {
        return vec![BigRational::zero()];
    }
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from(BigInt::from(i)))
        .collect()
}

fn eval(p: &Poly, x: &BigRational) -> BigRational {
    let mut acc = BigRational::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

/// Remainder of polynomial division, normalized to leading coefficient +-1
/// to keep rational growth in check.
fn rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = degree(b);
    let lb = b.last().unwrap().clone();
    while degree(&r) >= db && !r.iter().all(|c| c.is_zero()) {
        let dr = degree(&r);
        if r[dr].is_zero() {
            r = trim(r);
            if r.len() == 1 && r[0].is_zero() {
                break;
            }
            continue;
        }
        let factor = &r[dr] / &lb;
        let shift = dr - db;
        for i in 0..=db {
            let delta = &factor * &b[i];
            r[i + shift] -= delta;
        }
        r[dr] = BigRational::zero();
        r = trim(r);
        if r.len() == 1 && r[0].is_zero() {
            break;
        }
    }
    normalize(trim(r))
}

fn normalize(p: Poly) -> Poly {
    let lc = p.last().unwrap().clone();
    if lc.is_zero() {
        return p;
    }
    let scale = lc.abs();
    p.into_iter().map(|c| c / &scale).collect()
}

fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    let mut a = normalize(trim(a.clone()));
    let mut b = normalize(trim(b.clone()));
    while !(b.len() == 1 && b[0].is_zero()) {
        let r = rem(&a, &b);
        a = b;
        b = r;
    }
    a
}

fn poly_div_exact(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = degree(b);
    let lb = b.last().unwrap().clone();
    let mut q = vec![BigRational::zero(); a.len().saturating_sub(db)];
    while degree(&r) >= db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = degree(&r);
        let factor = &r[dr] / &lb;
        let shift = dr - db;
        q[shift] = factor.clone();
        for i in 0..=db {
            let delta = &factor * &b[i];
            r[i + shift] -= delta;
        }
        r = trim(r);
    }
    trim(q)
}

fn square_free(p: &Poly) -> Poly {
    let dp = derivative(p);
    if dp.len() == 1 && dp[0].is_zero() {
        return p.clone();
    }
    let g = poly_gcd(p, &dp);
    if degree(&g) == 0 {
        return p.clone();
    }
    poly_div_exact(p, &g)
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![normalize(p.clone())];
    let dp = derivative(p);
    if !(dp.len() == 1 && dp[0].is_zero()) {
        chain.push(normalize(dp));
        loop {
            let n = chain.len();
            let r = rem(&chain[n - 2], &chain[n - 1]);
            if r.len() == 1 && r[0].is_zero() {
                break;
            }
            chain.push(r.into_iter().map(|c| -c).collect());
            if degree(chain.last().unwrap()) == 0 {
                break;
            }
        }
    }
    chain
}

fn variations(chain: &[Poly], x: &BigRational) -> usize {
    let mut count = 0;
    let mut last: Option<bool> = None; // sign, true = positive
    for p in chain {
        let v = eval(p, x);
        if v.is_zero() {
            continue;
        }
        let sign = v.is_positive();
        if let Some(prev) = last {
            if prev != sign {
                count += 1;
            }
        }
        last = Some(sign);
    }
    count
}

/// Robust spectral radius for nonnegative integer matrices: power iteration
/// first, exact Sturm refinement when the iteration converges slowly.
pub(crate) fn spectral_radius_checked(m: &[Vec<u64>], tol: f64) -> Result<f64> {
    const SLOW: usize = 20_000;
    match power_iteration_radius(m, tol.min(1e-13), 200_000) {
        Ok((rho, iters)) if iters <= SLOW => Ok(rho),
        _ if m.len() <= 64 => exact_spectral_radius(m, tol),
        Ok((rho, _)) => Ok(rho),
        Err(e) => Err(e),
    }
}
