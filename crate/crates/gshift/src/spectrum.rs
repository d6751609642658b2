//! The attainable degrees of one-step SFTs over a fixed presentation.

use std::collections::HashSet;

use crate::cayley::is_finite_representation;
use crate::combinatorics::xi_sequence;
use crate::degree::{spectral_radius, Snre, SnreFactor, SymbolClass};
use crate::presentation::MonoidPresentation;
use crate::{Error, Result};

/// Default cap on the matrix-family enumeration of the general spectrum.
pub const DEFAULT_SPECTRUM_CAP: u128 = 10_000_000;

/// Per-lag multiplicities assigned to the growing symbol, bounded by xi.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlphaVector {
    alpha: Vec<u64>,
}

impl AlphaVector {
    pub fn new(alpha: Vec<u64>) -> Self {
        AlphaVector { alpha }
    }

    pub fn values(&self) -> &[u64] {
        &self.alpha
    }

    pub fn sum(&self) -> u64 {
        self.alpha.iter().sum()
    }
}

/// Largest real root of `x^d - sum alpha_i x^{d-i}`: 0 when alpha vanishes,
/// otherwise bisection of the unique root in [1, 1 + sum alpha].
pub fn max_real_root(alpha: &AlphaVector) -> f64 {
    let s = alpha.sum();
    if s == 0 {
        return 0.0;
    }
    let d = alpha.values().len() as i32;
    let f = |x: f64| -> f64 {
        let mut v = x.powi(d);
        for (i, &a) in alpha.values().iter().enumerate() {
            v -= a as f64 * x.powi(d - 1 - i as i32);
        }
        v
    };
    let mut lo = 1.0f64;
    let mut hi = 1.0 + s as f64;
    if f(lo) >= 0.0 {
        // f(1) = 1 - sum alpha <= 0 unless the sum is ... never here (s >= 1)
        return 1.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

fn ln_prime(lambda: f64) -> f64 {
    if lambda <= 1.0 {
        0.0
    } else {
        lambda.ln()
    }
}

/// One attainable degree and the object realizing it.
#[derive(Clone, Debug)]
pub struct SpectrumEntry {
    pub degree: f64,
    pub lambda: f64,
    pub witness: SpectrumWitness,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SpectrumWitness {
    Alpha(Vec<u64>),
    /// companion-form top blocks C_1..C_d over an essential alphabet
    Blocks(Vec<Vec<Vec<u64>>>),
}

/// Sorted, deduplicated set of attainable degrees.
#[derive(Clone, Debug)]
pub struct SpectrumSet {
    entries: Vec<SpectrumEntry>,
}

impl SpectrumSet {
    fn from_entries(mut raw: Vec<SpectrumEntry>) -> Self {
        // stable sort keeps the first (lexicographically smallest) witness
        raw.sort_by(|a, b| a.degree.partial_cmp(&b.degree).unwrap());
        let mut entries: Vec<SpectrumEntry> = Vec::new();
        for e in raw {
            if entries.last().is_none_or(|p| e.degree - p.degree > 1e-9) {
                entries.push(e);
            }
        }
        SpectrumSet { entries }
    }

    pub fn entries(&self) -> &[SpectrumEntry] {
        &self.entries
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.degree).collect()
    }

    pub fn contains(&self, degree: f64, tol: f64) -> bool {
        self.entries.iter().any(|e| (e.degree - degree).abs() <= tol)
    }

    pub fn max(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.degree)
    }
}

/// All degrees of two-letter SFTs: `{ ln' lambda(alpha) : alpha <= xi }`.
pub fn spectrum_k2(p: &MonoidPresentation) -> Result<SpectrumSet> {
    if !is_finite_representation(p) {
        return Err(Error::InfiniteRepresentation);
    }
    let xi = xi_sequence(p);
    let d = p.d();
    let mut raw = Vec::new();
    let mut alpha = vec![0u64; d];
    loop {
        let a = AlphaVector::new(alpha.clone());
        let lambda = max_real_root(&a);
        raw.push(SpectrumEntry {
            degree: ln_prime(lambda),
            lambda,
            witness: SpectrumWitness::Alpha(alpha.clone()),
        });
        let mut pos = d;
        loop {
            if pos == 0 {
                return Ok(SpectrumSet::from_entries(raw));
            }
            pos -= 1;
            alpha[pos] += 1;
            if alpha[pos] <= xi.get(pos + 1) {
                break;
            }
            alpha[pos] = 0;
        }
    }
}

/// Rows of length `l` with nonnegative entries summing to at most `bound`.
fn rows_bounded(l: usize, bound: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut row = vec![0u64; l];
    loop {
        if row.iter().sum::<u64>() <= bound {
            out.push(row.clone());
        }
        let mut pos = l;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            row[pos] += 1;
            if row[pos] <= bound {
                break;
            }
            row[pos] = 0;
        }
    }
}

fn canonical_blocks(blocks: &[Vec<Vec<u64>>], l: usize) -> Vec<Vec<Vec<u64>>> {
    // minimum over simultaneous row/column permutations of the symbols
    let mut perm: Vec<usize> = (0..l).collect();
    let mut best: Option<Vec<Vec<Vec<u64>>>> = None;
    loop {
        let image: Vec<Vec<Vec<u64>>> = blocks
            .iter()
            .map(|c| {
                (0..l)
                    .map(|p| (0..l).map(|q| c[perm[p]][perm[q]]).collect())
                    .collect()
            })
            .collect();
        if best.as_ref().is_none_or(|b| &image < b) {
            best = Some(image);
        }
        // next permutation in lexicographic order
        let mut i = l.saturating_sub(1);
        while i > 0 && perm[i - 1] >= perm[i] {
            i -= 1;
        }
        if i == 0 {
            return best.unwrap();
        }
        let mut j = l - 1;
        while perm[j] <= perm[i - 1] {
            j -= 1;
        }
        perm.swap(i - 1, j);
        perm[i..].reverse();
    }
}

/// All degrees from companion-block matrices with blocks `C_1..C_d` of size
/// `l x l` for every `1 <= l <= k`, row sums of `C_i` at most `xi_i`.
pub fn spectrum_general(p: &MonoidPresentation, k: usize, cap: u128) -> Result<SpectrumSet> {
    if !is_finite_representation(p) {
        return Err(Error::InfiniteRepresentation);
    }
    if k == 0 {
        return Err(Error::InvalidInput("alphabet size must be >= 1".into()));
    }
    let xi = xi_sequence(p);
    let lmax = xi.max_lag();
    let mut raw = vec![SpectrumEntry {
        degree: 0.0,
        lambda: 0.0,
        witness: SpectrumWitness::Blocks(Vec::new()),
    }];
    if lmax == 0 {
        return Ok(SpectrumSet::from_entries(raw));
    }

    let mut total: u128 = 0;
    for l in 1..=k {
        let mut count: u128 = 1;
        for m in 1..=lmax {
            count = count.saturating_mul(
                (rows_bounded(l, xi.get(m)).len() as u128).saturating_pow(l as u32),
            );
        }
        total = total.saturating_add(count);
    }
    if total > cap {
        return Err(Error::ResourceCap(format!(
            "{total} candidate matrices exceed the cap of {cap}"
        )));
    }

    for l in 1..=k {
        let row_choices: Vec<Vec<Vec<u64>>> =
            (1..=lmax).map(|m| rows_bounded(l, xi.get(m))).collect();
        // one row index per (lag, row) slot
        let slots = lmax * l;
        let mut idx = vec![0usize; slots];
        let mut seen: HashSet<Vec<Vec<Vec<u64>>>> = HashSet::new();
        loop {
            let blocks: Vec<Vec<Vec<u64>>> = (0..lmax)
                .map(|m| (0..l).map(|row| row_choices[m][idx[m * l + row]].clone()).collect())
                .collect();
            if seen.insert(canonical_blocks(&blocks, l)) {
                let dim = l * lmax;
                let mut mat = vec![vec![0u64; dim]; dim];
                for (m, c) in blocks.iter().enumerate() {
                    for r in 0..l {
                        for q in 0..l {
                            mat[r][m * l + q] = c[r][q];
                        }
                    }
                }
                for i in l..dim {
                    mat[i][i - l] = 1;
                }
                let rho = spectral_radius(&mat, 1e-12)?;
                raw.push(SpectrumEntry {
                    degree: ln_prime(rho),
                    lambda: rho,
                    witness: SpectrumWitness::Blocks(blocks),
                });
            }
            let mut pos = slots;
            let done = loop {
                if pos == 0 {
                    break true;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < row_choices[pos / l].len() {
                    break false;
                }
                idx[pos] = 0;
            };
            if done {
                break;
            }
        }
    }
    Ok(SpectrumSet::from_entries(raw))
}

/// A two-letter recurrence system attaining degree `ln' lambda(alpha)`:
/// symbol 1 collects `alpha_m` copies of itself and `xi_m - alpha_m` copies
/// of the pinned symbol 2 at each lag.
pub fn realize_snre(p: &MonoidPresentation, alpha: &AlphaVector) -> Result<Snre> {
    if !is_finite_representation(p) {
        return Err(Error::InfiniteRepresentation);
    }
    let xi = xi_sequence(p);
    let d = p.d();
    if alpha.values().len() != d {
        return Err(Error::InvalidInput("alpha must have one entry per generator".into()));
    }
    for m in 1..=d {
        if alpha.values()[m - 1] > xi.get(m) {
            return Err(Error::InvalidInput(format!(
                "alpha_{m} = {} exceeds xi_{m} = {}",
                alpha.values()[m - 1],
                xi.get(m)
            )));
        }
    }
    let mut eq1 = Vec::new();
    let mut eq2 = Vec::new();
    for m in 1..=d {
        let a = alpha.values()[m - 1];
        for _ in 0..a {
            eq1.push(SnreFactor { lag: m, coeffs: vec![1, 0] });
        }
        for _ in a..xi.get(m) {
            eq1.push(SnreFactor { lag: m, coeffs: vec![0, 1] });
        }
        for _ in 0..xi.get(m) {
            eq2.push(SnreFactor { lag: m, coeffs: vec![0, 1] });
        }
    }
    // the counting system is identically 1 from unit seeds, so growth is
    // carried by the markings: symbol 1 grows exactly when alpha is nonzero
    let class1 = if alpha.sum() > 0 { SymbolClass::Essential } else { SymbolClass::InessentialLive };
    Snre::new(2, xi.values().to_vec(), vec![eq1, eq2], vec![class1, SymbolClass::InessentialLive])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{degree_from_snre, DEFAULT_SUBSYSTEM_CAP};

    fn sample3() -> MonoidPresentation {
        MonoidPresentation::new(3, vec![vec![0, 1, 1], vec![0, 0, 1], vec![1, 1, 1]]).unwrap()
    }

    #[test]
    fn max_real_root_examples() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((max_real_root(&AlphaVector::new(vec![1, 1])) - phi).abs() <= 1e-9);
        assert_eq!(max_real_root(&AlphaVector::new(vec![0, 0, 0])), 0.0);
        let rho = max_real_root(&AlphaVector::new(vec![1, 2, 1]));
        assert!((rho - 2.147899).abs() <= 1e-5);
        // residual stays below tolerance
        for alpha in [vec![3, 0], vec![0, 4], vec![2, 1, 5]] {
            let a = AlphaVector::new(alpha.clone());
            let l = max_real_root(&a);
            let d = alpha.len() as i32;
            let mut res = l.powi(d);
            for (i, &v) in alpha.iter().enumerate() {
                res -= v as f64 * l.powi(d - 1 - i as i32);
            }
            assert!(res.abs() <= 1e-9 * l.powi(d).max(1.0));
        }
    }

    #[test]
    fn spectrum_free_monoids() {
        for d in 2..=4usize {
            let set = spectrum_k2(&MonoidPresentation::free_monoid(d)).unwrap();
            let expect: Vec<f64> =
                std::iter::once(0.0).chain((2..=d).map(|v| (v as f64).ln())).collect();
            let got = set.degrees();
            assert_eq!(got.len(), expect.len(), "d={d}");
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() <= 1e-9, "d={d}");
            }
        }
    }

    #[test]
    fn spectrum_fibonacci() {
        let set = spectrum_k2(&MonoidPresentation::fibonacci()).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(set.degrees().len(), 2);
        assert!(set.contains(0.0, 1e-12));
        assert!(set.contains(phi.ln(), 1e-9));
    }

    #[test]
    fn spectrum_sample_bounds() {
        let p = sample3();
        let set = spectrum_k2(&p).unwrap();
        let rho = max_real_root(&AlphaVector::new(vec![1, 2, 1]));
        assert!(set.contains(0.0, 1e-12));
        assert!((set.max() - rho.ln()).abs() <= 1e-9);
        // 2 * 3 * 2 alpha vectors before dedup
        assert!(set.degrees().len() <= 12);
    }

    #[test]
    fn general_spectrum_contains_k2() {
        let p = MonoidPresentation::fibonacci();
        let k2 = spectrum_k2(&p).unwrap();
        let gen = spectrum_general(&p, 2, DEFAULT_SPECTRUM_CAP).unwrap();
        for d in k2.degrees() {
            assert!(gen.contains(d, 1e-9), "missing {d}");
        }
        assert!((gen.max() - k2.max()).abs() <= 1e-9);
        assert!(gen.contains(0.0, 1e-12));

        // free monoid d=2, k=2 includes ln phi via C_1 = [[1,1],[1,0]]
        let free2 = MonoidPresentation::free_monoid(2);
        let g = spectrum_general(&free2, 2, DEFAULT_SPECTRUM_CAP).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(g.contains(phi.ln(), 1e-9));
        assert!(g.contains(2f64.ln(), 1e-9));
        assert!((g.max() - 2f64.ln()).abs() <= 1e-9);
    }

    #[test]
    fn general_spectrum_cap() {
        let p = sample3();
        assert!(matches!(
            spectrum_general(&p, 3, 10),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn realization_round_trip() {
        let p = sample3();
        let xi = xi_sequence(&p);
        let mut alpha = vec![0u64; 3];
        loop {
            let a = AlphaVector::new(alpha.clone());
            let snre = realize_snre(&p, &a).unwrap();
            let res = degree_from_snre(&snre, DEFAULT_SUBSYSTEM_CAP).unwrap();
            let expect = ln_prime(max_real_root(&a));
            assert!(
                (res.degree - expect).abs() <= 1e-9,
                "alpha={alpha:?} got {} want {expect}",
                res.degree
            );
            let mut pos = 3;
            loop {
                if pos == 0 {
                    return;
                }
                pos -= 1;
                alpha[pos] += 1;
                if alpha[pos] <= xi.get(pos + 1) {
                    break;
                }
                alpha[pos] = 0;
            }
        }
    }

    #[test]
    fn realize_rejects_oversized_alpha() {
        let p = sample3();
        assert!(matches!(
            realize_snre(&p, &AlphaVector::new(vec![2, 0, 0])),
            Err(Error::InvalidInput(_))
        ));
    }
}
