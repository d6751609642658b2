//! The xi-sequence, periodic-word families, their partition, and the two
//! routes to the characteristic polynomial of the relation matrix.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::cayley::is_finite_representation;
use crate::presentation::{GeneratorId, MonoidPresentation};
use crate::{poly, Error, Result};

/// Default cap on `|P_n|` during set-level enumeration.
pub const DEFAULT_PERIODIC_CAP: usize = 1_000_000;

/// `xi_n` counts n-words whose only right free generator is the last symbol.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct XiSequence {
    xi: Vec<u64>,
}

impl XiSequence {
    pub fn values(&self) -> &[u64] {
        &self.xi
    }

    /// `xi_n`, 1-based; 0 beyond the stored range.
    pub fn get(&self, n: usize) -> u64 {
        if n == 0 || n > self.xi.len() {
            0
        } else {
            self.xi[n - 1]
        }
    }

    /// Largest `m` with `xi_m != 0`, or 0 when the sequence vanishes.
    pub fn max_lag(&self) -> usize {
        (1..=self.xi.len()).rev().find(|&m| self.xi[m - 1] != 0).unwrap_or(0)
    }

    pub fn sum(&self) -> u64 {
        self.xi.iter().sum()
    }
}

/// `xi_1..xi_d` by dynamic programming over the non-free subgraph.
pub fn xi_sequence(p: &MonoidPresentation) -> XiSequence {
    let d = p.d();
    let free: Vec<bool> = (0..d)
        .map(|i| p.is_right_free(GeneratorId::from_zero_based(i)))
        .collect();
    let mut xi = Vec::with_capacity(d);
    // ways[i] = number of valid non-free sequences of length m ending in i
    let mut ways: Vec<u64> = (0..d).map(|i| if free[i] { 0 } else { 1 }).collect();
    for n in 1..=d {
        if n == 1 {
            xi.push(free.iter().filter(|&&f| f).count() as u64);
        } else {
            let mut count = 0u64;
            for i in 0..d {
                if ways[i] == 0 {
                    continue;
                }
                for j in 0..d {
                    if free[j] && p.matrix()[i][j] == 1 {
                        count += ways[i];
                    }
                }
            }
            xi.push(count);
            let mut next = vec![0u64; d];
            for i in 0..d {
                if ways[i] == 0 {
                    continue;
                }
                for j in 0..d {
                    if !free[j] && p.matrix()[i][j] == 1 {
                        next[j] += ways[i];
                    }
                }
            }
            ways = next;
        }
    }
    XiSequence { xi }
}

/// A finite family of periodic words: symbol sequences of length n+1 whose
/// first and last symbols agree and whose consecutive pairs are A-valid.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PeriodicFamily {
    n: usize,
    words: BTreeSet<Vec<GeneratorId>>,
}

impl PeriodicFamily {
    pub fn empty(n: usize) -> Self {
        PeriodicFamily { n, words: BTreeSet::new() }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &Vec<GeneratorId>> {
        self.words.iter()
    }

    pub fn contains(&self, w: &[GeneratorId]) -> bool {
        self.words.contains(w)
    }

    fn insert(&mut self, w: Vec<GeneratorId>) {
        debug_assert_eq!(w.len(), self.n + 1);
        self.words.insert(w);
    }
}

/// All of `P_n`: valid (n+1)-sequences with matching first/last symbol.
pub fn periodic_words(p: &MonoidPresentation, n: usize, cap: usize) -> Result<PeriodicFamily> {
    if n == 0 {
        return Err(Error::InvalidInput("periodic words need n >= 1".into()));
    }
    let mut fam = PeriodicFamily::empty(n);
    let mut stack: Vec<Vec<GeneratorId>> =
        p.generators().map(|s| vec![s]).collect();
    while let Some(word) = stack.pop() {
        if word.len() == n + 1 {
            if word[0] == word[n] {
                if fam.len() >= cap {
                    return Err(Error::ResourceCap(format!("|P_{n}| exceeds {cap}")));
                }
                fam.insert(word);
            }
            continue;
        }
        let last = *word.last().unwrap();
        for s in p.generators() {
            if p.allows(last, s) {
                let mut next = word.clone();
                next.push(s);
                stack.push(next);
            }
        }
    }
    Ok(fam)
}

/// `Xi_n`: members of `P_n` whose n-th symbol is the one and only right free
/// generator of the word.
pub fn enumerate_xi(p: &MonoidPresentation, n: usize) -> Result<PeriodicFamily> {
    if n == 0 {
        return Err(Error::InvalidInput("Xi_n needs n >= 1".into()));
    }
    let mut fam = PeriodicFamily::empty(n);
    // free generators may appear only at position n (1-based)
    let mut stack: Vec<Vec<GeneratorId>> = p
        .generators()
        .filter(|&s| if n == 1 { p.is_right_free(s) } else { !p.is_right_free(s) })
        .map(|s| vec![s])
        .collect();
    while let Some(word) = stack.pop() {
        if word.len() == n {
            // close the period: last symbol is free, so any return is valid
            let mut closed = word.clone();
            closed.push(word[0]);
            debug_assert!(p.allows(word[n - 1], word[0]));
            fam.insert(closed);
            continue;
        }
        let last = *word.last().unwrap();
        let at_free_position = word.len() + 1 == n;
        for s in p.generators() {
            if p.is_right_free(s) == at_free_position && p.allows(last, s) {
                let mut next = word.clone();
                next.push(s);
                stack.push(next);
            }
        }
    }
    Ok(fam)
}

/// `T(Xi_n)`: all cyclic translations of a `Xi_n` family.
pub fn translates(fam: &PeriodicFamily) -> PeriodicFamily {
    let n = fam.n();
    let mut out = PeriodicFamily::empty(n);
    for w in fam.words() {
        // w = u_1..u_n u_1; rotations u_i..u_n u_1..u_i for i = 1..n
        for i in 0..n {
            let mut rot: Vec<GeneratorId> = Vec::with_capacity(n + 1);
            rot.extend_from_slice(&w[i..n]);
            rot.extend_from_slice(&w[0..=i]);
            out.insert(rot);
        }
    }
    out
}

/// `L(P_m, Xi_n)`: inserts the initial n-subword of each `Xi_n` member right
/// after the first free generator of each periodic word.
pub fn insertions(
    p: &MonoidPresentation,
    pm: &PeriodicFamily,
    xn: &PeriodicFamily,
) -> Result<PeriodicFamily> {
    let m = pm.n();
    let n = xn.n();
    let mut out = PeriodicFamily::empty(m + n);
    for u in pm.words() {
        let s = u
            .iter()
            .position(|&g| p.is_right_free(g))
            .ok_or_else(|| {
                Error::InvalidInput("periodic word with no free generator".into())
            })?
            + 1; // 1-based position of the first free generator
        for v in xn.words() {
            let mut w: Vec<GeneratorId> = Vec::with_capacity(m + n + 1);
            w.extend_from_slice(&u[0..s]);
            w.extend_from_slice(&v[0..n]);
            w.extend_from_slice(&u[s..]);
            out.insert(w);
        }
    }
    Ok(out)
}

/// Outcome of the periodic-word partition check at a given n.
#[derive(Clone, Debug)]
pub struct PartitionReport {
    pub n: usize,
    /// set-level partition verified (pairwise disjoint, union = P_n)
    pub sets_partition: bool,
    /// tr(A^n) = n xi_n + sum tr(A^i) xi_{n-i}
    pub numeric_identity: bool,
    pub trace: BigInt,
    pub parts: Vec<(String, usize)>,
}

impl PartitionReport {
    pub fn holds(&self) -> bool {
        self.sets_partition && self.numeric_identity
    }
}

/// Traces `tr(A^1)..tr(A^n)` of the relation matrix.
pub fn relation_traces(p: &MonoidPresentation, n: usize) -> Vec<BigInt> {
    let d = p.d();
    let a: Vec<Vec<BigInt>> = p
        .matrix()
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut power = a.clone();
    let mut out = Vec::with_capacity(n);
    for step in 0..n {
        if step > 0 {
            let mut next = vec![vec![BigInt::zero(); d]; d];
            for i in 0..d {
                for l in 0..d {
                    if power[i][l].is_zero() {
                        continue;
                    }
                    for j in 0..d {
                        if !a[l][j].is_zero() {
                            next[i][j] += &power[i][l] * &a[l][j];
                        }
                    }
                }
            }
            power = next;
        }
        out.push((0..d).map(|i| power[i][i].clone()).sum());
    }
    out
}

/// Verifies that translations and insertions of the `Xi` families partition
/// `P_n`, both set-wise and numerically.
pub fn partition_check(p: &MonoidPresentation, n: usize, cap: usize) -> Result<PartitionReport> {
    if !is_finite_representation(p) {
        return Err(Error::InfiniteRepresentation);
    }
    if n == 0 {
        return Err(Error::InvalidInput("partition check needs n >= 1".into()));
    }
    let pn = periodic_words(p, n, cap)?;
    let xi = xi_sequence(p);
    let traces = relation_traces(p, n);

    let mut parts: Vec<(String, PeriodicFamily)> = Vec::new();
    parts.push((format!("T(Xi_{n})"), translates(&enumerate_xi(p, n)?)));
    for i in 1..n {
        let pm = periodic_words(p, n - i, cap)?;
        let xn = enumerate_xi(p, i)?;
        parts.push((format!("L(P_{}, Xi_{})", n - i, i), insertions(p, &pm, &xn)?));
    }

    let mut union: BTreeSet<Vec<GeneratorId>> = BTreeSet::new();
    let mut disjoint = true;
    let mut contained = true;
    for (_, fam) in &parts {
        for w in fam.words() {
            if !union.insert(w.clone()) {
                disjoint = false;
            }
            if !pn.contains(w) {
                contained = false;
            }
        }
    }
    let sets_partition = disjoint && contained && union.len() == pn.len();

    // tr(A^n) = n xi_n + sum_{i<n} tr(A^i) xi_{n-i}
    let mut rhs = BigInt::from(n as u64) * BigInt::from(xi.get(n));
    for i in 1..n {
        rhs += &traces[i - 1] * BigInt::from(xi.get(n - i));
    }
    let trace = traces[n - 1].clone();
    let numeric_identity = trace == rhs;

    Ok(PartitionReport {
        n,
        sets_partition,
        numeric_identity,
        trace,
        parts: parts.into_iter().map(|(name, fam)| (name, fam.len())).collect(),
    })
}

/// Monic integer polynomial, coefficients in descending degree order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CharPoly {
    coeffs: Vec<BigInt>,
}

impl CharPoly {
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn to_string_pretty(&self) -> String {
        let d = self.degree();
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() && i != 0 {
                continue;
            }
            let power = d - i;
            if !out.is_empty() {
                out.push_str(if c >= &BigInt::zero() { " + " } else { " - " });
            } else if c < &BigInt::zero() {
                out.push('-');
            }
            let mag = if c < &BigInt::zero() { -c } else { c.clone() };
            let show_coeff = mag != BigInt::one() || power == 0;
            if show_coeff {
                out.push_str(&mag.to_string());
            }
            if power > 0 {
                out.push('x');
                if power > 1 {
                    out.push_str(&format!("^{power}"));
                }
            }
        }
        out
    }
}

/// `f(x) = x^d - xi_1 x^{d-1} - ... - xi_d`.
pub fn char_poly_from_xi(xi: &XiSequence) -> CharPoly {
    let mut coeffs = vec![BigInt::one()];
    coeffs.extend(xi.values().iter().map(|&v| -BigInt::from(v)));
    CharPoly { coeffs }
}

/// Exact characteristic polynomial of a binary matrix via the trace
/// recursion; every division is exact by construction.
pub fn char_poly_trace_recursion(a: &[Vec<u8>]) -> Result<CharPoly> {
    let d = a.len();
    if a.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidInput("matrix must be square".into()));
    }
    let big: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    Ok(CharPoly { coeffs: poly::char_poly_descending(&big)? })
}
