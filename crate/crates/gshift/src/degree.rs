//! Lag-form recurrence systems, simple subsystems and their adjacency
//! matrices, and the topological degree with a deterministic witness.

use std::collections::HashSet;

use crate::cayley::is_finite_representation;
use crate::combinatorics::xi_sequence;
use crate::presentation::{GeneratorId, MonoidPresentation};
use crate::sft::{essential_symbols, EssentialSet, SftRules};
use crate::{poly, Error, Result};

/// Default cap on the number of per-factor choice combinations explored.
pub const DEFAULT_SUBSYSTEM_CAP: u128 = 10_000_000;

/// How a root label behaves under iterated counting.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SymbolClass {
    /// block count reaches 2 and never vanishes
    Essential,
    /// block count stays pinned at 1
    InessentialLive,
    /// block count eventually hits 0
    Dead,
}

/// One multiplicative factor of a root equation: a linear form in the
/// counts at lag `lag`, with nonnegative integer coefficients per label.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SnreFactor {
    pub lag: usize,
    pub coeffs: Vec<u64>,
}

/// The lag-form recurrence system of a one-step SFT: one equation per root
/// label, each a product of linear factors, exactly `xi_m` factors at lag m.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Snre {
    k: usize,
    xi: Vec<u64>,
    equations: Vec<Vec<SnreFactor>>,
    classes: Vec<SymbolClass>,
}

impl Snre {
    pub fn new(
        k: usize,
        xi: Vec<u64>,
        equations: Vec<Vec<SnreFactor>>,
        classes: Vec<SymbolClass>,
    ) -> Result<Self> {
        if equations.len() != k || classes.len() != k {
            return Err(Error::InvalidInput("need one equation and class per label".into()));
        }
        for eq in &equations {
            for m in 1..=xi.len() {
                let have = eq.iter().filter(|f| f.lag == m).count() as u64;
                if have != xi[m - 1] {
                    return Err(Error::InvalidInput(format!(
                        "equation has {have} factors at lag {m}, expected {}",
                        xi[m - 1]
                    )));
                }
            }
            if eq.iter().any(|f| f.lag == 0 || f.lag > xi.len() || f.coeffs.len() != k) {
                return Err(Error::InvalidInput("malformed factor".into()));
            }
        }
        Ok(Snre { k, xi, equations, classes })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn xi(&self) -> &[u64] {
        &self.xi
    }

    /// Largest lag carrying any factor.
    pub fn max_lag(&self) -> usize {
        (1..=self.xi.len()).rev().find(|&m| self.xi[m - 1] != 0).unwrap_or(0)
    }

    pub fn equations(&self) -> &[Vec<SnreFactor>] {
        &self.equations
    }

    pub fn classes(&self) -> &[SymbolClass] {
        &self.classes
    }

    /// Labels that can carry doubly exponential growth (zero-based).
    pub fn active_symbols(&self) -> Vec<usize> {
        (0..self.k)
            .filter(|&i| self.classes[i] == SymbolClass::Essential)
            .collect()
    }
}

fn classes_of(essential: &EssentialSet) -> Vec<SymbolClass> {
    (0..essential.k())
        .map(|i| {
            if essential.is_dead(i) {
                SymbolClass::Dead
            } else if essential.is_essential(i) {
                SymbolClass::Essential
            } else {
                SymbolClass::InessentialLive
            }
        })
        .collect()
}

fn mat_mul_u64(a: &[Vec<u64>], b: &[Vec<u64>]) -> Vec<Vec<u64>> {
    let n = a.len();
    let mut out = vec![vec![0u64; n]; n];
    for i in 0..n {
        for l in 0..n {
            if a[i][l] == 0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

/// Eliminates the transient follower states: every maximal chain of
/// non-free generators ending in a free one becomes a single lag-m factor
/// whose coefficient row is the corresponding product of rule matrices.
pub fn build_snre(
    p: &MonoidPresentation,
    r: &SftRules,
    essential: &EssentialSet,
) -> Result<Snre> {
    if !is_finite_representation(p) {
        return Err(Error::InfiniteRepresentation);
    }
    if r.d() != p.d() {
        return Err(Error::InvalidInput("rules do not match the presentation".into()));
    }
    let d = p.d();
    let k = r.k();
    let rule_of = |l: usize| -> Vec<Vec<u64>> {
        r.rules()[l]
            .iter()
            .map(|row| row.iter().map(|&v| v as u64).collect())
            .collect()
    };
    // (lag, product matrix) per path of non-free generators closed by a
    // free one, in lexicographic path order
    let mut factors: Vec<(usize, Vec<Vec<u64>>)> = Vec::new();
    let mut stack: Vec<(Vec<usize>, Vec<Vec<u64>>)> = Vec::new();
    for l in (0..d).rev() {
        stack.push((vec![l], rule_of(l)));
    }
    while let Some((path, prod)) = stack.pop() {
        let last = *path.last().unwrap();
        if p.is_right_free(GeneratorId::from_zero_based(last)) {
            factors.push((path.len(), prod));
            continue;
        }
        if path.len() == d {
            // cannot happen on a finite representation
            return Err(Error::Numerical("non-free chain longer than d".into()));
        }
        for l in (0..d).rev() {
            if p.matrix()[last][l] == 1 {
                let mut next = path.clone();
                next.push(l);
                stack.push((next, mat_mul_u64(&prod, &rule_of(l))));
            }
        }
    }
    factors.sort_by_key(|(m, _)| *m);

    let xi = xi_sequence(p);
    for m in 1..=d {
        let have = factors.iter().filter(|(lag, _)| *lag == m).count() as u64;
        if have != xi.get(m) {
            return Err(Error::Numerical(format!(
                "{have} chains at lag {m}, expected xi_{m} = {}",
                xi.get(m)
            )));
        }
    }

    let equations = (0..k)
        .map(|i| {
            factors
                .iter()
                .map(|(lag, prod)| SnreFactor { lag: *lag, coeffs: prod[i].clone() })
                .collect()
        })
        .collect();
    Snre::new(k, xi.values().to_vec(), equations, classes_of(essential))
}

/// One choice of symbol per factor, restricted to the active labels.
/// `None` marks a factor with no active coefficient; it contributes a
/// bounded multiplier and no matrix entry.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SimpleSubsystem {
    choices: Vec<Option<usize>>,
}

impl SimpleSubsystem {
    pub(crate) fn from_choices(choices: Vec<Option<usize>>) -> Self {
        SimpleSubsystem { choices }
    }

    /// Chosen labels (zero-based), flattened row-major over active root
    /// labels and their factors in lag order.
    pub fn choices(&self) -> &[Option<usize>] {
        &self.choices
    }
}

/// Companion-block adjacency matrix of a simple subsystem.
pub type AdjacencyMatrix = Vec<Vec<u64>>;

fn companion_matrix(
    snre: &Snre,
    active: &[usize],
    lmax: usize,
    choices: &[Option<usize>],
) -> AdjacencyMatrix {
    let e = active.len();
    let dim = e * lmax;
    let mut m = vec![vec![0u64; dim]; dim];
    let mut pos = 0usize;
    for (row, &i) in active.iter().enumerate() {
        for f in &snre.equations()[i] {
            if let Some(j) = choices[pos] {
                let col = active.iter().position(|&a| a == j).unwrap();
                m[row][(f.lag - 1) * e + col] += 1;
            }
            pos += 1;
        }
    }
    for idx in e..dim {
        m[idx][idx - e] = 1;
    }
    m
}

/// Every assignment of one active label per factor, in lexicographic order
/// of the choice vector, deduplicated by the resulting matrix (first
/// occurrence kept, so each matrix carries its smallest witness).
pub fn enumerate_simple_subsystems(
    snre: &Snre,
    cap: u128,
) -> Result<Vec<(SimpleSubsystem, AdjacencyMatrix)>> {
    let active = snre.active_symbols();
    let lmax = snre.max_lag();
    if active.is_empty() || lmax == 0 {
        return Ok(Vec::new());
    }
    // per flattened factor: the ascending list of admissible labels
    let mut options: Vec<Vec<Option<usize>>> = Vec::new();
    for &i in &active {
        for f in &snre.equations()[i] {
            let opts: Vec<Option<usize>> = active
                .iter()
                .filter(|&&j| f.coeffs[j] >= 1)
                .map(|&j| Some(j))
                .collect();
            options.push(if opts.is_empty() { vec![None] } else { opts });
        }
    }
    let total: u128 = options.iter().map(|o| o.len() as u128).product();
    if total > cap {
        return Err(Error::ResourceCap(format!(
            "{total} choice combinations exceed the cap of {cap}"
        )));
    }

    let mut out: Vec<(SimpleSubsystem, AdjacencyMatrix)> = Vec::new();
    let mut seen: HashSet<AdjacencyMatrix> = HashSet::new();
    let mut idx = vec![0usize; options.len()];
    loop {
        let choices: Vec<Option<usize>> =
            idx.iter().zip(&options).map(|(&t, o)| o[t]).collect();
        let m = companion_matrix(snre, &active, lmax, &choices);
        if seen.insert(m.clone()) {
            out.push((SimpleSubsystem { choices }, m));
        }
        // odometer, least-significant position last
        let mut pos = options.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Spectral radius of a nonnegative integer matrix: power iteration on
/// M + I, falling back to exact bisection on the characteristic polynomial
/// when the iteration stalls.
pub fn spectral_radius(m: &[Vec<u64>], tol: f64) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    poly::spectral_radius_checked(m, tol)
}

/// Independent route: largest real root of the exact characteristic
/// polynomial, located by a Sturm-chain bisection.
pub fn spectral_radius_exact(m: &[Vec<u64>], tol: f64) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    poly::exact_spectral_radius(m, tol)
}

/// Degree of a recurrence system with a deterministic witness.
#[derive(Clone, Debug)]
pub struct DegreeResult {
    /// natural log of the winning spectral radius, floored at 0
    pub degree: f64,
    pub spectral_radius: f64,
    /// one-based labels counted as essential
    pub essential: Vec<usize>,
    /// degree equals the unconstrained bound ln' rho_A
    pub full_degree: bool,
    pub witness: Option<(SimpleSubsystem, AdjacencyMatrix)>,
}

/// True iff some nonempty set of active labels is closed under the factor
/// structure: every factor of every member admits a choice inside the set.
/// Restricting to such a set yields full row sums, hence degree ln rho_A;
/// the degenerate rho_A <= 1 presentations have full degree vacuously.
pub fn full_degree_from_snre(snre: &Snre) -> bool {
    if snre.xi().iter().sum::<u64>() <= 1 {
        // xi summing to <= 1 forces rho_A <= 1, so ln' rho_A = 0 = degree
        return true;
    }
    let mut kept: Vec<usize> = snre.active_symbols();
    loop {
        let next: Vec<usize> = kept
            .iter()
            .copied()
            .filter(|&i| {
                snre.equations()[i]
                    .iter()
                    .all(|f| kept.iter().any(|&j| f.coeffs[j] >= 1))
            })
            .collect();
        if next.len() == kept.len() {
            return !kept.is_empty();
        }
        kept = next;
    }
}

/// Maximum of ln' rho over the deduplicated simple-subsystem matrices.
pub fn degree_from_snre(snre: &Snre, cap: u128) -> Result<DegreeResult> {
    let subsystems = enumerate_simple_subsystems(snre, cap)?;
    let mut best: Option<(f64, usize)> = None;
    for (pos, (_, m)) in subsystems.iter().enumerate() {
        let rho = spectral_radius(m, 1e-12)?;
        if best.map_or(true, |(b, _)| rho > b + 1e-12) {
            best = Some((rho, pos));
        }
    }
    let (rho, witness) = match best {
        Some((rho, pos)) => (rho, Some(subsystems[pos].clone())),
        None => (0.0, None),
    };
    Ok(DegreeResult {
        degree: rho.ln().max(0.0),
        spectral_radius: rho,
        essential: snre.active_symbols().iter().map(|&i| i + 1).collect(),
        full_degree: full_degree_from_snre(snre),
        witness,
    })
}

/// Topological degree of the one-step SFT `r` over `p`.
pub fn degree(p: &MonoidPresentation, r: &SftRules) -> Result<DegreeResult> {
    let essential = essential_symbols(p, r)?;
    let snre = build_snre(p, r, &essential)?;
    degree_from_snre(&snre, DEFAULT_SUBSYSTEM_CAP)
}

/// Whether the degree attains the unconstrained bound ln' rho_A.
pub fn full_degree_check(p: &MonoidPresentation, r: &SftRules) -> Result<bool> {
    let essential = essential_symbols(p, r)?;
    Ok(full_degree_from_snre(&build_snre(p, r, &essential)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::char_poly_trace_recursion;
    use crate::poly::largest_real_root_in;
    use num_rational::BigRational;

    fn sample3() -> MonoidPresentation {
        MonoidPresentation::new(3, vec![vec![0, 1, 1], vec![0, 0, 1], vec![1, 1, 1]]).unwrap()
    }

    fn rho_a(p: &MonoidPresentation) -> f64 {
        let cp = char_poly_trace_recursion(p.matrix()).unwrap();
        let bound = BigRational::from_integer((p.d() as u64 + 1).into());
        largest_real_root_in(cp.coeffs(), bound, 1e-13)
    }

    #[test]
    fn snre_structure_full_shift() {
        let p = sample3();
        let r = SftRules::full_shift(3, 2);
        let e = essential_symbols(&p, &r).unwrap();
        let snre = build_snre(&p, &r, &e).unwrap();
        assert_eq!(snre.xi(), &[1, 2, 1]);
        assert_eq!(snre.max_lag(), 3);
        for eq in snre.equations() {
            let lags: Vec<usize> = eq.iter().map(|f| f.lag).collect();
            assert_eq!(lags, vec![1, 2, 2, 3]);
            for f in eq {
                // full-shift products collapse to k^(lag-1) everywhere
                let expect = 2u64.pow(f.lag as u32 - 1);
                assert_eq!(f.coeffs, vec![expect, expect]);
            }
        }
        assert_eq!(snre.active_symbols(), vec![0, 1]);
    }

    #[test]
    fn snre_structure_hom_shift() {
        let fib = MonoidPresentation::fibonacci();
        let r = SftRules::hom_shift(2, vec![vec![1, 1], vec![1, 0]]).unwrap();
        let e = essential_symbols(&fib, &r).unwrap();
        let snre = build_snre(&fib, &r, &e).unwrap();
        assert_eq!(snre.xi(), &[1, 1]);
        // lag 1: rows of T; lag 2: rows of T^2
        assert_eq!(snre.equations()[0][0].coeffs, vec![1, 1]);
        assert_eq!(snre.equations()[1][0].coeffs, vec![1, 0]);
        assert_eq!(snre.equations()[0][1].coeffs, vec![2, 1]);
        assert_eq!(snre.equations()[1][1].coeffs, vec![1, 1]);
    }

    #[test]
    fn subsystem_row_sums_and_eigen_identity() {
        let p = sample3();
        let r = SftRules::full_shift(3, 2);
        let e = essential_symbols(&p, &r).unwrap();
        let snre = build_snre(&p, &r, &e).unwrap();
        let subs = enumerate_simple_subsystems(&snre, DEFAULT_SUBSYSTEM_CAP).unwrap();
        assert!(!subs.is_empty());
        let rho = rho_a(&p);
        let lmax = snre.max_lag();
        for (_, m) in &subs {
            assert_eq!(m.len(), 2 * lmax);
            for row in 0..2 {
                for lag in 1..=lmax {
                    let sum: u64 = (0..2).map(|q| m[row][(lag - 1) * 2 + q]).sum();
                    assert_eq!(sum, snre.xi()[lag - 1]);
                }
            }
            // Mv = rho v with v = (rho^2, rho^2, rho, rho, 1, 1)
            let v: Vec<f64> = (0..lmax)
                .rev()
                .flat_map(|t| std::iter::repeat(rho.powi(t as i32)).take(2))
                .collect();
            for i in 0..m.len() {
                let mv: f64 = (0..m.len()).map(|j| m[i][j] as f64 * v[j]).sum();
                assert!((mv - rho * v[i]).abs() <= 1e-6 * rho.powi(2));
            }
        }
    }

    #[test]
    fn radius_routes_agree_on_enumerated_matrices() {
        let p = sample3();
        let r = SftRules::full_shift(3, 2);
        let e = essential_symbols(&p, &r).unwrap();
        let snre = build_snre(&p, &r, &e).unwrap();
        for (_, m) in enumerate_simple_subsystems(&snre, DEFAULT_SUBSYSTEM_CAP).unwrap() {
            let a = spectral_radius(&m, 1e-12).unwrap();
            let b = spectral_radius_exact(&m, 1e-12).unwrap();
            assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn degree_full_shift_is_ln_rho() {
        for p in [sample3(), MonoidPresentation::fibonacci(), MonoidPresentation::free_monoid(3)] {
            let res = degree(&p, &SftRules::full_shift(p.d(), 2)).unwrap();
            assert!((res.degree - rho_a(&p).ln()).abs() <= 1e-9, "d={}", p.d());
            assert!(res.full_degree);
            assert_eq!(res.essential, vec![1, 2]);
            assert!(res.witness.is_some());
        }
    }

    #[test]
    fn degree_degenerate_cases() {
        let p = sample3();
        let res = degree(&p, &SftRules::full_shift(3, 1)).unwrap();
        assert_eq!(res.degree, 0.0);
        assert!(res.essential.is_empty());
        assert!(res.witness.is_none());
        assert!(!res.full_degree);

        // golden-mean hom-shift on the Fibonacci monoid: still full degree
        let fib = MonoidPresentation::fibonacci();
        let gm = SftRules::hom_shift(2, vec![vec![1, 1], vec![1, 0]]).unwrap();
        let res = degree(&fib, &gm).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((res.degree - phi.ln()).abs() <= 1e-9);
        assert!(res.full_degree);
    }

    #[test]
    fn degree_with_inessential_symbol() {
        let fib = MonoidPresentation::fibonacci();
        // symbol 2 can only be followed by itself: inessential but alive
        let r = SftRules::hom_shift(2, vec![vec![1, 1], vec![0, 1]]).unwrap();
        let res = degree(&fib, &r).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert_eq!(res.essential, vec![1]);
        assert!((res.degree - phi.ln()).abs() <= 1e-9);
        assert!(res.full_degree);

        // now starve the lag-1 factor of symbol 1: degree collapses to 0
        let r2 = SftRules::new(
            2,
            vec![
                vec![vec![0, 1], vec![0, 1]],
                vec![vec![1, 1], vec![0, 1]],
            ],
        )
        .unwrap();
        let res2 = degree(&fib, &r2).unwrap();
        assert_eq!(res2.essential, vec![1]);
        assert_eq!(res2.degree, 0.0);
        assert!(!res2.full_degree);
        assert!(!full_degree_check(&fib, &r2).unwrap());
    }

    #[test]
    fn degree_never_exceeds_ln_rho() {
        let p = sample3();
        let bound = rho_a(&p).ln() + 1e-9;
        for bits in 0..64u32 {
            // vary only the first rule matrix, keep the rest full
            let mut rules = vec![vec![vec![1u8; 2]; 2]; 3];
            for i in 0..2 {
                for j in 0..2 {
                    rules[0][i][j] = ((bits >> (i * 2 + j)) & 1) as u8;
                    rules[1][i][j] = ((bits >> (4 + i)) & 1) as u8;
                }
            }
            let r = SftRules::new(2, rules).unwrap();
            let res = degree(&p, &r).unwrap();
            assert!(res.degree <= bound, "bits={bits} degree={}", res.degree);
            assert_eq!(
                res.full_degree,
                (res.degree - rho_a(&p).ln().max(0.0)).abs() <= 1e-9,
                "bits={bits}"
            );
        }
    }
}
