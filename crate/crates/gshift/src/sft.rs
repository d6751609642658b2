//! One-step G-SFTs: exact block counting (brute-force oracle and
//! automaton-indexed recurrence) and the essential-symbol decision.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::cayley::{build_ball, to_follower_automaton, BallGraph, FollowerAutomaton};
use crate::poly::ln_big;
use crate::presentation::MonoidPresentation;
use crate::{Error, Result};

/// Default cap on the number of candidate labelings the oracle may visit.
pub const DEFAULT_LABELING_CAP: u64 = 100_000_000;

/// A one-step shift of finite type: `rules[l](i, j) = 1` exactly when label
/// `j` may sit at the far end of an `s_{l+1}` edge whose near end carries `i`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SftRules {
    k: usize,
    rules: Vec<Vec<Vec<u8>>>,
}

impl SftRules {
    pub fn new(k: usize, rules: Vec<Vec<Vec<u8>>>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidInput("alphabet size must be >= 1".into()));
        }
        if rules.is_empty() {
            return Err(Error::InvalidInput("need one rule matrix per generator".into()));
        }
        for m in &rules {
            if m.len() != k || m.iter().any(|r| r.len() != k) {
                return Err(Error::InvalidInput(format!("rule matrices must be {k}x{k}")));
            }
            if m.iter().flatten().any(|&v| v > 1) {
                return Err(Error::InvalidInput("rule entries must be 0 or 1".into()));
            }
        }
        Ok(SftRules { k, rules })
    }

    /// No constraints at all: every matrix all ones.
    pub fn full_shift(d: usize, k: usize) -> Self {
        SftRules { k, rules: vec![vec![vec![1; k]; k]; d] }
    }

    /// The same transition matrix on every generator.
    pub fn hom_shift(d: usize, t: Vec<Vec<u8>>) -> Result<Self> {
        let k = t.len();
        Self::new(k, vec![t; d])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[Vec<Vec<u8>>] {
        &self.rules
    }

    /// `rules[l](i, j)`, all zero-based.
    pub fn allows(&self, l: usize, i: usize, j: usize) -> bool {
        self.rules[l][i][j] == 1
    }
}

/// Exact block counts by root label at a fixed radius.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockCountVector {
    n: usize,
    counts: Vec<BigUint>,
}

impl BlockCountVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }
}

fn check_dims(d: usize, r: &SftRules) -> Result<()> {
    if r.d() != d {
        return Err(Error::InvalidInput(format!(
            "rules cover {} generators but the monoid has {d}",
            r.d()
        )));
    }
    Ok(())
}

fn oracle_count(ball: &BallGraph, r: &SftRules, root_label: usize) -> u64 {
    // depth-first assignment over the tree in BFS order (parents first)
    let k = r.k();
    let len = ball.len();
    let mut labels = vec![0usize; len];
    labels[0] = root_label;
    if len == 1 {
        return 1;
    }
    let mut total = 0u64;
    let mut node = 1usize;
    let mut next = vec![0usize; len];
    loop {
        let mut placed = false;
        while next[node] < k {
            let cand = next[node];
            next[node] += 1;
            let l = ball.edge_label(node).unwrap().zero_based();
            if r.allows(l, labels[ball.parent(node)], cand) {
                labels[node] = cand;
                placed = true;
                break;
            }
        }
        if placed {
            if node + 1 == len {
                total += 1;
            } else {
                node += 1;
                continue;
            }
        } else {
            next[node] = 0;
            if node == 1 {
                return total;
            }
            node -= 1;
        }
    }
}

/// Brute-force block counts: every labeling of the radius-n ball checked
/// edge by edge, bucketed by root label.
pub fn count_blocks_oracle(
    p: &MonoidPresentation,
    r: &SftRules,
    n: usize,
    cap: u64,
) -> Result<BlockCountVector> {
    check_dims(p.d(), r)?;
    let ball = build_ball(p, n, cap as usize)?;
    let candidates = BigUint::from(r.k()).pow(ball.len() as u32);
    if candidates > BigUint::from(cap) {
        return Err(Error::ResourceCap(format!(
            "{}^{} candidate labelings exceed {cap}",
            r.k(),
            ball.len()
        )));
    }
    let counts = (0..r.k())
        .map(|i| BigUint::from(oracle_count(&ball, r, i)))
        .collect();
    Ok(BlockCountVector { n, counts })
}

/// Brute-force counts over the unfolded tree of an automaton.
pub fn count_blocks_oracle_automaton(
    aut: &FollowerAutomaton,
    r: &SftRules,
    n: usize,
    cap: u64,
) -> Result<BlockCountVector> {
    check_dims(aut.d(), r)?;
    let ball = crate::cayley::build_ball_automaton(aut, n, cap as usize)?;
    let candidates = BigUint::from(r.k()).pow(ball.len() as u32);
    if candidates > BigUint::from(cap) {
        return Err(Error::ResourceCap(format!(
            "{}^{} candidate labelings exceed {cap}",
            r.k(),
            ball.len()
        )));
    }
    let counts = (0..r.k())
        .map(|i| BigUint::from(oracle_count(&ball, r, i)))
        .collect();
    Ok(BlockCountVector { n, counts })
}

/// State-indexed recurrence over an explicit follower automaton.
pub fn count_blocks_recurrence_automaton(
    aut: &FollowerAutomaton,
    r: &SftRules,
    n: usize,
) -> Result<BlockCountVector> {
    check_dims(aut.d(), r)?;
    let k = r.k();
    let states = aut.num_states();
    let mut cur = vec![vec![BigUint::one(); k]; states];
    for _ in 0..n {
        let mut next = vec![vec![BigUint::zero(); k]; states];
        for q in 0..states {
            for i in 0..k {
                let mut prod = BigUint::one();
                for l in 0..aut.d() {
                    let Some(q2) = aut.step(q, crate::GeneratorId::from_zero_based(l)) else {
                        continue;
                    };
                    let mut sum = BigUint::zero();
                    for j in 0..k {
                        if r.allows(l, i, j) {
                            sum += &cur[q2][j];
                        }
                    }
                    prod *= sum;
                    if prod.is_zero() {
                        break;
                    }
                }
                next[q][i] = prod;
            }
        }
        cur = next;
    }
    Ok(BlockCountVector { n, counts: cur[aut.initial()].clone() })
}

/// Exact block counts via the follower automaton of the presentation.
pub fn count_blocks_recurrence(
    p: &MonoidPresentation,
    r: &SftRules,
    n: usize,
) -> Result<BlockCountVector> {
    count_blocks_recurrence_automaton(&to_follower_automaton(p), r, n)
}

/// Closed form for the unconstrained shift: `k^(|ball| - 1)` per root label.
pub fn full_shift_block_count(p: &MonoidPresentation, k: usize, n: usize) -> Result<BigUint> {
    let ball = build_ball(p, n, crate::cayley::DEFAULT_NODE_CAP)?;
    Ok(BigUint::from(k).pow(ball.len() as u32 - 1))
}

/// Exact per-(state, symbol) outcome of the saturating recurrence.
#[derive(Clone, Debug)]
pub struct ClampedClasses {
    /// the clamped value hits 2 at some step
    pub reaches_two: Vec<Vec<bool>>,
    /// the clamped value hits 0 at some step (zero is absorbing)
    pub dies: Vec<Vec<bool>>,
}

/// Runs the recurrence with every value clamped into {0,1,2} until the state
/// vector repeats. The clamp commutes with the nonnegative sums and products
/// involved, so the flags are exact.
pub fn clamped_classes(aut: &FollowerAutomaton, r: &SftRules) -> Result<ClampedClasses> {
    check_dims(aut.d(), r)?;
    let k = r.k();
    let states = aut.num_states();
    let mut cur = vec![vec![1u8; k]; states];
    let mut reaches_two = vec![vec![false; k]; states];
    let mut dies = vec![vec![false; k]; states];
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    loop {
        for q in 0..states {
            for i in 0..k {
                if cur[q][i] >= 2 {
                    reaches_two[q][i] = true;
                }
                if cur[q][i] == 0 {
                    dies[q][i] = true;
                }
            }
        }
        let flat: Vec<u8> = cur.iter().flatten().copied().collect();
        if !seen.insert(flat) {
            return Ok(ClampedClasses { reaches_two, dies });
        }
        let mut next = vec![vec![0u8; k]; states];
        for q in 0..states {
            for i in 0..k {
                let mut prod = 1u8;
                for l in 0..aut.d() {
                    let Some(q2) = aut.step(q, crate::GeneratorId::from_zero_based(l)) else {
                        continue;
                    };
                    let mut sum = 0u8;
                    for j in 0..k {
                        if r.allows(l, i, j) {
                            sum = (sum + cur[q2][j]).min(2);
                        }
                    }
                    prod = (prod * sum).min(2);
                    if prod == 0 {
                        break;
                    }
                }
                next[q][i] = prod;
            }
        }
        cur = next;
    }
}

/// The set of labels whose rooted block count exceeds 1 at some radius,
/// together with the labels whose count eventually vanishes.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EssentialSet {
    essential: Vec<bool>,
    dead: Vec<bool>,
}

impl EssentialSet {
    pub fn k(&self) -> usize {
        self.essential.len()
    }

    /// gamma_{i,n} >= 2 for some n (zero-based label).
    pub fn is_essential(&self, i: usize) -> bool {
        self.essential[i]
    }

    /// gamma_{i,n} = 0 from some n on (zero-based label).
    pub fn is_dead(&self, i: usize) -> bool {
        self.dead[i]
    }

    /// Essential and never dying: the labels that can carry growth.
    pub fn is_active(&self, i: usize) -> bool {
        self.essential[i] && !self.dead[i]
    }

    /// Zero-based essential labels.
    pub fn indices(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.essential[i]).collect()
    }

    /// Zero-based essential, non-dying labels.
    pub fn active_indices(&self) -> Vec<usize> {
        (0..self.k()).filter(|&i| self.is_active(i)).collect()
    }

    /// One-based labels, the external representation.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices().into_iter().map(|i| i + 1).collect()
    }
}

pub fn essential_symbols_automaton(aut: &FollowerAutomaton, r: &SftRules) -> Result<EssentialSet> {
    let classes = clamped_classes(aut, r)?;
    let q0 = aut.initial();
    Ok(EssentialSet {
        essential: classes.reaches_two[q0].clone(),
        dead: classes.dies[q0].clone(),
    })
}

pub fn essential_symbols(p: &MonoidPresentation, r: &SftRules) -> Result<EssentialSet> {
    essential_symbols_automaton(&to_follower_automaton(p), r)
}

/// Diagnostic sequence `ln(sum_{i in E} ln gamma_{i,n}) / n` for the supplied
/// radii. Dead labels contribute nothing once their count hits zero.
pub fn estimate_degree_empirical(
    counts: &[BlockCountVector],
    essential: &EssentialSet,
) -> Result<Vec<f64>> {
    counts
        .iter()
        .map(|v| {
            if v.n() == 0 {
                return Err(Error::InvalidInput("need n >= 1".into()));
            }
            let mut s = 0.0f64;
            for i in essential.indices() {
                let c = &v.counts()[i];
                if !c.is_zero() {
                    s += ln_big(c);
                }
            }
            if s <= 0.0 {
                return Err(Error::Undefined(format!(
                    "sum of log block counts is not positive at n = {}",
                    v.n()
                )));
            }
            Ok(s.ln() / v.n() as f64)
        })
        .collect()
}

/// Diagnostic sequence `ln ln gamma_n / n` with `gamma_n` the total count
/// over all root labels.
pub fn estimate_degree_from_totals(counts: &[BlockCountVector]) -> Result<Vec<f64>> {
    counts
        .iter()
        .map(|v| {
            if v.n() == 0 {
                return Err(Error::InvalidInput("need n >= 1".into()));
            }
            let total = v.total();
            let lt = if total.is_zero() { f64::NEG_INFINITY } else { ln_big(&total) };
            if !(lt > 0.0) {
                return Err(Error::Undefined(format!(
                    "total block count at n = {} does not exceed 1",
                    v.n()
                )));
            }
            Ok(lt.ln() / v.n() as f64)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample3() -> MonoidPresentation {
        MonoidPresentation::new(3, vec![vec![0, 1, 1], vec![0, 0, 1], vec![1, 1, 1]]).unwrap()
    }

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn oracle_known_counts() {
        let p = sample3();
        let full = SftRules::full_shift(3, 2);
        assert_eq!(
            count_blocks_oracle(&p, &full, 1, 1 << 20).unwrap().counts(),
            &[big(8), big(8)]
        );
        assert_eq!(
            count_blocks_oracle(&p, &full, 2, 1 << 20).unwrap().counts(),
            &[big(512), big(512)]
        );
        let one = SftRules::full_shift(3, 1);
        assert_eq!(
            count_blocks_oracle(&p, &one, 2, 1 << 20).unwrap().counts(),
            &[big(1)]
        );
        assert!(matches!(
            count_blocks_oracle(&p, &full, 6, 1000),
            Err(Error::ResourceCap(_))
        ));
    }

    #[test]
    fn recurrence_known_counts() {
        let p = sample3();
        let full = SftRules::full_shift(3, 2);
        assert_eq!(
            count_blocks_recurrence(&p, &full, 1).unwrap().counts(),
            &[big(8), big(8)]
        );
        assert_eq!(
            count_blocks_recurrence(&p, &full, 2).unwrap().counts(),
            &[big(512), big(512)]
        );
        // n = 0 sees only the root
        assert_eq!(
            count_blocks_recurrence(&p, &full, 0).unwrap().counts(),
            &[big(1), big(1)]
        );

        let free2 = MonoidPresentation::free_monoid(2);
        let gm = SftRules::hom_shift(2, vec![vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(
            count_blocks_recurrence(&free2, &gm, 1).unwrap().counts(),
            &[big(4), big(1)]
        );
    }

    #[test]
    fn full_shift_closed_form() {
        for p in [sample3(), MonoidPresentation::free_monoid(2), MonoidPresentation::fibonacci()] {
            for n in 0..=4 {
                let direct = count_blocks_recurrence(&p, &SftRules::full_shift(p.d(), 2), n)
                    .unwrap();
                let closed = full_shift_block_count(&p, 2, n).unwrap();
                for c in direct.counts() {
                    assert_eq!(c, &closed);
                }
            }
        }
    }

    #[test]
    fn oracle_matches_recurrence_exhaustively() {
        // every 2-letter rule pair on the Fibonacci monoid
        let p = MonoidPresentation::fibonacci();
        for bits in 0..256u32 {
            let rules: Vec<Vec<Vec<u8>>> = (0..2)
                .map(|l| {
                    (0..2)
                        .map(|i| {
                            (0..2)
                                .map(|j| ((bits >> (l * 4 + i * 2 + j)) & 1) as u8)
                                .collect()
                        })
                        .collect()
                })
                .collect();
            let r = SftRules::new(2, rules).unwrap();
            for n in 0..=2 {
                assert_eq!(
                    count_blocks_oracle(&p, &r, n, 1 << 20).unwrap(),
                    count_blocks_recurrence(&p, &r, n).unwrap(),
                    "bits={bits} n={n}"
                );
            }
            // zero absorption out to n = 8
            let mut was_zero = vec![false; 2];
            for n in 1..=8 {
                let v = count_blocks_recurrence(&p, &r, n).unwrap();
                for i in 0..2 {
                    if was_zero[i] {
                        assert!(v.counts()[i].is_zero(), "bits={bits} n={n} i={i}");
                    }
                    was_zero[i] |= v.counts()[i].is_zero();
                }
            }
        }
    }

    #[test]
    fn essential_examples() {
        let p = sample3();
        let full = essential_symbols(&p, &SftRules::full_shift(3, 2)).unwrap();
        assert_eq!(full.indices(), vec![0, 1]);
        assert_eq!(full.active_indices(), vec![0, 1]);

        let upper = SftRules::hom_shift(3, vec![vec![1, 1], vec![0, 1]]).unwrap();
        let e = essential_symbols(&p, &upper).unwrap();
        assert_eq!(e.indices(), vec![0]);
        assert!(!e.is_dead(1));

        let one = essential_symbols(&p, &SftRules::full_shift(3, 1)).unwrap();
        assert!(one.indices().is_empty());
    }

    #[test]
    fn essential_matches_direct_counts() {
        let p = MonoidPresentation::fibonacci();
        for bits in 0..256u32 {
            let rules: Vec<Vec<Vec<u8>>> = (0..2)
                .map(|l| {
                    (0..2)
                        .map(|i| {
                            (0..2)
                                .map(|j| ((bits >> (l * 4 + i * 2 + j)) & 1) as u8)
                                .collect()
                        })
                        .collect()
                })
                .collect();
            let r = SftRules::new(2, rules).unwrap();
            let e = essential_symbols(&p, &r).unwrap();
            // counts are doubly exponential, so keep the horizon short;
            // the clamped dynamics on 3 states settles well before n = 16
            let mut seen_two = vec![false; 2];
            let mut went_zero = vec![false; 2];
            for n in 1..=16 {
                let v = count_blocks_recurrence(&p, &r, n).unwrap();
                for i in 0..2 {
                    seen_two[i] |= v.counts()[i] >= big(2);
                    went_zero[i] |= v.counts()[i].is_zero();
                }
            }
            for i in 0..2 {
                assert_eq!(e.is_essential(i), seen_two[i], "bits={bits} i={i}");
                assert_eq!(e.is_dead(i), went_zero[i], "bits={bits} i={i}");
            }
        }
    }

    #[test]
    fn empirical_sequences() {
        let p = sample3();
        let full = SftRules::full_shift(3, 2);
        let e = essential_symbols(&p, &full).unwrap();
        let counts: Vec<BlockCountVector> = (4..=8)
            .map(|n| count_blocks_recurrence(&p, &full, n).unwrap())
            .collect();
        let seq = estimate_degree_empirical(&counts, &e).unwrap();
        assert_eq!(seq.len(), 5);
        // values should sit in the right ballpark of ln(2.1479) ~ 0.7646
        for v in &seq {
            assert!((0.4..1.2).contains(v), "value {v}");
        }
        let totals = estimate_degree_from_totals(&counts).unwrap();
        for v in &totals {
            assert!((0.4..1.2).contains(v), "value {v}");
        }

        // free monoid d=2: gamma = 2^(|ball| - 1) with |ball| = 2^{n+1} - 1,
        // so the term at n is ln(2 (2^{n+1} - 2) ln 2)/n
        let free2 = MonoidPresentation::free_monoid(2);
        let f = SftRules::full_shift(2, 2);
        let ef = essential_symbols(&free2, &f).unwrap();
        let cf: Vec<BlockCountVector> =
            (3..=6).map(|n| count_blocks_recurrence(&free2, &f, n).unwrap()).collect();
        let sf = estimate_degree_empirical(&cf, &ef).unwrap();
        for (idx, n) in (3..=6).enumerate() {
            let expect = (2.0 * (2f64.powi(n as i32 + 1) - 2.0) * 2f64.ln()).ln() / n as f64;
            assert!((sf[idx] - expect).abs() < 1e-9);
        }

        // k=1: undefined
        let k1 = SftRules::full_shift(3, 1);
        let e1 = essential_symbols(&p, &k1).unwrap();
        let c1 = vec![count_blocks_recurrence(&p, &k1, 3).unwrap()];
        assert!(matches!(
            estimate_degree_empirical(&c1, &e1),
            Err(Error::Undefined(_))
        ));
        assert!(matches!(estimate_degree_from_totals(&c1), Err(Error::Undefined(_))));
    }
}
