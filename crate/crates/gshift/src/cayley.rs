//! Cayley-graph balls, the finite representation subgraph, and the follower
//! automaton that drives all counting.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::presentation::{GeneratorId, MonoidPresentation, Word};
use crate::{Error, Result};

/// Default cap on ball nodes; `|Delta_n|` grows like `d^n`.
pub const DEFAULT_NODE_CAP: usize = 10_000_000;

/// The ball `Delta_n` of all reduced words of length <= n, stored as a tree
/// rooted at the identity (node 0).
#[derive(Clone, Debug)]
pub struct BallGraph {
    nodes: Vec<Word>,
    parent: Vec<usize>,
    edge_label: Vec<Option<GeneratorId>>,
    depth: Vec<usize>,
}

impl BallGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always contains the identity
    }

    pub fn word(&self, node: usize) -> &Word {
        &self.nodes[node]
    }

    pub fn parent(&self, node: usize) -> usize {
        self.parent[node]
    }

    pub fn edge_label(&self, node: usize) -> Option<GeneratorId> {
        self.edge_label[node]
    }

    pub fn depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    /// DOT rendering with nodes labeled by reduced words, edges by generators.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ball {\n");
        for (i, w) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", i, w);
        }
        for i in 1..self.nodes.len() {
            let label = self.edge_label[i].expect("non-root node has an edge label");
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", self.parent[i], i, label);
        }
        out.push_str("}\n");
        out
    }
}

/// Builds `Delta_n` breadth-first; errors when the node count would exceed `cap`.
pub fn build_ball(p: &MonoidPresentation, n: usize, cap: usize) -> Result<BallGraph> {
    let mut ball = BallGraph {
        nodes: vec![Word::identity()],
        parent: vec![0],
        edge_label: vec![None],
        depth: vec![0],
    };
    let mut frontier = vec![0usize];
    for level in 1..=n {
        let mut next = Vec::new();
        for &idx in &frontier {
            let word = ball.nodes[idx].clone();
            for s in p.generators() {
                if p.is_length_additive(&word, s) {
                    if ball.nodes.len() >= cap {
                        return Err(Error::ResourceCap(format!(
                            "ball would exceed {cap} nodes at depth {level}"
                        )));
                    }
                    ball.nodes.push(word.child(s));
                    ball.parent.push(idx);
                    ball.edge_label.push(Some(s));
                    ball.depth.push(level);
                    next.push(ball.nodes.len() - 1);
                }
            }
        }
        frontier = next;
    }
    Ok(ball)
}

/// Tree unfolding of a follower automaton from its initial state, to depth `n`.
/// Node words record the generator path taken.
pub fn build_ball_automaton(aut: &FollowerAutomaton, n: usize, cap: usize) -> Result<BallGraph> {
    let mut ball = BallGraph {
        nodes: vec![Word::identity()],
        parent: vec![0],
        edge_label: vec![None],
        depth: vec![0],
    };
    let mut states = vec![aut.initial()];
    let mut frontier = vec![0usize];
    for level in 1..=n {
        let mut next = Vec::new();
        for &idx in &frontier {
            let q = states[idx];
            for g in 0..aut.d() {
                let s = GeneratorId::from_zero_based(g);
                if let Some(q2) = aut.step(q, s) {
                    if ball.nodes.len() >= cap {
                        return Err(Error::ResourceCap(format!(
                            "ball would exceed {cap} nodes at depth {level}"
                        )));
                    }
                    let word = ball.nodes[idx].child(s);
                    ball.nodes.push(word);
                    ball.parent.push(idx);
                    ball.edge_label.push(Some(s));
                    ball.depth.push(level);
                    states.push(q2);
                    next.push(ball.nodes.len() - 1);
                }
            }
        }
        frontier = next;
    }
    Ok(ball)
}

/// The prefix-closed subgraph of words holding at most one right free
/// generator, which must then be the last symbol.
#[derive(Clone, Debug)]
pub struct FiniteRepresentation {
    vertices: Vec<Word>,
    edges: Vec<(usize, GeneratorId, usize)>,
}

impl FiniteRepresentation {
    pub fn vertices(&self) -> &[Word] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, GeneratorId, usize)] {
        &self.edges
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph finite_representation {\n");
        for (i, w) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", i, w);
        }
        for &(u, s, v) in &self.edges {
            let _ = writeln!(out, "  n{} -> n{} [label=\"{}\"];", u, v, s);
        }
        out.push_str("}\n");
        out
    }
}

/// True iff the directed graph on non-free generators is acyclic, i.e. the
/// submatrix of `A` restricted to non-free generators is nilpotent.
pub fn is_finite_representation(p: &MonoidPresentation) -> bool {
    let nonfree: Vec<usize> = (0..p.d())
        .filter(|&i| !p.is_right_free(GeneratorId::from_zero_based(i)))
        .collect();
    // DFS cycle detection: 0 = unseen, 1 = on stack, 2 = done
    let mut mark = vec![0u8; p.d()];
    fn visit(i: usize, p: &MonoidPresentation, nonfree: &[usize], mark: &mut [u8]) -> bool {
        mark[i] = 1;
        for &j in nonfree {
            if p.matrix()[i][j] == 1 {
                match mark[j] {
                    1 => return false,
                    0 => {
                        if !visit(j, p, nonfree, mark) {
                            return false;
                        }
                    }
                    _ => {}
                }
            }
        }
        mark[i] = 2;
        true
    }
    for &i in &nonfree {
        if mark[i] == 0 && !visit(i, p, &nonfree, &mut mark) {
            return false;
        }
    }
    true
}

/// Builds the finite representation `F`; errors when the monoid has none.
pub fn finite_representation(p: &MonoidPresentation) -> Result<FiniteRepresentation> {
    if !is_finite_representation(p) {
        return Err(Error::InfiniteRepresentation);
    }
    // all reduced words over non-free generators (a finite set by nilpotency),
    // then each extended by any length-additive free generator
    let mut vertices = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for w in &frontier {
            for s in p.generators() {
                if !p.is_right_free(s) && p.is_length_additive(w, s) {
                    let c = w.child(s);
                    vertices.push(c.clone());
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    let nonfree_count = vertices.len();
    for i in 0..nonfree_count {
        let w = vertices[i].clone();
        for s in p.generators() {
            if p.is_right_free(s) && p.is_length_additive(&w, s) {
                vertices.push(w.child(s));
            }
        }
    }
    vertices.sort();
    vertices.dedup();
    let index: BTreeMap<&Word, usize> = vertices.iter().zip(0..).collect();
    let mut edges = Vec::new();
    for (u, w) in vertices.iter().enumerate() {
        for s in p.generators() {
            if p.is_length_additive(w, s) {
                if let Some(&v) = index.get(&w.child(s)) {
                    edges.push((u, s, v));
                }
            }
        }
    }
    Ok(FiniteRepresentation { vertices, edges })
}

/// Finite-state machine whose walks from the initial state are exactly the
/// length-additive extension structure of the monoid.
#[derive(Clone, Debug)]
pub struct FollowerAutomaton {
    state_names: Vec<String>,
    initial: usize,
    /// step[state][generator (0-based)] = successor state, when defined
    step: Vec<Vec<Option<usize>>>,
}

impl FollowerAutomaton {
    pub fn new(
        state_names: Vec<String>,
        initial: usize,
        step: Vec<Vec<Option<usize>>>,
    ) -> Result<Self> {
        if state_names.is_empty() || step.len() != state_names.len() {
            return Err(Error::InvalidInput("automaton needs one step row per state".into()));
        }
        let d = step[0].len();
        if d == 0 || step.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidInput("automaton step rows must share a generator count".into()));
        }
        if step.iter().flatten().flatten().any(|&q| q >= state_names.len()) {
            return Err(Error::InvalidInput("automaton transition targets a missing state".into()));
        }
        let aut = FollowerAutomaton { state_names, initial, step };
        if !aut.all_reachable() {
            return Err(Error::InvalidInput("every automaton state must be reachable".into()));
        }
        Ok(aut)
    }

    fn all_reachable(&self) -> bool {
        let mut seen = vec![false; self.step.len()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for t in self.step[q].iter().flatten() {
                if !seen[*t] {
                    seen[*t] = true;
                    stack.push(*t);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn d(&self) -> usize {
        self.step[0].len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.state_names[q]
    }

    pub fn step(&self, q: usize, s: GeneratorId) -> Option<usize> {
        self.step[q][s.zero_based()]
    }

    /// Merges states with identical step rows (iterated to a fixed point);
    /// for the free monoid this collapses everything onto one state.
    pub fn quotient(&self) -> FollowerAutomaton {
        let n = self.num_states();
        let mut class: Vec<usize> = (0..n).collect();
        loop {
            let mut sig_to_class: BTreeMap<Vec<Option<usize>>, usize> = BTreeMap::new();
            let mut next = vec![0usize; n];
            for q in 0..n {
                let sig: Vec<Option<usize>> =
                    self.step[q].iter().map(|t| t.map(|x| class[x])).collect();
                let c = sig_to_class.len();
                next[q] = *sig_to_class.entry(sig).or_insert(c);
            }
            if next == class {
                break;
            }
            class = next;
        }
        let num = class.iter().max().unwrap() + 1;
        let mut names = vec![String::new(); num];
        let mut step = vec![vec![None; self.d()]; num];
        for q in 0..n {
            let c = class[q];
            if names[c].is_empty() {
                names[c] = self.state_names[q].clone();
                step[c] = self.step[q].iter().map(|t| t.map(|x| class[x])).collect();
            }
        }
        FollowerAutomaton { state_names: names, initial: class[self.initial], step }
    }
}

/// The follower automaton of an `R_A` presentation: `q0` plus one state per
/// generator; `step(q_i, s_j)` is defined exactly when `A(i, j) = 1`.
pub fn to_follower_automaton(p: &MonoidPresentation) -> FollowerAutomaton {
    let d = p.d();
    let mut names = vec!["q0".to_string()];
    names.extend((1..=d).map(|i| format!("q{i}")));
    let mut step = Vec::with_capacity(d + 1);
    step.push((0..d).map(|j| Some(j + 1)).collect::<Vec<_>>());
    for i in 0..d {
        step.push(
            (0..d)
                .map(|j| if p.matrix()[i][j] == 1 { Some(j + 1) } else { None })
                .collect(),
        );
    }
    FollowerAutomaton { state_names: names, initial: 0, step }
}
