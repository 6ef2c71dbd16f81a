//! Generic best-first search engines: A* (Dijkstra when `h = 0`, weighted
//! A* when `w > 1`) and independent multi-heuristic A* with one admissible
//! anchor queue and any number of inadmissible queues.
//!
//! Engines are generic over a [`Problem`]: state, duplicate-detection key,
//! edge payload, successor generation, and goal predicate. Edge costs must
//! be non-negative; callers shift sensor costs before queuing (see
//! `costs::cost_shift`). OPEN is a binary heap with lazy deletion; ties
//! break toward larger g, then by ascending key, so identical inputs always
//! produce identical paths.

use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};
use std::hash::Hash;
use std::time::{Duration, Instant};

/// A search space: successor generation plus duplicate detection.
///
/// `successors` may mutate the problem (tunnel searches record level
/// bookkeeping while generating); engines call it once per expansion.
pub trait Problem {
    type State: Clone;
    type Key: Eq + Ord + Hash + Clone;
    type Edge: Clone;

    fn key(&self, s: &Self::State) -> Self::Key;
    fn successors(&mut self, s: &Self::State, out: &mut Vec<(Self::State, Self::Edge, f64)>);
    fn is_goal(&self, s: &Self::State) -> bool;
}

/// Wall-clock and expansion limits, checked every `batch` expansions.
#[derive(Debug, Clone)]
pub struct SearchLimits {
    pub deadline: Option<Instant>,
    pub max_expansions: Option<u64>,
    pub batch: u64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            deadline: None,
            max_expansions: None,
            batch: 64,
        }
    }
}

impl SearchLimits {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn with_deadline(deadline: Instant) -> Self {
        SearchLimits {
            deadline: Some(deadline),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct SearchStats {
    pub expansions: u64,
    pub generated: u64,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct SearchResult<S, E> {
    /// Start state first, goal-satisfying state last.
    pub states: Vec<S>,
    /// One edge per transition; `edges.len() + 1 == states.len()`.
    pub edges: Vec<E>,
    /// Sum of edge costs as queued (shifted costs when the caller shifts).
    pub cost: f64,
    pub stats: SearchStats,
}

#[derive(Debug, Clone)]
pub enum SearchOutcome<S, E> {
    Found(SearchResult<S, E>),
    /// OPEN exhausted without reaching a goal; distinguished from an error.
    Exhausted(SearchStats),
    /// Deadline or expansion cap hit first.
    Interrupted(SearchStats),
}

impl<S, E> SearchOutcome<S, E> {
    pub fn found(self) -> Option<SearchResult<S, E>> {
        match self {
            SearchOutcome::Found(r) => Some(r),
            _ => None,
        }
    }

    pub fn stats(&self) -> &SearchStats {
        match self {
            SearchOutcome::Found(r) => &r.stats,
            SearchOutcome::Exhausted(s) | SearchOutcome::Interrupted(s) => s,
        }
    }
}

struct Node<S, K, E> {
    state: S,
    g: f64,
    parent: Option<(K, E)>,
    closed: bool,
}

struct HeapEntry<K> {
    f: f64,
    g: f64,
    key: K,
}

impl<K: Ord> PartialEq for HeapEntry<K> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl<K: Ord> Eq for HeapEntry<K> {}
impl<K: Ord> Ord for HeapEntry<K> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap: smaller f wins, then larger g, then smaller key.
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then_with(|| other.key.cmp(&self.key))
    }
}
impl<K: Ord> PartialOrd for HeapEntry<K> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

type NodeTable<P> =
    HashMap<<P as Problem>::Key, Node<<P as Problem>::State, <P as Problem>::Key, <P as Problem>::Edge>>;

struct Queue<P: Problem> {
    nodes: NodeTable<P>,
    open: BinaryHeap<HeapEntry<P::Key>>,
}

impl<P: Problem> Queue<P> {
    fn new() -> Self {
        Queue {
            nodes: HashMap::new(),
            open: BinaryHeap::new(),
        }
    }

    fn seed(&mut self, key: P::Key, state: P::State, f: f64) {
        self.nodes.insert(
            key.clone(),
            Node {
                state,
                g: 0.0,
                parent: None,
                closed: false,
            },
        );
        self.open.push(HeapEntry { f, g: 0.0, key });
    }

    /// Pops the best non-stale, non-closed entry without expanding it.
    fn peek_valid(&mut self) -> Option<f64> {
        while let Some(top) = self.open.peek() {
            let node = &self.nodes[&top.key];
            if node.closed || top.g != node.g {
                self.open.pop();
                continue;
            }
            return Some(top.f);
        }
        None
    }

    fn pop_valid(&mut self) -> Option<P::Key> {
        while let Some(top) = self.open.pop() {
            let node = &self.nodes[&top.key];
            if node.closed || top.g != node.g {
                continue;
            }
            return Some(top.key);
        }
        None
    }

    fn relax(
        &mut self,
        parent: (&P::Key, f64),
        child_key: P::Key,
        child: P::State,
        edge: P::Edge,
        cost: f64,
        f_of: impl FnOnce(&P::State, f64) -> f64,
    ) {
        debug_assert!(cost >= -1e-9, "negative edge cost {cost}; shift it first");
        let (parent_key, parent_g) = parent;
        let g = parent_g + cost;
        match self.nodes.entry(child_key.clone()) {
            Entry::Occupied(mut e) => {
                let node = e.get_mut();
                if node.closed || g >= node.g {
                    return;
                }
                node.g = g;
                node.state = child;
                node.parent = Some((parent_key.clone(), edge));
                let f = f_of(&node.state, g);
                self.open.push(HeapEntry {
                    f,
                    g,
                    key: child_key,
                });
            }
            Entry::Vacant(e) => {
                let f = f_of(&child, g);
                e.insert(Node {
                    state: child,
                    g,
                    parent: Some((parent_key.clone(), edge)),
                    closed: false,
                });
                self.open.push(HeapEntry {
                    f,
                    g,
                    key: child_key,
                });
            }
        }
    }

    fn backtrack(&self, goal_key: &P::Key, stats: SearchStats) -> SearchResult<P::State, P::Edge> {
        let mut states = Vec::new();
        let mut edges = Vec::new();
        let mut key = goal_key.clone();
        let cost = self.nodes[&key].g;
        loop {
            let node = &self.nodes[&key];
            states.push(node.state.clone());
            match &node.parent {
                Some((pk, edge)) => {
                    edges.push(edge.clone());
                    key = pk.clone();
                }
                None => break,
            }
        }
        states.reverse();
        edges.reverse();
        SearchResult {
            states,
            edges,
            cost,
            stats,
        }
    }
}

/// Best-first search with key `g + w * h`. With an admissible, consistent
/// `h` and `w = 1` the result is optimal; with `h = 0` this is Dijkstra.
pub fn astar<P: Problem>(
    problem: &mut P,
    start: P::State,
    mut h: impl FnMut(&P::State) -> f64,
    w: f64,
    limits: &SearchLimits,
) -> SearchOutcome<P::State, P::Edge> {
    assert!(w >= 1.0);
    let t0 = Instant::now();
    let mut q: Queue<P> = Queue::new();
    let start_key = problem.key(&start);
    let f0 = w * h(&start);
    q.seed(start_key, start, f0);

    let mut stats = SearchStats::default();
    let mut succ_buf = Vec::new();
    loop {
        if stats.expansions % limits.batch == 0 && over_limit(limits, &stats, t0) {
            stats.wall = t0.elapsed();
            return SearchOutcome::Interrupted(stats);
        }
        let Some(key) = q.pop_valid() else {
            stats.wall = t0.elapsed();
            return SearchOutcome::Exhausted(stats);
        };
        let (state, g) = {
            let node = q.nodes.get_mut(&key).unwrap();
            node.closed = true;
            (node.state.clone(), node.g)
        };
        stats.expansions += 1;

        if problem.is_goal(&state) {
            stats.wall = t0.elapsed();
            return SearchOutcome::Found(q.backtrack(&key, stats));
        }

        succ_buf.clear();
        problem.successors(&state, &mut succ_buf);
        stats.generated += succ_buf.len() as u64;
        for (child, edge, cost) in succ_buf.drain(..) {
            let child_key = problem.key(&child);
            q.relax((&key, g), child_key, child, edge, cost, |s, g| g + w * h(s));
        }
    }
}

fn over_limit(limits: &SearchLimits, stats: &SearchStats, t0: Instant) -> bool {
    if let Some(deadline) = limits.deadline {
        if Instant::now() >= deadline {
            return true;
        }
    }
    if let Some(cap) = limits.max_expansions {
        if stats.expansions >= cap {
            return true;
        }
    }
    let _ = t0;
    false
}

/// A boxed heuristic, the element of the inadmissible-queue list.
pub type BoxedHeuristic<'a, S> = Box<dyn FnMut(&S) -> f64 + 'a>;

/// Independent multi-heuristic A*: one anchor queue keyed `g + w1 * h_anchor`
/// plus one queue per extra heuristic keyed `g + w1 * h_i`, each with its own
/// g-values and closed list, scheduled round-robin. An inadmissible queue may
/// expand only while its best key stays within `w2` times the anchor's best
/// key, which bounds the returned cost by `w1 * w2` times optimal.
pub fn mhastar<P: Problem>(
    problem: &mut P,
    start: P::State,
    mut h_anchor: impl FnMut(&P::State) -> f64,
    h_extra: &mut [BoxedHeuristic<'_, P::State>],
    w1: f64,
    w2: f64,
    limits: &SearchLimits,
) -> SearchOutcome<P::State, P::Edge> {
    assert!(w1 >= 1.0 && w2 >= 1.0);
    let t0 = Instant::now();
    let n_extra = h_extra.len();
    let mut queues: Vec<Queue<P>> = (0..=n_extra).map(|_| Queue::new()).collect();
    let start_key = problem.key(&start);
    for (i, q) in queues.iter_mut().enumerate() {
        let f0 = if i == 0 {
            w1 * h_anchor(&start)
        } else {
            w1 * h_extra[i - 1](&start)
        };
        q.seed(start_key.clone(), start.clone(), f0);
    }

    let mut stats = SearchStats::default();
    let mut succ_buf = Vec::new();
    let mut round = 1usize; // queue to try next; 0 is the anchor
    loop {
        if stats.expansions % limits.batch.max(1) == 0
            && stats.expansions > 0
            && over_limit(limits, &stats, t0)
        {
            stats.wall = t0.elapsed();
            return SearchOutcome::Interrupted(stats);
        }

        let Some(anchor_key) = queues[0].peek_valid() else {
            stats.wall = t0.elapsed();
            return SearchOutcome::Exhausted(stats);
        };

        // Pick the queue for this step: round-robin over the extras, falling
        // back to the anchor when a queue is empty or out of its bound.
        let mut use_queue = 0;
        if n_extra > 0 {
            let i = round;
            round = round % n_extra + 1;
            if let Some(extra_key) = queues[i].peek_valid() {
                if extra_key <= w2 * anchor_key {
                    use_queue = i;
                }
            }
        }

        let Some(key) = queues[use_queue].pop_valid() else {
            continue;
        };
        let (state, g) = {
            let node = queues[use_queue].nodes.get_mut(&key).unwrap();
            node.closed = true;
            (node.state.clone(), node.g)
        };
        stats.expansions += 1;

        if problem.is_goal(&state) {
            stats.wall = t0.elapsed();
            return SearchOutcome::Found(queues[use_queue].backtrack(&key, stats));
        }

        succ_buf.clear();
        problem.successors(&state, &mut succ_buf);
        stats.generated += succ_buf.len() as u64;
        for (child, edge, cost) in succ_buf.drain(..) {
            let child_key = problem.key(&child);
            let q = &mut queues[use_queue];
            if use_queue == 0 {
                q.relax((&key, g), child_key, child, edge, cost, |s, g| {
                    g + w1 * h_anchor(s)
                });
            } else {
                let h = &mut h_extra[use_queue - 1];
                q.relax((&key, g), child_key, child, edge, cost, |s, g| g + w1 * h(s));
            }
        }
    }
}
