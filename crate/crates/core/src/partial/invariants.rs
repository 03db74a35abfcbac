//! Clique cover, independence and maximum acyclic subgraph numbers, plus
//! variational estimates of `nu_2` and `lambda`.

use std::collections::VecDeque;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};
use crate::partial::ClGraph;

pub const EXACT_COVER_LIMIT: usize = 20;
pub const INDEPENDENCE_LIMIT: usize = 24;
pub const MAS_LIMIT: usize = 20;

/// How an invariant value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    GreedyUpper,
    VariationalLower,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::GreedyUpper => "greedy-upper",
            Method::VariationalLower => "variational-lower",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliqueCover {
    pub value: usize,
    pub cover: Vec<Vec<usize>>,
    pub method: Method,
}

fn mutual(g: &ClGraph, u: usize, v: usize) -> bool {
    g.has_edge(u, v) && g.has_edge(v, u)
}

/// Per-vertex bitmask of vertices mutually adjacent to it (itself included).
fn mutual_masks(g: &ClGraph) -> Vec<u32> {
    let n = g.contexts();
    (0..n)
        .map(|u| (0..n).filter(|&v| mutual(g, u, v)).fold(0u32, |m, v| m | 1 << v))
        .collect()
}

/// Per-vertex bitmask of vertices joined to it by an edge in either
/// direction, itself excluded.
fn conflict_masks(g: &ClGraph) -> Vec<u32> {
    let n = g.contexts();
    (0..n)
        .map(|u| {
            (0..n)
                .filter(|&v| v != u && (g.has_edge(u, v) || g.has_edge(v, u)))
                .fold(0u32, |m, v| m | 1 << v)
        })
        .collect()
}

fn mask_to_vec(mask: u32) -> Vec<usize> {
    (0..32).filter(|&v| mask >> v & 1 == 1).collect()
}

/// Maximum set of pairwise non-conflicting vertices by branch and bound.
fn max_independent(conflict: &[u32]) -> u32 {
    fn go(cand: u32, chosen: u32, conflict: &[u32], best: &mut u32) {
        if chosen.count_ones() + cand.count_ones() <= best.count_ones() {
            return;
        }
        if cand == 0 {
            *best = chosen;
            return;
        }
        let v = cand.trailing_zeros() as usize;
        let bit = 1u32 << v;
        go(cand & !bit & !conflict[v], chosen | bit, conflict, best);
        go(cand & !bit, chosen, conflict, best);
    }
    let n = conflict.len();
    let all = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut best = 0;
    // empty set as the initial incumbent; the first branch dives greedily
    go(all, 0, conflict, &mut best);
    best
}

fn greedy_cover(g: &ClGraph) -> Vec<Vec<usize>> {
    let n = g.contexts();
    let mut order: Vec<usize> = (0..n).collect();
    let degree: Vec<usize> = (0..n).map(|u| (0..n).filter(|&v| mutual(g, u, v)).count()).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(degree[v]));
    let mut cover: Vec<Vec<usize>> = Vec::new();
    for v in order {
        match cover.iter_mut().find(|c| c.iter().all(|&u| mutual(g, u, v))) {
            Some(c) => c.push(v),
            None => cover.push(vec![v]),
        }
    }
    for c in &mut cover {
        c.sort_unstable();
    }
    cover
}

/// Vertices pairwise lacking a mutual edge; each needs its own clique.
fn greedy_cover_lower_bound(g: &ClGraph) -> usize {
    let n = g.contexts();
    let mut chosen: Vec<usize> = Vec::new();
    for v in 0..n {
        if chosen.iter().all(|&u| !mutual(g, u, v)) {
            chosen.push(v);
        }
    }
    chosen.len()
}

/// Two-colours the graph whose edges are the non-mutual pairs. A proper
/// colouring splits the vertices into two cliques.
fn two_clique_split(g: &ClGraph) -> Option<Vec<Vec<usize>>> {
    let n = g.contexts();
    let mut colour = vec![u8::MAX; n];
    for start in 0..n {
        if colour[start] != u8::MAX {
            continue;
        }
        colour[start] = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if v == u || mutual(g, u, v) {
                    continue;
                }
                if colour[v] == u8::MAX {
                    colour[v] = 1 - colour[u];
                    queue.push_back(v);
                } else if colour[v] == colour[u] {
                    return None;
                }
            }
        }
    }
    let parts: Vec<Vec<usize>> = (0..2u8)
        .map(|c| (0..n).filter(|&v| colour[v] == c).collect::<Vec<_>>())
        .filter(|p| !p.is_empty())
        .collect();
    Some(parts)
}

fn exact_cover_small(g: &ClGraph) -> Vec<Vec<usize>> {
    let masks = mutual_masks(g);
    let n = g.contexts();
    let incumbent = greedy_cover(g);
    // pairwise non-mutual vertices give a lower bound
    let non_mutual: Vec<u32> = masks.iter().enumerate().map(|(v, &m)| m & !(1 << v)).collect();
    let lower = max_independent(&non_mutual).count_ones() as usize;
    if incumbent.len() == lower {
        return incumbent;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| masks[v].count_ones());

    struct Search<'a> {
        masks: &'a [u32],
        order: &'a [usize],
        lower: usize,
        best: Vec<u32>,
        best_len: usize,
    }
    fn go(s: &mut Search<'_>, idx: usize, cliques: &mut Vec<u32>) {
        if cliques.len() >= s.best_len || s.best_len == s.lower {
            return;
        }
        if idx == s.order.len() {
            s.best_len = cliques.len();
            s.best = cliques.clone();
            return;
        }
        let v = s.order[idx];
        for j in 0..cliques.len() {
            if cliques[j] & !s.masks[v] == 0 {
                cliques[j] |= 1 << v;
                go(s, idx + 1, cliques);
                cliques[j] &= !(1 << v);
            }
        }
        if cliques.len() + 1 < s.best_len {
            cliques.push(1 << v);
            go(s, idx + 1, cliques);
            cliques.pop();
        }
    }
    let mut search = Search {
        masks: &masks,
        order: &order,
        lower,
        best: Vec::new(),
        best_len: incumbent.len(),
    };
    go(&mut search, 0, &mut Vec::new());
    if search.best.is_empty() {
        incumbent
    } else {
        search.best.into_iter().map(mask_to_vec).collect()
    }
}

/// Minimum number of cliques (pairwise mutually adjacent sets) partitioning
/// the vertices.
///
/// Exact mode runs branch and bound up to [`EXACT_COVER_LIMIT`] vertices.
/// Larger graphs are still solved exactly when the answer is certified
/// cheaply (complete graph, a split into two cliques, or a greedy cover
/// matching a lower bound); otherwise a capacity error is returned.
pub fn clique_cover_number(g: &ClGraph, mode: CoverMode) -> Result<CliqueCover> {
    if mode == CoverMode::Greedy {
        let cover = greedy_cover(g);
        return Ok(CliqueCover {
            value: cover.len(),
            cover,
            method: Method::GreedyUpper,
        });
    }
    let n = g.contexts();
    let cover = if n <= EXACT_COVER_LIMIT {
        exact_cover_small(g)
    } else if g.is_complete() {
        vec![(0..n).collect()]
    } else if let Some(parts) = two_clique_split(g) {
        parts
    } else {
        let greedy = greedy_cover(g);
        if greedy.len() != greedy_cover_lower_bound(g) {
            return Err(Error::Capacity {
                what: "exact clique cover",
                limit: EXACT_COVER_LIMIT,
                got: n,
                hint: "use greedy mode for an upper bound",
            });
        }
        greedy
    };
    Ok(CliqueCover {
        value: cover.len(),
        cover,
        method: Method::Exact,
    })
}

/// Largest set of vertices with no edge in either direction between any two
/// members, with a witness.
pub fn independence_number(g: &ClGraph) -> Result<(usize, Vec<usize>)> {
    let n = g.contexts();
    if n > INDEPENDENCE_LIMIT {
        return Err(Error::Capacity {
            what: "independence number",
            limit: INDEPENDENCE_LIMIT,
            got: n,
            hint: "no exact solver for larger graphs",
        });
    }
    let best = max_independent(&conflict_masks(g));
    Ok((best.count_ones() as usize, mask_to_vec(best)))
}

fn in_masks(g: &ClGraph) -> Vec<u32> {
    (0..g.contexts())
        .map(|v| {
            g.in_neighbors(v)
                .iter()
                .filter(|&&u| u != v)
                .fold(0u32, |m, &u| m | 1 << u)
        })
        .collect()
}

/// Size of the largest vertex set inducing an acyclic subgraph (self-loops
/// ignored), with an ordering `v_1..v_r` that has no edge `v_i -> v_j` for
/// `i > j`.
pub fn mas_number(g: &ClGraph) -> Result<(usize, Vec<usize>)> {
    let n = g.contexts();
    if n > MAS_LIMIT {
        return Err(Error::Capacity {
            what: "maximum acyclic subgraph",
            limit: MAS_LIMIT,
            got: n,
            hint: "use the variational estimate for a lower bound",
        });
    }
    let inn = in_masks(g);
    let size = 1usize << n;
    let mut acyclic = vec![false; size];
    acyclic[0] = true;
    let mut best = 0u32;
    for mask in 1..size as u32 {
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if inn[v] & mask == 0 && acyclic[(mask & !(1 << v)) as usize] {
                acyclic[mask as usize] = true;
                if mask.count_ones() > best.count_ones() {
                    best = mask;
                }
                break;
            }
        }
    }
    let mut ordering = Vec::with_capacity(best.count_ones() as usize);
    let mut mask = best;
    while mask != 0 {
        let v = mask_to_vec(mask)
            .into_iter()
            .find(|&v| inn[v] & mask == 0 && acyclic[(mask & !(1 << v)) as usize])
            .expect("acyclic set has a source");
        ordering.push(v);
        mask &= !(1 << v);
    }
    Ok((ordering.len(), ordering))
}

/// True iff no vertex later in `ordering` has an edge to an earlier one.
pub fn is_acyclic_ordering(g: &ClGraph, ordering: &[usize]) -> bool {
    ordering
        .iter()
        .enumerate()
        .all(|(i, &vi)| ordering[..i].iter().all(|&vj| vi == vj || !g.has_edge(vi, vj)))
}

/// `(sum_v f(v) / sqrt(sum_{w in I(v)} f(w)))^2`, with `0/0 = 0`.
pub fn nu2_objective(g: &ClGraph, f: &[f64]) -> f64 {
    let s: f64 = (0..g.contexts())
        .filter(|&v| f[v] > 0.0)
        .map(|v| f[v] / in_mass(g, f, v).sqrt())
        .sum();
    s * s
}

/// `sum_v f(v) / sum_{w in I(v)} f(w)`, with `0/0 = 0`.
pub fn lambda_objective(g: &ClGraph, f: &[f64]) -> f64 {
    (0..g.contexts())
        .filter(|&v| f[v] > 0.0)
        .map(|v| f[v] / in_mass(g, f, v))
        .sum()
}

fn in_mass(g: &ClGraph, f: &[f64], v: usize) -> f64 {
    g.in_neighbors(v).iter().map(|&w| f[w]).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nu2Estimate {
    /// Best objective value found; a lower bound on `nu_2`.
    pub value: f64,
    /// Distribution attaining `value`.
    pub f: Vec<f64>,
    pub starts: usize,
    pub iterations: usize,
    /// Largest improvement over the final tenth of iterations across starts.
    pub late_improvement: f64,
}

/// Exponentiated-gradient ascent of a simplex objective from `f`. Returns
/// the best point seen, its value and the improvement made late in the run.
fn simplex_ascent(
    f: &mut Vec<f64>,
    iterations: usize,
    objective: impl Fn(&[f64]) -> f64,
    gradient: impl Fn(&[f64], &mut [f64]),
) -> (Vec<f64>, f64, f64) {
    let mut best = f.clone();
    let mut best_value = objective(f);
    let mut value_at_tail = best_value;
    let tail_start = iterations - iterations / 10;
    let mut grad = vec![0.0; f.len()];
    for k in 1..=iterations {
        gradient(f, &mut grad);
        let scale = f
            .iter()
            .zip(&grad)
            .filter(|(&x, _)| x > 0.0)
            .map(|(_, g)| g.abs())
            .fold(0.0, f64::max);
        if !(scale > 0.0) || !scale.is_finite() {
            break;
        }
        let step = 0.5 / (k as f64).sqrt() / scale;
        let shift = f
            .iter()
            .zip(&grad)
            .filter(|(&x, _)| x > 0.0)
            .map(|(_, g)| step * g)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut total = 0.0;
        for (x, g) in f.iter_mut().zip(&grad) {
            if *x > 0.0 {
                *x *= (step * g - shift).exp();
                total += *x;
            }
        }
        for x in f.iter_mut() {
            *x /= total;
        }
        let value = objective(f);
        if value > best_value {
            best_value = value;
            best.clone_from(f);
        }
        if k == tail_start {
            value_at_tail = best_value;
        }
    }
    (best, best_value, best_value - value_at_tail)
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = x.iter().sum();
    x.into_iter().map(|v| v / total).collect()
}

fn greedy_independent(g: &ClGraph) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::new();
    for v in 0..g.contexts() {
        if chosen.iter().all(|&u| !g.has_edge(u, v) && !g.has_edge(v, u)) {
            chosen.push(v);
        }
    }
    chosen
}

fn indicator(n: usize, set: &[usize]) -> Vec<f64> {
    let mut f = vec![0.0; n];
    for &v in set {
        f[v] = 1.0 / set.len() as f64;
    }
    f
}

/// Lower bound on `nu_2` by exponentiated-gradient ascent from the uniform
/// distribution, `restarts` Dirichlet(1) draws and the uniform distribution
/// on a maximum independent set (exact up to [`INDEPENDENCE_LIMIT`]
/// vertices, greedy beyond).
pub fn nu2_estimate(g: &ClGraph, restarts: usize, iterations: usize, seed: u64) -> Nu2Estimate {
    let n = g.contexts();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let independent = match independence_number(g) {
        Ok((_, set)) => set,
        Err(_) => greedy_independent(g),
    };
    let mut starts = vec![vec![1.0 / n as f64; n], indicator(n, &independent)];
    starts.extend((0..restarts).map(|_| dirichlet(&mut rng, n)));

    let objective = |f: &[f64]| nu2_objective(g, f);
    let gradient = |f: &[f64], out: &mut [f64]| {
        let mass: Vec<f64> = (0..n).map(|v| in_mass(g, f, v).max(1e-300)).collect();
        for u in 0..n {
            let spill: f64 = g
                .out_neighbors(u)
                .iter()
                .map(|&v| f[v] * mass[v].powf(-1.5))
                .sum();
            out[u] = mass[u].powf(-0.5) - 0.5 * spill;
        }
    };
    let mut best = Nu2Estimate {
        value: f64::NEG_INFINITY,
        f: Vec::new(),
        starts: starts.len(),
        iterations,
        late_improvement: 0.0,
    };
    for mut f in starts {
        let (point, value, late) = simplex_ascent(&mut f, iterations.max(1), objective, gradient);
        best.late_improvement = best.late_improvement.max(late);
        if value > best.value {
            best.value = value;
            best.f = point;
        }
    }
    best
}

/// Value of `lambda_objective` at `f(v_i) = M^i` on an acyclic ordering,
/// computed in ratio form so long orderings do not overflow.
fn ordering_value(g: &ClGraph, ordering: &[usize], log_m: f64) -> f64 {
    let mut position = vec![usize::MAX; g.contexts()];
    for (i, &v) in ordering.iter().enumerate() {
        position[v] = i;
    }
    ordering
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let spill: f64 = g
                .in_neighbors(v)
                .iter()
                .filter(|&&w| w != v && position[w] != usize::MAX)
                .map(|&w| ((position[w] as f64 - i as f64) * log_m).exp())
                .sum();
            1.0 / (1.0 + spill)
        })
        .sum()
}

/// Greedy acyclic ordering: walk `order` and keep each vertex with no edge
/// back into the kept prefix.
fn greedy_acyclic(g: &ClGraph, order: &[usize]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &v in order {
        if kept.iter().all(|&u| !g.has_edge(v, u)) {
            kept.push(v);
        }
    }
    kept
}

/// Builds an ordering front to back, each time appending the candidate that
/// rules out the fewest others (those with an edge into it), ties broken at
/// random.
fn min_loss_acyclic(g: &ClGraph, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut candidates: Vec<usize> = (0..g.contexts()).collect();
    let mut ordering = Vec::new();
    while !candidates.is_empty() {
        let loss = |v: usize| candidates.iter().filter(|&&u| u != v && g.has_edge(u, v)).count();
        let least = candidates.iter().map(|&v| loss(v)).min().expect("nonempty");
        let ties: Vec<usize> = candidates.iter().copied().filter(|&v| loss(v) == least).collect();
        let v = ties[rng.random_range(0..ties.len())];
        ordering.push(v);
        candidates.retain(|&u| u != v && !g.has_edge(u, v));
    }
    ordering
}

/// Position at which `x` can be inserted into an acyclic ordering, if any:
/// after every member with an edge into `x` and before every member that
/// `x` points to.
fn insertion_slot(g: &ClGraph, ordering: &[usize], x: usize) -> Option<usize> {
    let after = ordering.iter().rposition(|&u| g.has_edge(u, x)).map_or(0, |p| p + 1);
    let before = ordering.iter().position(|&u| g.has_edge(x, u)).unwrap_or(ordering.len());
    (after <= before).then_some(after)
}

/// Local search: insert outside vertices where possible, and trade one
/// member for two outsiders.
fn improve_acyclic(g: &ClGraph, mut ordering: Vec<usize>) -> Vec<usize> {
    let n = g.contexts();
    let insert_all = |ordering: &mut Vec<usize>| {
        let mut grew = true;
        while grew {
            grew = false;
            for x in 0..n {
                if !ordering.contains(&x) {
                    if let Some(p) = insertion_slot(g, ordering, x) {
                        ordering.insert(p, x);
                        grew = true;
                    }
                }
            }
        }
    };
    insert_all(&mut ordering);
    'outer: loop {
        for i in 0..ordering.len() {
            let mut trial = ordering.clone();
            trial.remove(i);
            insert_all(&mut trial);
            if trial.len() > ordering.len() {
                ordering = trial;
                continue 'outer;
            }
        }
        return ordering;
    }
}

/// Lower bound on `lambda` from its variational form: the explicit weights
/// `f(v_i) = M^i` on randomized greedy acyclic orderings refined by local
/// search, then ascent from the best such point and from random starts.
pub fn lambda_variational_estimate(g: &ClGraph, m_scale: f64, restarts: usize, seed: u64) -> f64 {
    let n = g.contexts();
    let log_m = m_scale.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut best = f64::NEG_INFINITY;
    let mut best_ordering = Vec::new();
    for restart in 0..restarts.max(1) {
        let start = if restart % 2 == 0 {
            order.shuffle(&mut rng);
            greedy_acyclic(g, &order)
        } else {
            min_loss_acyclic(g, &mut rng)
        };
        let candidate = improve_acyclic(g, start);
        let value = ordering_value(g, &candidate, log_m);
        if value > best {
            best = value;
            best_ordering = candidate;
        }
    }

    let objective = |f: &[f64]| lambda_objective(g, f);
    let gradient = |f: &[f64], out: &mut [f64]| {
        let mass: Vec<f64> = (0..n).map(|v| in_mass(g, f, v).max(1e-300)).collect();
        for u in 0..n {
            let spill: f64 = g
                .out_neighbors(u)
                .iter()
                .map(|&v| f[v] / (mass[v] * mass[v]))
                .sum();
            out[u] = 1.0 / mass[u] - spill;
        }
    };
    // ascent from the construction, when its weights are representable
    if best_ordering.len() as f64 * log_m < 600.0 {
        let r = best_ordering.len() as f64;
        let mut f = vec![0.0; n];
        for (i, &v) in best_ordering.iter().enumerate() {
            f[v] = ((i as f64 - r) * log_m).exp();
        }
        let total: f64 = f.iter().sum();
        f.iter_mut().for_each(|x| *x /= total);
        best = best.max(simplex_ascent(&mut f, 200, objective, gradient).1);
    }
    for _ in 0..4 {
        let mut f = dirichlet(&mut rng, n);
        best = best.max(simplex_ascent(&mut f, 200, objective, gradient).1);
    }
    best
}

/// All four invariants of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub contexts: usize,
    pub kappa: usize,
    pub kappa_method: Method,
    pub iota: Option<usize>,
    pub lambda: Option<usize>,
    pub lambda_ordering: Vec<usize>,
    pub nu2: Nu2Estimate,
}

impl InvariantReport {
    pub fn nu2_method(&self) -> Method {
        Method::VariationalLower
    }

    /// `lambda - nu2`, when `lambda` is known.
    pub fn nu2_gap(&self) -> Option<f64> {
        self.lambda.map(|l| l as f64 - self.nu2.value)
    }
}

/// Default effort for `nu_2` in reports.
const NU2_RESTARTS: usize = 32;
const NU2_ITERATIONS: usize = 300;

/// Computes every invariant the solvers can handle at this size: exact
/// where possible, a greedy clique cover otherwise.
pub fn invariant_report(g: &ClGraph, seed: u64) -> InvariantReport {
    let cover = clique_cover_number(g, CoverMode::Exact)
        .or_else(|_| clique_cover_number(g, CoverMode::Greedy))
        .expect("greedy cover always succeeds");
    let iota = independence_number(g).ok().map(|(v, _)| v);
    let (lambda, lambda_ordering) = match mas_number(g) {
        Ok((v, ord)) => (Some(v), ord),
        Err(_) => (None, Vec::new()),
    };
    InvariantReport {
        contexts: g.contexts(),
        kappa: cover.value,
        kappa_method: cover.method,
        iota,
        lambda,
        lambda_ordering,
        nu2: nu2_estimate(g, NU2_RESTARTS, NU2_ITERATIONS, seed),
    }
}

/// Computes every invariant exactly and checks
/// `iota <= nu2 <= lambda <= kappa` with tolerance `0.05 lambda` on the
/// `nu2` comparisons.
pub fn invariant_order_check(g: &ClGraph, seed: u64) -> Result<InvariantReport> {
    let cover = clique_cover_number(g, CoverMode::Exact)?;
    let (iota, _) = independence_number(g)?;
    let (lambda, ordering) = mas_number(g)?;
    let nu2 = nu2_estimate(g, NU2_RESTARTS, NU2_ITERATIONS, seed);
    let tol = 0.05 * lambda as f64;
    let ok = iota as f64 <= nu2.value + tol
        && nu2.value <= lambda as f64 + tol
        && lambda <= cover.value
        && is_acyclic_ordering(g, &ordering);
    if !ok {
        return Err(Error::Graph(format!(
            "invariant ordering violated: iota={iota} nu2={:.6} lambda={lambda} kappa={} \
             ordering={ordering:?} cover={:?}\n{}",
            nu2.value,
            cover.value,
            cover.cover,
            g.to_text()
        )));
    }
    Ok(InvariantReport {
        contexts: g.contexts(),
        kappa: cover.value,
        kappa_method: cover.method,
        iota: Some(iota),
        lambda: Some(lambda),
        lambda_ordering: ordering,
        nu2,
    })
}
