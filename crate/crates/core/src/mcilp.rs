//! Multi-choice integer programming.
//!
//! Solves `max c·x` subject to `Ax = b`, `Σ_{i∈S} x_i = t_S` for every set
//! `S` of a partition of the columns, and `x ≥ 0` integral. The solver walks
//! a fixed increment schedule: at layer `k` one variable of a predetermined
//! set is increased by one. Only right-hand sides within `4·r·Δ·|P|` (in the
//! max-norm) of the proportional target `d_k·b` are kept, where `d_k` is the
//! schedule's breakpoint at layer `k`. Reachable states are stored sparsely,
//! so the cost is governed by how many states actually occur rather than by
//! the size of the ball.
//!
//! Inequality systems `Ax ≤ b` are handled by [`reduce_inequalities`], which
//! drops rows that can never be violated and turns the remaining ones into
//! equalities with one slack set per row.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// A multi-choice integer program. Whether the rows are read as equalities
/// or as `≤` constraints is decided by the solve function it is passed to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McilpInstance {
    columns: usize,
    matrix: Vec<Vec<i64>>,
    rhs: Vec<i128>,
    objective: Vec<i64>,
    sets: Vec<Vec<usize>>,
    cardinalities: Vec<u64>,
}

impl McilpInstance {
    /// `matrix` is row-major with `columns` entries per row; `sets` must be
    /// disjoint and cover `0..columns`. Empty sets are allowed.
    pub fn new(
        columns: usize,
        matrix: Vec<Vec<i64>>,
        rhs: Vec<i128>,
        objective: Vec<i64>,
        sets: Vec<Vec<usize>>,
        cardinalities: Vec<u64>,
    ) -> Result<Self> {
        if matrix.len() != rhs.len() {
            return Err(Error::InvalidInstance(format!(
                "{} matrix rows but {} right-hand side entries",
                matrix.len(),
                rhs.len()
            )));
        }
        if let Some(j) = matrix.iter().position(|row| row.len() != columns) {
            return Err(Error::InvalidInstance(format!(
                "matrix row {j} does not have {columns} entries"
            )));
        }
        if objective.len() != columns {
            return Err(Error::InvalidInstance(format!(
                "objective has {} entries, expected {columns}",
                objective.len()
            )));
        }
        if sets.len() != cardinalities.len() {
            return Err(Error::InvalidInstance(
                "one cardinality per partition set required".into(),
            ));
        }
        if matrix.iter().flatten().any(|&a| a == i64::MIN) {
            return Err(Error::Overflow("matrix entry"));
        }
        let mut seen = vec![false; columns];
        for set in &sets {
            for &i in set {
                if i >= columns {
                    return Err(Error::InvalidInstance(format!(
                        "partition refers to column {i} of {columns}"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidInstance(format!(
                        "column {i} appears in two partition sets"
                    )));
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidInstance(format!(
                "column {i} is in no partition set"
            )));
        }
        Ok(McilpInstance {
            columns,
            matrix,
            rhs,
            objective,
            sets,
            cardinalities,
        })
    }

    pub fn rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[i128] {
        &self.rhs
    }

    pub fn objective(&self) -> &[i64] {
        &self.objective
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn cardinalities(&self) -> &[u64] {
        &self.cardinalities
    }

    /// Largest absolute matrix entry, at least 1.
    pub fn delta(&self) -> i64 {
        self.matrix
            .iter()
            .flatten()
            .map(|a| a.abs())
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// Total number of increments `t = Σ t_S`.
    pub fn total_cardinality(&self) -> u128 {
        self.cardinalities.iter().map(|&c| u128::from(c)).sum()
    }

    pub fn column(&self, i: usize) -> Vec<i64> {
        self.matrix.iter().map(|row| row[i]).collect()
    }

    /// `A x` computed exactly.
    pub fn product(&self, x: &[u64]) -> Result<Vec<i128>> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter().zip(x).try_fold(0i128, |acc, (&a, &v)| {
                    i128::from(a)
                        .checked_mul(i128::from(v))
                        .and_then(|p| acc.checked_add(p))
                        .ok_or(Error::Overflow("matrix product"))
                })
            })
            .collect()
    }

    pub fn value(&self, x: &[u64]) -> i128 {
        self.objective
            .iter()
            .zip(x)
            .map(|(&c, &v)| i128::from(c) * i128::from(v))
            .sum()
    }

    fn cardinalities_hold(&self, x: &[u64]) -> bool {
        self.sets
            .iter()
            .zip(&self.cardinalities)
            .all(|(set, &t)| set.iter().map(|&i| u128::from(x[i])).sum::<u128>() == u128::from(t))
    }

    /// Checks `x` against `Ax = b` and the cardinality constraints.
    pub fn is_feasible_equality(&self, x: &[u64]) -> bool {
        x.len() == self.columns
            && self.cardinalities_hold(x)
            && self.product(x).is_ok_and(|ax| ax == self.rhs)
    }

    /// Checks `x` against `Ax ≤ b` and the cardinality constraints.
    pub fn is_feasible_inequality(&self, x: &[u64]) -> bool {
        x.len() == self.columns
            && self.cardinalities_hold(x)
            && self
                .product(x)
                .is_ok_and(|ax| ax.iter().zip(&self.rhs).all(|(l, r)| l <= r))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct McilpSolution {
    pub x: Vec<u64>,
    pub objective: i128,
}

/// One increment of the schedule: bump a variable of `set` at time
/// `step / of`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Breakpoint {
    pub set: usize,
    pub step: u64,
    pub of: u64,
}

impl Breakpoint {
    pub fn fraction(&self) -> ExactRational {
        ExactRational::new(i128::from(self.step), i128::from(self.of))
            .expect("breakpoint denominators are positive")
    }

    fn cmp_time(&self, other: &Breakpoint) -> Ordering {
        (u128::from(self.step) * u128::from(other.of))
            .cmp(&(u128::from(other.step) * u128::from(self.of)))
    }
}

/// Merged increment order over all sets; equal times are ordered by set
/// index.
pub fn build_breakpoints(cardinalities: &[u64]) -> Vec<Breakpoint> {
    let mut schedule: Vec<Breakpoint> = cardinalities
        .iter()
        .enumerate()
        .flat_map(|(set, &of)| (1..=of).map(move |step| Breakpoint { set, step, of }))
        .collect();
    schedule.sort_by(|a, b| a.cmp_time(b).then(a.set.cmp(&b.set)));
    schedule
}

/// Counters collected during one DP run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SolveStats {
    /// Number of increment layers (`t`).
    pub layers: usize,
    /// Largest number of states held in a single layer.
    pub peak_states: usize,
    /// States stored over all layers, including layer 0.
    pub total_states: usize,
    /// Candidate states discarded because they left the ball.
    pub ball_rejections: u64,
    /// Candidate states discarded because the remaining layers cannot bring
    /// them back to a feasible right-hand side.
    pub bound_rejections: u64,
    /// Ball radius `4·r·Δ·|P|`, or 0 when no ball is used.
    pub radius: i128,
    /// Largest `‖b' − d_k·b‖_∞` over every stored state.
    pub max_deviation: Option<ExactRational>,
}

impl SolveStats {
    pub fn merge(&mut self, other: &SolveStats) {
        self.layers += other.layers;
        self.peak_states = self.peak_states.max(other.peak_states);
        self.total_states += other.total_states;
        self.ball_rejections += other.ball_rejections;
        self.bound_rejections += other.bound_rejections;
        self.radius = self.radius.max(other.radius);
        self.max_deviation = match (self.max_deviation, other.max_deviation) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
    }
}

/// Distinct column vectors of one set, each with the column that attains
/// the largest objective (smallest index on ties).
struct Move {
    delta: Vec<i64>,
    column: u32,
    weight: i64,
}

fn moves_for_set(inst: &McilpInstance, set: &[usize]) -> Vec<Move> {
    let mut sorted = set.to_vec();
    sorted.sort_unstable();
    let mut moves: Vec<Move> = Vec::new();
    let mut index: HashMap<Vec<i64>, usize> = HashMap::new();
    for i in sorted {
        let delta = inst.column(i);
        let weight = inst.objective[i];
        match index.get(&delta) {
            Some(&at) => {
                if weight > moves[at].weight {
                    moves[at].column = i as u32;
                    moves[at].weight = weight;
                }
            }
            None => {
                index.insert(delta.clone(), moves.len());
                moves.push(Move {
                    delta,
                    column: i as u32,
                    weight,
                });
            }
        }
    }
    moves
}

struct StateEntry {
    rhs: Box<[i64]>,
    objective: i128,
    node: u32,
    column: u32,
}

pub fn solve_equality(inst: &McilpInstance) -> Result<Option<McilpSolution>> {
    solve_equality_with_stats(inst).map(|(sol, _)| sol)
}

/// Longest-path DP over the increment layers, returning the solution (if
/// any) and the run's counters.
pub fn solve_equality_with_stats(
    inst: &McilpInstance,
) -> Result<(Option<McilpSolution>, SolveStats)> {
    layered_dp(inst, Target::Exact)
}

/// Solves `Ax ≤ b` with the same layer schedule but without slack columns
/// or the ball: every reachable state that can still satisfy the rows is
/// kept, and the best final state below `b` wins. Exact for any instance;
/// fast when the reachable sums are few.
pub fn solve_inequality_direct(
    inst: &McilpInstance,
) -> Result<(Option<McilpSolution>, SolveStats)> {
    layered_dp(inst, Target::AtMost)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Target {
    /// `Ax = b`, states restricted to the ball.
    Exact,
    /// `Ax ≤ b`, no ball.
    AtMost,
}

fn layered_dp(inst: &McilpInstance, target: Target) -> Result<(Option<McilpSolution>, SolveStats)> {
    let rows = inst.rows();
    let delta = i128::from(inst.delta());
    let radius = match target {
        Target::Exact => 4 * rows as i128 * delta * inst.sets.len() as i128,
        Target::AtMost => 0,
    };
    let schedule = build_breakpoints(&inst.cardinalities);
    if schedule.len() > u32::MAX as usize {
        return Err(Error::Overflow("layer count"));
    }
    let moves: Vec<Vec<Move>> = inst.sets.iter().map(|s| moves_for_set(inst, s)).collect();
    // Per set and row, the smallest and largest entry over its columns.
    let extremes: Vec<Vec<(i128, i128)>> = moves
        .iter()
        .map(|set| {
            (0..rows)
                .map(|j| {
                    let entries = set.iter().map(|m| i128::from(m.delta[j]));
                    (
                        entries.clone().min().unwrap_or(0),
                        entries.max().unwrap_or(0),
                    )
                })
                .collect()
        })
        .collect();
    // What the layers not yet taken can still add to each row, at least and
    // at most.
    let mut remaining = vec![(0i128, 0i128); rows];
    for (ext, &t) in extremes.iter().zip(&inst.cardinalities) {
        let t = i128::from(t);
        for (r, &(lo, hi)) in remaining.iter_mut().zip(ext) {
            let add = |acc: i128, e: i128| e.checked_mul(t).and_then(|v| acc.checked_add(v));
            r.0 = add(r.0, lo).ok_or(Error::Overflow("row bound"))?;
            r.1 = add(r.1, hi).ok_or(Error::Overflow("row bound"))?;
        }
    }
    let mut stats = SolveStats {
        layers: schedule.len(),
        radius,
        ..SolveStats::default()
    };

    // Predecessor links for every stored state: (parent node, column).
    let mut links: Vec<(u32, u32)> = vec![(u32::MAX, u32::MAX)];
    let mut layer = vec![StateEntry {
        rhs: vec![0i64; rows].into_boxed_slice(),
        objective: 0,
        node: 0,
        column: u32::MAX,
    }];
    stats.peak_states = 1;
    stats.total_states = 1;
    if target == Target::Exact {
        stats.max_deviation = Some(ExactRational::ZERO);
    }

    let mut index: HashMap<Box<[i64]>, usize> = HashMap::new();
    for bp in &schedule {
        for (r, &(lo, hi)) in remaining.iter_mut().zip(&extremes[bp.set]) {
            r.0 -= lo;
            r.1 -= hi;
        }
        let of = i128::from(bp.of);
        let step = i128::from(bp.step);
        let bound = radius * of;
        let mut next: Vec<StateEntry> = Vec::new();
        index.clear();
        let mut candidate = vec![0i64; rows];
        for entry in &layer {
            'moves: for mv in &moves[bp.set] {
                let mut worst = 0i128;
                for j in 0..rows {
                    let v = entry.rhs[j]
                        .checked_add(mv.delta[j])
                        .ok_or(Error::Overflow("dp state"))?;
                    let b = inst.rhs[j];
                    let (lo, hi) = remaining[j];
                    let v128 = i128::from(v);
                    let dead = match target {
                        Target::Exact => v128 + lo > b || v128 + hi < b,
                        Target::AtMost => v128 + lo > b,
                    };
                    if dead {
                        stats.bound_rejections += 1;
                        continue 'moves;
                    }
                    if target == Target::Exact {
                        let dev = (of * v128 - step * b).abs();
                        if dev > bound {
                            stats.ball_rejections += 1;
                            continue 'moves;
                        }
                        worst = worst.max(dev);
                    }
                    candidate[j] = v;
                }
                let objective = entry.objective + i128::from(mv.weight);
                match index.get(candidate.as_slice()) {
                    Some(&at) => {
                        let slot = &mut next[at];
                        let better = objective > slot.objective
                            || (objective == slot.objective && mv.column < slot.column);
                        if better {
                            slot.objective = objective;
                            slot.node = entry.node;
                            slot.column = mv.column;
                        }
                    }
                    None => {
                        if target == Target::Exact {
                            let dev = ExactRational::new(worst, of)?;
                            if stats.max_deviation.is_none_or(|m| dev > m) {
                                stats.max_deviation = Some(dev);
                            }
                        }
                        let rhs: Box<[i64]> = candidate.clone().into_boxed_slice();
                        index.insert(rhs.clone(), next.len());
                        next.push(StateEntry {
                            rhs,
                            objective,
                            node: entry.node,
                            column: mv.column,
                        });
                    }
                }
            }
        }
        // `node` held the parent's id while building; turn each state into
        // a fresh node with its link recorded.
        for entry in &mut next {
            if links.len() >= u32::MAX as usize {
                return Err(Error::Overflow("dp node count"));
            }
            links.push((entry.node, entry.column));
            entry.node = (links.len() - 1) as u32;
        }
        stats.peak_states = stats.peak_states.max(next.len());
        stats.total_states += next.len();
        layer = next;
        if layer.is_empty() {
            return Ok((None, stats));
        }
    }

    let fits = |e: &&StateEntry| {
        e.rhs.iter().zip(&inst.rhs).all(|(&v, &b)| match target {
            Target::Exact => i128::from(v) == b,
            Target::AtMost => i128::from(v) <= b,
        })
    };
    // First state of maximum objective, so ties resolve by insertion order.
    let end = layer
        .iter()
        .filter(fits)
        .fold(None::<&StateEntry>, |best, e| match best {
            Some(b) if b.objective >= e.objective => Some(b),
            _ => Some(e),
        });
    let Some(end) = end else {
        return Ok((None, stats));
    };
    let mut x = vec![0u64; inst.columns];
    let mut node = end.node;
    while node != 0 {
        let (parent, column) = links[node as usize];
        x[column as usize] += 1;
        node = parent;
    }
    let objective = end.objective;
    debug_assert_eq!(objective, inst.value(&x));
    Ok((Some(McilpSolution { x, objective }), stats))
}

/// Equality-form program produced from an inequality system, with enough
/// bookkeeping to map solutions back.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reduction {
    pub instance: McilpInstance,
    /// Indices of the original rows that survived, in order.
    pub kept_rows: Vec<usize>,
    /// Number of columns of the original program; slack columns follow.
    pub original_columns: usize,
}

impl Reduction {
    /// Drops the slack columns.
    pub fn back_map(&self, solution: &McilpSolution) -> McilpSolution {
        McilpSolution {
            x: solution.x[..self.original_columns].to_vec(),
            objective: solution.objective,
        }
    }
}

/// How much room each slack set gets when rows become equalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlackBounds {
    /// Every surviving row gets a slack set of cardinality `2·t·Δ`; rows
    /// with `b_j ≥ Δ·t` are dropped.
    #[default]
    Uniform,
    /// Row `j` gets cardinality `b_j − lo_j`, where `lo_j` is the smallest
    /// left-hand side the cardinalities allow; rows whose largest possible
    /// left-hand side is at most `b_j` are dropped.
    Tight,
}

/// Turns `Ax ≤ b` into an equality program.
///
/// Rows with `b_j ≥ Δ·t` cannot be violated and are removed. Every other row
/// `j` gets two new columns `s_j` (unit vector in row `j`) and `s̄_j`
/// (all zero), both with objective 0, forming a new set of cardinality
/// `2·t·Δ`; the row then becomes `A_j x + s_j = b_j`.
pub fn reduce_inequalities(inst: &McilpInstance) -> Result<Reduction> {
    reduce_inequalities_with(inst, SlackBounds::Uniform)?
        .ok_or_else(|| Error::Invariant("uniform slack reduction never rejects".into()))
}

/// Like [`reduce_inequalities`] with a choice of slack sizes. `None` means
/// some row can never be satisfied.
pub fn reduce_inequalities_with(
    inst: &McilpInstance,
    bounds: SlackBounds,
) -> Result<Option<Reduction>> {
    let mut kept_rows = Vec::new();
    let mut slack_cards = Vec::new();
    match bounds {
        SlackBounds::Uniform => {
            let delta = i128::from(inst.delta());
            let t = i128::try_from(inst.total_cardinality()).map_err(|_| Error::Overflow("t"))?;
            let limit = delta.checked_mul(t).ok_or(Error::Overflow("Δ·t"))?;
            let card =
                u64::try_from(2 * limit).map_err(|_| Error::Overflow("slack cardinality"))?;
            for j in 0..inst.rows() {
                if inst.rhs[j] < limit {
                    kept_rows.push(j);
                    slack_cards.push(card);
                }
            }
        }
        SlackBounds::Tight => {
            for j in 0..inst.rows() {
                let (lo, hi) = row_range(inst, j)?;
                if inst.rhs[j] >= hi {
                    continue;
                }
                if inst.rhs[j] < lo {
                    return Ok(None);
                }
                let card = u64::try_from(inst.rhs[j] - lo)
                    .map_err(|_| Error::Overflow("slack cardinality"))?;
                kept_rows.push(j);
                slack_cards.push(card);
            }
        }
    }

    let n = inst.columns;
    let extra = 2 * kept_rows.len();
    let matrix: Vec<Vec<i64>> = kept_rows
        .iter()
        .enumerate()
        .map(|(r, &j)| {
            let mut row = Vec::with_capacity(n + extra);
            row.extend_from_slice(&inst.matrix[j]);
            row.resize(n + extra, 0);
            row[n + 2 * r] = 1;
            row
        })
        .collect();
    let rhs = kept_rows.iter().map(|&j| inst.rhs[j]).collect();
    let mut objective = inst.objective.clone();
    objective.resize(n + extra, 0);
    let mut sets = inst.sets.clone();
    let mut cardinalities = inst.cardinalities.clone();
    for (r, card) in slack_cards.into_iter().enumerate() {
        sets.push(vec![n + 2 * r, n + 2 * r + 1]);
        cardinalities.push(card);
    }
    let instance = McilpInstance::new(n + extra, matrix, rhs, objective, sets, cardinalities)?;
    Ok(Some(Reduction {
        instance,
        kept_rows,
        original_columns: n,
    }))
}

/// Smallest and largest value row `j` can take under the cardinalities.
fn row_range(inst: &McilpInstance, j: usize) -> Result<(i128, i128)> {
    let row = &inst.matrix[j];
    let (mut lo, mut hi) = (0i128, 0i128);
    for (set, &t) in inst.sets.iter().zip(&inst.cardinalities) {
        if t == 0 || set.is_empty() {
            continue;
        }
        let min = set.iter().map(|&i| row[i]).min().expect("nonempty");
        let max = set.iter().map(|&i| row[i]).max().expect("nonempty");
        let t = i128::from(t);
        lo = lo
            .checked_add(t * i128::from(min))
            .ok_or(Error::Overflow("row range"))?;
        hi = hi
            .checked_add(t * i128::from(max))
            .ok_or(Error::Overflow("row range"))?;
    }
    Ok((lo, hi))
}

pub fn solve_inequality(inst: &McilpInstance) -> Result<Option<McilpSolution>> {
    solve_inequality_with_stats(inst).map(|(sol, _)| sol)
}

pub fn solve_inequality_with_stats(
    inst: &McilpInstance,
) -> Result<(Option<McilpSolution>, SolveStats)> {
    solve_inequality_with(inst, SlackBounds::Uniform)
}

pub fn solve_inequality_with(
    inst: &McilpInstance,
    bounds: SlackBounds,
) -> Result<(Option<McilpSolution>, SolveStats)> {
    let Some(reduction) = reduce_inequalities_with(inst, bounds)? else {
        return Ok((None, SolveStats::default()));
    };
    let (solution, stats) = solve_equality_with_stats(&reduction.instance)?;
    Ok((solution.map(|s| reduction.back_map(&s)), stats))
}
