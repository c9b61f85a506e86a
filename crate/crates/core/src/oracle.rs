//! Exhaustive reference solvers.
//!
//! These enumerate count splits directly and share nothing with the main
//! pipeline beyond the instance types. Every search is bounded by a node
//! budget; running out is reported as [`Error::BudgetExceeded`] rather than
//! as an answer.

use crate::error::{Error, Result};
use crate::instance::{Assignment, PartitionInstance, SchedulingInstance};
use crate::mcilp::{McilpInstance, McilpSolution};
use crate::rational::ExactRational;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    fn new(limit: u64) -> Self {
        Budget { limit, used: 0 }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            Err(Error::BudgetExceeded(self.limit))
        } else {
            Ok(())
        }
    }
}

/// Depth-first search over how many jobs of each size every machine gets.
pub fn brute_partition(inst: &PartitionInstance, budget: u64) -> Result<Option<Assignment>> {
    let jobs = inst.jobs();
    let sizes = jobs.sizes();
    let m = inst.machines();
    let d = jobs.d();
    let mut rows = vec![vec![0u64; d]; m];
    let mut loads = vec![0u128; m];
    let mut budget = Budget::new(budget);

    // Largest sizes first so that the load bound prunes early.
    #[allow(clippy::too_many_arguments)]
    fn place(
        k: usize,
        i: usize,
        left: u64,
        sizes: &[u64],
        counts: &[u64],
        targets: &[u128],
        rows: &mut Vec<Vec<u64>>,
        loads: &mut Vec<u128>,
        budget: &mut Budget,
    ) -> Result<bool> {
        budget.tick()?;
        let m = targets.len();
        if i + 1 == m {
            let add = u128::from(left) * u128::from(sizes[k]);
            if loads[i] + add > targets[i] {
                return Ok(false);
            }
            rows[i][k] = left;
            loads[i] += add;
            let done = if k == 0 {
                loads.iter().zip(targets).all(|(l, t)| l == t)
            } else {
                place(
                    k - 1,
                    0,
                    counts[k - 1],
                    sizes,
                    counts,
                    targets,
                    rows,
                    loads,
                    budget,
                )?
            };
            if !done {
                rows[i][k] = 0;
                loads[i] -= add;
            }
            return Ok(done);
        }
        let p = u128::from(sizes[k]);
        let room = (targets[i] - loads[i]) / p;
        let most = u128::from(left).min(room) as u64;
        for c in (0..=most).rev() {
            rows[i][k] = c;
            loads[i] += u128::from(c) * p;
            if place(
                k,
                i + 1,
                left - c,
                sizes,
                counts,
                targets,
                rows,
                loads,
                budget,
            )? {
                return Ok(true);
            }
            loads[i] -= u128::from(c) * p;
            rows[i][k] = 0;
        }
        Ok(false)
    }

    let found = place(
        d - 1,
        0,
        jobs.counts()[d - 1],
        sizes,
        jobs.counts(),
        inst.targets(),
        &mut rows,
        &mut loads,
        &mut budget,
    )?;
    Ok(found.then(|| Assignment::from_rows(rows).expect("rectangular")))
}

/// Smallest makespan over every assignment, by exhaustive enumeration.
pub fn brute_makespan(
    inst: &SchedulingInstance,
    budget: u64,
) -> Result<(ExactRational, Assignment)> {
    let jobs = inst.jobs();
    let m = inst.machines();
    let d = jobs.d();
    let mut rows = vec![vec![0u64; d]; m];
    let mut loads = vec![0u128; m];
    let mut best: Option<(ExactRational, Vec<Vec<u64>>)> = None;
    let mut budget = Budget::new(budget);

    struct Ctx<'a> {
        sizes: &'a [u64],
        counts: &'a [u64],
        speeds: &'a [u64],
    }

    fn makespan(loads: &[u128], speeds: &[u64]) -> Result<ExactRational> {
        let mut worst = ExactRational::ZERO;
        for (&l, &s) in loads.iter().zip(speeds) {
            let v = ExactRational::new(l as i128, i128::from(s))?;
            worst = worst.max(v);
        }
        Ok(worst)
    }

    #[allow(clippy::too_many_arguments)]
    fn walk(
        ctx: &Ctx<'_>,
        k: usize,
        i: usize,
        left: u64,
        rows: &mut Vec<Vec<u64>>,
        loads: &mut Vec<u128>,
        best: &mut Option<(ExactRational, Vec<Vec<u64>>)>,
        budget: &mut Budget,
    ) -> Result<()> {
        budget.tick()?;
        let m = ctx.speeds.len();
        let p = u128::from(ctx.sizes[k]);
        let range = if i + 1 == m { left..=left } else { 0..=left };
        for c in range {
            rows[i][k] = c;
            loads[i] += u128::from(c) * p;
            if i + 1 < m {
                walk(ctx, k, i + 1, left - c, rows, loads, best, budget)?;
            } else if k + 1 < ctx.sizes.len() {
                walk(ctx, k + 1, 0, ctx.counts[k + 1], rows, loads, best, budget)?;
            } else {
                let value = makespan(loads, ctx.speeds)?;
                if best.as_ref().is_none_or(|(b, _)| value < *b) {
                    *best = Some((value, rows.clone()));
                }
            }
            loads[i] -= u128::from(c) * p;
            rows[i][k] = 0;
        }
        Ok(())
    }

    let ctx = Ctx {
        sizes: jobs.sizes(),
        counts: jobs.counts(),
        speeds: inst.speeds(),
    };
    walk(
        &ctx,
        0,
        0,
        jobs.counts()[0],
        &mut rows,
        &mut loads,
        &mut best,
        &mut budget,
    )?;
    let (value, rows) = best.expect("at least one assignment exists");
    Ok((value, Assignment::from_rows(rows).expect("rectangular")))
}

/// Which reading of the rows the enumerator checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowSense {
    Equal,
    AtMost,
}

/// Enumerates every `x` meeting the cardinalities and keeps the first
/// maximum-objective vector satisfying the rows.
pub fn brute_mcilp(
    inst: &McilpInstance,
    sense: RowSense,
    budget: u64,
) -> Result<Option<McilpSolution>> {
    let mut x = vec![0u64; inst.columns()];
    let mut best: Option<McilpSolution> = None;
    let mut budget = Budget::new(budget);

    #[allow(clippy::too_many_arguments)]
    fn fill_set(
        inst: &McilpInstance,
        sense: RowSense,
        set: usize,
        pos: usize,
        left: u64,
        x: &mut Vec<u64>,
        best: &mut Option<McilpSolution>,
        budget: &mut Budget,
    ) -> Result<()> {
        budget.tick()?;
        if set == inst.sets().len() {
            let ax = inst.product(x)?;
            let ok = match sense {
                RowSense::Equal => ax.iter().zip(inst.rhs()).all(|(l, r)| l == r),
                RowSense::AtMost => ax.iter().zip(inst.rhs()).all(|(l, r)| l <= r),
            };
            if ok {
                let value = inst.value(x);
                if best.as_ref().is_none_or(|b| value > b.objective) {
                    *best = Some(McilpSolution {
                        x: x.clone(),
                        objective: value,
                    });
                }
            }
            return Ok(());
        }
        let members = &inst.sets()[set];
        if pos == members.len() {
            if left == 0 {
                let next = set + 1;
                let card = inst.cardinalities().get(next).copied().unwrap_or(0);
                fill_set(inst, sense, next, 0, card, x, best, budget)?;
            }
            return Ok(());
        }
        let col = members[pos];
        let range = if pos + 1 == members.len() {
            left..=left
        } else {
            0..=left
        };
        for v in range {
            x[col] = v;
            fill_set(inst, sense, set, pos + 1, left - v, x, best, budget)?;
        }
        x[col] = 0;
        Ok(())
    }

    let first = inst.cardinalities().first().copied().unwrap_or(0);
    fill_set(inst, sense, 0, 0, first, &mut x, &mut best, &mut budget)?;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::JobProfile;
    use crate::verify::{verify_makespan, verify_partition};

    fn partition(sizes: Vec<u64>, counts: Vec<u64>, targets: Vec<u128>) -> PartitionInstance {
        PartitionInstance::new(JobProfile::new(sizes, counts).unwrap(), targets).unwrap()
    }

    #[test]
    fn partition_examples() {
        let inst = partition(vec![2, 3], vec![2, 2], vec![5, 5]);
        let asg = brute_partition(&inst, DEFAULT_BUDGET).unwrap().unwrap();
        assert!(verify_partition(&inst, &asg).unwrap().passed());

        let inst = partition(vec![3], vec![2], vec![2, 4]);
        assert_eq!(brute_partition(&inst, DEFAULT_BUDGET).unwrap(), None);

        let inst = partition(vec![1, 2], vec![2, 1], vec![0, 4]);
        let asg = brute_partition(&inst, DEFAULT_BUDGET).unwrap().unwrap();
        assert_eq!(asg.rows(), &[vec![0, 0], vec![2, 1]]);
    }

    #[test]
    fn partition_budget_is_an_error() {
        let inst = partition(vec![1, 2, 3], vec![6, 6, 6], vec![12, 12, 12]);
        assert_eq!(brute_partition(&inst, 3), Err(Error::BudgetExceeded(3)));
    }

    #[test]
    fn makespan_examples() {
        let inst =
            SchedulingInstance::new(JobProfile::normalize(&[3, 3, 2, 2, 2]).unwrap(), vec![1, 1])
                .unwrap();
        let (v, asg) = brute_makespan(&inst, DEFAULT_BUDGET).unwrap();
        assert_eq!(v.to_string(), "6/1");
        assert_eq!(verify_makespan(&inst, &asg).unwrap(), v);

        let inst =
            SchedulingInstance::new(JobProfile::normalize(&[4, 2]).unwrap(), vec![2, 1]).unwrap();
        assert_eq!(
            brute_makespan(&inst, DEFAULT_BUDGET).unwrap().0.to_string(),
            "2/1"
        );

        let inst =
            SchedulingInstance::new(JobProfile::normalize(&[5, 2, 2]).unwrap(), vec![3]).unwrap();
        assert_eq!(
            brute_makespan(&inst, DEFAULT_BUDGET).unwrap().0.to_string(),
            "3/1"
        );
    }

    fn single_set(matrix: Vec<Vec<i64>>, rhs: Vec<i128>, c: Vec<i64>, t: u64) -> McilpInstance {
        let n = c.len();
        McilpInstance::new(n, matrix, rhs, c, vec![(0..n).collect()], vec![t]).unwrap()
    }

    #[test]
    fn mcilp_examples() {
        let inst = single_set(vec![vec![1, -1]], vec![0], vec![2, 1], 2);
        let sol = brute_mcilp(&inst, RowSense::Equal, DEFAULT_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!((sol.x, sol.objective), (vec![1, 1], 3));

        let zero = single_set(vec![vec![1]], vec![0], vec![1], 0);
        assert!(brute_mcilp(&zero, RowSense::Equal, DEFAULT_BUDGET)
            .unwrap()
            .is_some());
        let nonzero = single_set(vec![vec![1]], vec![1], vec![1], 0);
        assert!(brute_mcilp(&nonzero, RowSense::Equal, DEFAULT_BUDGET)
            .unwrap()
            .is_none());

        let parity = single_set(vec![vec![1, 1]], vec![1], vec![0, 0], 2);
        assert!(brute_mcilp(&parity, RowSense::Equal, DEFAULT_BUDGET)
            .unwrap()
            .is_none());
    }

    #[test]
    fn mcilp_inequality_examples() {
        let a = single_set(vec![vec![1]], vec![0], vec![1], 1);
        assert!(brute_mcilp(&a, RowSense::AtMost, DEFAULT_BUDGET)
            .unwrap()
            .is_none());
        let b = single_set(vec![vec![-1]], vec![0], vec![1], 2);
        let sol = brute_mcilp(&b, RowSense::AtMost, DEFAULT_BUDGET)
            .unwrap()
            .unwrap();
        assert_eq!((sol.x, sol.objective), (vec![2], 2));
    }
}
