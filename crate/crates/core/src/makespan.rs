//! Makespan minimization on uniform machines.
//!
//! For a guess `U`, machine `i` may hold work up to `T_i = ⌊s_i·U⌋`. Padding
//! the jobs with `Σ T_i − Σ p_j` unit jobs turns the question into an exact
//! partition instance. The optimum is one of the values `L / s_i` with
//! `0 ≤ L ≤ N·p_max`; those candidates are searched by rank without ever
//! being listed.

use crate::error::{Error, Result};
use crate::instance::{Assignment, JobProfile, PartitionInstance, SchedulingInstance};
use crate::mcilp::SolveStats;
use crate::partition::{solve_partition_with, PartitionOptions};
use crate::rational::ExactRational;

/// The multiset `{ L / s_i : machine i, 0 ≤ L ≤ max_work }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSpace {
    speeds: Vec<u64>,
    max_work: u128,
}

impl CandidateSpace {
    pub fn new(inst: &SchedulingInstance) -> Result<Self> {
        let jobs = inst.jobs();
        let max_work = jobs
            .total_jobs()
            .checked_mul(u128::from(jobs.p_max()))
            .ok_or(Error::Overflow("candidate range"))?;
        if i128::try_from(max_work).is_err() {
            return Err(Error::Overflow("candidate range"));
        }
        Ok(CandidateSpace {
            speeds: inst.speeds().to_vec(),
            max_work,
        })
    }

    /// Number of candidates counted with multiplicity.
    pub fn len(&self) -> u128 {
        self.speeds.len() as u128 * (self.max_work + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Candidates `≤ x`.
    pub fn count_le(&self, x: &ExactRational) -> Result<u128> {
        if x.is_negative() {
            return Ok(0);
        }
        let mut total = 0u128;
        for &s in &self.speeds {
            let top = x.floor_scaled(s)? as u128;
            total += top.min(self.max_work) + 1;
        }
        Ok(total)
    }

    /// Candidates `< x`.
    pub fn count_lt(&self, x: &ExactRational) -> Result<u128> {
        if x.is_negative() {
            return Ok(0);
        }
        let mut total = 0u128;
        for &s in &self.speeds {
            // largest L with L / s < x is ceil(s·x) − 1
            let floor = x.floor_scaled(s)?;
            let exact = ExactRational::new(floor, i128::from(s))? == *x;
            let below = if exact { floor - 1 } else { floor };
            if below >= 0 {
                total += (below as u128).min(self.max_work) + 1;
            }
        }
        Ok(total)
    }

    /// The `rank`-th smallest candidate, counting from 1.
    pub fn select(&self, rank: u128) -> Result<ExactRational> {
        if rank == 0 || rank > self.len() {
            return Err(Error::InvalidArgument(format!(
                "rank {rank} outside 1..={}",
                self.len()
            )));
        }
        for &s in &self.speeds {
            // smallest L with count_le(L / s) ≥ rank
            let (mut lo, mut hi) = (0u128, self.max_work);
            let at = |l: u128| ExactRational::new(l as i128, i128::from(s));
            if self.count_le(&at(hi)?)? < rank {
                continue;
            }
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if self.count_le(&at(mid)?)? >= rank {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let value = at(lo)?;
            if self.count_lt(&value)? < rank {
                return Ok(value);
            }
        }
        Err(Error::Invariant(format!("no candidate of rank {rank}")))
    }
}

/// Tries to fit every job under makespan `bound`.
pub fn decide(inst: &SchedulingInstance, bound: &ExactRational) -> Result<Option<Assignment>> {
    decide_with(inst, bound, &PartitionOptions::default())
}

pub fn decide_with(
    inst: &SchedulingInstance,
    bound: &ExactRational,
    options: &PartitionOptions,
) -> Result<Option<Assignment>> {
    decide_with_stats(inst, bound, options).map(|(asg, _)| asg)
}

/// Like [`decide_with`], also returning the DP statistics of the partition
/// solve.
pub fn decide_with_stats(
    inst: &SchedulingInstance,
    bound: &ExactRational,
    options: &PartitionOptions,
) -> Result<(Option<Assignment>, SolveStats)> {
    if bound.is_negative() {
        return Err(Error::InvalidArgument(
            "makespan bound must be nonnegative".into(),
        ));
    }
    let jobs = inst.jobs();
    let mut targets = Vec::with_capacity(inst.machines());
    let mut capacity = 0u128;
    for &s in inst.speeds() {
        let t = bound.floor_scaled(s)? as u128;
        capacity = capacity.checked_add(t).ok_or(Error::Overflow("capacity"))?;
        targets.push(t);
    }
    if capacity < jobs.total_size() {
        return Ok((None, SolveStats::default()));
    }
    let dummies = u64::try_from(capacity - jobs.total_size())
        .map_err(|_| Error::Overflow("dummy job count"))?;
    let (padded, unit_index, inserted) = pad_with_units(jobs, dummies)?;
    let padded_inst = PartitionInstance::new(padded, targets)?;
    let report = solve_partition_with(&padded_inst, options)?;
    let stats = report.ilp_stats;
    let Some(mut asg) = report.assignment else {
        return Ok((None, stats));
    };

    // Take the dummies back out, last machine first.
    let mut left = dummies;
    for i in (0..asg.machines()).rev() {
        if left == 0 {
            break;
        }
        let take = asg.get(i, unit_index).min(left);
        asg.sub(i, unit_index, take);
        left -= take;
    }
    if left > 0 {
        return Err(Error::Invariant(
            "fewer unit jobs placed than dummies added".into(),
        ));
    }
    let rows: Vec<Vec<u64>> = asg
        .rows()
        .iter()
        .map(|row| {
            let mut row = row.clone();
            if inserted {
                row.remove(unit_index);
            }
            row
        })
        .collect();
    let asg = Assignment::from_rows(rows)?;
    debug_assert!(asg.is_complete(jobs));
    Ok((Some(asg), stats))
}

/// Adds `dummies` unit jobs. Returns the padded profile, the index of the
/// unit size in it, and whether that size was new.
fn pad_with_units(jobs: &JobProfile, dummies: u64) -> Result<(JobProfile, usize, bool)> {
    let mut sizes = jobs.sizes().to_vec();
    let mut counts = jobs.counts().to_vec();
    if sizes[0] == 1 {
        counts[0] = counts[0]
            .checked_add(dummies)
            .ok_or(Error::Overflow("dummy job count"))?;
        Ok((JobProfile::new(sizes, counts)?, 0, false))
    } else if dummies == 0 {
        Ok((jobs.clone(), 0, false))
    } else {
        sizes.insert(0, 1);
        counts.insert(0, dummies);
        Ok((JobProfile::new(sizes, counts)?, 0, true))
    }
}

#[derive(Debug, Clone)]
pub struct MakespanSolution {
    pub value: ExactRational,
    pub assignment: Assignment,
    /// Number of `decide` calls made by the search.
    pub probes: usize,
    /// DP statistics merged over all probes.
    pub stats: SolveStats,
}

pub fn solve_makespan(inst: &SchedulingInstance) -> Result<MakespanSolution> {
    solve_makespan_with(inst, &PartitionOptions::default())
}

/// Every job on the slowest machine (lowest index among ties).
fn pile_up(inst: &SchedulingInstance) -> Assignment {
    let jobs = inst.jobs();
    let slowest = (0..inst.speeds().len())
        .min_by_key(|&i| inst.speeds()[i])
        .unwrap_or(0);
    let mut asg = Assignment::zeros(inst.speeds().len(), jobs.d());
    for (b, &n) in jobs.counts().iter().enumerate() {
        asg.set(slowest, b, n);
    }
    asg
}

pub fn solve_makespan_with(
    inst: &SchedulingInstance,
    options: &PartitionOptions,
) -> Result<MakespanSolution> {
    let space = CandidateSpace::new(inst)?;
    let mut probes = 0;
    let mut stats = SolveStats::default();
    // Invariant: rank `hi` is feasible, every rank below `lo` is not. The
    // largest candidate is witnessed by piling every job on the slowest machine.
    let (mut lo, mut hi) = (1u128, space.len());
    let mut best = (space.select(hi)?, pile_up(inst));
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let value = space.select(mid)?;
        probes += 1;
        let (found, probe_stats) = decide_with_stats(inst, &value, options)?;
        stats.merge(&probe_stats);
        match found {
            Some(asg) => {
                hi = mid;
                best = (value, asg);
            }
            None => lo = mid + 1,
        }
    }
    let (value, assignment) = best;
    Ok(MakespanSolution {
        value,
        assignment,
        probes,
        stats,
    })
}
