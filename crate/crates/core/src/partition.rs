//! Multiway Partitioning: try every distinct size as the pivot, solve its
//! configuration program, decode and repair. Some pivot's program is
//! feasible whenever the instance is, so failing all of them certifies
//! infeasibility.

use crate::error::{Error, Result};
use crate::greedy::{reconstruct, InvariantChecks, TraceRecord};
use crate::instance::{Assignment, PartitionInstance};
use crate::mcilp::SolveStats;
use crate::modip::{build_config_ilp, decode, solve_config_program};
use crate::verify::verify_partition;

#[derive(Debug, Clone, Default)]
pub struct PartitionOptions {
    /// Only try this pivot.
    pub pivot: Option<u64>,
}

/// What happened for one pivot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotOutcome {
    /// Too few jobs of the pivot size for the big machines.
    Skipped,
    /// Configuration program infeasible.
    Infeasible,
    Solved,
}

#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub assignment: Option<Assignment>,
    /// The pivot that produced `assignment`.
    pub pivot: Option<u64>,
    pub attempts: Vec<(u64, PivotOutcome)>,
    pub ilp_stats: SolveStats,
    pub trace: Vec<TraceRecord>,
    pub checks: InvariantChecks,
}

pub fn solve_partition(inst: &PartitionInstance) -> Result<Option<Assignment>> {
    solve_partition_with(inst, &PartitionOptions::default()).map(|r| r.assignment)
}

pub fn solve_partition_with(
    inst: &PartitionInstance,
    options: &PartitionOptions,
) -> Result<PartitionReport> {
    let pivots: Vec<u64> = match options.pivot {
        Some(p) => {
            if inst.jobs().index_of(p).is_none() {
                return Err(Error::InvalidArgument(format!(
                    "pivot {p} is not one of the processing times"
                )));
            }
            vec![p]
        }
        None => inst.jobs().sizes().to_vec(),
    };
    let mut report = PartitionReport {
        assignment: None,
        pivot: None,
        attempts: Vec::new(),
        ilp_stats: SolveStats::default(),
        trace: Vec::new(),
        checks: InvariantChecks::default(),
    };
    for pivot in pivots {
        let program = match build_config_ilp(inst, pivot) {
            Ok(p) => p,
            Err(Error::PivotInfeasible { .. }) => {
                report.attempts.push((pivot, PivotOutcome::Skipped));
                continue;
            }
            Err(e) => return Err(e),
        };
        let (solution, stats) = solve_config_program(&program)?;
        report.ilp_stats.merge(&stats);
        let Some(solution) = solution else {
            report.attempts.push((pivot, PivotOutcome::Infeasible));
            continue;
        };
        let relaxed = decode(&program, &solution, inst.jobs())?;
        let repaired = reconstruct(relaxed, inst, &program.model)?;
        if !verify_partition(inst, &repaired.assignment)?.passed() {
            return Err(Error::Invariant(
                "pipeline produced an invalid partition".into(),
            ));
        }
        report.attempts.push((pivot, PivotOutcome::Solved));
        report.assignment = Some(repaired.assignment);
        report.pivot = Some(pivot);
        report.trace = repaired.trace;
        report.checks = repaired.checks;
        break;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::JobProfile;

    fn inst(sizes: Vec<u64>, counts: Vec<u64>, targets: Vec<u128>) -> PartitionInstance {
        PartitionInstance::new(JobProfile::new(sizes, counts).unwrap(), targets).unwrap()
    }

    #[test]
    fn two_machine_split() {
        let i = inst(vec![2, 3], vec![2, 2], vec![5, 5]);
        let asg = solve_partition(&i).unwrap().unwrap();
        assert_eq!(asg.rows(), &[vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn unreachable_target_is_infeasible() {
        let i = inst(vec![3], vec![2], vec![2, 4]);
        let report = solve_partition_with(&i, &PartitionOptions::default()).unwrap();
        assert!(report.assignment.is_none());
        assert_eq!(report.attempts, vec![(3, PivotOutcome::Infeasible)]);
    }

    #[test]
    fn single_machine_takes_all() {
        let i = inst(vec![1, 4], vec![3, 2], vec![11]);
        let asg = solve_partition(&i).unwrap().unwrap();
        assert_eq!(asg.rows(), &[vec![3, 2]]);
    }

    #[test]
    fn forced_pivot_must_exist() {
        let i = inst(vec![2, 3], vec![2, 2], vec![5, 5]);
        let opts = PartitionOptions { pivot: Some(4) };
        assert!(matches!(
            solve_partition_with(&i, &opts),
            Err(Error::InvalidArgument(_))
        ));
        let opts = PartitionOptions { pivot: Some(3) };
        let report = solve_partition_with(&i, &opts).unwrap();
        assert_eq!(report.pivot, Some(3));
    }

    #[test]
    fn big_machines_go_through_repair() {
        // p_max = 2 → threshold 16; both machines big.
        let i = inst(vec![1, 2], vec![4, 30], vec![30, 34]);
        let report = solve_partition_with(&i, &PartitionOptions::default()).unwrap();
        let asg = report.assignment.expect("feasible");
        assert_eq!(asg.loads(i.jobs().sizes()), vec![30, 34]);
        assert!(report.checks.conservation > 0);
    }
}
