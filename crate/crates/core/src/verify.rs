//! Solution checkers for both problems.

use crate::error::{Error, Result};
use crate::instance::{Assignment, PartitionInstance, SchedulingInstance};
use crate::rational::ExactRational;

/// Outcome of checking an assignment against a partition instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub loads: Vec<u128>,
    pub targets: Vec<u128>,
    /// Sizes (by index) whose jobs are not all placed exactly once.
    pub unbalanced_sizes: Vec<usize>,
    /// Machines whose load differs from the target.
    pub mismatched_machines: Vec<usize>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.unbalanced_sizes.is_empty() && self.mismatched_machines.is_empty()
    }
}

fn check_dims(machines: usize, d: usize, asg: &Assignment) -> Result<()> {
    if asg.machines() != machines || asg.d() != d {
        return Err(Error::InvalidArgument(format!(
            "assignment is {}x{}, instance needs {}x{}",
            asg.machines(),
            asg.d(),
            machines,
            d
        )));
    }
    Ok(())
}

pub fn verify_partition(inst: &PartitionInstance, asg: &Assignment) -> Result<VerificationReport> {
    let jobs = inst.jobs();
    check_dims(inst.machines(), jobs.d(), asg)?;
    let loads = asg.loads(jobs.sizes());
    let unbalanced_sizes = (0..jobs.d())
        .filter(|&k| asg.column_sum(k) != u128::from(jobs.counts()[k]))
        .collect();
    let mismatched_machines = loads
        .iter()
        .zip(inst.targets())
        .enumerate()
        .filter(|(_, (l, t))| l != t)
        .map(|(i, _)| i)
        .collect();
    Ok(VerificationReport {
        loads,
        targets: inst.targets().to_vec(),
        unbalanced_sizes,
        mismatched_machines,
    })
}

/// Makespan `max_i load(i) / s_i` of a complete assignment.
pub fn verify_makespan(inst: &SchedulingInstance, asg: &Assignment) -> Result<ExactRational> {
    let jobs = inst.jobs();
    check_dims(inst.machines(), jobs.d(), asg)?;
    if !asg.is_complete(jobs) {
        return Err(Error::InvalidArgument(
            "assignment does not place every job exactly once".into(),
        ));
    }
    let mut best = ExactRational::ZERO;
    for (i, &s) in inst.speeds().iter().enumerate() {
        let load =
            i128::try_from(asg.load(i, jobs.sizes())).map_err(|_| Error::Overflow("load"))?;
        let value = ExactRational::new(load, i128::from(s))?;
        if value > best {
            best = value;
        }
    }
    Ok(best)
}
