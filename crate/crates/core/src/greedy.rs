//! Repair of a pivot-model assignment into an exact partition.
//!
//! Big machines in a pivot-model solution have the right load only modulo
//! the pivot `a`. The repair runs in three phases:
//!
//! 1. *Strip*: take every pivot job off the big machines, and take jobs of
//!    any other size `b` off in bundles of `a` until fewer than `a` remain.
//! 2. *Bundles*: put the bundles back on big machines, never exceeding a
//!    target.
//! 3. *Pivots*: put the pivot jobs back one `a` at a time.
//!
//! Every move changes a big machine's load by a multiple of `a`, so loads
//! stay congruent to targets throughout, and once all jobs are back every
//! load must equal its target. All moves are batched: a single step places
//! as many bundles (or pivot jobs) on a machine as fit.
//!
//! The state re-checks the invariants that make the phases succeed after
//! every step and reports any failure as [`Error::Invariant`].

use crate::error::{Error, Result};
use crate::instance::{Assignment, PartitionInstance};
use crate::modip::{mod_ip_violations, PivotModel};
use crate::verify::verify_partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Strip,
    Bundles,
    Pivots,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Strip => "strip",
            Phase::Bundles => "bundles",
            Phase::Pivots => "pivots",
        }
    }
}

/// One batched move: `jobs` jobs of processing time `size` taken off
/// (`Strip`) or put on (`Bundles`, `Pivots`) `machine`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceRecord {
    pub phase: Phase,
    pub machine: usize,
    pub size: u64,
    pub jobs: u64,
}

/// How many times each invariant was checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InvariantChecks {
    pub congruence: u64,
    pub load_bound: u64,
    pub strip_bound: u64,
    pub bundle_witness: u64,
    pub pivot_witness: u64,
    pub conservation: u64,
}

#[derive(Debug, Clone)]
pub struct ReconstructionState<'a> {
    inst: &'a PartitionInstance,
    model: &'a PivotModel,
    asg: Assignment,
    loads: Vec<u128>,
    /// Removed pivot jobs.
    pivot_pool: u64,
    /// Removed bundles per size index (each bundle is `a` jobs).
    bundles: Vec<u64>,
    trace: Vec<TraceRecord>,
    checks: InvariantChecks,
}

fn violated(msg: String) -> Error {
    Error::Invariant(msg)
}

impl<'a> ReconstructionState<'a> {
    pub fn assignment(&self) -> &Assignment {
        &self.asg
    }

    pub fn pivot_pool(&self) -> u64 {
        self.pivot_pool
    }

    pub fn bundles(&self) -> &[u64] {
        &self.bundles
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn checks(&self) -> InvariantChecks {
        self.checks
    }

    fn a(&self) -> u128 {
        u128::from(self.model.pivot)
    }

    fn target(&self, i: usize) -> u128 {
        self.inst.targets()[i]
    }

    fn size(&self, k: usize) -> u64 {
        self.inst.jobs().sizes()[k]
    }

    fn check_machine(&mut self, i: usize) -> Result<()> {
        self.checks.congruence += 1;
        let (load, target, a) = (self.loads[i], self.target(i), self.a());
        if load % a != target % a {
            return Err(violated(format!(
                "machine {i}: load {load} not congruent to target {target} mod {a}"
            )));
        }
        self.checks.load_bound += 1;
        if load > target {
            return Err(violated(format!(
                "machine {i}: load {load} exceeds target {target}"
            )));
        }
        Ok(())
    }

    /// Σ loads + removed work = Σ targets.
    fn check_conservation(&mut self) -> Result<()> {
        self.checks.conservation += 1;
        let a = self.a();
        let held: u128 = self.loads.iter().sum();
        let pooled = a * u128::from(self.pivot_pool)
            + self
                .bundles
                .iter()
                .enumerate()
                .map(|(k, &c)| a * u128::from(self.size(k)) * u128::from(c))
                .sum::<u128>();
        let total = self.inst.jobs().total_size();
        if held + pooled != total {
            return Err(violated(format!(
                "work not conserved: {held} on machines + {pooled} removed != {total}"
            )));
        }
        Ok(())
    }

    /// Some big machine has room for `gap` more work.
    fn has_room(&self, gap: u128) -> bool {
        self.model
            .big
            .iter()
            .any(|&i| self.loads[i] + gap <= self.target(i))
    }

    fn place(&mut self, phase: Phase, machine: usize, k: usize, jobs: u64) {
        self.asg.add(machine, k, jobs);
        self.loads[machine] += u128::from(jobs) * u128::from(self.size(k));
        self.trace.push(TraceRecord {
            phase,
            machine,
            size: self.size(k),
            jobs,
        });
    }
}

/// Phase 1: empties every big machine of pivot jobs and of full bundles.
pub fn phase1_strip<'a>(
    asg: Assignment,
    inst: &'a PartitionInstance,
    model: &'a PivotModel,
) -> Result<ReconstructionState<'a>> {
    let d = inst.jobs().d();
    let loads = asg.loads(inst.jobs().sizes());
    let mut state = ReconstructionState {
        inst,
        model,
        asg,
        loads,
        pivot_pool: 0,
        bundles: vec![0; d],
        trace: Vec::new(),
        checks: InvariantChecks::default(),
    };
    let a = model.pivot;
    let pk = model.pivot_index;
    let cap = (d as u128 - 1) * (u128::from(a) - 1);
    for &i in &model.big {
        let on = state.asg.get(i, pk);
        if on > 0 {
            state.asg.sub(i, pk, on);
            state.loads[i] -= u128::from(on) * u128::from(a);
            state.pivot_pool += on;
            state.trace.push(TraceRecord {
                phase: Phase::Strip,
                machine: i,
                size: a,
                jobs: on,
            });
        }
        for k in (0..d).filter(|&k| k != pk) {
            let count = state.asg.get(i, k);
            let full = count / a;
            if full > 0 {
                let jobs = full * a;
                state.asg.sub(i, k, jobs);
                state.loads[i] -= u128::from(jobs) * u128::from(state.size(k));
                state.bundles[k] += full;
                state.trace.push(TraceRecord {
                    phase: Phase::Strip,
                    machine: i,
                    size: state.size(k),
                    jobs,
                });
            }
        }
        state.checks.strip_bound += 1;
        let held = state.asg.jobs_on(i);
        if held > cap {
            return Err(violated(format!(
                "machine {i} holds {held} jobs after stripping, bound is {cap}"
            )));
        }
        if state.loads[i] >= state.target(i) {
            return Err(violated(format!(
                "machine {i} not below its target after stripping"
            )));
        }
        state.check_machine(i)?;
    }
    state.check_conservation()?;
    Ok(state)
}

/// Phase 2: places all bundles, largest sizes first, machines in index
/// order, as many per step as fit.
pub fn phase2_place_bundles(state: &mut ReconstructionState<'_>) -> Result<()> {
    let a = state.model.pivot;
    let pk = state.model.pivot_index;
    let d = state.inst.jobs().d();
    let p_max = u128::from(state.inst.jobs().p_max());
    let pending = state.bundles.iter().filter(|&&c| c > 0).count();
    let max_sweeps = state.model.big.len() * d + pending;
    let mut sweeps = 0;
    while state.bundles.iter().any(|&c| c > 0) {
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(violated(format!(
                "bundle placement did not finish within {max_sweeps} sweeps"
            )));
        }
        let mut placed_any = false;
        for bi in 0..state.model.big.len() {
            let i = state.model.big[bi];
            for k in (0..d).rev().filter(|&k| k != pk) {
                if state.bundles[k] == 0 {
                    continue;
                }
                let bundle_work = u128::from(a) * u128::from(state.size(k));
                let room = (state.target(i) - state.loads[i]) / bundle_work;
                let take = room.min(u128::from(state.bundles[k])) as u64;
                if take == 0 {
                    continue;
                }
                state.checks.bundle_witness += 1;
                if !state.has_room(p_max * p_max) {
                    return Err(violated(
                        "no big machine has p_max² room while bundles remain".into(),
                    ));
                }
                state.place(Phase::Bundles, i, k, take * a);
                state.bundles[k] -= take;
                placed_any = true;
                state.check_machine(i)?;
                state.check_conservation()?;
            }
        }
        if !placed_any {
            return Err(violated(
                "no big machine can host a remaining bundle".into(),
            ));
        }
    }
    Ok(())
}

/// Phase 3: places the pivot jobs and checks that every machine ends at
/// its target.
pub fn phase3_place_pivots(state: &mut ReconstructionState<'_>) -> Result<()> {
    if state.bundles.iter().any(|&c| c > 0) {
        return Err(Error::InvalidArgument(
            "bundles must be placed before pivot jobs".into(),
        ));
    }
    let a = state.a();
    let pk = state.model.pivot_index;
    for bi in 0..state.model.big.len() {
        if state.pivot_pool == 0 {
            break;
        }
        let i = state.model.big[bi];
        let slack = state.target(i) - state.loads[i];
        if !slack.is_multiple_of(a) {
            return Err(violated(format!(
                "machine {i}: slack {slack} not a multiple of {a}"
            )));
        }
        let take = (slack / a).min(u128::from(state.pivot_pool)) as u64;
        if take == 0 {
            continue;
        }
        state.checks.pivot_witness += 1;
        if !state.has_room(a) {
            return Err(violated("no big machine has room for a pivot job".into()));
        }
        state.place(Phase::Pivots, i, pk, take);
        state.pivot_pool -= take;
        state.check_machine(i)?;
        state.check_conservation()?;
    }
    if state.pivot_pool > 0 {
        return Err(violated(format!(
            "{} pivot jobs left but every big machine is full",
            state.pivot_pool
        )));
    }
    for i in 0..state.inst.machines() {
        if state.loads[i] != state.target(i) {
            return Err(violated(format!(
                "machine {i} ends at load {}, target {}",
                state.loads[i],
                state.target(i)
            )));
        }
    }
    Ok(())
}

/// Result of a full repair.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub assignment: Assignment,
    pub trace: Vec<TraceRecord>,
    pub checks: InvariantChecks,
}

/// Runs all three phases on a pivot-model solution.
pub fn reconstruct(
    asg: Assignment,
    inst: &PartitionInstance,
    model: &PivotModel,
) -> Result<Reconstruction> {
    let issues = mod_ip_violations(inst, model, &asg);
    if !issues.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "not a pivot-model solution: {}",
            issues.join("; ")
        )));
    }
    let mut state = phase1_strip(asg, inst, model)?;
    phase2_place_bundles(&mut state)?;
    phase3_place_pivots(&mut state)?;
    let report = verify_partition(inst, &state.asg)?;
    if !report.passed() {
        return Err(violated("repaired assignment fails verification".into()));
    }
    Ok(Reconstruction {
        assignment: state.asg,
        trace: state.trace,
        checks: state.checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::JobProfile;

    fn setup(
        sizes: Vec<u64>,
        counts: Vec<u64>,
        targets: Vec<u128>,
        pivot: u64,
    ) -> (PartitionInstance, PivotModel) {
        let inst =
            PartitionInstance::new(JobProfile::new(sizes, counts).unwrap(), targets).unwrap();
        let model = PivotModel::new(&inst, pivot).unwrap();
        (inst, model)
    }

    #[test]
    fn strip_removes_pivots_and_bundles() {
        // p_max 3 → threshold 81: machine 0 is big, machine 1 small.
        let (inst, model) = setup(vec![1, 2, 3], vec![63, 15, 5], vec![84, 24], 2);
        assert_eq!(model.big, vec![0]);
        let asg = Assignment::from_rows(vec![vec![63, 3, 5], vec![0, 12, 0]]).unwrap();
        let state = phase1_strip(asg, &inst, &model).unwrap();
        assert_eq!(state.pivot_pool(), 3);
        // five 3s → two bundles of two, one left; 63 ones → 31 bundles, one left
        assert_eq!(state.bundles(), &[31, 0, 2]);
        assert_eq!(state.assignment().rows()[0], vec![1, 0, 1]);
        assert_eq!(state.assignment().rows()[1], vec![0, 12, 0]);
    }

    #[test]
    fn strip_with_unit_pivot_clears_big_machines() {
        let (inst, model) = setup(vec![1], vec![3], vec![1, 1, 1], 1);
        assert_eq!(model.big, vec![0, 1, 2]);
        let asg = Assignment::from_rows(vec![vec![1], vec![1], vec![1]]).unwrap();
        let state = phase1_strip(asg, &inst, &model).unwrap();
        assert_eq!(state.pivot_pool(), 3);
        assert!(state.assignment().rows().iter().all(|r| r[0] == 0));
    }

    #[test]
    fn strip_without_big_machines_is_noop() {
        let (inst, model) = setup(vec![2, 3], vec![2, 2], vec![5, 5], 2);
        let asg = Assignment::from_rows(vec![vec![1, 1], vec![1, 1]]).unwrap();
        let state = phase1_strip(asg.clone(), &inst, &model).unwrap();
        assert_eq!(state.assignment(), &asg);
        assert_eq!(state.pivot_pool(), 0);
        assert!(state.bundles().iter().all(|&b| b == 0));
        let out = reconstruct(asg.clone(), &inst, &model).unwrap();
        assert_eq!(out.assignment, asg);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn bundles_batch_onto_one_machine() {
        // a = 2, so a bundle of 3s weighs 6. One big machine, T = 100.
        let (inst, model) = setup(vec![1, 2, 3], vec![10, 30, 10], vec![100], 2);
        let asg = Assignment::from_rows(vec![vec![10, 30, 10]]).unwrap();
        let mut state = phase1_strip(asg, &inst, &model).unwrap();
        assert_eq!(state.pivot_pool(), 30);
        assert_eq!(state.bundles(), &[5, 0, 5]);
        assert_eq!(state.loads[0], 0);
        phase2_place_bundles(&mut state).unwrap();
        // descending sizes: all five 3-bundles in one step, then the 1-bundles.
        let bundle_steps: Vec<_> = state
            .trace()
            .iter()
            .filter(|r| r.phase == Phase::Bundles)
            .collect();
        assert_eq!(bundle_steps.len(), 2);
        assert_eq!((bundle_steps[0].size, bundle_steps[0].jobs), (3, 10));
        assert_eq!(state.loads[0], 40);
        phase3_place_pivots(&mut state).unwrap();
        // slack 60 is exactly the 30 pooled pivot jobs.
        assert_eq!(state.loads[0], 100);
        assert_eq!(state.pivot_pool(), 0);
    }

    #[test]
    fn reconstruct_refills_single_big_machine() {
        let (inst, model) = setup(vec![1, 2, 3], vec![10, 15, 10], vec![70], 2);
        let asg = Assignment::from_rows(vec![vec![10, 15, 10]]).unwrap();
        // T = 70 < 81 is small: reconstruction is a no-op.
        assert!(model.big.is_empty());
        let out = reconstruct(asg.clone(), &inst, &model).unwrap();
        assert_eq!(out.assignment, asg);

        // Two big machines whose loads (114, 106) are only right mod 2.
        let (inst, model) = setup(vec![1, 2, 3], vec![40, 60, 20], vec![110, 110], 2);
        assert_eq!(model.big, vec![0, 1]);
        let asg = Assignment::from_rows(vec![vec![40, 22, 10], vec![0, 38, 10]]).unwrap();
        let out = reconstruct(asg, &inst, &model).unwrap();
        assert!(verify_partition(&inst, &out.assignment).unwrap().passed());
        assert!(out.checks.bundle_witness > 0 && out.checks.pivot_witness > 0);
    }

    #[test]
    fn pivots_fill_in_machine_order() {
        let (inst, model) = setup(vec![1, 2], vec![2, 80], vec![82, 80], 2);
        let asg = Assignment::from_rows(vec![vec![2, 40], vec![0, 40]]).unwrap();
        let out = reconstruct(asg, &inst, &model).unwrap();
        let pivots: Vec<_> = out
            .trace
            .iter()
            .filter(|r| r.phase == Phase::Pivots)
            .map(|r| (r.machine, r.jobs))
            .collect();
        // The one bundle of 1s returns to machine 0, then pivots fill the
        // machines in index order.
        assert_eq!(pivots, vec![(0, 40), (1, 40)]);
    }

    #[test]
    fn reconstruct_rejects_non_model_input() {
        let (inst, model) = setup(vec![2, 3], vec![2, 2], vec![5, 5], 2);
        let asg = Assignment::from_rows(vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert!(matches!(
            reconstruct(asg, &inst, &model),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn phase3_requires_empty_bundle_pool() {
        let (inst, model) = setup(vec![1, 2, 3], vec![10, 30, 10], vec![100], 2);
        let asg = Assignment::from_rows(vec![vec![10, 30, 10]]).unwrap();
        let mut state = phase1_strip(asg, &inst, &model).unwrap();
        assert!(matches!(
            phase3_place_pivots(&mut state),
            Err(Error::InvalidArgument(_))
        ));
    }
}
