//! The pivot model: machines with small targets must be filled exactly,
//! machines with big targets only modulo a pivot size `a`, and big machines
//! together must receive at least `p_max²·|B|` jobs of size `a`.
//!
//! The model is solved through a configuration program. Machines are
//! grouped into types (small machines by target, big machines by target
//! residue mod `a`), every type gets the job-count vectors it may use, and a
//! multi-choice program picks one configuration per machine subject to the
//! available job counts. Jobs left over by that program are dumped on a big
//! machine by [`decode`].

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::instance::{Assignment, JobProfile, PartitionInstance};
use crate::mcilp::{
    solve_equality_with_stats, solve_inequality_direct, McilpInstance, McilpSolution, SolveStats,
};

/// Small/big split of the machines for one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotModel {
    pub pivot: u64,
    /// Index of the pivot among the distinct sizes.
    pub pivot_index: usize,
    pub small: Vec<usize>,
    pub big: Vec<usize>,
    /// `p_max⁴`, or `None` when it does not fit in `u128` (then every
    /// machine is small).
    pub threshold: Option<u128>,
}

impl PivotModel {
    pub fn new(inst: &PartitionInstance, pivot: u64) -> Result<Self> {
        let pivot_index = inst.jobs().index_of(pivot).ok_or_else(|| {
            Error::InvalidArgument(format!("pivot {pivot} is not a processing time"))
        })?;
        let (small, big, threshold) = classify_machines(inst);
        Ok(PivotModel {
            pivot,
            pivot_index,
            small,
            big,
            threshold,
        })
    }

    pub fn is_big(&self, machine: usize) -> bool {
        self.big.binary_search(&machine).is_ok()
    }

    /// `p_max²·|B|`, the number of pivot jobs big machines must hold.
    pub fn pivot_demand(&self, p_max: u64) -> u128 {
        u128::from(p_max) * u128::from(p_max) * self.big.len() as u128
    }
}

/// Splits machine indices into small (`T_i < p_max⁴`) and big ones.
pub fn classify_machines(inst: &PartitionInstance) -> (Vec<usize>, Vec<usize>, Option<u128>) {
    let threshold = u128::from(inst.jobs().p_max()).checked_pow(4);
    let (small, big) = (0..inst.machines()).partition(|&i| match threshold {
        Some(th) => inst.targets()[i] < th,
        None => true,
    });
    (small, big, threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TypeKind {
    /// Exact target.
    Small(u128),
    /// Target residue modulo the pivot.
    Big(u64),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MachineType {
    pub kind: TypeKind,
    /// Original machine indices of this type, ascending.
    pub machines: Vec<usize>,
}

impl MachineType {
    pub fn multiplicity(&self) -> usize {
        self.machines.len()
    }
}

/// Small types by ascending target, then big types by ascending residue.
pub fn enumerate_types(inst: &PartitionInstance, model: &PivotModel) -> Vec<MachineType> {
    let mut groups: BTreeMap<TypeKind, Vec<usize>> = BTreeMap::new();
    for &i in &model.small {
        groups
            .entry(TypeKind::Small(inst.targets()[i]))
            .or_default()
            .push(i);
    }
    for &i in &model.big {
        let residue = (inst.targets()[i] % u128::from(model.pivot)) as u64;
        groups.entry(TypeKind::Big(residue)).or_default().push(i);
    }
    groups
        .into_iter()
        .map(|(kind, machines)| MachineType { kind, machines })
        .collect()
}

/// All configurations of a type, in lexicographic order.
///
/// Small types: every count vector with `Σ p_k·C_k = T`. Big types: every
/// vector in `{0..a−1}^d` with `Σ p_k·C_k ≡ r (mod a)`.
pub fn enumerate_configs(kind: TypeKind, sizes: &[u64], pivot: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut current = vec![0u64; sizes.len()];
    match kind {
        TypeKind::Small(target) => exact_sums(sizes, 0, target, &mut current, &mut out),
        TypeKind::Big(residue) => {
            let a = u128::from(pivot);
            box_residues(
                sizes,
                0,
                pivot,
                0,
                u128::from(residue) % a,
                &mut current,
                &mut out,
            )
        }
    }
    out
}

fn exact_sums(
    sizes: &[u64],
    k: usize,
    left: u128,
    current: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    if k == sizes.len() {
        if left == 0 {
            out.push(current.clone());
        }
        return;
    }
    let p = u128::from(sizes[k]);
    let most = left / p;
    // Last size takes the remainder if it divides it.
    if k + 1 == sizes.len() {
        if left.is_multiple_of(p) {
            current[k] = most as u64;
            out.push(current.clone());
            current[k] = 0;
        }
        return;
    }
    for c in 0..=most {
        current[k] = c as u64;
        exact_sums(sizes, k + 1, left - c * p, current, out);
    }
    current[k] = 0;
}

fn box_residues(
    sizes: &[u64],
    k: usize,
    pivot: u64,
    acc: u128,
    residue: u128,
    current: &mut Vec<u64>,
    out: &mut Vec<Vec<u64>>,
) {
    let a = u128::from(pivot);
    if k == sizes.len() {
        if acc % a == residue {
            out.push(current.clone());
        }
        return;
    }
    let step = u128::from(sizes[k]) % a;
    for c in 0..pivot {
        current[k] = c;
        box_residues(
            sizes,
            k + 1,
            pivot,
            (acc + u128::from(c) * step) % a,
            residue,
            current,
            out,
        );
    }
    current[k] = 0;
}

/// The configuration program for one pivot, with the metadata needed to
/// decode its solutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigProgram {
    pub model: PivotModel,
    pub types: Vec<MachineType>,
    /// `(type index, configuration)` per program column.
    pub variables: Vec<(usize, Vec<u64>)>,
    /// Rows: one per distinct size, then the pivot row. Read as `≤`.
    pub ilp: McilpInstance,
}

/// Builds the inequality-form configuration program for pivot `a`.
///
/// Configurations that need more jobs of some size than the instance has
/// can never be chosen and are left out.
pub fn build_config_ilp(inst: &PartitionInstance, pivot: u64) -> Result<ConfigProgram> {
    let model = PivotModel::new(inst, pivot)?;
    let jobs = inst.jobs();
    let available = jobs.counts()[model.pivot_index];
    let demand = model.pivot_demand(jobs.p_max());
    if demand > u128::from(available) {
        return Err(Error::PivotInfeasible {
            pivot,
            available,
            required: demand,
        });
    }
    let types = enumerate_types(inst, &model);
    let d = jobs.d();

    let mut variables = Vec::new();
    let mut sets = Vec::with_capacity(types.len());
    let mut cardinalities = Vec::with_capacity(types.len());
    for (ti, ty) in types.iter().enumerate() {
        let mut set = Vec::new();
        for config in enumerate_configs(ty.kind, jobs.sizes(), pivot) {
            if config.iter().zip(jobs.counts()).any(|(c, n)| c > n) {
                continue;
            }
            set.push(variables.len());
            variables.push((ti, config));
        }
        sets.push(set);
        cardinalities.push(ty.multiplicity() as u64);
    }

    let n = variables.len();
    let mut matrix = vec![vec![0i64; n]; d + 1];
    for (col, (ti, config)) in variables.iter().enumerate() {
        for k in 0..d {
            matrix[k][col] =
                i64::try_from(config[k]).map_err(|_| Error::Overflow("configuration entry"))?;
        }
        if matches!(types[*ti].kind, TypeKind::Small(_)) {
            matrix[d][col] = matrix[model.pivot_index][col];
        }
    }
    let mut rhs: Vec<i128> = jobs.counts().iter().map(|&c| i128::from(c)).collect();
    rhs.push(i128::from(available) - demand as i128);
    let ilp = McilpInstance::new(n, matrix, rhs, vec![0; n], sets, cardinalities)?;
    Ok(ConfigProgram {
        model,
        types,
        variables,
        ilp,
    })
}

/// Solves a configuration program.
///
/// Without big machines every row must hold with equality (small loads are
/// exact and the targets add up to the total job size), so the rows are
/// solved as equalities directly. Otherwise the inequality rows are solved
/// directly on the reachable configuration sums, which stay few because
/// every entry is nonnegative and bounded by the job counts.
pub fn solve_config_program(
    program: &ConfigProgram,
) -> Result<(Option<McilpSolution>, SolveStats)> {
    if program.model.big.is_empty() {
        solve_equality_with_stats(&program.ilp)
    } else {
        solve_inequality_direct(&program.ilp)
    }
}

/// Turns a program solution into a full assignment: each machine of a type
/// takes one of the chosen configurations (in machine order), and every
/// job the program left unassigned goes to the lowest-indexed big machine.
pub fn decode(
    program: &ConfigProgram,
    solution: &McilpSolution,
    jobs: &JobProfile,
) -> Result<Assignment> {
    let m = program.types.iter().map(MachineType::multiplicity).sum();
    let d = jobs.d();
    let mut asg = Assignment::zeros(m, d);
    let mut cursor = vec![0usize; program.types.len()];
    for (col, (ti, config)) in program.variables.iter().enumerate() {
        let ty = &program.types[*ti];
        for _ in 0..solution.x[col] {
            let machine = *ty.machines.get(cursor[*ti]).ok_or_else(|| {
                Error::Invariant("configuration count exceeds type multiplicity".into())
            })?;
            cursor[*ti] += 1;
            for (k, &c) in config.iter().enumerate() {
                asg.set(machine, k, c);
            }
        }
    }
    if cursor
        .iter()
        .zip(&program.types)
        .any(|(&c, ty)| c != ty.multiplicity())
    {
        return Err(Error::Invariant(
            "some machine received no configuration".into(),
        ));
    }
    let leftovers: Vec<u64> = (0..d)
        .map(|k| {
            let used = asg.column_sum(k);
            u128::from(jobs.counts()[k])
                .checked_sub(used)
                .map(|v| v as u64)
                .ok_or_else(|| Error::Invariant(format!("size index {k} over-assigned")))
        })
        .collect::<Result<_>>()?;
    if leftovers.iter().any(|&l| l > 0) {
        let Some(&first_big) = program.model.big.first() else {
            return Err(Error::Invariant(
                "jobs left unassigned but there is no big machine".into(),
            ));
        };
        for (k, &l) in leftovers.iter().enumerate() {
            asg.add(first_big, k, l);
        }
    }
    Ok(asg)
}

/// Reasons an assignment fails the pivot model, if any.
pub fn mod_ip_violations(
    inst: &PartitionInstance,
    model: &PivotModel,
    asg: &Assignment,
) -> Vec<String> {
    let jobs = inst.jobs();
    let sizes = jobs.sizes();
    let a = u128::from(model.pivot);
    let mut issues = Vec::new();
    if asg.machines() != inst.machines() || asg.d() != jobs.d() {
        issues.push("dimension mismatch".to_string());
        return issues;
    }
    for &i in &model.small {
        let load = asg.load(i, sizes);
        if load != inst.targets()[i] {
            issues.push(format!(
                "small machine {i} has load {load}, target {}",
                inst.targets()[i]
            ));
        }
    }
    for &i in &model.big {
        let load = asg.load(i, sizes);
        if load % a != inst.targets()[i] % a {
            issues.push(format!(
                "big machine {i} load {load} not congruent to target mod {a}"
            ));
        }
    }
    let on_big: u128 = model
        .big
        .iter()
        .map(|&i| u128::from(asg.get(i, model.pivot_index)))
        .sum();
    let demand = model.pivot_demand(jobs.p_max());
    if on_big < demand {
        issues.push(format!(
            "big machines hold {on_big} pivot jobs, need {demand}"
        ));
    }
    if !asg.is_complete(jobs) {
        issues.push("not every job is assigned exactly once".to_string());
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcilp::solve_inequality;
    use crate::oracle::{brute_mcilp, RowSense, DEFAULT_BUDGET};

    fn inst(sizes: Vec<u64>, counts: Vec<u64>, targets: Vec<u128>) -> PartitionInstance {
        PartitionInstance::new(JobProfile::new(sizes, counts).unwrap(), targets).unwrap()
    }

    #[test]
    fn classification_threshold() {
        // p_max = 2, threshold 16
        let i = inst(vec![1, 2], vec![26, 20], vec![10, 16, 40]);
        let (s, b, th) = classify_machines(&i);
        assert_eq!((s, b, th), (vec![0], vec![1, 2], Some(16)));

        let i = inst(vec![3], vec![2], vec![0, 6]);
        let (s, _, _) = classify_machines(&i);
        assert_eq!(s, vec![0, 1]);

        let i = inst(vec![1], vec![2], vec![1, 1]);
        let (s, b, _) = classify_machines(&i);
        assert!(s.is_empty());
        assert_eq!(b, vec![0, 1]);
    }

    #[test]
    fn types_group_targets_and_residues() {
        let i = inst(vec![1, 2, 3], vec![5, 1, 1], vec![5, 5, 0]);
        let model = PivotModel::new(&i, 1).unwrap();
        let types = enumerate_types(&i, &model);
        assert_eq!(types.len(), 2);
        assert_eq!(types[0].kind, TypeKind::Small(0));
        assert_eq!(types[1].kind, TypeKind::Small(5));
        assert_eq!(types[1].machines, vec![0, 1]);

        // sizes {2,3}, p_max 3, threshold 81
        let i = inst(vec![2, 3], vec![75, 35], vec![81, 84, 90]);
        let model = PivotModel::new(&i, 3).unwrap();
        let types = enumerate_types(&i, &model);
        assert_eq!(
            types,
            vec![MachineType {
                kind: TypeKind::Big(0),
                machines: vec![0, 1, 2]
            }]
        );

        // small [3] and big [20] with a = 2 (p_max = 2, threshold 16)
        let i = inst(vec![1, 2], vec![3, 10], vec![3, 20]);
        let model = PivotModel::new(&i, 2).unwrap();
        let kinds: Vec<_> = enumerate_types(&i, &model)
            .into_iter()
            .map(|t| (t.kind, t.multiplicity()))
            .collect();
        assert_eq!(kinds, vec![(TypeKind::Small(3), 1), (TypeKind::Big(0), 1)]);
    }

    #[test]
    fn big_residues_mod_pivot() {
        // Residues of 20, 23, 26 modulo 3 all equal 2.
        let i = inst(vec![1, 3], vec![3, 22], vec![20, 23, 26]);
        let model = PivotModel::new(&i, 3).unwrap();
        assert_eq!(model.big, Vec::<usize>::new());
        let mut forced = model.clone();
        forced.small.clear();
        forced.big = vec![0, 1, 2];
        let types = enumerate_types(&i, &forced);
        assert_eq!(
            types,
            vec![MachineType {
                kind: TypeKind::Big(2),
                machines: vec![0, 1, 2]
            }]
        );
    }

    #[test]
    fn config_enumeration() {
        assert_eq!(
            enumerate_configs(TypeKind::Small(3), &[1, 2], 1),
            vec![vec![1, 1], vec![3, 0]]
        );
        assert_eq!(
            enumerate_configs(TypeKind::Big(1), &[1, 2], 2),
            vec![vec![1, 0], vec![1, 1]]
        );
        assert_eq!(
            enumerate_configs(TypeKind::Small(0), &[2, 5, 7], 2),
            vec![vec![0, 0, 0]]
        );
        assert!(enumerate_configs(TypeKind::Small(1), &[2, 5], 2).is_empty());
    }

    #[test]
    fn configs_match_brute_enumeration() {
        let sizes = [2u64, 3, 5];
        for target in 0u128..40 {
            let got = enumerate_configs(TypeKind::Small(target), &sizes, 2);
            let mut want = Vec::new();
            for a in 0..=20u64 {
                for b in 0..=14u64 {
                    for c in 0..=8u64 {
                        if u128::from(2 * a + 3 * b + 5 * c) == target {
                            want.push(vec![a, b, c]);
                        }
                    }
                }
            }
            assert_eq!(got, want, "target {target}");
        }
        for a in [2u64, 3, 5] {
            for r in 0..a {
                for config in enumerate_configs(TypeKind::Big(r), &sizes, a) {
                    assert!(config.iter().all(|&c| c < a));
                    let s: u64 = config.iter().zip(&sizes).map(|(c, p)| c * p).sum();
                    assert_eq!(s % a, r);
                }
            }
        }
    }

    #[test]
    fn program_for_small_machine() {
        let i = inst(vec![1, 2], vec![3, 1], vec![3, 2]);
        let program = build_config_ilp(&i, 1).unwrap();
        assert_eq!(program.types.len(), 2);
        // type T=2: configs (0,1),(2,0); type T=3: (1,1),(3,0)
        assert_eq!(program.ilp.cardinalities(), &[1, 1]);
        assert_eq!(program.ilp.rhs(), &[3, 1, 3]);
        assert_eq!(program.ilp.rows(), 3);

        let single = inst(vec![1, 2], vec![3, 1], vec![5]);
        let program = build_config_ilp(&single, 1).unwrap();
        let configs: Vec<_> = program.variables.iter().map(|(_, c)| c.clone()).collect();
        assert_eq!(configs, vec![vec![3, 1]]);
    }

    #[test]
    fn program_example_from_counts() {
        // One small type T=3 over sizes [1,2] with counts [3,1], pivot 1.
        let ilp = McilpInstance::new(
            2,
            vec![vec![3, 1], vec![0, 1], vec![3, 1]],
            vec![3, 1, 3],
            vec![0, 0],
            vec![vec![0, 1]],
            vec![1],
        )
        .unwrap();
        let brute = brute_mcilp(&ilp, RowSense::AtMost, DEFAULT_BUDGET).unwrap();
        assert!(brute.is_some());
        let sol = solve_inequality(&ilp).unwrap().unwrap();
        assert!(ilp.is_feasible_inequality(&sol.x));
    }

    #[test]
    fn config_program_shortcuts_match_generic_reduction() {
        let cases = [
            inst(vec![1, 2], vec![3, 2], vec![3, 3, 1]),
            inst(vec![1, 2], vec![3, 16], vec![16, 17, 2]),
            inst(vec![2, 3], vec![3, 2], vec![6, 6]),
            inst(vec![2, 3], vec![1, 3], vec![5, 6]),
        ];
        for i in &cases {
            for &a in i.jobs().sizes() {
                let Ok(program) = build_config_ilp(i, a) else {
                    continue;
                };
                let (fast, _) = solve_config_program(&program).unwrap();
                let generic = solve_inequality(&program.ilp).unwrap();
                assert_eq!(fast.is_some(), generic.is_some(), "{i:?} pivot {a}");
                if let Some(sol) = fast {
                    assert!(program.ilp.is_feasible_inequality(&sol.x));
                }
            }
        }
    }

    #[test]
    fn pivot_demand_too_large() {
        // p_max = 2, one big machine (T ≥ 16), only one job of size 2.
        let i = inst(vec![1, 2], vec![16, 1], vec![18]);
        match build_config_ilp(&i, 2) {
            Err(Error::PivotInfeasible {
                available,
                required,
                ..
            }) => {
                assert_eq!((available, required), (1, 4));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn pivot_row_with_no_big_machines() {
        let i = inst(vec![2, 3], vec![2, 2], vec![5, 5]);
        let program = build_config_ilp(&i, 2).unwrap();
        assert_eq!(program.ilp.rhs()[2], 2);
        assert_eq!(program.ilp.matrix()[2], program.ilp.matrix()[0]);
    }

    #[test]
    fn decode_distributes_configs_by_machine_order() {
        let i = inst(vec![1, 2], vec![3, 2], vec![3, 3, 1]);
        let program = build_config_ilp(&i, 1).unwrap();
        let sol = solve_config_program(&program).unwrap().0.unwrap();
        let asg = decode(&program, &sol, i.jobs()).unwrap();
        assert!(mod_ip_violations(&i, &program.model, &asg).is_empty());
        assert_eq!(asg.loads(i.jobs().sizes()), vec![3, 3, 1]);
        assert_eq!(asg.jobs_on(2), 1);
    }

    #[test]
    fn decode_sends_leftovers_to_first_big_machine() {
        // p_max = 2, threshold 16; machines: T=16 big, T=17 big, T=2 small.
        let i = inst(vec![1, 2], vec![3, 16], vec![16, 17, 2]);
        let program = build_config_ilp(&i, 2).unwrap();
        let sol = solve_inequality(&program.ilp).unwrap().unwrap();
        let asg = decode(&program, &sol, i.jobs()).unwrap();
        assert!(
            mod_ip_violations(&i, &program.model, &asg).is_empty(),
            "{:?}",
            mod_ip_violations(&i, &program.model, &asg)
        );
        assert!(asg.is_complete(i.jobs()));
        // the big machine with the smallest index receives the bulk
        assert!(asg.get(0, 1) >= 8);
    }

    #[test]
    fn decode_rejects_leftovers_without_big_machines() {
        let i = inst(vec![1, 2], vec![3, 1], vec![3, 2]);
        let program = build_config_ilp(&i, 1).unwrap();
        let sol = solve_inequality(&program.ilp).unwrap().unwrap();
        // Decoding against a larger profile leaves two size-1 jobs over.
        let bigger = JobProfile::new(vec![1, 2], vec![5, 1]).unwrap();
        assert!(matches!(
            decode(&program, &sol, &bigger),
            Err(Error::Invariant(_))
        ));
    }
}
