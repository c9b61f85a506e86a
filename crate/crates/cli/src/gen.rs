//! Seeded instance generator.

use modsched::{Assignment, JobProfile, PartitionInstance, SchedulingInstance};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::doc::{Document, InputError, InputResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    /// Random assignment first, targets derived from it.
    FeasiblePartition,
    /// Jobs and speeds drawn independently.
    UniformRandom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenParams {
    pub seed: u64,
    /// Number of distinct sizes.
    pub d: usize,
    pub p_max: u64,
    pub machines: usize,
    /// Total number of jobs.
    pub jobs: u64,
    /// Fixed distinct sizes; overrides `d` and `p_max`.
    pub sizes: Option<Vec<u64>>,
    pub max_speed: u64,
}

fn invalid(message: String) -> InputError {
    InputError(message)
}

/// Splits `total` into `parts` positive summands.
fn positive_split(rng: &mut ChaCha8Rng, total: u64, parts: usize) -> Vec<u64> {
    // `parts - 1` distinct cut points in 1..total.
    let mut cuts: Vec<u64> = index::sample(rng, (total - 1) as usize, parts - 1)
        .into_iter()
        .map(|c| c as u64 + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(total);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let part = c - prev;
            prev = c;
            part
        })
        .collect()
}

/// Splits `total` into `parts` nonnegative summands.
fn split(rng: &mut ChaCha8Rng, total: u64, parts: usize) -> Vec<u64> {
    let mut cuts: Vec<u64> = (1..parts).map(|_| rng.gen_range(0..=total)).collect();
    cuts.sort_unstable();
    cuts.push(total);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let part = c - prev;
            prev = c;
            part
        })
        .collect()
}

fn draw_jobs(rng: &mut ChaCha8Rng, params: &GenParams) -> InputResult<JobProfile> {
    let sizes = match &params.sizes {
        Some(sizes) => {
            let mut sizes = sizes.clone();
            sizes.sort_unstable();
            sizes.dedup();
            sizes
        }
        None => {
            if params.d == 0 || params.d as u64 > params.p_max {
                return Err(invalid(format!(
                    "field `d`: need 1 ≤ d ≤ p_max, got d = {} with p_max = {}",
                    params.d, params.p_max
                )));
            }
            let mut sizes: Vec<u64> = index::sample(rng, params.p_max as usize, params.d)
                .into_iter()
                .map(|s| s as u64 + 1)
                .collect();
            sizes.sort_unstable();
            sizes
        }
    };
    if params.jobs < sizes.len() as u64 {
        return Err(invalid(format!(
            "field `n`: {} jobs cannot cover {} distinct sizes",
            params.jobs,
            sizes.len()
        )));
    }
    let counts = positive_split(rng, params.jobs, sizes.len());
    JobProfile::new(sizes, counts).map_err(|e| invalid(format!("field `sizes`: {e}")))
}

pub fn generate(kind: GenKind, params: &GenParams) -> InputResult<Document> {
    if params.machines == 0 {
        return Err(invalid("field `m`: at least one machine required".into()));
    }
    if params.jobs < params.machines as u64 {
        return Err(invalid(format!(
            "field `n`: {} jobs for {} machines, need n ≥ m",
            params.jobs, params.machines
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let jobs = draw_jobs(&mut rng, params)?;
    match kind {
        GenKind::FeasiblePartition => {
            let mut asg = Assignment::zeros(params.machines, jobs.d());
            for (k, &n) in jobs.counts().iter().enumerate() {
                for (i, part) in split(&mut rng, n, params.machines).into_iter().enumerate() {
                    asg.set(i, k, part);
                }
            }
            let targets = asg.loads(jobs.sizes());
            let inst = PartitionInstance::new(jobs, targets).map_err(|e| invalid(e.to_string()))?;
            Ok(Document::Partition(inst, None))
        }
        GenKind::UniformRandom => {
            if params.max_speed == 0 {
                return Err(invalid("field `smax`: speeds must be positive".into()));
            }
            let speeds = (0..params.machines)
                .map(|_| rng.gen_range(1..=params.max_speed))
                .collect();
            let inst = SchedulingInstance::new(jobs, speeds).map_err(|e| invalid(e.to_string()))?;
            Ok(Document::Scheduling(inst, None))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(seed: u64) -> GenParams {
        GenParams {
            seed,
            d: 2,
            p_max: 5,
            machines: 2,
            jobs: 6,
            sizes: None,
            max_speed: 3,
        }
    }

    #[test]
    fn feasible_partition_is_balanced() {
        let Document::Partition(inst, _) =
            generate(GenKind::FeasiblePartition, &params(1)).unwrap()
        else {
            panic!()
        };
        assert_eq!(inst.jobs().d(), 2);
        assert_eq!(inst.jobs().total_jobs(), 6);
        assert_eq!(
            inst.targets().iter().sum::<u128>(),
            inst.jobs().total_size()
        );
    }

    #[test]
    fn same_seed_same_document() {
        for kind in [GenKind::FeasiblePartition, GenKind::UniformRandom] {
            assert_eq!(
                generate(kind, &params(7)).unwrap(),
                generate(kind, &params(7)).unwrap()
            );
        }
    }

    #[test]
    fn fewer_jobs_than_machines_is_rejected() {
        let p = GenParams {
            jobs: 1,
            ..params(1)
        };
        let err = generate(GenKind::FeasiblePartition, &p).unwrap_err();
        assert!(err.0.contains("n ≥ m"), "{err}");
    }

    #[test]
    fn fixed_sizes_with_huge_counts() {
        let p = GenParams {
            sizes: Some(vec![2, 3]),
            jobs: 200_000_000,
            machines: 100,
            ..params(3)
        };
        let Document::Partition(inst, _) = generate(GenKind::FeasiblePartition, &p).unwrap() else {
            panic!()
        };
        assert_eq!(inst.jobs().sizes(), &[2, 3]);
        assert_eq!(inst.jobs().total_jobs(), 200_000_000);
        assert_eq!(inst.machines(), 100);
    }
}
