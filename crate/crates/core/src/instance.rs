//! Instance and solution data model.
//!
//! Jobs are always held in high-multiplicity form: distinct processing times
//! with their counts. Loads and targets are `u128`; every partial load is
//! bounded by the instance's total size, which is checked to fit when the
//! profile is built, so load arithmetic past construction cannot overflow.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Distinct processing times with their multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JobProfile {
    sizes: Vec<u64>,
    counts: Vec<u64>,
    total_jobs: u128,
    total_size: u128,
}

impl JobProfile {
    pub fn new(sizes: Vec<u64>, counts: Vec<u64>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidInstance("job profile is empty".into()));
        }
        if sizes.len() != counts.len() {
            return Err(Error::InvalidInstance(format!(
                "{} sizes but {} counts",
                sizes.len(),
                counts.len()
            )));
        }
        if sizes[0] == 0 {
            return Err(Error::InvalidInstance("sizes must be positive".into()));
        }
        if sizes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInstance(
                "sizes must be strictly increasing".into(),
            ));
        }
        if counts.contains(&0) {
            return Err(Error::InvalidInstance("counts must be positive".into()));
        }
        let mut total_jobs = 0u128;
        let mut total_size = 0u128;
        for (&p, &n) in sizes.iter().zip(&counts) {
            total_jobs += u128::from(n);
            total_size = total_size
                .checked_add(u128::from(p) * u128::from(n))
                .ok_or(Error::Overflow("total size"))?;
        }
        Ok(JobProfile {
            sizes,
            counts,
            total_jobs,
            total_size,
        })
    }

    /// Groups a natural job list into distinct sizes with counts.
    pub fn normalize(jobs: &[u64]) -> Result<Self> {
        if jobs.is_empty() {
            return Err(Error::InvalidInstance("job list is empty".into()));
        }
        if jobs.contains(&0) {
            return Err(Error::InvalidInstance(
                "processing times must be positive".into(),
            ));
        }
        let mut grouped = BTreeMap::new();
        for &p in jobs {
            *grouped.entry(p).or_insert(0u64) += 1;
        }
        let (sizes, counts) = grouped.into_iter().unzip();
        JobProfile::new(sizes, counts)
    }

    /// Expands the profile back into a sorted job list.
    pub fn expand(&self) -> Vec<u64> {
        self.sizes
            .iter()
            .zip(&self.counts)
            .flat_map(|(&p, &n)| std::iter::repeat_n(p, n as usize))
            .collect()
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of distinct processing times.
    pub fn d(&self) -> usize {
        self.sizes.len()
    }

    pub fn p_max(&self) -> u64 {
        *self.sizes.last().expect("profile is nonempty")
    }

    pub fn total_jobs(&self) -> u128 {
        self.total_jobs
    }

    pub fn total_size(&self) -> u128 {
        self.total_size
    }

    pub fn index_of(&self, size: u64) -> Option<usize> {
        self.sizes.binary_search(&size).ok()
    }
}

/// Jobs together with an exact target load per machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionInstance {
    jobs: JobProfile,
    targets: Vec<u128>,
}

impl PartitionInstance {
    pub fn new(jobs: JobProfile, targets: Vec<u128>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidInstance("no machines".into()));
        }
        if targets.len() as u128 > jobs.total_jobs() {
            return Err(Error::InvalidInstance(format!(
                "{} machines but only {} jobs",
                targets.len(),
                jobs.total_jobs()
            )));
        }
        let mut sum = 0u128;
        for &t in &targets {
            sum = sum.checked_add(t).ok_or(Error::Overflow("target sum"))?;
        }
        if sum != jobs.total_size() {
            return Err(Error::InvalidInstance(format!(
                "balance violated: targets sum to {sum}, jobs to {}",
                jobs.total_size()
            )));
        }
        Ok(PartitionInstance { jobs, targets })
    }

    pub fn jobs(&self) -> &JobProfile {
        &self.jobs
    }

    pub fn targets(&self) -> &[u128] {
        &self.targets
    }

    pub fn machines(&self) -> usize {
        self.targets.len()
    }
}

/// Jobs together with machine speeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulingInstance {
    jobs: JobProfile,
    speeds: Vec<u64>,
}

impl SchedulingInstance {
    pub fn new(jobs: JobProfile, speeds: Vec<u64>) -> Result<Self> {
        if speeds.is_empty() {
            return Err(Error::InvalidInstance("no machines".into()));
        }
        if speeds.contains(&0) {
            return Err(Error::InvalidInstance("speeds must be positive".into()));
        }
        if speeds.len() as u128 > jobs.total_jobs() {
            return Err(Error::InvalidInstance(format!(
                "{} machines but only {} jobs",
                speeds.len(),
                jobs.total_jobs()
            )));
        }
        Ok(SchedulingInstance { jobs, speeds })
    }

    pub fn jobs(&self) -> &JobProfile {
        &self.jobs
    }

    pub fn speeds(&self) -> &[u64] {
        &self.speeds
    }

    pub fn machines(&self) -> usize {
        self.speeds.len()
    }
}

/// Per-machine job counts, one column per distinct size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    counts: Vec<Vec<u64>>,
}

impl Assignment {
    pub fn zeros(machines: usize, d: usize) -> Self {
        Assignment {
            counts: vec![vec![0; d]; machines],
        }
    }

    /// Builds an assignment from a count matrix; all rows must have the
    /// same length.
    pub fn from_rows(counts: Vec<Vec<u64>>) -> Result<Self> {
        if let Some(first) = counts.first() {
            if counts.iter().any(|r| r.len() != first.len()) {
                return Err(Error::InvalidArgument("ragged assignment rows".into()));
            }
        }
        Ok(Assignment { counts })
    }

    pub fn machines(&self) -> usize {
        self.counts.len()
    }

    pub fn d(&self) -> usize {
        self.counts.first().map_or(0, Vec::len)
    }

    pub fn rows(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn get(&self, machine: usize, k: usize) -> u64 {
        self.counts[machine][k]
    }

    pub fn set(&mut self, machine: usize, k: usize, value: u64) {
        self.counts[machine][k] = value;
    }

    pub fn add(&mut self, machine: usize, k: usize, value: u64) {
        self.counts[machine][k] += value;
    }

    pub fn sub(&mut self, machine: usize, k: usize, value: u64) {
        self.counts[machine][k] -= value;
    }

    /// Total processing time on `machine`.
    pub fn load(&self, machine: usize, sizes: &[u64]) -> u128 {
        self.counts[machine]
            .iter()
            .zip(sizes)
            .map(|(&c, &p)| u128::from(c) * u128::from(p))
            .sum()
    }

    pub fn loads(&self, sizes: &[u64]) -> Vec<u128> {
        (0..self.machines()).map(|i| self.load(i, sizes)).collect()
    }

    pub fn column_sum(&self, k: usize) -> u128 {
        self.counts.iter().map(|r| u128::from(r[k])).sum()
    }

    pub fn jobs_on(&self, machine: usize) -> u128 {
        self.counts[machine].iter().map(|&c| u128::from(c)).sum()
    }

    /// True when every job of the profile is placed exactly once.
    pub fn is_complete(&self, jobs: &JobProfile) -> bool {
        self.d() == jobs.d()
            && jobs
                .counts()
                .iter()
                .enumerate()
                .all(|(k, &n)| self.column_sum(k) == u128::from(n))
    }
}
