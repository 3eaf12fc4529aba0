//! Random variable partitions: the uniform Y/Z distribution, the sparse
//! four-way distribution, explicit partitions, and their application to
//! formulas and grid variable matrices.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::{Formula, FormulaBuilder, Node, Var, VarId};
use crate::rng::tagged_rng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PartitionError {
    #[error("invalid distribution parameters: {0}")]
    InvalidParams(String),
    #[error("variable {0} has no assignment")]
    Unassigned(Var),
    #[error("target {0} assigned to more than one variable")]
    NotInjective(Target),
    #[error("bad partition encoding: {0}")]
    Decode(String),
}

/// Where a variable goes under a partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Y(u32),
    Z(u32),
    One,
    Zero,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Y(k) => write!(f, "y{k}"),
            Target::Z(k) => write!(f, "z{k}"),
            Target::One => write!(f, "1"),
            Target::Zero => write!(f, "0"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SourceDist {
    DPrime,
    D,
    Explicit,
}

/// Parameters of the four-way distribution: each variable independently goes
/// to `Y` with probability `m/N`, to `Z` with probability `m/N`, to the
/// constant 1 with probability `kappa*n/N` and to 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DParams {
    /// variable count N
    pub big_n: u64,
    /// Y/Z weight numerator
    pub m: u64,
    /// one-weight scale (the paper couples this to sqrt(N))
    pub n: u64,
    /// one-weight multiplier
    pub kappa: u64,
}

impl DParams {
    pub fn new(big_n: u64, m: u64, n: u64, kappa: u64) -> Result<DParams, PartitionError> {
        let p = DParams { big_n, m, n, kappa };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PartitionError> {
        if self.big_n == 0 {
            return Err(PartitionError::InvalidParams("N must be positive".into()));
        }
        let mass = 2u128 * self.m as u128 + self.kappa as u128 * self.n as u128;
        if mass > self.big_n as u128 {
            return Err(PartitionError::InvalidParams(format!(
                "probability mass exceeds 1: (2m + kappa*n)/N = {mass}/{}",
                self.big_n
            )));
        }
        Ok(())
    }

    /// Desk-scale defaults from the asymptotic couplings:
    /// `m = round(N^(1/3))`, `n = round(sqrt(N))`, `kappa = ceil(20*log2(n))`.
    /// Refuses regimes where `2m < kappa*n` fails or the mass exceeds 1;
    /// callers then have to pick explicit parameters.
    pub fn desk_defaults(big_n: u64) -> Result<DParams, PartitionError> {
        let m = (big_n as f64).cbrt().round() as u64;
        let n = (big_n as f64).sqrt().round() as u64;
        let kappa = (20.0 * (n as f64).log2()).ceil() as u64;
        let p = DParams { big_n, m, n, kappa };
        p.validate()?;
        if 2 * p.m >= p.kappa * p.n {
            return Err(PartitionError::InvalidParams(format!(
                "regime assumption 2m < kappa*n fails: m={m} n={n} kappa={kappa}"
            )));
        }
        Ok(p)
    }

    /// Per-variable probabilities as exact rationals over N.
    pub fn weights(&self) -> (u64, u64, u64, u64) {
        let y = self.m;
        let z = self.m;
        let one = self.kappa * self.n;
        let zero = self.big_n - y - z - one;
        (y, z, one, zero)
    }
}

/// A total assignment of a variable universe to Y/Z targets or constants,
/// injective on the Y and Z targets by construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    universe: Vec<Var>,
    targets: Vec<Target>,
    source: SourceDist,
    seed: u64,
}

impl Partition {
    /// Builds an explicit partition; target indices must be injective.
    pub fn explicit(assignment: Vec<(Var, Target)>) -> Result<Partition, PartitionError> {
        let mut pairs = assignment;
        pairs.sort_unstable_by_key(|(v, _)| *v);
        let mut seen_y = std::collections::HashSet::new();
        let mut seen_z = std::collections::HashSet::new();
        for (_, t) in &pairs {
            let fresh = match t {
                Target::Y(k) => seen_y.insert(*k),
                Target::Z(k) => seen_z.insert(*k),
                _ => true,
            };
            if !fresh {
                return Err(PartitionError::NotInjective(*t));
            }
        }
        let (universe, targets) = pairs.into_iter().unzip();
        Ok(Partition { universe, targets, source: SourceDist::Explicit, seed: 0 })
    }

    pub fn universe(&self) -> &[Var] {
        &self.universe
    }

    pub fn source(&self) -> SourceDist {
        self.source
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn target(&self, v: Var) -> Result<Target, PartitionError> {
        let i = self
            .universe
            .binary_search(&v)
            .map_err(|_| PartitionError::Unassigned(v))?;
        Ok(self.targets[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (Var, Target)> + '_ {
        self.universe.iter().copied().zip(self.targets.iter().copied())
    }

    pub fn stats(&self) -> PartitionStats {
        let mut s = PartitionStats::default();
        for t in &self.targets {
            match t {
                Target::Y(_) => s.count_y += 1,
                Target::Z(_) => s.count_z += 1,
                Target::One => s.count_one += 1,
                Target::Zero => s.count_zero += 1,
            }
        }
        s.imbalance = s.count_y.abs_diff(s.count_z);
        s
    }

    /// JSON object `{"seed":…,"dist":…,"map":{"x1":"y1",…}}`.
    pub fn to_json(&self) -> String {
        let enc = PartitionJson {
            seed: self.seed,
            dist: self.source,
            map: self.iter().map(|(v, t)| (v.to_string(), t.to_string())).collect(),
        };
        serde_json::to_string_pretty(&enc).expect("partition serializes")
    }

    pub fn from_json(text: &str) -> Result<Partition, PartitionError> {
        let enc: PartitionJson =
            serde_json::from_str(text).map_err(|e| PartitionError::Decode(e.to_string()))?;
        let mut assignment = Vec::with_capacity(enc.map.len());
        for (k, v) in enc.map {
            assignment.push((parse_var(&k)?, parse_target(&v)?));
        }
        let mut p = Partition::explicit(assignment)?;
        p.source = enc.dist;
        p.seed = enc.seed;
        Ok(p)
    }
}

#[derive(Serialize, Deserialize)]
struct PartitionJson {
    seed: u64,
    dist: SourceDist,
    map: BTreeMap<String, String>,
}

fn parse_var(s: &str) -> Result<Var, PartitionError> {
    let bad = || PartitionError::Decode(format!("bad variable name {s:?}"));
    let (kind, rest) = s.split_at(1);
    match kind {
        "x" => {
            if let Some((a, b)) = rest.split_once('_') {
                let i = a.parse().map_err(|_| bad())?;
                let j = b.parse().map_err(|_| bad())?;
                Ok(Var::X(VarId::Grid(i, j)))
            } else {
                Ok(Var::X(VarId::Plain(rest.parse().map_err(|_| bad())?)))
            }
        }
        "y" => Ok(Var::Y(rest.parse().map_err(|_| bad())?)),
        "z" => Ok(Var::Z(rest.parse().map_err(|_| bad())?)),
        _ => Err(bad()),
    }
}

fn parse_target(s: &str) -> Result<Target, PartitionError> {
    let bad = || PartitionError::Decode(format!("bad target name {s:?}"));
    match s {
        "0" => Ok(Target::Zero),
        "1" => Ok(Target::One),
        _ => {
            let (kind, rest) = s.split_at(1);
            let k = rest.parse().map_err(|_| bad())?;
            match kind {
                "y" => Ok(Target::Y(k)),
                "z" => Ok(Target::Z(k)),
                _ => Err(bad()),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PartitionStats {
    pub count_y: usize,
    pub count_z: usize,
    pub count_one: usize,
    pub count_zero: usize,
    /// `| |phi(X) ∩ Y| - |phi(X) ∩ Z| |`
    pub imbalance: usize,
}

/// Uniform Y/Z partition: each variable goes to a fresh Y target with
/// probability 1/2, else to a fresh Z target. Target indices follow universe
/// order, so the partition is a pure function of (universe, seed).
pub fn sample_d_prime(universe: &[Var], seed: u64) -> Partition {
    let mut rng = tagged_rng(seed, 0xD0);
    let mut universe = universe.to_vec();
    universe.sort_unstable();
    universe.dedup();
    let mut targets = Vec::with_capacity(universe.len());
    let (mut ny, mut nz) = (0u32, 0u32);
    for _ in &universe {
        if rng.gen_bool(0.5) {
            ny += 1;
            targets.push(Target::Y(ny));
        } else {
            nz += 1;
            targets.push(Target::Z(nz));
        }
    }
    Partition { universe, targets, source: SourceDist::DPrime, seed }
}

/// Four-way partition with exact integer weights `m/N, m/N, kappa*n/N` and the
/// complement on 0. Requires the universe size to equal `params.big_n`.
pub fn sample_d(params: DParams, universe: &[Var], seed: u64) -> Result<Partition, PartitionError> {
    params.validate()?;
    let mut universe = universe.to_vec();
    universe.sort_unstable();
    universe.dedup();
    if universe.len() as u64 != params.big_n {
        return Err(PartitionError::InvalidParams(format!(
            "universe has {} variables but N = {}",
            universe.len(),
            params.big_n
        )));
    }
    let mut rng = tagged_rng(seed, 0xD1);
    let (wy, wz, wone, _) = params.weights();
    let mut targets = Vec::with_capacity(universe.len());
    let (mut ny, mut nz) = (0u32, 0u32);
    for _ in &universe {
        let r = rng.gen_range(0..params.big_n);
        if r < wy {
            ny += 1;
            targets.push(Target::Y(ny));
        } else if r < wy + wz {
            nz += 1;
            targets.push(Target::Z(nz));
        } else if r < wy + wz + wone {
            targets.push(Target::One);
        } else {
            targets.push(Target::Zero);
        }
    }
    Ok(Partition { universe, targets, source: SourceDist::D, seed })
}

/// Rewrites every input-variable leaf to its target; structure is unchanged.
pub fn apply_partition(f: &Formula, phi: &Partition) -> Result<Formula, PartitionError> {
    let mut b = FormulaBuilder::new();
    let mut out = Vec::with_capacity(f.nodes().len());
    for n in f.nodes() {
        let id = match *n {
            Node::Var(v) => match phi.target(v)? {
                Target::Y(k) => b.var(Var::Y(k)),
                Target::Z(k) => b.var(Var::Z(k)),
                Target::One => b.constant(1),
                Target::Zero => b.constant(0),
            },
            Node::Const(c) => b.constant(c),
            Node::Add(l, r) => {
                let (l, r) = (out[l as usize], out[r as usize]);
                b.add(l, r)
            }
            Node::Mul(l, r) => {
                let (l, r) = (out[l as usize], out[r as usize]);
                b.mul(l, r)
            }
        };
        out.push(id);
    }
    Ok(b.finish(out[f.root() as usize]).expect("rewrite keeps the tree"))
}

/// The n-by-n matrix of targets obtained by partitioning a grid universe
/// `x<i>_<j>` for `1 <= i, j <= n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionMatrix {
    n: usize,
    cells: Vec<Target>,
}

impl PartitionMatrix {
    pub fn new(n: usize, cells: Vec<Target>) -> PartitionMatrix {
        assert_eq!(cells.len(), n * n);
        PartitionMatrix { n, cells }
    }

    pub fn from_partition(n: usize, phi: &Partition) -> Result<PartitionMatrix, PartitionError> {
        let mut cells = Vec::with_capacity(n * n);
        for i in 1..=n {
            for j in 1..=n {
                cells.push(phi.target(Var::X(VarId::Grid(i as u16, j as u16)))?);
            }
        }
        Ok(PartitionMatrix { n, cells })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn at(&self, i: usize, j: usize) -> Target {
        self.cells[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, t: Target) {
        self.cells[i * self.n + j] = t;
    }

    pub fn cells_of<F: Fn(Target) -> bool>(&self, pred: F) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                if pred(self.at(i, j)) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// 0/1 pattern of the One-cells (everything else is treated as zero).
    pub fn one_pattern(&self) -> Vec<Vec<bool>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.at(i, j) == Target::One).collect())
            .collect()
    }
}

/// Grid universe for an n-by-n variable matrix.
pub fn grid_universe(n: usize) -> Vec<Var> {
    let mut u = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in 1..=n {
            u.push(Var::X(VarId::Grid(i as u16, j as u16)));
        }
    }
    u
}

/// Plain universe `x1..xN`.
pub fn plain_universe(n: usize) -> Vec<Var> {
    (1..=n as u32).map(|i| Var::X(VarId::Plain(i))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;
    use crate::formula::parse_formula;

    #[test]
    fn d_prime_is_total_and_injective() {
        let u = plain_universe(100);
        let phi = sample_d_prime(&u, 7);
        let mut ys = std::collections::HashSet::new();
        let mut zs = std::collections::HashSet::new();
        for (_, t) in phi.iter() {
            match t {
                Target::Y(k) => assert!(ys.insert(k)),
                Target::Z(k) => assert!(zs.insert(k)),
                _ => panic!("D' maps only to Y/Z"),
            }
        }
        assert_eq!(ys.len() + zs.len(), 100);
    }

    #[test]
    fn d_prime_reproducible() {
        let u = plain_universe(32);
        assert_eq!(sample_d_prime(&u, 9), sample_d_prime(&u, 9));
        assert_ne!(sample_d_prime(&u, 9), sample_d_prime(&u, 10));
    }

    #[test]
    fn d_prime_marginals() {
        // each cell of {YY, YZ, ZY, ZZ} should come up 1/4 of the time
        let u = plain_universe(2);
        let trials = 100_000;
        let mut counts = [0usize; 4];
        for s in 0..trials {
            let phi = sample_d_prime(&u, s as u64);
            let a = matches!(phi.target(u[0]).unwrap(), Target::Y(_)) as usize;
            let b = matches!(phi.target(u[1]).unwrap(), Target::Y(_)) as usize;
            counts[2 * a + b] += 1;
        }
        for c in counts {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.25).abs() < 0.02, "cell frequency {freq}");
        }
    }

    #[test]
    fn d_prime_y_count_mean() {
        let u = plain_universe(100);
        let trials = 100_000u64;
        let total: u64 = (0..trials)
            .map(|s| sample_d_prime(&u, s).stats().count_y as u64)
            .sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 50.0).abs() < 0.5, "mean {mean}");
    }

    #[test]
    fn d_params_validation() {
        assert!(DParams::new(4096, 16, 64, 32).is_ok());
        // the paper-coupled kappa overflows the probability mass at this scale
        let err = DParams::new(4096, 16, 64, 120).unwrap_err();
        assert!(matches!(err, PartitionError::InvalidParams(_)));
        let err = DParams::new(8, 4, 8, 1).unwrap_err();
        assert!(matches!(err, PartitionError::InvalidParams(_)));
        assert!(DParams::desk_defaults(1024).is_err());
        let p = DParams::desk_defaults(1 << 20).unwrap();
        assert_eq!(p.m, 102);
        assert_eq!(p.n, 1024);
        assert_eq!(p.kappa, 200);
    }

    #[test]
    fn d_marginals_match_weights() {
        let params = DParams::new(4096, 16, 64, 32).unwrap();
        let u = plain_universe(4096);
        let trials = 2000u64;
        let mut y_total = 0u64;
        for s in 0..trials {
            y_total += sample_d(params, &u, s).unwrap().stats().count_y as u64;
        }
        // mean #Y per draw is m = 16; SE over 2000 draws * 4096 vars is ~0.09
        let mean = y_total as f64 / trials as f64;
        assert!((mean - 16.0).abs() < 0.5, "mean #Y {mean}");
    }

    #[test]
    fn apply_partition_substitutes_leaves() {
        let f = parse_formula("(+ x1 x2)", Field::default()).unwrap();
        let phi = Partition::explicit(vec![
            (Var::X(VarId::Plain(1)), Target::Y(1)),
            (Var::X(VarId::Plain(2)), Target::Z(1)),
        ])
        .unwrap();
        assert_eq!(apply_partition(&f, &phi).unwrap().to_text(), "(+ y1 z1)");

        let f = parse_formula("(* x1 x2)", Field::default()).unwrap();
        let phi = Partition::explicit(vec![
            (Var::X(VarId::Plain(1)), Target::Zero),
            (Var::X(VarId::Plain(2)), Target::Y(1)),
        ])
        .unwrap();
        assert_eq!(apply_partition(&f, &phi).unwrap().to_text(), "(* 0 y1)");

        let f = parse_formula("(+ x1 x3)", Field::default()).unwrap();
        let phi = Partition::explicit(vec![(Var::X(VarId::Plain(1)), Target::Y(1))]).unwrap();
        assert_eq!(
            apply_partition(&f, &phi),
            Err(PartitionError::Unassigned(Var::X(VarId::Plain(3))))
        );
    }

    #[test]
    fn stats_and_imbalance() {
        let phi = Partition::explicit(
            (1..=6).map(|i| (Var::X(VarId::Plain(i)), Target::Y(i))).collect(),
        )
        .unwrap();
        let s = phi.stats();
        assert_eq!(s.count_y, 6);
        assert_eq!(s.imbalance, 6);

        let phi = Partition::explicit(vec![
            (Var::X(VarId::Plain(1)), Target::Y(1)),
            (Var::X(VarId::Plain(2)), Target::Z(1)),
        ])
        .unwrap();
        assert_eq!(phi.stats().imbalance, 0);
    }

    #[test]
    fn json_roundtrip() {
        let u = plain_universe(12);
        let phi = sample_d(DParams::new(12, 2, 3, 2).unwrap(), &u, 3).unwrap();
        let text = phi.to_json();
        let back = Partition::from_json(&text).unwrap();
        assert_eq!(phi, back);
    }

    #[test]
    fn explicit_rejects_duplicate_targets() {
        let err = Partition::explicit(vec![
            (Var::X(VarId::Plain(1)), Target::Y(1)),
            (Var::X(VarId::Plain(2)), Target::Y(1)),
        ])
        .unwrap_err();
        assert_eq!(err, PartitionError::NotInjective(Target::Y(1)));
    }
}
