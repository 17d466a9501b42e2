//! Randomized checks of the relations between the barcodes of a Rips
//! filtration `K` and its gluing-star quotient `K̃`:
//!
//! * `PB0(K̃) ⊆ PB0(K)`, `PB1(K) ⊆ PB1(K̃)`, `PB2(K) = PB2(K̃)`;
//! * every interval of `PB1(K̃)` not already in `PB1(K)` is essential;
//! * `β0(K̃ε) ≤ β0(Kε)`, `β1(K̃ε) ≥ β1(Kε)`, `β2(K̃ε) = β2(Kε)` on a grid;
//! * barcode Betti numbers agree with [`crate::oracle`] on the same grid.
//!
//! Instances cycle through random point clouds with random partitions,
//! small random crystals (extended motif with lattice classes) and random
//! abstract complexes with tied values. Each
//! trial draws from its own ChaCha stream so failures replay from
//! `(seed, trial)` alone.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::filtration::{augment_gluing_stars_at, bipartite_distances, build_rips, DistanceMatrix, Filtration, Partition};
use crate::oracle;
use crate::periodic::{cell_basis, extend_motif, Motif};
use crate::persistence::reduce;
use crate::structure::CellParams;

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Number of ε values in the Betti grid.
    pub grid_points: usize,
    /// Upper bound on original points per random cloud.
    pub max_points: usize,
    /// Value at which gluing-star edges enter; 0 for the real quotient.
    pub gluing_value: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { trials: 100, seed: 0, grid_points: 12, max_points: 8, gluing_value: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Check {
    Pb0Inclusion,
    Pb1Inclusion,
    Pb2Equality,
    QuotientLoopsEssential,
    Betti0,
    Betti1,
    Betti2,
    OracleAgreement,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Check::Pb0Inclusion => "PB0(quotient) within PB0(plain)",
            Check::Pb1Inclusion => "PB1(plain) within PB1(quotient)",
            Check::Pb2Equality => "PB2(plain) equals PB2(quotient)",
            Check::QuotientLoopsEssential => "quotient-only PB1 intervals are essential",
            Check::Betti0 => "beta0(quotient) <= beta0(plain)",
            Check::Betti1 => "beta1(quotient) >= beta1(plain)",
            Check::Betti2 => "beta2(quotient) == beta2(plain)",
            Check::OracleAgreement => "barcode Betti numbers match the oracle",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub trial: usize,
    pub check: Check,
    pub detail: String,
    /// The plain filtration, carrying its class partition, for replay.
    pub instance: Filtration,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub trials: usize,
    pub checks: usize,
    pub failures: Vec<Failure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Random plain filtration with a class partition for trial `trial`.
pub fn random_instance(seed: u64, trial: usize, max_points: usize) -> Filtration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    match trial % 3 {
        0 => random_cloud(&mut rng, max_points.max(2)),
        1 => random_crystal(&mut rng),
        _ => {
            let f = random_complex(&mut rng, max_points.max(2), 300);
            let n = f.vertex_count();
            let k = rng.random_range(1..=n);
            let mut classes = vec![Vec::new(); k];
            for v in 0..n as u32 {
                classes[rng.random_range(0..k)].push(v);
            }
            let partition = Partition::new(n, classes).expect("classes drawn over 0..n");
            f.with_partition(partition).expect("partition matches vertex count")
        }
    }
}

/// Random face-closed filtration: vertices at 0, higher simplices at the
/// largest face value plus a step from {0, 0.5, 1, 1.5, 2}, so ties are common.
pub fn random_complex<R: Rng>(rng: &mut R, max_vertices: usize, max_simplices: usize) -> Filtration {
    use alloc::collections::BTreeMap;

    let n = rng.random_range(2..=max_vertices.max(2));
    let mut values: BTreeMap<Vec<u32>, f64> = (0..n as u32).map(|v| (vec![v], 0.0)).collect();
    let budget = rng.random_range(n..=max_simplices.max(n));
    let mut attempts = 0;
    while values.len() < budget && attempts < 20 * max_simplices {
        attempts += 1;
        let size = rng.random_range(2..=4usize.min(n));
        let mut verts: Vec<u32> = Vec::with_capacity(size);
        while verts.len() < size {
            let v = rng.random_range(0..n as u32);
            if !verts.contains(&v) {
                verts.push(v);
            }
        }
        verts.sort_unstable();
        insert_closed(rng, &mut values, verts);
    }
    let simplices: Vec<(Vec<u32>, f64)> = values.into_iter().collect();
    Filtration::from_simplices(n, Partition::singletons(n), simplices)
        .expect("generated complexes are face-closed")
}

fn insert_closed<R: Rng>(rng: &mut R, values: &mut alloc::collections::BTreeMap<Vec<u32>, f64>, verts: Vec<u32>) -> f64 {
    if let Some(&v) = values.get(&verts) {
        return v;
    }
    let mut top = 0.0f64;
    for skip in 0..verts.len() {
        let face: Vec<u32> = verts.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
        top = top.max(insert_closed(rng, values, face));
    }
    let value = top + 0.5 * rng.random_range(0..=4) as f64;
    values.insert(verts, value);
    value
}

/// Random point cloud in `[0, 10]³` with a random class partition, drawn
/// from the same stream as [`random_instance`] would use for `trial`.
pub fn cloud_instance(seed: u64, trial: usize, max_points: usize) -> Filtration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    random_cloud(&mut rng, max_points.max(2))
}

fn random_cloud(rng: &mut ChaCha8Rng, max_points: usize) -> Filtration {
    let n = rng.random_range(2..=max_points);
    let points: Vec<[f64; 3]> = (0..n)
        .map(|_| [rng.random_range(0.0..10.0), rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)])
        .collect();
    let k = rng.random_range(1..=n);
    let mut classes = vec![Vec::new(); k];
    for v in 0..n as u32 {
        classes[rng.random_range(0..k)].push(v);
    }
    let max_value = rng.random_range(4.0..18.0);
    let plain = build_rips(&DistanceMatrix::euclidean(&points), max_value, 3);
    let partition = Partition::new(n, classes).expect("classes drawn over 0..n");
    plain.with_partition(partition).expect("partition matches vertex count")
}

fn random_crystal(rng: &mut ChaCha8Rng) -> Filtration {
    loop {
        let cell = CellParams::new(
            rng.random_range(2.0..5.0),
            rng.random_range(2.0..5.0),
            rng.random_range(2.0..5.0),
            rng.random_range(75.0..105.0),
            rng.random_range(75.0..105.0),
            rng.random_range(75.0..105.0),
        );
        let Ok(basis) = cell_basis(&cell) else { continue };
        let atoms = rng.random_range(1..=2);
        let frac: Vec<[f64; 3]> = (0..atoms)
            .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let motif = Motif {
            points: frac.iter().map(|f| basis.to_cartesian(*f)).collect(),
            frac,
            elements: vec![String::from("X"); atoms],
            atom_set_tag: String::from("random"),
        };
        let Ok(em) = extend_motif(&motif, &basis) else { continue };
        let max_value = rng.random_range(4.0..12.0);
        let plain = build_rips(&bipartite_distances(&em), max_value, 3);
        let partition = Partition::new(em.len(), em.classes()).expect("lattice classes");
        return plain.with_partition(partition).expect("partition matches vertex count");
    }
}

/// Runs every check on one plain filtration, using its own partition.
pub fn check_filtration(plain: &Filtration, grid_points: usize, gluing_value: f64) -> (usize, Vec<(Check, String)>) {
    let glued = augment_gluing_stars_at(plain, plain.partition(), gluing_value);
    let k = reduce(plain);
    let q = reduce(&glued);
    let mut failures = Vec::new();
    let mut checks = 0;
    let mut expect = |ok: bool, check: Check, detail: &dyn Fn() -> String| {
        checks += 1;
        if !ok {
            failures.push((check, detail()));
        }
    };

    expect(q.pb0.is_submultiset_of(&k.pb0), Check::Pb0Inclusion, &|| {
        format!("plain {:?} quotient {:?}", k.pb0.intervals(), q.pb0.intervals())
    });
    expect(k.pb1.is_submultiset_of(&q.pb1), Check::Pb1Inclusion, &|| {
        format!("plain {:?} quotient {:?}", k.pb1.intervals(), q.pb1.intervals())
    });
    expect(k.pb2 == q.pb2, Check::Pb2Equality, &|| {
        format!("plain {:?} quotient {:?}", k.pb2.intervals(), q.pb2.intervals())
    });
    let extra = q.pb1.difference(&k.pb1);
    expect(extra.intervals().iter().all(|i| i.is_essential()), Check::QuotientLoopsEssential, &|| {
        format!("quotient-only intervals {:?}", extra.intervals())
    });

    let top = plain.simplices().iter().map(|s| s.value).fold(0.0, f64::max);
    let steps = grid_points.max(2) - 1;
    for i in 0..=steps {
        let eps = top * i as f64 / steps as f64;
        let bk = k.betti_at(eps);
        let bq = q.betti_at(eps);
        expect(bq[0] <= bk[0], Check::Betti0, &|| format!("eps {eps}: {bq:?} vs {bk:?}"));
        expect(bq[1] >= bk[1], Check::Betti1, &|| format!("eps {eps}: {bq:?} vs {bk:?}"));
        expect(bq[2] == bk[2], Check::Betti2, &|| format!("eps {eps}: {bq:?} vs {bk:?}"));
        for (label, f, barcode) in [("plain", plain, bk), ("quotient", &glued, bq)] {
            match oracle::betti_at(f, eps) {
                Ok(b) => expect(b.as_array() == barcode, Check::OracleAgreement, &|| {
                    format!("{label} eps {eps}: barcode {barcode:?} oracle {:?}", b.as_array())
                }),
                Err(e) => expect(false, Check::OracleAgreement, &|| format!("{label}: {e}")),
            }
        }
    }
    (checks, failures)
}

pub fn run(cfg: &VerifyConfig) -> VerifyReport {
    let mut report = VerifyReport { trials: cfg.trials, ..VerifyReport::default() };
    for trial in 0..cfg.trials {
        let plain = random_instance(cfg.seed, trial, cfg.max_points);
        let (checks, failures) = check_filtration(&plain, cfg.grid_points, cfg.gluing_value);
        report.checks += checks;
        for (check, detail) in failures {
            report.failures.push(Failure { trial, check, detail, instance: plain.clone() });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_pass() {
        let r = run(&VerifyConfig { trials: 0, ..VerifyConfig::default() });
        assert!(r.passed());
        assert_eq!(r.checks, 0);
    }

    #[test]
    fn small_run_passes() {
        let r = run(&VerifyConfig { trials: 20, seed: 3, ..VerifyConfig::default() });
        assert!(r.passed(), "{:?}", r.failures.first());
    }

    #[test]
    fn instances_replay() {
        assert_eq!(random_instance(5, 7, 8), random_instance(5, 7, 8));
        assert_ne!(random_instance(5, 7, 8), random_instance(5, 8, 8));
    }

    #[test]
    fn late_gluing_breaks_pb0_inclusion() {
        let r = run(&VerifyConfig { trials: 20, gluing_value: 1.0, ..VerifyConfig::default() });
        assert!(r.failures.iter().any(|f| f.check == Check::Pb0Inclusion));
    }
}
