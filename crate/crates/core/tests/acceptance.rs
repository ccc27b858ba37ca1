//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one `criterion N ... PASS|FAIL` line each to stderr (uncaptured).
//!
//! Criterion 6 fails at the fixed configuration; see `universality` for the
//! measured gap and the finite-n term that explains it.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rmtlaw::models::CovarianceSpec;
use rmtlaw::moments::limiting_moment_exact;
use rmtlaw::{
    chain_joint_moment, compare_reports, compare_to_prediction, enumerate_consistent_graphs, enumerate_partitions,
    h_finite, h_szego, isserlis_moment, limiting_moment, limiting_moment_via_nc, max_component_graphs, qform_moment,
    run_monte_carlo, AspectRatio, FiniteMarkovChain, HSequence, MomentReport, PredictionTarget, RunOptions,
    SimConfig, SimMode, StationaryModel,
};

/// Criteria expected to print FAIL; their tests assert the analysis instead.
const KNOWN_FAILURES: &[u32] = &[6];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn emit(o: &Outcome) {
    let line = format!(
        "criterion {:>2} {:<32} {} ({:.1} s) {}\n",
        o.id,
        o.name,
        if o.pass { "PASS" } else { "FAIL" },
        o.elapsed.as_secs_f64(),
        o.detail
    );
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn timed<F: FnOnce() -> (bool, String)>(id: u32, name: &'static str, limit: Duration, f: F) -> Outcome {
    let start = Instant::now();
    let (pass, mut detail) = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    if !in_time {
        detail.push_str(&format!(" [over time limit {:.0} s]", limit.as_secs_f64()));
    }
    let o = Outcome {
        id,
        name,
        pass: pass && in_time,
        detail,
        elapsed,
    };
    emit(&o);
    o
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

// brute force over restricted growth strings, crossing by 4-tuples
fn brute_partitions(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut labels = vec![0usize; k];
    fn rec(i: usize, max: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == labels.len() {
            out.push(labels.clone());
            return;
        }
        for l in 0..=max + 1 {
            labels[i] = l;
            rec(i + 1, max.max(l), labels, out);
        }
    }
    if k > 0 {
        rec(1, 0, &mut labels, &mut out);
    }
    out
}

fn brute_crossing(labels: &[usize]) -> bool {
    let k = labels.len();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                for d in c + 1..k {
                    if labels[a] == labels[c] && labels[b] == labels[d] && labels[a] != labels[b] {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Number of non-crossing partitions of [k] with b blocks, by brute force.
fn brute_nc_by_blocks(k: usize) -> Vec<u64> {
    let mut counts = vec![0u64; k + 1];
    for labels in brute_partitions(k) {
        if !brute_crossing(&labels) {
            counts[labels.iter().max().unwrap() + 1] += 1;
        }
    }
    counts
}

fn random_h(rng: &mut ChaCha8Rng, len: usize) -> HSequence {
    // moments of a random three-atom law on (0, 3)
    let atoms: Vec<f64> = (0..3).map(|_| rng.random_range(0.05..3.0)).collect();
    let raw: Vec<f64> = (0..3).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let values = (1..=len)
        .map(|l| atoms.iter().zip(&raw).map(|(a, w)| w / total * a.powi(l as i32)).sum())
        .collect();
    HSequence::user(values).unwrap()
}

fn mp_recovery() -> Outcome {
    timed(1, "MP recovery", Duration::from_secs(1), || {
        let mut ok = true;
        let mut catalan = Vec::new();
        for k in 1..=10 {
            let by_blocks = brute_nc_by_blocks(k);
            if k <= 4 {
                catalan.push(by_blocks.iter().sum::<u64>());
            }
            for (num, den) in [(1, 2), (1, 1), (2, 1)] {
                let y_exact = BigRational::new(BigInt::from(num), BigInt::from(den));
                let ones = vec![BigRational::one(); k];
                let got = limiting_moment_exact(k, &y_exact, &ones).unwrap();
                let mut want = BigRational::zero();
                for (b, &c) in by_blocks.iter().enumerate().skip(1) {
                    want += BigRational::from_integer(BigInt::from(c)) * num::pow(y_exact.clone(), b - 1);
                }
                ok &= got == want;

                let y = AspectRatio::new(num as f64 / den as f64).unwrap();
                let float = limiting_moment(k, y, &HSequence::user(vec![1.0; k]).unwrap()).unwrap();
                let want_f: f64 = by_blocks
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(b, &c)| c as f64 * y.y().powi(b as i32 - 1))
                    .sum();
                ok &= rel(float, want_f) <= 1e-12;
            }
        }
        let y1: Vec<f64> = (1..=4)
            .map(|k| limiting_moment(k, AspectRatio::new(1.0).unwrap(), &HSequence::user(vec![1.0; k]).unwrap()).unwrap())
            .collect();
        ok &= catalan == [1, 2, 5, 14] && y1 == [1.0, 2.0, 5.0, 14.0];
        (ok, format!("y=1 moments {y1:?}, brute-force Catalan {catalan:?}"))
    })
}

fn nc_sum_oracle() -> Outcome {
    timed(2, "NC-sum oracle", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut worst = 0.0f64;
        for k in 1..=9 {
            for _ in 0..100 {
                let y = AspectRatio::new(rng.random_range(0.05..4.0)).unwrap();
                let h = random_h(&mut rng, k);
                let a = limiting_moment(k, y, &h).unwrap();
                let b = limiting_moment_via_nc(k, y, &h).unwrap();
                worst = worst.max(rel(a, b));
            }
        }
        (worst <= 1e-10, format!("max relative difference {worst:.2e}"))
    })
}

fn graph_criteria() -> (Outcome, Outcome) {
    let mut lemma_max = (true, 0usize);
    let ncr = timed(3, "consistent-graph oracle", Duration::from_secs(120), || {
        let mut ok = true;
        let mut checked = 0;
        for k in 1..=6 {
            for p in enumerate_partitions(k).unwrap() {
                let noncrossing = !brute_crossing(&p.labels());
                ok &= noncrossing == p.is_noncrossing();
                let maximal = max_component_graphs(&p).unwrap();
                ok &= maximal.len() == usize::from(noncrossing);
                if let Some(g) = maximal.first() {
                    ok &= g.component_partition().kreweras_complement().unwrap() == p;
                }

                let bound = k - p.num_blocks() + 1;
                let graphs = enumerate_consistent_graphs(&p).unwrap();
                let best = graphs.iter().map(|g| g.num_components()).max().unwrap_or(0);
                lemma_max.0 &= best <= bound && (best == bound) == noncrossing;
                lemma_max.1 += graphs.len();
                checked += 1;
            }
        }
        (ok, format!("{checked} partitions, k <= 6"))
    });
    let max = Outcome {
        id: 4,
        name: "component bound",
        pass: lemma_max.0,
        detail: format!("{} consistent graphs checked (same run as 3)", lemma_max.1),
        elapsed: ncr.elapsed,
    };
    emit(&max);
    (ncr, max)
}

fn acceptance_config(model: &str, mode: SimMode) -> SimConfig {
    SimConfig {
        model: model.parse().unwrap(),
        m: 150,
        n: 300,
        replicates: 200,
        k_max: 4,
        seed: 42,
        mode,
    }
}

fn finite_verdicts(report: &MomentReport) -> (bool, String) {
    let verdicts = compare_to_prediction(report, PredictionTarget::Finite).unwrap();
    let detail = verdicts
        .iter()
        .map(|v| format!("k={} z={:+.2} rel={:.4}", v.k, v.z, v.relative_error))
        .collect::<Vec<_>>()
        .join(", ");
    (verdicts.iter().all(|v| v.pass), detail)
}

fn monte_carlo(ar1: &mut Option<MomentReport>) -> Outcome {
    timed(5, "Monte Carlo vs prediction", Duration::from_secs(60), || {
        let report = run_monte_carlo(&acceptance_config("ar1:p=0.5", SimMode::Direct), &RunOptions::with_workers(1)).unwrap();
        let out = finite_verdicts(&report);
        *ar1 = Some(report);
        out
    })
}

fn universality(ar1: &MomentReport) -> Outcome {
    let mut gap2 = (0.0, 0.0);
    let o = timed(6, "universality", Duration::from_secs(120), || {
        let two = run_monte_carlo(&acceptance_config("twostate:alpha=0.5", SimMode::Direct), &RunOptions::default()).unwrap();
        let rows = compare_reports(ar1, &two).unwrap();
        gap2 = (rows[1].empirical - rows[1].reference, rows[1].stderr);
        let detail = rows.iter().map(|v| format!("k={} z={:+.2}", v.k, v.z)).collect::<Vec<_>>().join(", ");
        (rows.iter().all(|v| v.z.abs() <= 3.0), detail)
    });
    // E (1/m) tr W² differs between the two models only through E[a_i² a_j²]:
    // Gaussian gives 1 + 2 t_ij², the ±1 chain gives 1, so the expected gap
    // is 2 (1/m) tr T_m² / n, which vanishes only as n → ∞.
    let t = rmtlaw::covariance_matrix(&"ar1:p=0.5".parse().unwrap(), 150).unwrap();
    let h2 = t.iter().map(|x| x * x).sum::<f64>() / 150.0;
    let expected = 2.0 * h2 / 300.0;
    let _ = writeln!(
        std::io::stderr(),
        "             k=2 gap {:.5} vs finite-n term {:.5} (combined stderr {:.5})",
        gap2.0,
        expected,
        gap2.1
    );
    assert!(
        (gap2.0 - expected).abs() <= 3.0 * gap2.1,
        "k=2 gap {} not explained by the finite-n term {}",
        gap2.0,
        expected
    );
    o
}

fn remark1() -> Outcome {
    timed(7, "Gaussian-transform equivalence", Duration::from_secs(60), || {
        let report = run_monte_carlo(
            &acceptance_config("ar1:p=0.5", SimMode::Remark1Gaussian),
            &RunOptions::default(),
        )
        .unwrap();
        finite_verdicts(&report)
    })
}

fn szego() -> Outcome {
    timed(8, "Szego convergence", Duration::from_secs(60), || {
        let model = StationaryModel::ar1(0.5).unwrap();
        let finite = h_finite(&model, 2000, 4).unwrap();
        let limit = h_szego(&model, 4).unwrap();
        let worst = (1..=4).map(|k| (finite.get(k) - limit.get(k)).abs()).fold(0.0, f64::max);
        // Σ_h ρ^{2|h|} = (1 + ρ²)/(1 − ρ²)
        let closed = (1.0 + 0.25) / (1.0 - 0.25);
        let h2_err = (limit.get(2) - closed).abs();
        (
            worst <= 0.02 && h2_err <= 1e-9,
            format!("max |finite - limit| {worst:.2e}, |H_2 - 5/3| {h2_err:.1e}"),
        )
    })
}

fn qform_consistency() -> Outcome {
    timed(9, "quadratic-form consistency", Duration::from_secs(30), || {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut worst = 0.0f64;
        for k in 1..=8 {
            for _ in 0..50 {
                let y = AspectRatio::new(rng.random_range(0.05..4.0)).unwrap();
                let h = random_h(&mut rng, k);
                let ones = HSequence::user(vec![1.0; k]).unwrap();
                worst = worst.max(rel(qform_moment(k, y, &h, &ones).unwrap(), limiting_moment(k, y, &h).unwrap()));
            }
        }
        (worst <= 1e-10, format!("max relative difference {worst:.2e}"))
    })
}

fn exact_oracles() -> Outcome {
    timed(10, "exact joint moments", Duration::from_secs(30), || {
        let mut worst_chain = 0.0f64;
        for alpha in [0.2, 0.5, 0.8] {
            let chain = FiniteMarkovChain::two_state(alpha).unwrap();
            for j in 0..=30 {
                let got = chain_joint_moment(&chain, &[1, j + 1]).unwrap();
                worst_chain = worst_chain.max((got - alpha.powi(j as i32)).abs());
            }
        }
        let mut worst_wick = 0.0f64;
        for p in [0.3f64, 0.6] {
            let cov = CovarianceSpec::Geometric { variance: 1.0, rho: p };
            // pairings (12)(34), (13)(24), (14)(23): p·p + p²·p² + p³·p
            let want = p * p + 2.0 * p.powi(4);
            worst_wick = worst_wick.max((isserlis_moment(&cov, &[1, 2, 3, 4]).unwrap() - want).abs());
        }
        (
            worst_chain <= 1e-12 && worst_wick <= 1e-12,
            format!("chain {worst_chain:.1e}, Isserlis {worst_wick:.1e}"),
        )
    })
}

fn determinism() -> Outcome {
    timed(11, "determinism", Duration::from_secs(120), || {
        let mut ok = true;
        for model in ["ar1:p=0.5", "twostate:alpha=0.5"] {
            let config = SimConfig {
                model: model.parse().unwrap(),
                m: 60,
                n: 120,
                replicates: 40,
                k_max: 4,
                seed: 42,
                mode: SimMode::Direct,
            };
            let reference = run_monte_carlo(&config, &RunOptions::with_workers(1)).unwrap().to_json(false);
            for workers in [1, 4, 8] {
                let again = run_monte_carlo(&config, &RunOptions::with_workers(workers)).unwrap().to_json(false);
                ok &= again.as_bytes() == reference.as_bytes();
            }
        }
        (ok, "two runs and workers {1, 4, 8} byte-identical".to_string())
    })
}

#[test]
fn acceptance_suite() {
    let mut outcomes = vec![mp_recovery(), nc_sum_oracle()];
    let (a, b) = graph_criteria();
    outcomes.push(a);
    outcomes.push(b);
    let mut ar1 = None;
    outcomes.push(monte_carlo(&mut ar1));
    outcomes.push(universality(ar1.as_ref().unwrap()));
    outcomes.push(remark1());
    outcomes.push(szego());
    outcomes.push(qform_consistency());
    outcomes.push(exact_oracles());
    outcomes.push(determinism());

    let failed: BTreeMap<u32, &str> = outcomes.iter().filter(|o| !o.pass).map(|o| (o.id, o.name)).collect();
    let unexpected: Vec<_> = failed.iter().filter(|(id, _)| !KNOWN_FAILURES.contains(id)).collect();
    let _ = writeln!(
        std::io::stderr(),
        "acceptance: {} of {} PASS; known failures {:?}",
        outcomes.len() - failed.len(),
        outcomes.len(),
        KNOWN_FAILURES
    );
    assert!(unexpected.is_empty(), "unexpected failures: {unexpected:?}");
}
