//! Reproduction checks, one line per criterion. Run with
//! `cargo test -p kroncoef --test acceptance`.
//!
//! The process fails when a criterion fails, except for the entries in
//! `RECORDED_GAPS`: those are printed as FAIL with the measured numbers but do
//! not fail the run.

use std::time::{Duration, Instant};

use kroncoef::bloading::{
    b_loadings, b_star, b_star_scan, count_below, difference_matrix, perron_vector, ScanOutcome,
};
use kroncoef::characters::{character_table, verify_orthogonality, CharacterTable};
use kroncoef::classify::{
    bayes_upper_bound, cross_validate, evaluate, DecisionRule, LabeledDataset, Predictor,
};
use kroncoef::kronecker::{kronecker_tensor, ClassSums, KroneckerTensor};
use kroncoef::partitions::{index_of, Partition};
use kroncoef::pipeline::run_cli_with;

/// Criteria whose bands the exact computation does not reach; see the README.
const RECORDED_GAPS: &[u32] = &[7];

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

struct Exact {
    chars: Vec<Option<CharacterTable>>,
    tensors: Vec<Option<KroneckerTensor>>,
    build_time: Duration,
}

impl Exact {
    fn build(max: usize) -> Self {
        let start = Instant::now();
        let mut chars = vec![None; max + 1];
        let mut tensors = vec![None; max + 1];
        for n in 1..=max {
            let c = character_table(n).expect("character table");
            tensors[n] = Some(kronecker_tensor(n, &c).expect("tensor"));
            chars[n] = Some(c);
        }
        Exact { chars, tensors, build_time: start.elapsed() }
    }

    fn chars(&self, n: usize) -> &CharacterTable {
        self.chars[n].as_ref().unwrap()
    }

    fn tensor(&self, n: usize) -> &KroneckerTensor {
        self.tensors[n].as_ref().unwrap()
    }

    fn data(&self, n: usize) -> LabeledDataset {
        LabeledDataset::from_tensor(self.tensor(n), &b_loadings(n).unwrap()).unwrap()
    }
}

const Z6: [[u32; 11]; 11] = [
    [0, 2, 4, 4, 6, 6, 6, 8, 8, 8, 10],
    [2, 0, 2, 2, 4, 4, 4, 6, 6, 6, 8],
    [4, 2, 0, 2, 2, 2, 4, 4, 4, 6, 8],
    [4, 2, 2, 0, 4, 2, 2, 4, 4, 4, 6],
    [6, 4, 2, 4, 0, 2, 4, 4, 4, 6, 8],
    [6, 4, 2, 2, 2, 0, 2, 2, 2, 4, 6],
    [6, 4, 4, 2, 4, 2, 0, 4, 2, 2, 4],
    [8, 6, 4, 4, 4, 2, 4, 0, 2, 4, 6],
    [8, 6, 4, 4, 4, 2, 2, 2, 0, 2, 4],
    [8, 6, 6, 4, 6, 4, 2, 4, 2, 0, 2],
    [10, 8, 8, 6, 8, 6, 4, 6, 4, 2, 0],
];

fn c1() -> Outcome {
    let start = Instant::now();
    let z = difference_matrix(6).unwrap();
    let elapsed = start.elapsed();
    let equal = (0..11).all(|i| (0..11).all(|j| z.get(i, j) == Z6[i][j])) && z.size() == 11;
    check(
        equal && elapsed < Duration::from_millis(1),
        format!("Z6 equal to the reference matrix: {equal}; built in {elapsed:?}"),
    )
}

fn c2() -> Outcome {
    let pv = perron_vector(&difference_matrix(6).unwrap()).unwrap();
    let w_ref = [0.4045, 0.2961, 0.2662, 0.2393, 0.3061, 0.2318];
    let b_ref = [100.00, 37.25, 19.93, 4.36, 43.01, 0.00];
    let b = b_loadings(6).unwrap().b;
    let w_ok = w_ref.iter().zip(&pv.vector).all(|(r, x)| within(*x, *r, 5e-5));
    let b_ok = b_ref.iter().zip(&b).all(|(r, x)| within(*x, *r, 5e-3));
    check(
        w_ok && b_ok,
        format!(
            "w = {:.4?}, b = {:.2?}",
            &pv.vector[..6],
            &b[..6]
        ),
    )
}

fn c3() -> Outcome {
    let table = b_loadings(18).unwrap();
    let idx = |parts: &[u32]| index_of(&Partition::new(parts.to_vec()).unwrap(), 18).unwrap();
    let (i, j, k) = (idx(&[12, 4, 2]), idx(&[8, 4, 2, 2, 1, 1]), idx(&[5, 4, 3, 3, 1, 1, 1]));
    let example = table.b_of_triple(i, j, k).unwrap();
    let chars = character_table(18).unwrap();
    let start = Instant::now();
    let scan = b_star_scan(18, &table, &chars, 10_000_000).unwrap();
    let elapsed = start.elapsed();
    let (star, exact) = match scan.outcome {
        ScanOutcome::Exact(bs) => (bs.value, true),
        ScanOutcome::LowerBound { value } => (value, false),
    };
    check(
        within(example, 41.07, 0.05) && exact && within(star, 44.18, 0.05),
        format!(
            "example b(t) = {example:.4}; b_star(18) = {star:.4} (exact: {exact}) after {} evaluations in {elapsed:.1?}",
            scan.evaluations
        ),
    )
}

fn c4() -> Outcome {
    let table = b_loadings(20).unwrap();
    let start = Instant::now();
    let (count, total) = count_below(&table, 43.74);
    let elapsed = start.elapsed();
    let ratio = count as f64 / total as f64;
    let rel = (count as f64 - 78_382_890.0).abs() / 78_382_890.0;
    check(
        total == 246_491_883
            && within(100.0 * ratio, 31.8, 0.2)
            && rel <= 0.01
            && elapsed < Duration::from_secs(5),
        format!(
            "{count} / {total} = {:.3}% (off the reference count by {:.3}%) in {elapsed:.1?}",
            100.0 * ratio,
            100.0 * rel
        ),
    )
}

fn c5(ex: &Exact) -> Outcome {
    let ratios: Vec<f64> = (1..=14).map(|n| ex.tensor(n).nonzero_ratio()).collect();
    let r = |n: usize| ratios[n - 1];
    let first_majority = (1..=14).find(|&n| r(n) > 0.5 && (n..=14).all(|m| r(m) > 0.5));
    check(
        within(100.0 * r(8), 47.5, 1.0)
            && within(100.0 * r(14), 67.0, 1.0)
            && first_majority == Some(9)
            && ex.build_time < Duration::from_secs(120),
        format!(
            "ratio(8) = {:.2}%, ratio(14) = {:.2}%, non-zero majority from n = {first_majority:?}; \
             tables and tensors n <= 14 in {:.1?}",
            100.0 * r(8),
            100.0 * r(14),
            ex.build_time
        ),
    )
}

fn c6(ex: &Exact) -> Outcome {
    let mut failures = Vec::new();
    let mut notes = Vec::new();
    let mut band = |what: &str, n: usize, x: f64, target: f64| {
        if !within(100.0 * x, target, 3.0) {
            failures.push(format!("{what} n={n} {:.2}%", 100.0 * x));
        }
    };
    let mut f1s = Vec::new();
    let mut f3s = Vec::new();
    for n in 9..=14 {
        let data = ex.data(n);
        let m = b_loadings(n).unwrap().mean_b3;
        let f1 = evaluate(&DecisionRule::Kan { mean: m }, &data).accuracy;
        let f3 = evaluate(&DecisionRule::Symbolic, &data).accuracy;
        band("f1", n, f1, 83.0);
        band("f3", n, f3, 83.0);
        f1s.push(format!("{:.1}", 100.0 * f1));
        f3s.push(format!("{:.1}", 100.0 * f3));
    }
    let data = ex.data(14);
    let f2 = evaluate(&DecisionRule::Logistic, &data);
    let snn = evaluate(&DecisionRule::SmallNetwork, &data).accuracy;
    band("f2", 14, f2.accuracy, 84.0);
    band("snn", 14, snn, 83.0);
    let f2b = f2.boundary.unwrap();
    let f3b = DecisionRule::Symbolic.boundary().unwrap();
    if !within(f2b, 85.14, 0.01) {
        failures.push(format!("f2 boundary {f2b:.4}"));
    }
    if !(75.0..=85.0).contains(&f3b) {
        failures.push(format!("f3 boundary {f3b:.4}"));
    }
    notes.push(format!("f1 n=9..14 [{}]", f1s.join(", ")));
    notes.push(format!("f3 [{}] boundary {f3b:.2}", f3s.join(", ")));
    notes.push(format!("f2(14) {:.2}% boundary {f2b:.4}", 100.0 * f2.accuracy));
    notes.push(format!("snn(14) {:.2}%", 100.0 * snn));
    let mut detail = notes.join("; ");
    if !failures.is_empty() {
        detail = format!("outside band: {}; {detail}", failures.join(", "));
    }
    check(failures.is_empty(), detail)
}

fn c7(ex: &Exact) -> Outcome {
    let mut failures = Vec::new();
    let mut cv = Vec::new();
    let mut bayes = Vec::new();
    for n in 6..=14 {
        let data = ex.data(n);
        let (mean, _) = cross_validate(&data, 10, 42).unwrap();
        if !within(100.0 * mean, 80.0, 4.0) {
            failures.push(format!("cv n={n} {:.2}%", 100.0 * mean));
        }
        cv.push(format!("{:.2}", 100.0 * mean));
        if n >= 9 {
            let ub = bayes_upper_bound(&data);
            if !within(100.0 * ub, 85.0, 3.0) {
                failures.push(format!("bayes n={n} {:.2}%", 100.0 * ub));
            }
            bayes.push(format!("{:.2}", 100.0 * ub));
        }
    }
    let mut detail = format!(
        "cv10 n=6..14 [{}]; bayes n=9..14 [{}]",
        cv.join(", "),
        bayes.join(", ")
    );
    if !failures.is_empty() {
        detail = format!("outside band: {}; {detail}", failures.join(", "));
    }
    check(failures.is_empty(), detail)
}

fn c8(ex: &Exact) -> Outcome {
    let mut failed = Vec::new();

    // (a) stored canonical value against direct unsorted evaluation
    let a = (1..=8).all(|n| {
        let sums = ClassSums::new(ex.chars(n)).unwrap();
        let p = ex.tensor(n).size();
        (0..p).all(|i| {
            (0..p).all(|j| {
                (0..p).all(|k| {
                    ex.tensor(n).get(i, j, k).unwrap() as u64 == sums.coefficient(i, j, k).unwrap()
                })
            })
        })
    });
    if !a {
        failed.push("a");
    }

    // (b) row orthogonality from the library, column orthogonality here
    let b = (1..=10).all(|n| {
        let t = ex.chars(n);
        let p = t.size();
        let cols = (0..p).all(|r| {
            (0..p).all(|s| {
                let dot: i128 = (0..p).map(|l| t.chi(l, r) as i128 * t.chi(l, s) as i128).sum();
                let want = if r == s { t.classes()[r].centralizer_order as i128 } else { 0 };
                dot == want
            })
        });
        verify_orthogonality(t).passed && cols
    });
    if !b {
        failed.push("b");
    }

    // (c) sum over nu of g * dim(nu) = dim(lambda) * dim(mu)
    let c = (1..=10).all(|n| {
        let dims = ex.chars(n).dimensions();
        let t = ex.tensor(n);
        let p = t.size();
        (0..p).all(|i| {
            (0..p).all(|j| {
                let s: i128 =
                    (0..p).map(|k| t.get(i, j, k).unwrap() as i128 * dims[k] as i128).sum();
                s == dims[i] as i128 * dims[j] as i128
            })
        })
    });
    if !c {
        failed.push("c");
    }

    // (d) no vanishing coefficient strictly below b_star
    let d = (6..=12).all(|n| {
        let table = b_loadings(n).unwrap();
        let star = b_star(ex.tensor(n), &table).unwrap().value;
        ex.tensor(n)
            .iter()
            .filter(|&(_, g)| g == 0)
            .all(|((i, j, k), _)| table.b_of_triple(i, j, k).unwrap() >= star)
    });
    if !d {
        failed.push("d");
    }

    // (e) fast counter against the cubic loop
    let e = (1..=10).all(|n| {
        let table = b_loadings(n.max(3)).unwrap();
        let p = table.size();
        [0.0, 17.5, 43.74, 80.0, 150.0, 301.0].iter().all(|&th| {
            let mut brute = 0u64;
            for i in 0..p {
                for j in 0..p {
                    for k in 0..p {
                        brute += u64::from(table.b[i] + table.b[j] + table.b[k] < th);
                    }
                }
            }
            count_below(&table, th) == (brute, (p * p * p) as u64)
        })
    });
    if !e {
        failed.push("e");
    }

    // (f) power iteration against a dense symmetric eigensolver
    let f = (2..=12).all(|n| {
        let z = difference_matrix(n).unwrap();
        let p = z.size();
        let m = nalgebra::DMatrix::from_fn(p, p, |i, j| z.get(i, j) as f64);
        let eig = m.symmetric_eigen();
        let top = (0..p)
            .max_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]))
            .unwrap();
        let mut v: Vec<f64> = eig.eigenvectors.column(top).iter().copied().collect();
        if v.iter().sum::<f64>() < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let pv = perron_vector(&z).unwrap();
        within(pv.eigenvalue, eig.eigenvalues[top], 1e-9 * eig.eigenvalues[top].max(1.0))
            && pv.vector.iter().zip(&v).all(|(a, b)| within(*a, *b, 1e-9))
    });
    if !f {
        failed.push("f");
    }

    check(
        failed.is_empty(),
        if failed.is_empty() {
            "suites (a)-(f) hold".to_string()
        } else {
            format!("failing suites: {}", failed.join(", "))
        },
    )
}

fn c9() -> Outcome {
    let outputs: Vec<Vec<u8>> = ["1", "4", "16"]
        .iter()
        .map(|t| {
            let mut out = Vec::new();
            let mut err = Vec::new();
            let code = run_cli_with(
                ["kroncoef", "--threads", t, "--seed", "42", "report", "-n", "12"],
                &mut out,
                &mut err,
            );
            assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
            out
        })
        .collect();
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    check(same, format!("report -n 12 at 1/4/16 threads identical: {same} ({} bytes)", outputs[0].len()))
}

fn main() {
    let ex = Exact::build(14);
    let results: Vec<(u32, Outcome)> = vec![
        (1, c1()),
        (2, c2()),
        (3, c3()),
        (4, c4()),
        (5, c5(&ex)),
        (6, c6(&ex)),
        (7, c7(&ex)),
        (8, c8(&ex)),
        (9, c9()),
    ];
    let mut unexpected = 0;
    for (id, r) in &results {
        let status = match (r.pass, RECORDED_GAPS.contains(id)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (recorded gap)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {id}: {status}  {}", r.detail);
    }
    let passed = results.iter().filter(|(_, r)| r.pass).count();
    println!("{passed}/{} criteria pass", results.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
