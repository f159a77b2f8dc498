//! Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::{BTreeMap, HashMap};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use endprox::exact::dyck::dyck_deg_counts;
use endprox::exact::enumerate::enumerate_all;
use endprox::exact::helix::{dyck_hel_counts, motzkin_hel_counts, motzkin_stem_helices_counts, motzkin_stm_counts};
use endprox::exact::motzkin::motzkin_joint_counts;
use endprox::exact::pfold::{pfold_joint_probs, pfold_structure_log_prob, PfoldExterior, PfoldInside, PfoldParams};
use endprox::limits::{ete_limit_moments, ete_partial_moments, exact_limit_of, limit_of, pfold_rho_delta, LimitDist};
use endprox::pipeline::total_variation;
use endprox::sample::{sample_dyck, MotzkinSampler, PfoldSampler, RngHandle};
use endprox::stats::{exterior_stats, first_helix_length, first_stem, shortest_path_stats};
use endprox::structure::{parse_dot_bracket, SecondaryStructure};
use endprox::{exact_counts, klet_shuffle, validate_klets, AnyTable, CountTable, EteModel, Model, Stat};

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn close(x: f64, want: f64, tol: f64) -> bool {
    (x - want).abs() <= tol
}

fn criterion_1() -> Outcome {
    let cases = [
        (Model::Dyck, Stat::Deg, q(3, 1), q(4, 1)),
        (Model::Motzkin, Stat::Deg, q(3, 1), q(4, 1)),
        (Model::Motzkin, Stat::Unp, q(2, 1), q(4, 1)),
        (Model::Motzkin, Stat::Chn, q(4, 1), q(12, 1)),
        (Model::Motzkin, Stat::Len, q(8, 1), q(28, 1)),
        (Model::Dyck, Stat::Hel, q(4, 3), q(4, 9)),
        (Model::Motzkin, Stat::Hel, q(9, 8), q(9, 64)),
        (Model::Motzkin, Stat::StemHelices, q(32, 27), q(160, 729)),
        (Model::Motzkin, Stat::Stm, q(4, 3), q(4, 9)),
    ];
    let mut bad = Vec::new();
    for (model, stat, mean, var) in cases {
        let m = exact_limit_of(model, stat).unwrap().moments().unwrap();
        if m.mean != mean || m.variance != var {
            bad.push(format!("{model} {stat}: ({}, {})", m.mean, m.variance));
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { "9 rational pairs exact".into() } else { bad.join("; ") })
}

fn criterion_2() -> Outcome {
    let p = PfoldParams::default();
    let delta = pfold_rho_delta(&p, 1e-13).unwrap().delta;
    let mut ok = (0.775..=0.780).contains(&delta);
    let mut detail = format!("delta={delta:.6}");
    let cases = [
        (Stat::Deg, 2.55, 0.01, 2.76, 0.02),
        (Stat::Unp, 12.39, 0.05, 89.19, 0.5),
        (Stat::Chn, 13.95, 0.05, 111.21, 0.5),
        (Stat::Len, 17.50, 0.05, 138.76, 0.5),
        (Stat::Hel, 4.71, 0.02, 17.51, 0.1),
    ];
    for (stat, mean, tm, var, tv) in cases {
        let s = limit_of(Model::Pfold, stat, Some(&p)).unwrap().summary().unwrap();
        ok &= close(s.mean, mean, tm) && close(s.variance, var, tv);
        detail += &format!(" {stat}=({:.3},{:.3})", s.mean, s.variance);
    }
    outcome(ok, detail)
}

fn criterion_3() -> Outcome {
    let m = EteModel::default();
    let LimitDist::Joint(dyck) = limit_of(Model::Dyck, Stat::Joint, None).unwrap() else {
        unreachable!()
    };
    let (mean20, _) = ete_partial_moments(&dyck, &m, 20);
    let (_, second27) = ete_partial_moments(&dyck, &m, 27);
    let mut ok = close(mean20, 2.893, 0.0025) && close(second27 - mean20 * mean20, 1.42, 0.01);
    let mut detail = format!("dyck K=20 mean {mean20:.4}, K=27 second {second27:.4};");
    let cases = [
        (Model::Dyck, 2.893, 0.0025, 1.42, 0.01),
        (Model::Motzkin, 3.08, 0.01, 1.56, 0.01),
        (Model::Pfold, 3.83, 0.01, 2.23, 0.02),
    ];
    for (model, mean, tm, var, tv) in cases {
        let s = ete_limit_moments(model, &m, 1e-9, None).unwrap();
        ok &= close(s.mean, mean, tm) && close(s.variance, var, tv);
        detail += &format!(" {model}=({:.4},{:.4})", s.mean, s.variance);
    }
    outcome(ok, detail)
}

fn criterion_4() -> Outcome {
    let s = parse_dot_bracket(".(...)..(...).").unwrap();
    let st = exterior_stats(&s, &EteModel::default()).unwrap();
    let ok = (st.deg, st.unp, st.len_ext) == (2, 4, 8) && close(st.ete_nm, 2.80, 0.005);
    outcome(ok, format!("(deg,unp,len)=({},{},{}) ete={:.4}", st.deg, st.unp, st.len_ext, st.ete_nm))
}

type Histogram = BTreeMap<Vec<u32>, BigUint>;

fn table_histogram(t: &CountTable<BigUint>) -> (Histogram, BigUint) {
    (t.iter().map(|(k, w)| (k.clone(), w.clone())).collect(), t.absent().clone())
}

fn enumerated(model: Model, n: usize, key: impl Fn(&SecondaryStructure) -> Option<Vec<u32>>) -> (Histogram, BigUint) {
    let mut h = Histogram::new();
    let mut absent = BigUint::zero();
    for s in enumerate_all(model, n).unwrap() {
        match key(&s) {
            Some(k) => *h.entry(k).or_insert_with(BigUint::zero) += 1u32,
            None => absent += 1u32,
        }
    }
    (h, absent)
}

fn criterion_5() -> Outcome {
    let m = EteModel::default();
    let joint = |s: &SecondaryStructure| {
        let st = exterior_stats(s, &m).unwrap();
        Some(vec![st.deg as u32, st.unp as u32])
    };
    let hel = |s: &SecondaryStructure| first_helix_length(s).map(|h| vec![h as u32]);
    let stm = |s: &SecondaryStructure| first_stem(s).map(|f| vec![f.stm as u32]);
    let helices = |s: &SecondaryStructure| first_stem(s).map(|f| vec![f.helices as u32]);
    let mut bad = Vec::new();
    let mut checked = 0;
    for n in 0..=12 {
        let pairs: [(&str, CountTable<BigUint>, &dyn Fn(&SecondaryStructure) -> Option<Vec<u32>>); 4] = [
            ("joint", motzkin_joint_counts(n), &joint),
            ("hel", motzkin_hel_counts(n), &hel),
            ("stm", motzkin_stm_counts(n), &stm),
            ("stem_helices", motzkin_stem_helices_counts(n), &helices),
        ];
        for (name, table, key) in pairs {
            checked += 1;
            if table_histogram(&table) != enumerated(Model::Motzkin, n, key) {
                bad.push(format!("motzkin {name} n={n}"));
            }
        }
    }
    for n in 0..=10 {
        let dj = dyck_deg_counts(n).map_keys(vec![Stat::Deg, Stat::Unp], |k| vec![k[0], 0]);
        for (name, table, key) in [
            ("joint", dj, &joint as &dyn Fn(&SecondaryStructure) -> Option<Vec<u32>>),
            ("hel", dyck_hel_counts(n), &hel),
        ] {
            checked += 1;
            if table_histogram(&table) != enumerated(Model::Dyck, n, key) {
                bad.push(format!("dyck {name} n={n}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        if bad.is_empty() { format!("{checked} tables identical") } else { bad.join("; ") },
    )
}

fn probs_of(t: &AnyTable) -> BTreeMap<Vec<u32>, f64> {
    t.probabilities().0.into_iter().collect()
}

fn criterion_6() -> Outcome {
    let sizes = [250usize, 500, 1000, 2000];
    let mut ok = true;
    let mut detail = String::new();
    for model in [Model::Dyck, Model::Motzkin, Model::Pfold] {
        let law = limit_of(model, Stat::Deg, None).unwrap();
        let tvs: Vec<f64> = sizes
            .iter()
            .map(|&n| {
                let h = probs_of(&exact_counts(model, n, Stat::Deg, None).unwrap());
                total_variation(&h, &law, n as u64).unwrap()
            })
            .collect();
        ok &= tvs.windows(2).all(|w| w[1] < w[0]) && tvs[3] < 0.05;
        detail += &format!(
            " {model}: {}",
            tvs.iter().map(|t| format!("{t:.5}")).collect::<Vec<_>>().join(">")
        );
    }
    outcome(ok, detail.trim().to_string())
}

fn criterion_7() -> Outcome {
    let ext = PfoldExterior::new(PfoldInside::new(PfoldParams::default(), 2000));
    let mut worst: f64 = 0.0;
    let mut total = 0.0;
    for n in 0..=2000 {
        let s = ext.inside.s[n];
        worst = worst.max((ext.mass(n) - s).abs());
        total += s;
    }
    outcome(
        worst <= 1e-12 && total <= 1.0,
        format!("max |sum S_ex - S| = {worst:.2e}, sum S(n) = {total:.12}"),
    )
}

/// Largest deviation, in standard errors, of empirical from exact frequencies.
fn max_z(counts: &HashMap<String, u64>, exact: &HashMap<String, f64>, draws: u64) -> f64 {
    let mut worst: f64 = 0.0;
    for (s, &p) in exact {
        let f = counts.get(s).copied().unwrap_or(0) as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        worst = worst.max((f - p).abs() / se);
    }
    if counts.keys().any(|k| !exact.contains_key(k)) {
        return f64::INFINITY;
    }
    worst
}

fn uniform(model: Model, n: usize) -> HashMap<String, f64> {
    let all: Vec<String> = enumerate_all(model, n).unwrap().map(|s| s.to_dot_bracket().unwrap()).collect();
    let p = 1.0 / all.len() as f64;
    all.into_iter().map(|s| (s, p)).collect()
}

fn tally(draws: u64, mut next: impl FnMut() -> SecondaryStructure) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for _ in 0..draws {
        *counts.entry(next().to_dot_bracket().unwrap()).or_insert(0) += 1;
    }
    counts
}

fn criterion_8() -> Outcome {
    const DRAWS: u64 = 1_000_000;
    let p = PfoldParams::default();
    let mut rng = RngHandle::new(20_240_601);

    let z_dyck = max_z(&tally(DRAWS, || sample_dyck(4, &mut rng)), &uniform(Model::Dyck, 4), DRAWS);
    let mot = MotzkinSampler::new(8);
    let z_mot = max_z(&tally(DRAWS, || mot.sample(&mut rng)), &uniform(Model::Motzkin, 8), DRAWS);

    let pf = PfoldSampler::new(p, 200).unwrap();
    let s8 = pf.inside().s[8];
    let exact: HashMap<String, f64> = enumerate_all(Model::Motzkin, 8)
        .unwrap()
        .filter_map(|s| {
            let lp = pfold_structure_log_prob(&s, &p);
            (lp > f64::NEG_INFINITY).then(|| (s.to_dot_bracket().unwrap(), lp.exp() / s8))
        })
        .collect();
    let z_pf = max_z(&tally(DRAWS, || pf.sample(8, &mut rng).unwrap()), &exact, DRAWS);

    const PF_DRAWS: u64 = 100_000;
    let m = EteModel::default();
    let mut hist: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for _ in 0..PF_DRAWS {
        let st = exterior_stats(&pf.sample(200, &mut rng).unwrap(), &m).unwrap();
        *hist.entry(vec![st.unp as u32, st.deg as u32]).or_insert(0.0) += 1.0;
    }
    let exact200 = pfold_joint_probs(200, &p).unwrap();
    let mut tv = 0.0;
    for (k, w) in exact200.iter() {
        tv += (hist.get(k).copied().unwrap_or(0.0) / PF_DRAWS as f64 - w).abs();
    }
    tv += hist
        .iter()
        .filter(|(k, _)| exact200.get(k) == 0.0)
        .map(|(_, c)| c / PF_DRAWS as f64)
        .sum::<f64>();
    tv *= 0.5;
    // TV of a perfect sampler is still about half the summed absolute
    // multinomial deviation.
    let floor: f64 = 0.5
        * exact200
            .iter()
            .map(|(_, &w)| (2.0 * w * (1.0 - w) / (std::f64::consts::PI * PF_DRAWS as f64)).sqrt())
            .sum::<f64>();

    outcome(
        z_dyck <= 5.0 && z_mot <= 5.0 && z_pf <= 5.0 && tv < 0.01,
        format!(
            "max z: dyck(4) {z_dyck:.2}, motzkin(8) {z_mot:.2}, pfold(8) {z_pf:.2} over {} outcomes; pfold(200) TV {tv:.4} (expected sampling TV {floor:.4} over {} cells)",
            exact.len(),
            exact200.len()
        ),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = RngHandle::new(99);
    let alphabet: Vec<char> = "ACGU".chars().collect();
    let mut valid = 0;
    for case in 0..10_000 {
        let len = rng.gen_range(3..40);
        let letters = rng.gen_range(1..=alphabet.len());
        let s: String = (0..len).map(|_| alphabet[rng.gen_range(0..letters)]).collect();
        let k = 1 + case % 3;
        let out = klet_shuffle(&s, k, &mut rng).unwrap();
        if validate_klets(&s, &out, k) && out.chars().count() == len {
            valid += 1;
        }
    }

    // All 2-letter strings of length 6 with the same doublets and ends.
    let seed = "ABBAAB";
    let mut targets: Vec<String> = (0..64u32)
        .map(|bits| (0..6).map(|i| if bits >> (5 - i) & 1 == 0 { 'A' } else { 'B' }).collect::<String>())
        .filter(|t| validate_klets(seed, t, 2) && t.starts_with('A') && t.ends_with('B'))
        .collect();
    targets.sort();
    const DRAWS: u64 = 100_000;
    let mut counts: HashMap<String, u64> = HashMap::new();
    for _ in 0..DRAWS {
        *counts.entry(klet_shuffle(seed, 2, &mut rng).unwrap()).or_insert(0) += 1;
    }
    let p = 1.0 / targets.len() as f64;
    let exact: HashMap<String, f64> = targets.iter().map(|t| (t.clone(), p)).collect();
    let z = max_z(&counts, &exact, DRAWS);
    outcome(
        valid == 10_000 && z <= 5.0 && targets.len() == 4,
        format!("{valid}/10000 valid; {} outputs of {seed}, max z {z:.2}", targets.len()),
    )
}

fn criterion_10() -> Outcome {
    let m = EteModel::default();
    let mut rng = RngHandle::new(10);
    let mut same = 0;
    for i in 0..10_000 {
        let sampler = MotzkinSampler::new(10 + i % 90);
        let s = sampler.sample(&mut rng);
        if s.is_empty() {
            continue;
        }
        let a = exterior_stats(&s, &m).unwrap();
        let b = shortest_path_stats(&s, &m).unwrap();
        if (a.deg, a.unp, a.chn) == (b.deg, b.unp, b.chn) && a.ete_nm == b.ete_nm {
            same += 1;
        }
    }
    outcome(same == 10_000, format!("{same}/10000 identical"))
}

fn criterion_11() -> Outcome {
    let mean = |s| exact_limit_of(Model::Motzkin, s).unwrap().moments().unwrap().mean;
    let (stm, helices, hel) = (mean(Stat::Stm), mean(Stat::StemHelices), mean(Stat::Hel));
    let product = &helices * &hel;
    outcome(
        stm == product && stm == q(4, 3),
        format!("{stm} = {helices} * {hel} (~{:.6})", product.to_f64().unwrap_or(f64::NAN)),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("limit-law rational constants", criterion_1),
        ("Pfold default laws", criterion_2),
        ("ETE moments", criterion_3),
        ("worked exterior-loop example", criterion_4),
        ("DP tables equal enumeration", criterion_5),
        ("DEG convergence in total variation", criterion_6),
        ("Pfold exterior mass conservation", criterion_7),
        ("sampler exactness", criterion_8),
        ("k-let shuffle", criterion_9),
        ("shortest path equals exterior loop", criterion_10),
        ("first-stem product identity", criterion_11),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.ok { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {:>2} {name}: {} [{:.2}s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.ok);
    }
    if failed == 0 {
        println!("all {} criteria pass", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} criteria fail", criteria.len());
        ExitCode::FAILURE
    }
}
