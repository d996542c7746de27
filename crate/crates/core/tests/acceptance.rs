//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::Instant;

use nalgebra::{Complex, DMatrix};
use qrex::asymptotics::{corollary4_scan, power_tails, prop3_epsilons, Schedule};
use qrex::cli::corpus_rows;
use qrex::cq::{random_bipartite, random_classical_cq, random_cq, random_isometry, wishart_state, BipartiteState, CqState};
use qrex::entropy::{classical_collision_r, collision_entropy_r, h_inf, h_sup};
use qrex::extension::verify_theorem2;
use qrex::extractor::{apply_hash, delta_d, delta_r, verify_theorem1, Mode};
use qrex::hashing::{verify_two_universal, FamilyKind, HashFamily};
use qrex::operator::{jensen_gap, rel_entropy, spectral_decompose, von_neumann, DensityOperator, HermitianOperator};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn corpus_and_extraction() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (1..=200).collect();
    let eps = [0.0, 0.01, 0.1];
    let mut runs = 0;
    let mut worst = f64::INFINITY;
    for kind in [FamilyKind::AllFunctions, FamilyKind::LinearGf2] {
        let rows = corpus_rows(&seeds, &eps, kind).map_err(e2s)?;
        for r in &rows {
            ensure(r.x <= 8 && r.d_b <= 4, || format!("seed {} outside corpus shape", r.seed))?;
            ensure(r.margin >= -1e-9, || format!("seed {} {:?} eps {}: margin {}", r.seed, kind, r.eps, r.margin))?;
            worst = worst.min(r.margin);
        }
        runs += rows.len();
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(runs == 1200, || format!("expected 1200 runs, got {runs}"))?;
    ensure(secs < 600.0, || format!("corpus took {secs:.1} s"))?;
    Ok(format!("{runs} exact runs, min margin {worst:.4}, {secs:.1} s"))
}

fn worked_case() -> Outcome {
    let cq = CqState::new(vec![0.25; 4], vec![DensityOperator::maximally_mixed(1); 4]).map_err(e2s)?;
    let fam = HashFamily::linear_gf2(2, 1).map_err(e2s)?;
    let ens = apply_hash(&cq, &fam, Mode::Exact).map_err(e2s)?;
    let rb = cq.marginal_b();
    let dr: f64 = delta_r(&ens, &rb).map_err(e2s)?;
    let dd: f64 = delta_d(&ens, &rb).map_err(e2s)?;
    let rep = verify_theorem1(&cq, &fam, 0.0).map_err(e2s)?;
    let rhs = 0.5 / std::f64::consts::LN_2;
    ensure((dr - 0.25).abs() <= 1e-9, || format!("delta_R = {dr}"))?;
    ensure((dd - 0.125).abs() <= 1e-9, || format!("delta_d = {dd}"))?;
    ensure((rep.theorem1_rhs - rhs).abs() <= 1e-9, || format!("rhs = {}", rep.theorem1_rhs))?;
    Ok(format!("delta_R = {dr}, delta_d = {dd}, rhs = {:.10}", rep.theorem1_rhs))
}

fn classical_consistency() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let nx = 2 + (seed % 7) as usize;
        let d_b = 1 + ((seed / 7) % 4) as usize;
        let cq = random_classical_cq::<f64>(seed, nx, d_b).map_err(e2s)?;
        let joint = cq.diagonal_joint(0.0).ok_or("generated conditionals are not diagonal")?;
        let rho = cq.embed().map_err(e2s)?;
        for eps in [0.0, 0.01, 0.1, 0.3] {
            let q = collision_entropy_r(&rho, eps, 1e-8).map_err(e2s)?.value;
            let c = oracle_classical_r(&joint, eps);
            let cref = classical_collision_r(&joint, eps).map_err(e2s)?.value;
            ensure((c - cref).abs() <= 1e-12, || format!("seed {seed}: quantile {cref} vs oracle {c}"))?;
            worst = worst.max((q - c).abs());
            ensure((q - c).abs() <= 1e-6, || format!("seed {seed} eps {eps}: {q} vs {c}"))?;
        }
    }
    Ok(format!("100 states x 4 eps, max |diff| = {worst:.2e}"))
}

/// Largest per-branch value `r` with `Pr[R(X|Y=y) ≥ r] ≥ 1 − ε`, by brute force over branches.
fn oracle_classical_r(joint: &[Vec<f64>], eps: f64) -> f64 {
    let d_b = joint[0].len();
    let branches: Vec<(f64, f64)> = (0..d_b)
        .filter_map(|y| {
            let py: f64 = joint.iter().map(|row| row[y]).sum();
            (py > 0.0).then(|| (-(joint.iter().map(|row| (row[y] / py).powi(2)).sum::<f64>()).log2(), py))
        })
        .collect();
    branches
        .iter()
        .map(|&(r, _)| r)
        .filter(|&r| branches.iter().filter(|b| b.0 >= r - 1e-12).map(|b| b.1).sum::<f64>() >= 1.0 - eps - 1e-12)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn pinsker() -> Outcome {
    let mut runs = 0;
    let mut worst = f64::INFINITY;
    for kind in [FamilyKind::AllFunctions, FamilyKind::LinearGf2] {
        for r in corpus_rows(&(1..=200).collect::<Vec<_>>(), &[0.0], kind).map_err(e2s)? {
            let slack = r.delta_r + 1e-9 - r.delta_d * r.delta_d;
            ensure(slack >= 0.0, || format!("seed {}: delta_d^2 = {} > delta_R = {}", r.seed, r.delta_d.powi(2), r.delta_r))?;
            worst = worst.min(slack);
            runs += 1;
        }
    }
    for seed in 0..50u64 {
        let cq = random_cq::<f64>(seed, 4, 3, 3).map_err(e2s)?;
        for fam in [HashFamily::toeplitz_gf2(2, 1).map_err(e2s)?, HashFamily::all_functions(4, 3).map_err(e2s)?] {
            let ens = apply_hash(&cq, &fam, Mode::Exact).map_err(e2s)?;
            let rb = cq.marginal_b();
            let (dr, dd) = (delta_r(&ens, &rb).map_err(e2s)?, delta_d(&ens, &rb).map_err(e2s)?);
            ensure(dd * dd <= dr + 1e-9, || format!("seed {seed}: {dd}^2 > {dr}"))?;
            runs += 1;
        }
    }
    Ok(format!("{runs} runs, min slack {worst:.3e}"))
}

fn two_universality() -> Outcome {
    let mut fams = Vec::new();
    for x in 1..=3 {
        for s in 1..=2 {
            fams.push(HashFamily::all_functions(x, s).map_err(e2s)?);
        }
    }
    for n in 1..=3 {
        for m in 1..=2 {
            fams.push(HashFamily::linear_gf2(n, m).map_err(e2s)?);
            fams.push(HashFamily::toeplitz_gf2(n, m).map_err(e2s)?);
        }
    }
    for fam in &fams {
        let size = fam.enumerable().ok_or("family not enumerable")?;
        let dom = fam.domain_size();
        let range = fam.range_size();
        for x0 in 0..dom {
            for x1 in x0 + 1..dom {
                let mut hits = 0u64;
                for g in 0..size {
                    if fam.evaluate(g, x0).map_err(e2s)? == fam.evaluate(g, x1).map_err(e2s)? {
                        hits += 1;
                    }
                }
                ensure(hits * range <= size, || format!("{:?}: pair ({x0},{x1}) collides {hits}/{size}", fam.descriptor()))?;
            }
        }
        let chk = verify_two_universal(fam).map_err(e2s)?;
        ensure(chk.exact && chk.holds, || format!("{:?}: library check failed", fam.descriptor()))?;
    }
    Ok(format!("{} families verified exhaustively", fams.len()))
}

/// `H̲` and `H̄` by direct sorting, independent of the library's spectrum type.
fn oracle_h(eigs: &[f64], eps: f64, descending: bool) -> f64 {
    let mut v: Vec<f64> = eigs.iter().copied().filter(|&l| l > 1e-14).collect();
    v.sort_by(|a, b| if descending { b.partial_cmp(a).unwrap() } else { a.partial_cmp(b).unwrap() });
    let mut acc = 0.0;
    for &l in &v {
        acc += l;
        if acc >= 1.0 - eps - 1e-12 {
            return -l.log2();
        }
    }
    -v.last().unwrap().log2()
}

fn extension_bound() -> Outcome {
    let mut worst = f64::INFINITY;
    let mut runs = 0;
    for seed in 0..100u64 {
        let d_a = 2 + (seed % 3) as usize;
        let d_b = 2 + ((seed / 3) % 3) as usize;
        let rho = random_bipartite::<f64>(seed, d_a, d_b, d_a * d_b).map_err(e2s)?;
        let eig_ab = spectral_decompose(rho.op()).map_err(e2s)?.eigenvalues;
        let eig_b = spectral_decompose(rho.marginal_b().map_err(e2s)?.op()).map_err(e2s)?.eigenvalues;
        ensure(eig_ab[0] > 1e-12, || format!("seed {seed} not full rank"))?;
        for eu in [0.01, 0.05, 0.1] {
            for eh in [0.01, 0.05, 0.1] {
                let rep = verify_theorem2(&rho, eu, eh, 1e-6).map_err(e2s)?;
                let bound = oracle_h(&eig_ab, eu, false) - oracle_h(&eig_b, eh, true) + (1.0 - eu.sqrt()).log2();
                ensure((bound - rep.bound).abs() < 1e-9, || format!("seed {seed}: bound {} vs oracle {bound}", rep.bound))?;
                ensure(!rep.vacuous, || format!("seed {seed}: unexpected vacuous run"))?;
                let r = rep.r_eps_abc.ok_or("missing R")?;
                ensure(r >= bound - 1e-6, || format!("seed {seed} ({eu},{eh}): R = {r} < bound {bound}"))?;
                worst = worst.min(r - bound);
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs, min margin {worst:.4}"))
}

fn maximally_mixed() -> Outcome {
    let mut checks = 0;
    for d_a in 2..=4usize {
        for d_b in 1..=3usize {
            let rho = BipartiteState::new(DensityOperator::maximally_mixed(d_a * d_b), (d_a, d_b)).map_err(e2s)?;
            for eps in [0.0, 0.01, 0.1, 0.5, 0.9] {
                let r = collision_entropy_r(&rho, eps, 1e-6).map_err(e2s)?.value;
                ensure((r - (d_a as f64).log2()).abs() <= 1e-9, || format!("d_A={d_a} d_B={d_b} eps={eps}: R = {r}"))?;
                checks += 1;
            }
        }
    }
    for d in 1..=16usize {
        let rho = DensityOperator::<f64>::maximally_mixed(d);
        for eps in [0.0, 0.01, 0.1, 0.5, 0.9] {
            let (s, i) = (h_sup(&rho, eps).map_err(e2s)?, h_inf(&rho, eps).map_err(e2s)?);
            let want = (d as f64).log2();
            ensure((s - want).abs() <= 1e-9 && (i - want).abs() <= 1e-9, || format!("d={d} eps={eps}: {s}, {i}"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} closed-form checks"))
}

/// Tail masses by enumerating types: `(Pr[λ < 2^{−n(S+γ)}], Pr[λ > 2^{−n(S−γ)}])`.
fn oracle_tails(r: &[f64], gamma: f64, n: u32) -> (f64, f64) {
    let s: f64 = -r.iter().map(|&p| p * p.log2()).sum::<f64>();
    let ln_fact: Vec<f64> = (0..=n).scan(0.0, |acc, k| {
        if k > 0 {
            *acc += (k as f64).ln();
        }
        Some(*acc)
    }).collect();
    let mut below = 0.0;
    let mut above = 0.0;
    let mut counts = vec![0u32; r.len()];
    fn rec(i: usize, left: u32, counts: &mut Vec<u32>, f: &mut dyn FnMut(&[u32])) {
        if i + 1 == counts.len() {
            counts[i] = left;
            f(counts);
            return;
        }
        for k in 0..=left {
            counts[i] = k;
            rec(i + 1, left - k, counts, f);
        }
    }
    let nn = n as f64;
    rec(0, n, &mut counts, &mut |k: &[u32]| {
        let log_eig: f64 = k.iter().zip(r).map(|(&ki, &p)| ki as f64 * p.log2()).sum();
        let ln_mult = ln_fact[n as usize] - k.iter().map(|&ki| ln_fact[ki as usize]).sum::<f64>();
        let mass = (ln_mult + log_eig * std::f64::consts::LN_2).exp();
        if log_eig < -nn * (s + gamma) {
            below += mass;
        }
        if log_eig > -nn * (s - gamma) {
            above += mass;
        }
    });
    (below, above)
}

fn sanov_tails() -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    for seed in 0..40u64 {
        let dim = 2 + (seed % 2) as usize;
        let rho = wishart_state::<f64>(&mut ChaCha20Rng::seed_from_u64(seed), dim, dim);
        let eigs = spectral_decompose(rho.op()).map_err(e2s)?.eigenvalues;
        for gamma in [0.1, 0.25] {
            for n in [4u32, 8, 16] {
                let (eps_bar, eps_under) = prop3_epsilons(&rho, gamma, n, dim).map_err(e2s)?;
                let (below, above) = power_tails(&rho, gamma, n).map_err(e2s)?;
                let (ob, oa) = oracle_tails(&eigs, gamma, n);
                ensure((ob - below).abs() < 1e-9 && (oa - above).abs() < 1e-9, || {
                    format!("seed {seed} n {n}: tails ({below}, {above}) vs types ({ob}, {oa})")
                })?;
                for (tail, bound) in [(below, eps_bar), (above, eps_under)] {
                    if bound <= 1.0 {
                        ensure(tail <= bound + 1e-12, || format!("seed {seed} gamma {gamma} n {n}: tail {tail} > {bound}"))?;
                        checked += 1;
                    } else {
                        skipped += 1;
                    }
                }
            }
        }
    }
    ensure(checked > 0, || "every bound exceeded 1".into())?;
    Ok(format!("{checked} tails below their bound, {skipped} vacuous bounds skipped"))
}

fn asymptotic_trend() -> Outcome {
    let start = Instant::now();
    let rho = random_bipartite::<f64>(2024, 2, 2, 4).map_err(e2s)?;
    let rows = corollary4_scan(&rho, 20, Schedule::default()).map_err(e2s)?;
    let secs = start.elapsed().as_secs_f64();
    let (g2, g20) = (rows[1].gap, rows[19].gap);
    ensure(g20 < g2, || format!("gap(20) = {g20} not below gap(2) = {g2}"))?;
    ensure(secs < 120.0, || format!("scan took {secs:.1} s"))?;
    Ok(format!("gap(2) = {g2:.4}, gap(20) = {g20:.4}, {secs:.2} s"))
}

fn random_psd(r: &mut ChaCha20Rng, dim: usize, rank: usize, trace: f64) -> HermitianOperator<f64> {
    wishart_state::<f64>(r, dim, rank).into_op().scale(trace)
}

fn invariants() -> Outcome {
    let mut r = ChaCha20Rng::seed_from_u64(99);
    for seed in 0..50 {
        let dim = 2 + seed % 5;
        let rank = 1 + seed % dim;
        let a = random_psd(&mut r, dim, rank, 0.3 + seed as f64 * 0.05);
        let s = von_neumann(&a).map_err(e2s)?;
        let rk = spectral_decompose(&a).map_err(e2s)?.rank() as f64;
        let tr = a.trace();
        ensure(s <= tr * (rk.log2() - tr.log2()) + 1e-9, || format!("entropy rank bound, seed {seed}"))?;

        let b = random_psd(&mut r, dim, dim, 0.5 + seed as f64 * 0.03);
        let d = rel_entropy(&a, &b).map_err(e2s)?;
        ensure(d >= tr * (tr.log2() - b.trace().log2()) - 1e-9, || format!("relative entropy trace bound, seed {seed}: {d}"))?;
    }

    let mut worst_gap = f64::INFINITY;
    for seed in 0..50u64 {
        let d = 2 + (seed % 5) as usize;
        let terms = 2 + (seed % 3) as usize;
        let v = random_isometry::<f64>(seed, d, d * terms).map_err(e2s)?;
        let cs: Vec<DMatrix<Complex<f64>>> = (0..terms).map(|k| v.rows(k * d, d).into_owned()).collect();
        let xs: Vec<HermitianOperator<f64>> = (0..terms).map(|_| random_psd(&mut r, d, d, 1.0)).collect();
        let gap = jensen_gap(&xs, &cs).map_err(e2s)?;
        ensure(gap >= -1e-9, || format!("Jensen seed {seed}: {gap}"))?;
        worst_gap = worst_gap.min(gap);
    }

    let mut worst_iso: f64 = 0.0;
    let mut mono = 0;
    for seed in 0..50u64 {
        let d_a = 2 + (seed % 2) as usize;
        let d_b = 2 + ((seed / 2) % 2) as usize;
        let rho = random_bipartite::<f64>(seed, d_a, d_b, d_a * d_b).map_err(e2s)?;
        let v = random_isometry::<f64>(seed + 500, d_b, d_b + 1 + (seed % 3) as usize).map_err(e2s)?;
        let big = rho.apply_isometry_b(&v).map_err(e2s)?;
        let mut prev = f64::NEG_INFINITY;
        for eps in [0.0, 0.01, 0.05, 0.1, 0.2, 0.4] {
            let x = collision_entropy_r(&rho, eps, 1e-6).map_err(e2s)?.value;
            let y = collision_entropy_r(&big, eps, 1e-6).map_err(e2s)?.value;
            ensure((x - y).abs() <= 1e-6, || format!("isometry seed {seed} eps {eps}: {x} vs {y}"))?;
            worst_iso = worst_iso.max((x - y).abs());
            ensure(x >= prev - 1e-6, || format!("monotonicity seed {seed} eps {eps}: {x} < {prev}"))?;
            prev = x;
            mono += 1;
        }
    }
    Ok(format!(
        "trace-log bounds x50, Jensen x50 (min gap {worst_gap:.2e}), isometry x50 (max diff {worst_iso:.1e}), monotonicity {mono} pairs"
    ))
}

fn cli_determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_qrex");
    let dir = tempfile::tempdir().map_err(e2s)?;
    let p = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let run = |args: &[&str]| -> Result<(), String> {
        let out = Command::new(exe).args(args).output().map_err(e2s)?;
        ensure(out.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    };
    let state = p("s.json");
    let bip = p("b.json");
    for round in 0..2 {
        let tag = |n: &str| p(&format!("{n}{round}"));
        let s = if round == 0 { state.clone() } else { p("s_again.json") };
        run(&["gen", "--seed", "7", "--X", "4", "--dB", "2", "--out", &s])?;
        run(&["gen", "--seed", "8", "--kind", "bipartite", "--dA", "2", "--dB", "2", "--out", &if round == 0 { bip.clone() } else { p("b_again.json") }])?;
        run(&["entropy", "--in", &state, "--eps", "0.01", "--out", &tag("entropy.json")])?;
        run(&["extract", "--in", &state, "--eps", "0.01", "--family", r#"{"kind":"linear_gf2","n":2,"m":1}"#, "--out", &tag("extract.json")])?;
        run(&["bound", "--in", &bip, "--eps-under", "0.05", "--eps-hat", "0.05", "--out", &tag("bound.json")])?;
        run(&["extension", "--in", &bip, "--eps-under", "0.05", "--eps-hat", "0.05", "--out", &tag("extension.json")])?;
        run(&["asymptotics", "--in", &bip, "--n-max", "6", "--out", &tag("asym.csv")])?;
        run(&["corpus", "--seeds", "1..12", "--eps", "0,0.1", "--family", "linear", "--out", &tag("corpus.csv")])?;
    }
    let mut compared = 0;
    for (a, b) in [(state.clone(), p("s_again.json")), (bip.clone(), p("b_again.json"))] {
        ensure(std::fs::read(&a).map_err(e2s)? == std::fs::read(&b).map_err(e2s)?, || format!("{a} differs"))?;
        compared += 1;
    }
    for name in ["entropy.json", "extract.json", "bound.json", "extension.json", "asym.csv", "corpus.csv"] {
        let a = std::fs::read(p(&format!("{name}0"))).map_err(e2s)?;
        let b = std::fs::read(p(&format!("{name}1"))).map_err(e2s)?;
        ensure(!a.is_empty() && a == b, || format!("{name} differs between runs"))?;
        compared += 1;
    }
    Ok(format!("{compared} artifacts byte-identical across two invocations"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("key-length bound over the seeded corpus", corpus_and_extraction),
        ("worked exact case", worked_case),
        ("classical and quantum collision entropy agree", classical_consistency),
        ("Pinsker on every extraction run", pinsker),
        ("exhaustive two-universality", two_universality),
        ("extension lower bound", extension_bound),
        ("maximally mixed closed forms", maximally_mixed),
        ("tensor-power tails below the type bound", sanov_tails),
        ("per-copy bound approaches S(A|B)", asymptotic_trend),
        ("invariant suites", invariants),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
