//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qfc::densmat::{measure_split, merge, ComplexMatrix};
use qfc::gates::{controlled, default_max_depth, synthesize, Gate, SynthOutcome};
use qfc::interp::{run_exact, run_exact_observed, InterpConfig};
use qfc::lang::{check_source, CheckOutcome, TypedProgram};
use qfc::qram::{
    replay, run_shots, run_single_shot, shot_seed, DeviceReply, Instruction, QramDevice, ShotConfig,
};
use qfc::random::random_density_matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> (Verdict, Duration, bool) {
    let start = Instant::now();
    let v = f();
    let took = start.elapsed();
    (v, took, took < limit)
}

fn programs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("programs")
}

fn compile(src: &str) -> TypedProgram {
    match check_source(src.as_bytes()) {
        CheckOutcome::Typed(p) => p,
        other => panic!("{other:?}"),
    }
}

fn corpus() -> Vec<(String, TypedProgram)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(programs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "qfc"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, compile(&std::fs::read_to_string(&p).unwrap()))
        })
        .collect()
}

const FLOW_CHART: &str =
    "proc main(){ new qbit p; new qbit q; measure p { 0: { q *= N; } 1: { p *= N; } } }";

const BELL: &str = "proc main() { new qbit p; new qbit q; p *= H; p, q *= Nc;
                    measure p { 0: {} 1: {} } measure q { 0: {} 1: {} } }";

const RUS: &str = "proc main() { new qbit q; q *= H; while q { q *= H; } }";

fn c1_flow_chart_oracle() -> Verdict {
    let program = compile(FLOW_CHART);
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c1);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let trace = rng.gen_range(0.05..=1.0);
        let m = random_density_matrix(&mut rng, 2, trace);
        let cfg = InterpConfig {
            input_state: Some(m.clone()),
            ..Default::default()
        };
        let out = run_exact(&program, &cfg).unwrap();
        // Expected [[N A N + D, 0], [0, 0]] where A and D are the diagonal
        // 2×2 blocks of M; conjugating by N reverses both indices of A.
        let mm = m.matrix();
        let want = ComplexMatrix::from_fn(4, |r, c| {
            if r < 2 && c < 2 {
                mm[(1 - r, 1 - c)] + mm[(r + 2, c + 2)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        worst = worst.max(out.merged.rho.matrix().max_abs_diff(&want).unwrap());
    }
    verdict(worst <= 1e-10, format!("100 random inputs, max entry error {worst:.2e} (limit 1e-10)"))
}

fn c2_split_merge() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c2);
    let (mut trace_err, mut merge_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..1000 {
        let n = rng.gen_range(1..=3);
        let trace = rng.gen_range(0.0..=1.0);
        let rho = random_density_matrix(&mut rng, n, trace);
        let q = rng.gen_range(0..n);
        let (a, d) = measure_split(&rho, q).unwrap();
        trace_err = trace_err.max((a.trace() + d.trace() - rho.trace()).abs());
        let merged = merge(&[a, d]).unwrap();
        let bit = 1usize << (n - 1 - q);
        let m = rho.matrix();
        let want = ComplexMatrix::from_fn(1 << n, |r, c| {
            if (r & bit) == (c & bit) {
                m[(r, c)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .unwrap();
        merge_err = merge_err.max(merged.matrix().max_abs_diff(&want).unwrap());
    }
    verdict(
        trace_err <= 1e-10 && merge_err <= 1e-12,
        format!("1000 states, trace error {trace_err:.2e} (1e-10), merge error {merge_err:.2e} (1e-12)"),
    )
}

fn c3_gate_catalog() -> Verdict {
    let mut worst_unit: f64 = 0.0;
    for g in Gate::ALL {
        worst_unit = worst_unit.max(g.matrix().unitarity_defect());
    }
    let mut worst_ctrl: f64 = 0.0;
    for (base, ctrl) in [(Gate::N, Gate::Nc), (Gate::H, Gate::Hc), (Gate::V, Gate::Vc), (Gate::W, Gate::Wc)] {
        let c = controlled(&base.def());
        worst_unit = worst_unit.max(c.matrix().unitarity_defect());
        worst_ctrl = worst_ctrl.max(c.matrix().max_abs_diff(&ctrl.matrix()).unwrap());
    }
    verdict(
        worst_unit <= 1e-12 && worst_ctrl <= 1e-12,
        format!("9 gates + 4 controlled, unitarity {worst_unit:.2e}, controlled vs catalog {worst_ctrl:.2e}"),
    )
}

/// ‖S − λT‖ minimized over unit λ, for unitaries: sqrt(2·dim − 2|Tr(T†S)|).
fn phase_distance(s: &ComplexMatrix, t: &ComplexMatrix) -> f64 {
    let overlap: Complex64 = (0..s.dim())
        .flat_map(|r| (0..s.dim()).map(move |c| (r, c)))
        .map(|(r, c)| t[(r, c)].conj() * s[(r, c)])
        .sum();
    (2.0 * s.dim() as f64 - 2.0 * overlap.norm()).max(0.0).sqrt()
}

fn product_2x2(gates: &[&str]) -> ComplexMatrix {
    let mut acc = ComplexMatrix::identity(2).unwrap();
    for name in gates {
        let g: Gate = name.parse().unwrap();
        let m = g.matrix();
        acc = ComplexMatrix::from_fn(2, |r, c| m[(r, 0)] * acc[(0, c)] + m[(r, 1)] * acc[(1, c)]).unwrap();
    }
    acc
}

fn c4_synthesis() -> Verdict {
    let z = ComplexMatrix::diag(&[1.0, -1.0]).unwrap();
    let n = Gate::N.matrix();
    let mut notes = Vec::new();
    let mut ok = true;
    for (label, target, depth, want) in [
        ("diag(1,-1)", &z, 2, vec!["V", "V"]),
        ("N", &n, 4, vec!["H", "V", "V", "H"]),
    ] {
        for cap in [depth, default_max_depth(1)] {
            let start = Instant::now();
            let outcome = synthesize(target, 1, 1e-12, cap).unwrap();
            let took = start.elapsed();
            let SynthOutcome::Found { sequence, distance } = outcome else {
                ok = false;
                notes.push(format!("{label}: not found at depth {cap}"));
                continue;
            };
            let names = sequence.gate_names();
            let recomputed = phase_distance(target, &product_2x2(&names));
            ok &= names == want && distance.distance < 1e-12 && recomputed < 1e-12 && took < Duration::from_secs(1);
            notes.push(format!("{label}@{cap}: [{}] d={recomputed:.1e} {:.0?}", names.join(","), took));
        }
    }
    verdict(ok, notes.join("; "))
}

fn c5_type_safety() -> Verdict {
    let rejects = [
        ("DuplicateOperand", "proc main() { new qbit p; p, p *= X; }"),
        ("UseAfterDiscard", "proc main() { new qbit q; discard q; q *= H; }"),
        (
            "BranchContextMismatch",
            "proc main() { new qbit p; new qbit q; measure p { 0: { discard q; } 1: {} } }",
        ),
        (
            "RecursionDetected",
            "proc f(a) { call g(a); } proc g(a) { call f(a); } proc main() { new qbit q; call f(q); }",
        ),
    ];
    let mut rejected = 0;
    for (variant, src) in rejects {
        if let CheckOutcome::Type(errs) = check_source(src.as_bytes()) {
            if errs.0.iter().any(|e| e.variant_name() == variant) {
                rejected += 1;
            }
        }
    }
    let programs = corpus();
    let mut clean = 0;
    for (i, (_, p)) in programs.iter().enumerate() {
        let exact = run_exact(p, &InterpConfig::default()).is_ok();
        let shots = ShotConfig {
            shots: 200,
            seed: i as u64,
            ..Default::default()
        };
        if exact && run_shots(p, &shots).is_ok() {
            clean += 1;
        }
    }
    verdict(
        rejected == 4 && programs.len() >= 20 && clean == programs.len(),
        format!("{rejected}/4 rejections, {clean}/{} corpus programs run without faults", programs.len()),
    )
}

fn c6_exact_vs_sampled() -> Verdict {
    let bell = compile(BELL);
    let r = run_shots(&bell, &ShotConfig { shots: 10_000, seed: 6, ..Default::default() }).unwrap();
    let c00 = r.counts.get("p=0,q=0").copied().unwrap_or(0);
    let c11 = r.counts.get("p=1,q=1").copied().unwrap_or(0);
    let mixed = 10_000 - c00 - c11;
    let bell_ok = c00.abs_diff(5000) <= 150 && c11.abs_diff(5000) <= 150 && mixed == 0 && r.truncated == 0;

    let rus = compile(RUS);
    let shots = 100_000u64;
    let r = run_shots(&rus, &ShotConfig { shots, seed: 6, ..Default::default() }).unwrap();
    let n = shots as f64;
    let z = |count: u64, p: f64| (count as f64 - n * p).abs() / (n * p * (1.0 - p)).sqrt();
    let mut worst_sigma: f64 = 0.0;
    let mut seen = 0;
    let mut k = 0;
    // Per-k bins while the expected count is at least 5; the rest is one tail bin.
    while n * 0.5f64.powi(k + 1) >= 5.0 {
        let mut key: Vec<String> = (0..k).map(|i| format!("q@{i}=1")).collect();
        key.push(format!("q@{k}=0"));
        let count = r.counts.get(&key.join(",")).copied().unwrap_or(0);
        seen += count;
        worst_sigma = worst_sigma.max(z(count, 0.5f64.powi(k + 1)));
        k += 1;
    }
    let tail = shots - seen - r.truncated;
    let tail_sigma = z(tail, 0.5f64.powi(k));
    let rus_ok = worst_sigma <= 3.0 && tail_sigma <= 3.0 && r.truncated == 0;
    verdict(
        bell_ok && rus_ok,
        format!(
            "Bell 00={c00} 11={c11} mixed={mixed}; loop exits k<{k} worst {worst_sigma:.2} sigma, tail k>={k} {tail}/{:.1} ({tail_sigma:.2} sigma)",
            n * 0.5f64.powi(k)
        ),
    )
}

fn c7_qram_reset() -> Verdict {
    let mut zeros = 0;
    let mut replays_ok = true;
    for shot in 0..1000u64 {
        let seed = shot_seed(7, shot);
        let mut dev = QramDevice::new(4, seed).unwrap();
        let script = [
            Instruction::Alloc,
            Instruction::Alloc,
            Instruction::ApplyUnary(Gate::H, 0),
            Instruction::ApplyBinary(Gate::Nc, 0, 1),
            Instruction::Free(0),
            Instruction::Alloc,
            Instruction::Measure(0),
        ];
        let replies: Vec<DeviceReply> = script.iter().map(|&i| dev.step(i)).collect();
        if replies[5] == DeviceReply::Allocated(0) && replies[6] == DeviceReply::Bit(0) {
            zeros += 1;
        }
        replays_ok &= replay(dev.log(), 4, seed).is_ok();
    }
    let mut logs = 0;
    for (_, p) in corpus() {
        let cfg = ShotConfig { seed: 7, ..Default::default() };
        for shot in 0..20 {
            let t = run_single_shot(&p, &cfg, shot).unwrap();
            replays_ok &= replay(&t.log, cfg.pool_size, t.device_seed).is_ok();
            logs += 1;
        }
    }
    verdict(
        zeros == 1000 && replays_ok,
        format!("{zeros}/1000 re-allocated qubits read 0; {} logs replayed bit-exactly: {replays_ok}", 1000 + logs),
    )
}

fn c8_trace_accounting() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut checkpoints = 0usize;
    let programs = corpus();
    for (_, p) in &programs {
        run_exact_observed(p, &InterpConfig::default(), &mut |cp| {
            worst = worst.max(cp.defect());
            checkpoints += 1;
        })
        .unwrap();
    }
    let ghz = programs.iter().find(|(n, _)| n == "ghz8").map(|(_, p)| p).expect("ghz8 in corpus");
    let start = Instant::now();
    let r = run_exact(ghz, &InterpConfig::default()).unwrap();
    let took = start.elapsed();
    let ghz_ok = r.merged.qubits.len() == 8 && took < Duration::from_secs(5);
    verdict(
        worst <= 1e-9 && ghz_ok,
        format!(
            "{checkpoints} statement boundaries over {} programs, worst defect {worst:.2e}; 8-qubit GHZ in {took:.2?}",
            programs.len()
        ),
    )
}

type Criterion = (&'static str, Duration, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("flow-chart oracle on random inputs", Duration::from_secs(1), c1_flow_chart_oracle),
        ("measurement split and merge identities", Duration::from_secs(5), c2_split_merge),
        ("gate catalog and controlled gates", Duration::from_millis(100), c3_gate_catalog),
        ("synthesis regressions", Duration::from_secs(2), c4_synthesis),
        ("type-safety corpus", Duration::from_secs(60), c5_type_safety),
        ("exact vs sampled agreement", Duration::from_secs(10), c6_exact_vs_sampled),
        ("QRAM reset and replay", Duration::from_secs(60), c7_qram_reset),
        ("trace accounting", Duration::from_secs(60), c8_trace_accounting),
    ];
    let mut failures = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let (v, took, in_time) = timed(limit, f);
        let pass = v.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {} {}: {} | {} | {:.3?} (limit {:.0?})",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            name,
            v.detail,
            took,
            limit
        );
    }
    println!("{} of 8 criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
