//! Command implementations. Each returns Ok(true) when every reported check
//! passed (exit 0), Ok(false) when a verification check failed (exit 1), and
//! Err for usage problems — unparsable specs, unwritable paths (exit 2).

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use backwire::ctc::{effective_operator, simulate_loop, verify_loop_identity, LoopCircuit};
use backwire::kernel::{gates, random_unitary, BellLabel};
use backwire::protocol::{
    self, build_relabel_table, decode_trials, exact_bell_distribution, outcome_uniformity,
    RecordField, TrialRecord, UniformityReport,
};
use backwire::stats::{tv_distance, within_binomial_5sigma};
use backwire::verify::{run_suite, Sabotage};
use backwire::{Histogram, Matrix, RngStream, State};

use crate::statefmt::{parse_stages, parse_state};

type Outcome = Result<bool, String>;

pub fn verify(
    tolerance: f64,
    seed: u64,
    out: Option<PathBuf>,
    sabotage: Option<String>,
) -> Outcome {
    let sabotage = match sabotage.as_deref() {
        None => Sabotage::None,
        Some("wrong-sigma") => Sabotage::WrongSigma,
        Some(other) => return Err(format!("unknown sabotage mode '{other}'")),
    };
    let report = run_suite(tolerance, seed, sabotage);
    for check in &report.checks {
        println!(
            "{} {} — {}",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    println!(
        "verify: {} ({} checks, tolerance {:.1e}, seed {})",
        if report.passed { "all passed" } else { "FAILED" },
        report.checks.len(),
        tolerance,
        seed
    );
    if let Some(path) = out {
        write_text(&path, &report.to_json())?;
        println!("report written to {}", path.display());
    }
    Ok(report.passed)
}

pub fn cnot_demo(
    alpha: f64,
    beta: f64,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Outcome {
    let norm = (alpha * alpha + beta * beta).sqrt();
    if norm <= 0.0 || !norm.is_finite() {
        return Err("alpha and beta must not both be zero".into());
    }
    let (a, b) = (alpha / norm, beta / norm);
    let input = State::new(1, vec![num_complex::Complex::new(a, 0.0), num_complex::Complex::new(b, 0.0)])
        .expect("two amplitudes");
    let circuit = LoopCircuit::new(gates::cnot(), 1).expect("CNOT is unitary");

    let mut counts = [0u64; 4];
    for trial in 0..trials {
        let mut rng = RngStream::new(seed, trial);
        let (outcome, _) = simulate_loop(&circuit, &input, &mut rng).map_err(|e| e.to_string())?;
        counts[outcome.index()] += 1;
    }
    let expected = [a * a, 0.0, b * b, 0.0];
    println!("CNOT loop on α∣0⟩+β∣1⟩ with α={a:.6}, β={b:.6}, {trials} shots:");
    let passed = report_bell_counts(&counts, trials, &expected);
    let hist = bell_histogram(&counts);
    if let Some(path) = out {
        write_csv(&path, &hist)?;
        println!("histogram written to {}", path.display());
    }
    Ok(passed)
}

#[allow(clippy::too_many_arguments)]
pub fn loop_run(
    gate: &str,
    qubits: usize,
    loop_qubit: Option<usize>,
    state: &str,
    trials: u64,
    seed: u64,
    tolerance: f64,
    out: Option<PathBuf>,
) -> Outcome {
    let u: Matrix = match gate {
        "cnot" => gates::cnot(),
        "swap" => gates::swap(),
        // The unitary draws from a stream id no trial can reach.
        "random" => random_unitary(qubits, &mut RngStream::new(seed, u64::MAX)),
        other => return Err(format!("unknown gate '{other}' (use cnot, swap, or random)")),
    };
    let wires = u.rows().trailing_zeros() as usize;
    let loop_qubit = loop_qubit.unwrap_or(wires - 1);
    let circuit = LoopCircuit::new(u, loop_qubit).map_err(|e| e.to_string())?;
    let input = parse_state(state)?;
    if input.num_qubits() != circuit.open_qubits() {
        return Err(format!(
            "input has {} qubits but the loop leaves {} open wires",
            input.num_qubits(),
            circuit.open_qubits()
        ));
    }

    let expected: Vec<f64> = BellLabel::ALL
        .iter()
        .map(|&l| {
            let mapped = effective_operator(&circuit, l)
                .mul_state(&input)
                .expect("dimensions agree");
            mapped.norm().powi(2)
        })
        .collect();

    let mut counts = [0u64; 4];
    for trial in 0..trials {
        let mut rng = RngStream::new(seed, trial);
        let (outcome, _) = simulate_loop(&circuit, &input, &mut rng).map_err(|e| e.to_string())?;
        counts[outcome.index()] += 1;
    }

    println!(
        "loop: {gate} on {} wires, loop wire {} fed back, {trials} shots",
        circuit.num_qubits(),
        circuit.loop_qubit()
    );
    let mut passed = report_bell_counts(&counts, trials, &expected);
    let identity_ok = verify_loop_identity(&circuit, tolerance);
    println!(
        "{} loop ≡ ½·partial-trace on outcome Ψ00 (tolerance {tolerance:.1e})",
        if identity_ok { "PASS" } else { "FAIL" }
    );
    passed &= identity_ok;
    if let Some(path) = out {
        write_csv(&path, &bell_histogram(&counts))?;
        println!("histogram written to {}", path.display());
    }
    Ok(passed)
}

pub fn encrypt_run(
    state: &str,
    trials: u64,
    seed: u64,
    out: PathBuf,
    substitute: Option<(u64, String)>,
) -> Outcome {
    let phi = parse_state(state)?;
    let substitution = match substitute {
        Some((at, spec)) => Some((at, parse_state(&spec)?)),
        None => None,
    };
    let records =
        protocol::run_encrypted_measurement(&phi, trials, seed, substitution.clone())
            .map_err(|e| e.to_string())?;

    write_records_file(&out, &records)?;
    let today_csv = out.with_extension("today.csv");
    write_csv(&today_csv, &protocol::field_histogram(&records, RecordField::Today))?;
    println!(
        "encrypt-run: {trials} trials, seed {seed}; records → {}, today histogram → {}",
        out.display(),
        today_csv.display()
    );

    let mut passed = true;
    passed &= report_uniformity("today (ciphertext)", &protocol::ciphertext_uselessness_check(&records));
    passed &= report_uniformity("key A marginal", &outcome_uniformity(&records, RecordField::KeyA));
    passed &= report_uniformity("key B marginal", &outcome_uniformity(&records, RecordField::KeyB));

    // Preview of what decoding will show, judged against the exact Bell
    // distribution of the simulated state(s). The written records stay
    // undecoded; `decode` works from the file alone.
    let table = build_relabel_table::<f64>().map_err(|e| e.to_string())?;
    let (decoded, _) = decode_trials(&records, &table);
    match &substitution {
        None => {
            let oracle = exact_bell_distribution(&phi).map_err(|e| e.to_string())?;
            passed &= report_decoded_vs_oracle("decoded vs oracle", &decoded, &oracle);
        }
        Some((at, replacement)) => {
            let before: Vec<TrialRecord> =
                decoded.iter().filter(|r| r.trial_id < *at).copied().collect();
            let after: Vec<TrialRecord> =
                decoded.iter().filter(|r| r.trial_id >= *at).copied().collect();
            let oracle_before = exact_bell_distribution(&phi).map_err(|e| e.to_string())?;
            let oracle_after =
                exact_bell_distribution(replacement).map_err(|e| e.to_string())?;
            passed &= report_decoded_vs_oracle(
                &format!("decoded[..{at}] vs original oracle"),
                &before,
                &oracle_before,
            );
            passed &= report_decoded_vs_oracle(
                &format!("decoded[{at}..] vs substituted oracle"),
                &after,
                &oracle_after,
            );
        }
    }
    Ok(passed)
}

pub fn decode(records_path: PathBuf, out: PathBuf) -> Outcome {
    let file = File::open(&records_path)
        .map_err(|e| format!("cannot open {}: {e}", records_path.display()))?;
    let records = protocol::read_records(BufReader::new(file)).map_err(|e| e.to_string())?;
    let table = build_relabel_table::<f64>().map_err(|e| e.to_string())?;
    let (decoded, hist) = decode_trials(&records, &table);

    write_records_file(&out, &decoded)?;
    let hist_csv = out.with_extension("decoded.csv");
    write_csv(&hist_csv, &hist)?;

    println!(
        "decode: {} records from {}; decoded → {}, histogram → {}",
        records.len(),
        records_path.display(),
        out.display(),
        hist_csv.display()
    );
    print_histogram(&hist);
    report_uniformity("today (ciphertext)", &protocol::ciphertext_uselessness_check(&decoded));
    report_uniformity("key A marginal", &outcome_uniformity(&decoded, RecordField::KeyA));
    report_uniformity("key B marginal", &outcome_uniformity(&decoded, RecordField::KeyB));
    Ok(true)
}

pub fn multistage(
    stages: &str,
    state: &str,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
) -> Outcome {
    let unitaries = parse_stages(stages)?;
    let input = parse_state(state)?;
    if input.num_qubits() != 1 {
        return Err("multistage input must be a single-qubit state".into());
    }
    let report = protocol::run_multistage(&unitaries, &input, trials, seed)
        .map_err(|e| e.to_string())?;
    let k = unitaries.len() as u32;
    let p_success = 0.25f64.powi(k as i32);

    println!(
        "multistage: {k} stage(s), {trials} trials, {} full successes (rate {:.6}, expected {:.6})",
        report.success_count,
        report.success_rate(),
        p_success
    );
    let rate_ok = within_binomial_5sigma(report.success_count, trials, p_success);
    println!(
        "{} success rate within 5σ of 4^-{k}",
        if rate_ok { "PASS" } else { "FAIL" }
    );

    let composed = protocol::compose_unitaries(&unitaries).map_err(|e| e.to_string())?;
    let reference = composed.mul_state(&input).map_err(|e| e.to_string())?;
    let outputs_ok = report
        .conditional_final_states
        .iter()
        .all(|s| s.equal_up_to_phase(&reference, 1e-10));
    println!(
        "{} conditional outputs equal the composed unitary applied to the input (up to phase)",
        if outputs_ok { "PASS" } else { "FAIL" }
    );

    if let Some(path) = out {
        let file = create_file(&path)?;
        let mut w = BufWriter::new(file);
        for t in &report.trials {
            serde_json::to_writer(&mut w, t).map_err(|e| e.to_string())?;
            w.write_all(b"\n").map_err(|e| e.to_string())?;
        }
        w.flush().map_err(|e| e.to_string())?;
        println!("trials written to {}", path.display());
    }
    Ok(rate_ok && outputs_ok)
}

fn report_bell_counts(counts: &[u64; 4], trials: u64, expected: &[f64]) -> bool {
    let mut passed = true;
    for (i, label) in BellLabel::ALL.iter().enumerate() {
        let freq = counts[i] as f64 / trials as f64;
        let ok = within_binomial_5sigma(counts[i], trials, expected[i]);
        println!(
            "{} Ψ{label}: {} shots (freq {:.6}, expected {:.6})",
            if ok { "PASS" } else { "FAIL" },
            counts[i],
            freq,
            expected[i]
        );
        passed &= ok;
    }
    passed
}

fn report_uniformity(name: &str, report: &UniformityReport) -> bool {
    println!(
        "{} {name} uniform: counts {:?}, TV {:.6}, max|z| {:.2}",
        if report.uniform_within_5_sigma { "PASS" } else { "FAIL" },
        report.counts,
        report.tv_distance_to_uniform,
        report.max_abs_z
    );
    report.uniform_within_5_sigma
}

fn report_decoded_vs_oracle(
    name: &str,
    decoded: &[TrialRecord],
    oracle: &Histogram<f64>,
) -> bool {
    let hist = protocol::field_histogram(decoded, RecordField::Decoded);
    let n = decoded.len() as u64;
    let counts = hist.counts().expect("counted");
    let probs = oracle.probabilities();
    let ok = (0..4).all(|i| within_binomial_5sigma(counts[i], n, probs[i]));
    let tv = tv_distance(&hist.probabilities_f64(), &oracle.probabilities_f64());
    println!(
        "{} {name}: counts {:?} vs Bell distribution {:?}, TV {:.6}",
        if ok { "PASS" } else { "FAIL" },
        counts,
        probs,
        tv
    );
    ok
}

fn bell_histogram(counts: &[u64; 4]) -> Histogram<f64> {
    Histogram::from_counts(
        BellLabel::ALL.iter().map(|l| l.to_string()).collect(),
        counts.to_vec(),
    )
}

fn print_histogram(hist: &Histogram<f64>) {
    let counts = hist.counts();
    for (i, label) in hist.labels().iter().enumerate() {
        match counts {
            Some(c) => println!("  {label}: {} ({:.6})", c[i], hist.probabilities()[i]),
            None => println!("  {label}: {:.6}", hist.probabilities()[i]),
        }
    }
}

fn create_file(path: &Path) -> Result<File, String> {
    File::create(path).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn write_csv(path: &Path, hist: &Histogram<f64>) -> Result<(), String> {
    let file = create_file(path)?;
    let mut w = BufWriter::new(file);
    hist.write_csv(&mut w)
        .and_then(|()| w.flush())
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn write_records_file(path: &Path, records: &[TrialRecord]) -> Result<(), String> {
    let file = create_file(path)?;
    let mut w = BufWriter::new(file);
    protocol::write_records(&mut w, records).map_err(|e| e.to_string())?;
    w.flush().map_err(|e| e.to_string())
}
