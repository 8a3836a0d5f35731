use std::fmt;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use negmix::experiments::{
    convergence_experiment, learning_experiment, write_convergence_csv, write_learning_csv, LearningConfig,
};
use negmix::gaussian::{alpha_max_spherical, fit as fit_model, sample_mixture, Dataset, FitConfig, SphericalMixture};
use negmix::power::{decompose as decompose_tensor, recover_parameters, DecomposeConfig, PowerConfig};
use negmix::rational::{normalize_to_pa, to_pa_mixture, LinearRep};
use negmix::tensor::TensorJson;
use negmix::whitening::{whiten, WhiteningPair};
use serde_json::{json, Value};

use super::{DecomposeArgs, ExperimentCommand, FitArgs, SolverArgs, WfaCommand};

#[derive(Debug)]
pub enum CliError {
    /// Exit code 1.
    Numerical(String),
    /// Exit code 2.
    Usage(String),
    /// The reader of stdout went away; exit quietly.
    PipeClosed,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Numerical(m) | CliError::Usage(m) => f.write_str(m),
            CliError::PipeClosed => f.write_str("broken pipe"),
        }
    }
}

impl From<negmix::Error> for CliError {
    fn from(e: negmix::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            CliError::PipeClosed
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult = Result<(), CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Machine output goes to `out` with the summary on stdout, or to stdout with
/// the summary on stderr.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> CliResult, summary: &str) -> CliResult {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            write(&mut w)?;
            w.flush()?;
            println!("{summary}");
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            write(&mut w)?;
            w.flush()?;
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn emit_json(out: Option<&Path>, value: &Value, summary: &str) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(negmix::Error::from)?;
    emit(out, |w| Ok(writeln!(w, "{text}")?), summary)
}

fn power_config(s: &SolverArgs) -> PowerConfig {
    PowerConfig { tol: s.tol, ..PowerConfig::default() }
}

/// Reject two-component models whose weights exceed the largest valid `α`.
fn check_alpha(model: &SphericalMixture) -> CliResult {
    let ((pos, alpha), neg) = model.split_signs();
    let Some((neg, _)) = neg else { return Ok(()) };
    if pos.k() != 1 || neg.k() != 1 {
        return Ok(());
    }
    match alpha_max_spherical(&pos.means[0], pos.variances[0], &neg.means[0], neg.variances[0])? {
        Some(max) if alpha <= max * (1.0 + 1e-12) => Ok(()),
        Some(max) => Err(CliError::Numerical(format!("model is not a density: α = {alpha} exceeds α_max = {max}"))),
        None => Err(CliError::Numerical("model is not a density: the negative component is at least as wide".into())),
    }
}

pub fn sample(model: &Path, n: usize, seed: u64, out: Option<&Path>) -> CliResult {
    let model = SphericalMixture::from_json(&read(model)?)?;
    check_alpha(&model)?;
    let result = sample_mixture(&model, n, seed)?;
    let summary = format!(
        "{} samples, acceptance rate {:.6} over {} proposals",
        result.data.len(),
        result.acceptance_rate(),
        result.proposals
    );
    emit(out, |w| Ok(result.data.write_csv(w)?), &summary)
}

pub fn fit(a: &FitArgs) -> CliResult {
    let file = File::open(&a.data).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", a.data.display())))?;
    let data = Dataset::read_csv(BufReader::new(file), a.header)?;
    if a.solver.k == 0 || a.solver.k > data.dim() {
        return Err(CliError::Usage(format!("--k must be between 1 and the data dimension {}", data.dim())));
    }
    let mut cfg = FitConfig::new(a.solver.k, a.solver.restarts, a.solver.seed);
    cfg.recover.power = power_config(&a.solver);
    cfg.recover.rank_tol = a.solver.rank_tol;
    cfg.recover.imag_tol = a.solver.imag_tol;
    cfg.prefer_admissible = !a.allow_negative_variance;
    let res = fit_model(&data, &cfg)?;

    if let Some(path) = &a.trace {
        let mut w = csv::Writer::from_writer(create(path)?);
        w.write_record(["index", "eigenvalue", "log_likelihood", "floored", "imag_residue", "iterations", "error"])?;
        let opt = |x: Option<String>| x.unwrap_or_default();
        for c in &res.candidates {
            w.write_record([
                c.index.to_string(),
                c.eigenvalue.to_string(),
                opt(c.log_likelihood.map(|x| x.to_string())),
                opt(c.floored.map(|x| x.to_string())),
                opt(c.imag_residue.map(|x| x.to_string())),
                opt(c.iterations.map(|x| x.to_string())),
                opt(c.error.clone()),
            ])?;
        }
        w.flush()?;
    }

    let m = &res.model;
    let mut value: Value = serde_json::from_str(&m.mixture.to_json()?).map_err(negmix::Error::from)?;
    let extra = json!({
        "log_likelihood": res.log_likelihood.value,
        "floored": res.log_likelihood.floored,
        "candidate_index": m.candidate_index,
        "sigma_bar2": m.sigma_bar2,
        "weight_sum": m.weight_sum,
        "imag_residue": m.imag_residue,
        "complex_warning": m.complex_warning,
        "negative_variance": m.negative_variance,
    });
    if let (Value::Object(map), Value::Object(more)) = (&mut value, extra) {
        map.extend(more);
    }
    let mut summary = format!(
        "candidate {} of {} (σ̄² = {:.6}), log-likelihood {:.6}",
        m.candidate_index,
        res.candidates.len(),
        m.sigma_bar2,
        res.log_likelihood.value
    );
    if m.complex_warning {
        summary.push_str(&format!("; warning: complex residue {:.3e}", m.imag_residue));
    }
    if m.negative_variance {
        summary.push_str("; warning: negative variance");
    }
    emit_json(a.out.as_deref(), &value, &summary)
}

pub fn decompose(a: &DecomposeArgs) -> CliResult {
    let m2 = TensorJson::from_str(&read(&a.m2)?)?.to_real_matrix()?;
    let m3 = TensorJson::from_str(&read(&a.m3)?)?.to_sym_tensor3()?;
    if m2.nrows() != m3.dim() {
        return Err(CliError::Usage(format!("M2 is {}×{} but M3 has dimension {}", m2.nrows(), m2.ncols(), m3.dim())));
    }
    let s = &a.solver;
    if s.k == 0 || s.k > m3.dim() {
        return Err(CliError::Usage(format!("--k must be between 1 and the tensor dimension {}", m3.dim())));
    }
    let wp = WhiteningPair::from_m2(&m2, s.k, s.rank_tol)?;
    let t = whiten(&m3, &wp)?;
    let cfg = DecomposeConfig { power: power_config(s), ..DecomposeConfig::new(s.k, s.restarts, s.seed) };
    let dec = decompose_tensor(&t, &cfg)?;
    let comps = recover_parameters(&dec.pairs, &wp, s.imag_tol)?;

    let components: Vec<Value> = comps
        .iter()
        .zip(&dec.pairs)
        .zip(&dec.traces)
        .map(|((c, p), tr)| {
            json!({
                "weight": c.weight.re,
                "weight_imag": c.weight.im,
                "mean": c.mean.iter().map(|z| z.re).collect::<Vec<_>>(),
                "mean_imag": c.mean.iter().map(|z| z.im).collect::<Vec<_>>(),
                "eigenvalue": [p.z.re, p.z.im],
                "iterations": tr.iterations,
                "imag_residue": c.imag_residue,
                "complex_warning": c.complex_warning,
            })
        })
        .collect();
    let value = json!({ "k": s.k, "components": components, "degenerate_redraws": dec.degenerate_redraws });
    let mut summary = comps
        .iter()
        .map(|c| format!("w = {:.10}, μ = {:?}", c.weight.re, c.mean.iter().map(|z| z.re).collect::<Vec<_>>()))
        .collect::<Vec<_>>()
        .join("\n");
    if comps.iter().any(|c| c.complex_warning) {
        summary.push_str("\nwarning: complex residue above --imag-tol");
    }
    emit_json(a.out.as_deref(), &value, &summary)
}

pub fn wfa(cmd: WfaCommand) -> CliResult {
    match cmd {
        WfaCommand::Split { model, out } => {
            let rep = LinearRep::from_json(&read(&model)?)?;
            let (plus, minus) = rep.split_difference();
            let summary = format!("split into dimensions {} and {}", plus.dim(), minus.dim());
            emit_json(out.as_deref(), &json!({ "plus": plus.to_value(), "minus": minus.to_value() }), &summary)
        }
        WfaCommand::Normalize { model, out } => {
            let rep = LinearRep::from_json(&read(&model)?)?;
            let pa = normalize_to_pa(&rep)?;
            let summary = format!("probabilistic automaton with {} states", pa.rep().dim());
            emit_json(out.as_deref(), &pa.rep().to_value(), &summary)
        }
        WfaCommand::Mixture { model, no_distribution_check, out } => {
            let rep = LinearRep::from_json(&read(&model)?)?;
            let mix = to_pa_mixture(&rep, !no_distribution_check)?;
            let value: Value = serde_json::from_str(&mix.to_json()).map_err(negmix::Error::from)?;
            let summary = format!("s+ = {:.6}, s- = {:.6}", mix.s_plus, mix.s_minus);
            emit_json(out.as_deref(), &value, &summary)
        }
        WfaCommand::Eval { model, word } => {
            let rep = LinearRep::from_json(&read(&model)?)?;
            println!("{}", rep.eval_word(&rep.parse_word(&word))?);
            Ok(())
        }
        WfaCommand::Sum { model } => {
            let rep = LinearRep::from_json(&read(&model)?)?;
            println!("{}", rep.series_sum()?);
            Ok(())
        }
    }
}

pub fn experiment(cmd: ExperimentCommand) -> CliResult {
    match cmd {
        ExperimentCommand::Convergence { runs, iterations, seed, out } => {
            if runs == 0 || iterations == 0 {
                return Err(CliError::Usage("--runs and --iterations must be positive".into()));
            }
            let rows = convergence_experiment(runs, iterations, seed)?;
            let last = rows.last().expect("at least one iteration");
            let summary = format!(
                "after {} iterations: mean error {:.3e}, {:.1}% of {runs} runs below 1e-8",
                last.iteration,
                last.mean_error,
                100.0 * last.success_rate
            );
            emit(out.as_deref(), |w| Ok(write_convergence_csv(&rows, w)?), &summary)
        }
        ExperimentCommand::Learning { sizes, runs, restarts, seed, out, trace } => {
            if runs == 0 || sizes.is_empty() || restarts == 0 {
                return Err(CliError::Usage("--runs, --restarts and --sizes must be non-empty".into()));
            }
            let (rows, detail) = learning_experiment(&sizes, &LearningConfig { datasets: runs, restarts, seed })?;
            if let Some(path) = trace {
                let mut w = csv::Writer::from_writer(create(&path)?);
                w.write_record([
                    "size",
                    "dataset",
                    "error",
                    "pathological",
                    "complex_candidate",
                    "failed",
                    "candidate_index",
                ])?;
                for r in &detail {
                    w.write_record([
                        r.size.to_string(),
                        r.dataset.to_string(),
                        r.error.to_string(),
                        r.pathological.to_string(),
                        r.complex_candidate.to_string(),
                        r.failed.to_string(),
                        r.candidate_index.map(|i| i.to_string()).unwrap_or_default(),
                    ])?;
                }
                w.flush()?;
            }
            let summary = rows
                .iter()
                .map(|r| format!("N = {}: median error {:.4}, {} pathological", r.size, r.median_error, r.pathological))
                .collect::<Vec<_>>()
                .join("\n");
            emit(out.as_deref(), |w| Ok(write_learning_csv(&rows, w)?), &summary)
        }
    }
}
