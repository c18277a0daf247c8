use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use kmmeans::baseline::{kpod, KpodConfig};
use kmmeans::simulate::harness::{run_experiment, ExperimentConfig};
use kmmeans::simulate::{adjusted_rand, apply_missingness, generate_clusters, Contingency, MissingSpec, SimSpec};
use kmmeans::{default_inits, fit, select_k, FitConfig, FitResult, InitConfig, MaskedDataset, SweepConfig, Weighting};
use serde::Serialize;

use crate::args::*;
use crate::error::CliError;
use crate::io::{read_csv, read_labels, write_csv, CsvOptions, Table};
use crate::transform::{apply_transforms, ColumnOp, FittedTransform, TransformSpec};

pub const SCHEMA_VERSION: u32 = 1;

/// How a successful command finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Completion {
    Done,
    /// Outputs were written but the optimizer hit an iteration cap.
    NotConverged,
}

impl Completion {
    pub fn exit_code(self) -> i32 {
        match self {
            Completion::Done => 0,
            Completion::NotConverged => 4,
        }
    }
}

pub fn run(cli: Cli) -> Result<Completion, CliError> {
    match cli.command {
        Command::Cluster(a) => cmd_cluster(&a),
        Command::SelectK(a) => cmd_select_k(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Evaluate(a) => cmd_evaluate(&a),
        Command::Experiment(a) => cmd_experiment(&a),
    }
}

fn delimiter_byte(c: char) -> Result<u8, CliError> {
    u8::try_from(c)
        .ok()
        .filter(u8::is_ascii)
        .ok_or_else(|| CliError::Usage(format!("delimiter must be a single ASCII character, got {c:?}")))
}

fn csv_options(csv: &CsvArgs, has_header: bool) -> Result<CsvOptions, CliError> {
    Ok(CsvOptions {
        delimiter: delimiter_byte(csv.delimiter)?,
        missing_token: csv.missing_token.clone(),
        has_header,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Output(format!("{}: {e}", path.display())))
}

/// Opens `path`, or stdout when `None`.
fn sink(path: Option<&PathBuf>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Output(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(CliError::write)
}

/// Column given by name, else by 1-based position.
fn resolve_column(names: &[String], key: &str) -> Result<usize, CliError> {
    if let Some(j) = names.iter().position(|n| n == key) {
        return Ok(j);
    }
    match key.parse::<usize>() {
        Ok(j) if (1..=names.len()).contains(&j) => Ok(j - 1),
        _ => Err(CliError::Usage(format!("no column named or numbered {key:?}"))),
    }
}

struct Loaded {
    table: Table,
    transform: Option<FittedTransform>,
}

fn load_input(a: &InputArgs) -> Result<Loaded, CliError> {
    let opts = csv_options(&a.csv, !a.no_header)?;
    let mut table = read_csv(&a.input, &opts)?;
    let mut spec = TransformSpec::identity(table.data.p());
    for key in &a.log10 {
        spec.ops[resolve_column(&table.names, key)?] = ColumnOp::Log10;
    }
    for key in &a.asinh {
        let j = resolve_column(&table.names, key)?;
        if spec.ops[j] != ColumnOp::None {
            return Err(CliError::Usage(format!("column {key:?} given two transforms")));
        }
        spec.ops[j] = ColumnOp::Asinh { theta: a.theta };
    }
    spec.center_scale = a.center_scale;
    let transform = if spec.is_identity() {
        None
    } else {
        let (data, fitted) = apply_transforms(&table.data, &spec)?;
        table.data = data;
        Some(fitted)
    };
    if let Some(path) = &a.transformed_out {
        write_csv(create(path)?, &table, &opts)?;
    }
    Ok(Loaded { table, transform })
}

fn fit_config(a: &FitArgs) -> FitConfig {
    FitConfig {
        init: InitConfig {
            weighting: match a.weighting {
                WeightingArg::Scaled => Weighting::ScaledDelta,
                WeightingArg::Unscaled => Weighting::UnscaledDelta,
            },
        },
        parallel: !a.serial,
        ..Default::default()
    }
}

fn write_assignments(path: Option<&PathBuf>, labels: &[usize]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(path)?);
    w.write_record(["row_id", "cluster"]).map_err(CliError::csv)?;
    for (i, &l) in labels.iter().enumerate() {
        w.write_record([(i + 1).to_string(), (l + 1).to_string()]).map_err(CliError::csv)?;
    }
    w.flush().map_err(CliError::write)
}

#[derive(Serialize)]
struct ConfigEcho<'a> {
    input: &'a Path,
    delimiter: char,
    missing_token: &'a str,
    header: bool,
    weighting: &'static str,
    log10: &'a [String],
    asinh: &'a [String],
    theta: f64,
    center_scale: bool,
}

impl<'a> ConfigEcho<'a> {
    fn new(input: &'a InputArgs, fit: &FitArgs) -> Self {
        Self {
            input: &input.input,
            delimiter: input.csv.delimiter,
            missing_token: &input.csv.missing_token,
            header: !input.no_header,
            weighting: match fit.weighting {
                WeightingArg::Scaled => "scaled",
                WeightingArg::Unscaled => "unscaled",
            },
            log10: &input.log10,
            asinh: &input.asinh,
            theta: input.theta,
            center_scale: input.center_scale,
        }
    }
}

/// JSON summary of one clustering. `generated_at` is the only field that
/// varies between identical runs.
#[derive(Serialize)]
struct Summary<'a> {
    schema_version: u32,
    generated_at: u64,
    method: &'static str,
    k: usize,
    n: usize,
    p: usize,
    p_bar: f64,
    #[serde(rename = "W_K")]
    objective: f64,
    sigma_sq_hat: f64,
    converged: bool,
    iterations: usize,
    transfers: usize,
    seed: u64,
    inits: usize,
    best_init: usize,
    cluster_sizes: Vec<usize>,
    columns: &'a [String],
    /// Cluster means in the (transformed) analysis scale; null where a
    /// cluster has no observed value in a column.
    centers: Vec<Vec<Option<f64>>>,
    center_defined: Vec<Vec<bool>>,
    /// 1-based rows that shared no feature with any initial center.
    unanchored_rows: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    kpod_descent_violated: Option<bool>,
    transform: Option<&'a FittedTransform>,
    config: ConfigEcho<'a>,
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

#[allow(clippy::too_many_arguments)]
fn summary<'a>(
    method: &'static str,
    ds: &MaskedDataset,
    res: &FitResult,
    inits: usize,
    loaded: &'a Loaded,
    input: &'a InputArgs,
    fit_args: &FitArgs,
    kpod_descent_violated: Option<bool>,
) -> Summary<'a> {
    let centers = res.centers.to_rows();
    Summary {
        schema_version: SCHEMA_VERSION,
        generated_at: now_secs(),
        method,
        k: res.partition.k(),
        n: ds.n(),
        p: ds.p(),
        p_bar: ds.p_bar(),
        objective: res.objective,
        sigma_sq_hat: res.sigma_sq_hat,
        converged: res.converged,
        iterations: res.iterations,
        transfers: res.transfers,
        seed: res.seed,
        inits,
        best_init: res.init_index,
        cluster_sizes: res.partition.sizes(),
        columns: &loaded.table.names,
        center_defined: centers.iter().map(|r| r.iter().map(Option::is_some).collect()).collect(),
        centers,
        unanchored_rows: res.unanchored_rows.iter().map(|i| i + 1).collect(),
        kpod_descent_violated,
        transform: loaded.transform.as_ref(),
        config: ConfigEcho::new(input, fit_args),
    }
}

fn report_unanchored(res: &FitResult) {
    if !res.unanchored_rows.is_empty() {
        eprintln!(
            "note: {} rows shared no feature with any initial center and started in the largest cluster",
            res.unanchored_rows.len()
        );
    }
}

fn completion(converged: bool) -> Completion {
    if converged {
        Completion::Done
    } else {
        eprintln!("warning: iteration limit reached before convergence; outputs were written");
        Completion::NotConverged
    }
}

pub fn cmd_cluster(a: &ClusterArgs) -> Result<Completion, CliError> {
    let loaded = load_input(&a.input)?;
    let ds = &loaded.table.data;
    let (res, inits, method, descent) = match a.method {
        MethodArg::Km => {
            let inits = a.fit.inits.unwrap_or_else(|| default_inits(a.k, ds.p()));
            (fit(ds, a.k, inits, a.fit.seed, &fit_config(&a.fit))?, inits, "km", None)
        }
        MethodArg::Kpod => {
            let cfg = KpodConfig {
                n_inits: a.fit.inits.unwrap_or(KpodConfig::default().n_inits),
                ..Default::default()
            };
            let out = kpod(ds, a.k, a.fit.seed, &cfg)?;
            (out.fit, cfg.n_inits, "kpod", Some(out.descent_violated))
        }
    };
    report_unanchored(&res);
    write_assignments(a.output.assignments.as_ref(), res.partition.labels())?;
    if let Some(path) = &a.output.summary {
        write_json(path, &summary(method, ds, &res, inits, &loaded, &a.input, &a.fit, descent))?;
    }
    Ok(completion(res.converged))
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

pub fn cmd_select_k(a: &SelectKArgs) -> Result<Completion, CliError> {
    let loaded = load_input(&a.input)?;
    let ds = &loaded.table.data;
    let cfg = SweepConfig {
        fit: fit_config(&a.fit),
        inits_per_k: a.fit.inits,
        inits_cap: a.inits_cap,
    };
    let sweep = select_k(ds, a.k_min, a.k_max, a.fit.seed, &cfg)?;
    for w in &sweep.warnings {
        eprintln!("warning: {w}");
    }
    if sweep.degenerate {
        eprintln!("note: a fit reached zero objective; K_hat is the smallest such K and jumps are not computed");
    }
    {
        let mut w = csv::Writer::from_writer(sink(a.table.as_ref())?);
        w.write_record(["K", "W_K", "D_K", "J_K"]).map_err(CliError::csv)?;
        for (idx, &k) in sweep.k_values.iter().enumerate() {
            let j = sweep.jumps.get(idx).map(|&j| fmt_num(j)).unwrap_or_default();
            w.write_record([k.to_string(), fmt_num(sweep.objectives[idx]), fmt_num(sweep.distortions[idx]), j])
                .map_err(CliError::csv)?;
        }
        w.flush().map_err(CliError::write)?;
    }
    eprintln!("K_hat = {}", sweep.k_hat);
    let best = sweep.best_fit();
    report_unanchored(best);
    if let Some(path) = &a.assignments {
        write_assignments(Some(path), best.partition.labels())?;
    }
    if let Some(path) = &a.summary {
        let inits = cfg.inits_for(sweep.k_hat, ds.p());
        write_json(path, &summary("km", ds, best, inits, &loaded, &a.input, &a.fit, None))?;
    }
    Ok(completion(sweep.fits.iter().all(|f| f.converged)))
}

fn missing_spec(s: &SimArgs, seed: u64) -> Result<MissingSpec, CliError> {
    let affected = if s.affected.is_empty() {
        None
    } else {
        if let Some(&bad) = s.affected.iter().find(|&&c| c == 0 || c > s.k) {
            return Err(CliError::Usage(format!("--affected cluster {bad} is outside 1..={}", s.k)));
        }
        Some(s.affected.iter().map(|c| c - 1).collect())
    };
    Ok(MissingSpec {
        mechanism: s.mechanism,
        lambda: s.lambda,
        mar_dim_fraction: s.mar_dim_fraction,
        affected_clusters: affected,
        seed,
    })
}

fn sim_spec(s: &SimArgs, seed: u64) -> SimSpec {
    SimSpec {
        sigma: s.sigma,
        ..SimSpec::new(s.k, s.n, s.p, s.separation, seed)
    }
}

#[derive(Serialize)]
struct MaskTruth {
    mechanism: kmmeans::simulate::Mechanism,
    requested_lambda: f64,
    realized_lambda: f64,
    mar_dim_fraction: f64,
    /// 1-based.
    censored_dims: Vec<usize>,
    /// 1-based.
    affected_clusters: Vec<usize>,
    /// 1-based rows given back a cell so they are not empty.
    repaired_rows: Vec<usize>,
}

#[derive(Serialize)]
struct Truth {
    schema_version: u32,
    spec: SimSpec,
    missingness: MaskTruth,
    realized_lambda: f64,
    centers: Vec<Vec<f64>>,
    /// 1-based cluster of each row.
    labels: Vec<usize>,
}

fn one_based(xs: &[usize]) -> Vec<usize> {
    xs.iter().map(|x| x + 1).collect()
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Completion, CliError> {
    let spec = sim_spec(&a.sim, a.seed);
    let miss = missing_spec(&a.sim, a.seed)?;
    let data = generate_clusters(&spec)?;
    let mask = apply_missingness(&data, &miss)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| CliError::Output(format!("{}: {e}", a.out_dir.display())))?;
    let opts = csv_options(&a.csv, true)?;
    let names: Vec<String> = (1..=spec.p).map(|j| format!("V{j}")).collect();
    let complete = Table {
        names: names.clone(),
        data: data.complete_dataset(),
    };
    write_csv(create(&a.out_dir.join("complete.csv"))?, &complete, &opts)?;
    let masked = Table {
        names,
        data: data.dataset(mask.mask.clone())?,
    };
    write_csv(create(&a.out_dir.join("masked.csv"))?, &masked, &opts)?;
    write_assignments(Some(&a.out_dir.join("labels.csv")), &data.labels)?;
    let truth = Truth {
        schema_version: SCHEMA_VERSION,
        spec: spec.clone(),
        missingness: MaskTruth {
            mechanism: miss.mechanism,
            requested_lambda: mask.requested_lambda,
            realized_lambda: mask.realized_lambda,
            mar_dim_fraction: miss.mar_dim_fraction,
            censored_dims: one_based(&mask.censored_dims),
            affected_clusters: one_based(&mask.affected_clusters),
            repaired_rows: one_based(&mask.repaired_rows),
        },
        realized_lambda: mask.realized_lambda,
        centers: data.centers.chunks(spec.p).map(<[f64]>::to_vec).collect(),
        labels: one_based(&data.labels),
    };
    write_json(&a.out_dir.join("truth.json"), &truth)?;
    eprintln!(
        "wrote {} rows to {} (realized missing fraction {:.4})",
        spec.n,
        a.out_dir.display(),
        mask.realized_lambda
    );
    Ok(Completion::Done)
}

/// Maps label strings to dense codes, ordered numerically when every label is
/// an integer and lexicographically otherwise.
fn encode(labels: &[String]) -> (Vec<usize>, Vec<String>) {
    let numeric: Option<Vec<i64>> = labels.iter().map(|l| l.parse().ok()).collect();
    let mut distinct: Vec<String> = labels.to_vec();
    match &numeric {
        Some(_) => distinct.sort_by_key(|l| l.parse::<i64>().unwrap()),
        None => distinct.sort(),
    }
    distinct.dedup();
    let index: BTreeMap<&str, usize> = distinct.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    (labels.iter().map(|l| index[l.as_str()]).collect(), distinct)
}

#[derive(Serialize)]
struct Evaluation {
    #[serde(rename = "ARI")]
    ari: f64,
    n: usize,
    predicted_labels: Vec<String>,
    true_labels: Vec<String>,
    /// Rows follow `predicted_labels`, columns `true_labels`.
    confusion: Vec<Vec<u64>>,
}

pub fn cmd_evaluate(a: &EvaluateArgs) -> Result<Completion, CliError> {
    let d = delimiter_byte(a.delimiter)?;
    let header = if a.no_header { Some(false) } else { None };
    let truth = read_labels(&a.truth, d, header)?;
    let pred = read_labels(&a.predicted, d, header)?;
    if truth.len() != pred.len() {
        return Err(CliError::Data(format!(
            "label files differ in length ({} truth vs {} predicted)",
            truth.len(),
            pred.len()
        )));
    }
    let (t, t_names) = encode(&truth);
    let (p, p_names) = encode(&pred);
    let ari = adjusted_rand(&t, &p)?;
    let table = Contingency::new(&p, &t)?;
    let width = table
        .counts
        .iter()
        .flatten()
        .map(|c| c.to_string().len())
        .chain(t_names.iter().chain(&p_names).map(String::len))
        .max()
        .unwrap_or(1)
        + 2;
    let mut out = io::stdout().lock();
    let mut emit = || -> io::Result<()> {
        writeln!(out, "ARI\t{ari}")?;
        writeln!(out, "confusion matrix (rows = predicted, columns = truth)")?;
        write!(out, "{:>width$}", "")?;
        for name in &t_names {
            write!(out, "{name:>width$}")?;
        }
        writeln!(out)?;
        for (name, row) in p_names.iter().zip(&table.counts) {
            write!(out, "{name:>width$}")?;
            for c in row {
                write!(out, "{c:>width$}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    };
    emit().map_err(CliError::write)?;
    if let Some(path) = &a.json {
        write_json(
            path,
            &Evaluation {
                ari,
                n: t.len(),
                predicted_labels: p_names,
                true_labels: t_names,
                confusion: table.counts,
            },
        )?;
    }
    Ok(Completion::Done)
}

pub fn cmd_experiment(a: &ExperimentArgs) -> Result<Completion, CliError> {
    let cfg = ExperimentConfig {
        sim: sim_spec(&a.sim, 0),
        missing: missing_spec(&a.sim, 0)?,
        master_seed: a.master_seed,
        km_inits: a.km_inits,
        kpod_inits: a.kpod_inits,
        select_k_max: a.select_k_max,
        fit: FitConfig {
            parallel: false,
            ..Default::default()
        },
    };
    let records = run_experiment(&cfg, a.replicates, !a.serial)?;
    let mut w = sink(a.output.as_ref())?;
    for r in &records {
        serde_json::to_writer(&mut w, r).map_err(|e| CliError::Output(e.to_string()))?;
        writeln!(w).map_err(CliError::write)?;
    }
    w.flush().map_err(CliError::write)?;
    Ok(completion(records.iter().all(|r| r.converged)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_by_name_or_position() {
        let names: Vec<String> = vec!["a".into(), "2".into(), "c".into()];
        assert_eq!(resolve_column(&names, "c").unwrap(), 2);
        // A name wins over a position.
        assert_eq!(resolve_column(&names, "2").unwrap(), 1);
        assert_eq!(resolve_column(&names, "3").unwrap(), 2);
        assert!(resolve_column(&names, "4").is_err());
        assert!(resolve_column(&names, "zz").is_err());
    }

    #[test]
    fn label_encoding_orders_numbers_numerically() {
        let labels: Vec<String> = ["10", "2", "2", "1"].iter().map(|s| s.to_string()).collect();
        let (codes, names) = encode(&labels);
        assert_eq!(names, vec!["1", "2", "10"]);
        assert_eq!(codes, vec![2, 1, 1, 0]);
        let labels: Vec<String> = ["b", "a", "b"].iter().map(|s| s.to_string()).collect();
        assert_eq!(encode(&labels).0, vec![1, 0, 1]);
    }

    #[test]
    fn delimiters() {
        assert_eq!(delimiter_byte('\t').unwrap(), b'\t');
        assert!(delimiter_byte('é').is_err());
    }
}
