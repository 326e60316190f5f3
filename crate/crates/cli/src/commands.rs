use std::fs;
use std::path::Path;

use dcorgraph::estimator::{auto_thresholds, estimate, estimation_path, RidgeConfig};
use dcorgraph::graph::parse_edge_list;
use dcorgraph::pipeline::{
    format_matrix_csv, format_number, log_ratio_transform, read_csv, standardize, write_text,
    ColumnSelection, NumericTable, PriceTable,
};
use dcorgraph::random_graphs::{
    derive_seed, determinant_experiment, erdos_renyi, sample_linear_data, ColumnDistribution,
    DeterminantConfig, ErdosRenyiSpec, LinearDataSpec, NoiseKind,
};
use dcorgraph::{threshold_for_edge_count, threshold_graph, Adjacency, Dataset, ErrorKind};
use serde::Serialize;

use crate::args::{
    BenchDetArgs, Distribution, EstimateArgs, EvalArgs, InputArgs, Noise, SimulateArgs,
    ThresholdMatrix, TransformArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(dcorgraph::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Lib(e) => match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            },
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self.exit_code() {
            1 => "usage",
            2 => "data",
            _ => "numerical",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<dcorgraph::Error> for CliError {
    fn from(e: dcorgraph::Error) -> Self {
        CliError::Lib(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Common envelope for every JSON summary.
#[derive(Serialize)]
struct Summary<'a, C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a C,
    warnings: Vec<String>,
    result: R,
}

fn write_summary<C: Serialize, R: Serialize>(
    dir: &Path,
    file: &str,
    command: &'static str,
    config: &C,
    warnings: Vec<String>,
    result: R,
) -> CliResult<()> {
    let summary = Summary {
        tool: "dcorgraph",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        warnings,
        result,
    };
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Usage(format!("serializing summary: {e}")))?;
    text.push('\n');
    write_text(dir.join(file), &text)?;
    Ok(())
}

fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Lib(dcorgraph::Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })
    })
}

fn delimiter_byte(c: char) -> CliResult<u8> {
    u8::try_from(c).ok().filter(u8::is_ascii).ok_or_else(|| {
        CliError::Usage(format!(
            "delimiter must be a single ASCII character, got {c:?}"
        ))
    })
}

fn load_table(input: &InputArgs) -> CliResult<NumericTable> {
    let table = read_csv(&input.input, input.header, delimiter_byte(input.delimiter)?)?;
    match &input.select {
        Some(spec) => Ok(table.select(&ColumnSelection::parse(spec)?)?),
        None => Ok(table),
    }
}

fn parse_thresholds(spec: &str) -> CliResult<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Usage(format!("bad threshold {s:?}")))
        })
        .collect()
}

#[derive(Serialize)]
struct EstimateResult {
    n: usize,
    p: usize,
    ridge_applied: f64,
    threshold_matrix: ThresholdMatrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    tp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    edge_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<PathSummary>,
}

#[derive(Serialize)]
struct PathSummary {
    thresholds: Vec<f64>,
    edge_counts: Vec<usize>,
}

pub fn estimate_cmd(args: &EstimateArgs) -> CliResult<()> {
    let ridge = RidgeConfig::new(args.ridge_step, args.ridge_max)?;
    let data = load_table(&args.input)?.into_dataset()?;
    ensure_dir(&args.output_dir)?;
    let out = &args.output_dir;

    let est = estimate(&data, ridge)?;
    let labels = data.labels_or_default();
    let mut warnings: Vec<String> = est
        .dcor
        .constant_columns()
        .iter()
        .map(|&j| {
            format!(
                "column {} is constant; its distance correlations are 0",
                data.column_label(j)
            )
        })
        .collect();
    if est.inverse.ridge_applied > 0.0 {
        warnings.push(format!(
            "distance-correlation matrix was numerically singular; ridge {} added to the diagonal",
            est.inverse.ridge_applied
        ));
    }

    write_text(
        out.join("dcor.csv"),
        &format_matrix_csv(est.dcor.entries(), Some(&labels)),
    )?;
    write_text(
        out.join("partial.csv"),
        &format_matrix_csv(est.partial.entries(), Some(&labels)),
    )?;

    let scores = match args.threshold_matrix {
        ThresholdMatrix::Partial => est.partial.entries(),
        ThresholdMatrix::Dcor => est.dcor.entries(),
    };
    let mut result = EstimateResult {
        n: data.n(),
        p: data.p(),
        ridge_applied: est.inverse.ridge_applied,
        threshold_matrix: args.threshold_matrix,
        tp: None,
        k: None,
        edge_count: None,
        path: None,
    };

    let write_graph = |g: &Adjacency, stem: &str, header: Vec<String>| -> CliResult<()> {
        write_text(out.join(format!("{stem}.edges")), &g.to_edge_list(&header))?;
        write_text(out.join(format!("{stem}.dot")), &g.to_dot(Some(&labels)))?;
        Ok(())
    };

    if let Some(tp) = args.tp {
        let g = threshold_graph(scores, tp)?;
        write_graph(&g, "graph", vec![format!("tp: {}", format_number(tp))])?;
        result.tp = Some(tp);
        result.edge_count = Some(g.edge_count());
    } else if let Some(k) = args.edges {
        let (tp, g) = threshold_for_edge_count(scores, k)?;
        write_graph(&g, "graph", vec![format!("edges: {k}")])?;
        result.tp = Some(tp);
        result.k = Some(k);
        result.edge_count = Some(g.edge_count());
    } else if let Some(spec) = &args.thresholds {
        let thresholds = if spec.trim() == "auto" {
            auto_thresholds(scores, 40, 0.05)?
        } else {
            parse_thresholds(spec)?
        };
        let path = estimation_path(scores, &thresholds)?;
        let mut table = String::from("index,threshold,edges\n");
        for (i, (g, t)) in path.graphs.iter().zip(&path.thresholds).enumerate() {
            table.push_str(&format!("{i},{},{}\n", format_number(*t), g.edge_count()));
            write_graph(
                g,
                &format!("path_{i:03}"),
                vec![format!("tp: {}", format_number(*t))],
            )?;
        }
        write_text(out.join("path.csv"), &table)?;
        result.path = Some(PathSummary {
            thresholds: path.thresholds,
            edge_counts: path.edge_counts,
        });
    }

    write_summary(out, "summary.json", "estimate", args, warnings, result)
}

/// File stems written by `simulate` for a given seed.
pub fn simulate_file_names(seed: u64) -> (String, String) {
    (
        format!("truth_seed{seed}.edges"),
        format!("data_seed{seed}.csv"),
    )
}

#[derive(Serialize)]
struct SimulateResult {
    edges: usize,
    data_seed: u64,
    truth_file: String,
    data_file: String,
}

pub fn simulate_cmd(args: &SimulateArgs) -> CliResult<()> {
    let (low, high) = args
        .coef_range
        .split_once(',')
        .and_then(|(a, b)| Some((a.trim().parse().ok()?, b.trim().parse().ok()?)))
        .ok_or_else(|| CliError::Usage(format!("bad --coef-range {:?}", args.coef_range)))?;
    let er = ErdosRenyiSpec::new(args.nodes, args.avg_degree, args.seed)?;
    let spec = LinearDataSpec {
        n: args.samples,
        coef_low: low,
        coef_high: high,
        noise_sd: args.noise_sd,
        noise: match args.noise {
            Noise::Gaussian => NoiseKind::Gaussian,
            Noise::Uniform => NoiseKind::Uniform,
        },
        seed: derive_seed(args.seed, &[1]),
    };
    let truth = erdos_renyi(&er)?;
    let data = sample_linear_data(&truth, &spec)?;

    ensure_dir(&args.output_dir)?;
    let (truth_file, data_file) = simulate_file_names(args.seed);
    let header = vec![
        format!("seed: {}", args.seed),
        format!("avg_degree: {}", args.avg_degree),
    ];
    write_text(
        args.output_dir.join(&truth_file),
        &truth.to_edge_list(&header),
    )?;
    write_dataset(&args.output_dir.join(&data_file), &data)?;
    let result = SimulateResult {
        edges: truth.edge_count(),
        data_seed: spec.seed,
        truth_file,
        data_file,
    };
    write_summary(
        &args.output_dir,
        "simulate.json",
        "simulate",
        args,
        vec![],
        result,
    )
}

fn write_dataset(path: &Path, data: &Dataset) -> CliResult<()> {
    let labels = data.labels_or_default();
    write_text(path, &format_matrix_csv(data.values(), Some(&labels)))?;
    Ok(())
}

#[derive(Serialize)]
struct EvalResult {
    nodes: usize,
    hamming: usize,
    truth_edges: usize,
    estimated_edges: usize,
    disagreements: Vec<(usize, usize)>,
}

fn read_graph(path: &Path, nodes: Option<usize>) -> CliResult<Adjacency> {
    let text = fs::read_to_string(path).map_err(|e| {
        CliError::Lib(dcorgraph::Error::Io {
            path: path.to_path_buf(),
            source: e,
        })
    })?;
    Ok(parse_edge_list(&text)?.to_adjacency(nodes)?)
}

pub fn eval_cmd(args: &EvalArgs) -> CliResult<()> {
    let truth = read_graph(&args.truth, args.nodes)?;
    let est = read_graph(&args.estimated, args.nodes)?;
    let disagreements = truth.disagreements(&est)?;
    ensure_dir(&args.output_dir)?;
    let result = EvalResult {
        nodes: truth.nodes(),
        hamming: disagreements.len(),
        truth_edges: truth.edge_count(),
        estimated_edges: est.edge_count(),
        disagreements,
    };
    write_summary(&args.output_dir, "eval.json", "eval", args, vec![], result)
}

/// `"2-5,8"` → `[2, 3, 4, 5, 8]`.
pub fn parse_dims(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Usage(format!("bad --dims {spec:?}"));
    let mut dims = Vec::new();
    for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                dims.extend(a..=b);
            }
            None => dims.push(item.parse().map_err(|_| bad())?),
        }
    }
    if dims.is_empty() {
        return Err(bad());
    }
    Ok(dims)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-inf".to_owned(), format_number)
}

pub fn bench_det_cmd(args: &BenchDetArgs) -> CliResult<()> {
    let distributions = match args.distribution {
        Distribution::Gaussian => vec![ColumnDistribution::Gaussian],
        Distribution::Uniform => vec![ColumnDistribution::Uniform],
        Distribution::Exponential => vec![ColumnDistribution::Exponential],
        Distribution::All => ColumnDistribution::ALL.to_vec(),
    };
    let cfg = DeterminantConfig {
        dims: parse_dims(&args.dims)?,
        n: args.samples,
        reps: args.reps,
        seed: args.seed,
        distributions,
    };
    let rows = determinant_experiment(&cfg)?;
    ensure_dir(&args.output_dir)?;
    let mut csv = String::from(
        "distribution,p,reps,mean_log_det_pearson,mean_log_det_dcor,pearson_singular,dcor_singular\n",
    );
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.distribution.name(),
            r.p,
            r.reps,
            fmt_opt(r.mean_log_det_pearson),
            fmt_opt(r.mean_log_det_dcor),
            r.pearson_singular,
            r.dcor_singular
        ));
    }
    write_text(args.output_dir.join("det.csv"), &csv)?;
    write_summary(
        &args.output_dir,
        "det.json",
        "bench-det",
        args,
        vec![],
        &rows,
    )
}

#[derive(Serialize)]
struct TransformResult {
    input_rows: usize,
    output_rows: usize,
    columns: usize,
}

pub fn transform_cmd(args: &TransformArgs) -> CliResult<()> {
    let table = load_table(&args.input)?;
    let prices = PriceTable::from_table(table)?;
    let returns = standardize(&log_ratio_transform(&prices)?)?;
    ensure_dir(&args.output_dir)?;
    write_dataset(&args.output_dir.join("returns.csv"), &returns)?;
    let result = TransformResult {
        input_rows: prices.time_points(),
        output_rows: returns.n(),
        columns: returns.p(),
    };
    write_summary(
        &args.output_dir,
        "transform.json",
        "transform",
        args,
        vec![],
        result,
    )
}
