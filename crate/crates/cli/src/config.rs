use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use qkernel_core::datasets::Target;
use qkernel_core::learners::Metric;
use qkernel_core::FeatureMapFamily;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    /// Only for `gram`: QKGM little-endian matrix plus a JSON sidecar.
    Binary,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Format::from_str_ci(s)
    }
}

impl Format {
    fn from_str_ci(s: &str) -> Result<Self, CliError> {
        <Format as ValueEnum>::from_str(s, true).map_err(CliError::Config)
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to built-in defaults.
#[derive(Args, Debug, Default, Clone)]
pub struct CommonArgs {
    /// Feature map: product-rx, iqp or evo
    #[arg(long)]
    pub map: Option<String>,
    /// Number of input features
    #[arg(long)]
    pub n: Option<usize>,
    /// Single bandwidth (shorthand for a one-element grid)
    #[arg(long)]
    pub c: Option<f64>,
    /// Comma-separated bandwidths; entries may be `a/n`, `a/sqrt(n)` or plain numbers
    #[arg(long = "c-grid")]
    pub c_grid: Option<String>,
    /// Comma-separated training-set sizes
    #[arg(long = "p-grid")]
    pub p_grid: Option<String>,
    #[arg(long)]
    pub ridge: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Output file (stdout when absent; required for binary)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Cap on worker threads
    #[arg(long)]
    pub threads: Option<usize>,
    /// Flat key=value file with defaults for any flag
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Regression target for synthetic data: gaussian, cos-last or zero
    #[arg(long)]
    pub target: Option<String>,
    /// Number of analytic levels to report
    #[arg(long = "top-m")]
    pub top_m: Option<usize>,
    /// Cross-validation folds
    #[arg(long)]
    pub folds: Option<usize>,
    /// Tuning metric: mse or accuracy
    #[arg(long)]
    pub metric: Option<String>,
    /// SVM box constraint
    #[arg(long = "svm-c")]
    pub svm_c: Option<f64>,
    /// Test points per learning-curve trial
    #[arg(long = "test-size")]
    pub test_size: Option<usize>,
    /// Labelled CSV (header, last column = label) instead of synthetic data
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Class mapped to +1 when --data is used
    #[arg(long = "class-a")]
    pub class_a: Option<f64>,
    /// Class mapped to -1 when --data is used
    #[arg(long = "class-b")]
    pub class_b: Option<f64>,
    /// Held-out test samples when --data is used
    #[arg(long = "test-p")]
    pub test_p: Option<usize>,
    /// Comma-separated feature counts for a scaling-exponent fit (tune)
    #[arg(long)]
    pub ns: Option<String>,
    /// Qubits for haar-check
    #[arg(long)]
    pub q: Option<usize>,
    /// Monte Carlo samples (haar-check) or spectrum sample size for theory
    #[arg(long)]
    pub samples: Option<usize>,
}

/// Fully resolved experiment parameters, echoed into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub map: FeatureMapFamily,
    pub n: usize,
    pub c_grid: Vec<f64>,
    pub p_grid: Vec<usize>,
    pub ridge: f64,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: Option<usize>,
    pub target: Target,
    pub top_m: usize,
    pub folds: usize,
    pub metric: Metric,
    pub svm_c: f64,
    pub test_size: usize,
    pub data: Option<PathBuf>,
    pub class_a: f64,
    pub class_b: f64,
    pub test_p: usize,
    pub ns: Vec<usize>,
    pub q: usize,
    pub samples: usize,
}

impl ExperimentConfig {
    pub fn defaults(command: &str) -> Self {
        Self {
            command: command.to_string(),
            map: FeatureMapFamily::ProductRx,
            n: 4,
            c_grid: vec![1.0],
            p_grid: vec![100],
            ridge: 0.0,
            seed: 0,
            trials: 1,
            out: None,
            format: Format::Csv,
            threads: None,
            target: Target::Gaussian,
            top_m: 20,
            folds: 5,
            metric: Metric::Mse,
            svm_c: 1.0,
            test_size: 2000,
            data: None,
            class_a: 0.0,
            class_b: 1.0,
            test_p: 100,
            ns: Vec::new(),
            q: 2,
            samples: 20_000,
        }
    }

    /// Defaults, overridden by the config file, overridden by flags.
    pub fn resolve(command: &str, args: &CommonArgs) -> Result<Self, CliError> {
        let mut cfg = Self::defaults(command);
        let mut raw: BTreeMap<String, String> = BTreeMap::new();
        if let Some(path) = &args.config {
            raw.extend(read_key_values(path)?);
        }
        let mut set = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                raw.insert(key.to_string(), v);
            }
        };
        set("map", args.map.clone());
        set("n", args.n.map(|v| v.to_string()));
        set("c-grid", args.c_grid.clone());
        set("c", args.c.map(|v| v.to_string()));
        set("p-grid", args.p_grid.clone());
        set("ridge", args.ridge.map(|v| v.to_string()));
        set("seed", args.seed.map(|v| v.to_string()));
        set("trials", args.trials.map(|v| v.to_string()));
        set("out", args.out.as_ref().map(|p| p.display().to_string()));
        set("format", args.format.map(|f| format!("{f:?}").to_lowercase()));
        set("threads", args.threads.map(|v| v.to_string()));
        set("target", args.target.clone());
        set("top-m", args.top_m.map(|v| v.to_string()));
        set("folds", args.folds.map(|v| v.to_string()));
        set("metric", args.metric.clone());
        set("svm-c", args.svm_c.map(|v| v.to_string()));
        set("test-size", args.test_size.map(|v| v.to_string()));
        set("data", args.data.as_ref().map(|p| p.display().to_string()));
        set("class-a", args.class_a.map(|v| v.to_string()));
        set("class-b", args.class_b.map(|v| v.to_string()));
        set("test-p", args.test_p.map(|v| v.to_string()));
        set("ns", args.ns.clone());
        set("q", args.q.map(|v| v.to_string()));
        set("samples", args.samples.map(|v| v.to_string()));
        // A flag-level --c overrides a file-level c-grid and vice versa.
        if args.c.is_some() && args.c_grid.is_none() {
            raw.remove("c-grid");
        }
        if args.c_grid.is_some() {
            raw.remove("c");
        }

        // n first: bandwidth expressions may refer to it.
        if let Some(v) = raw.get("n") {
            cfg.n = parse(v, "n")?;
        }
        for (key, value) in &raw {
            let v = value.as_str();
            match key.as_str() {
                "n" => {}
                "map" => cfg.map = v.parse().map_err(|e| CliError::Config(format!("{e}")))?,
                "c" => cfg.c_grid = vec![parse_bandwidth(v, cfg.n)?],
                "c-grid" => cfg.c_grid = parse_list(v, |s| parse_bandwidth(s, cfg.n))?,
                "p-grid" => cfg.p_grid = parse_list(v, |s| parse(s, "p-grid"))?,
                "ridge" => cfg.ridge = parse(v, key)?,
                "seed" => cfg.seed = parse(v, key)?,
                "trials" => cfg.trials = parse(v, key)?,
                "out" => cfg.out = Some(PathBuf::from(v)),
                "format" => cfg.format = Format::from_str_ci(v)?,
                "threads" => cfg.threads = Some(parse(v, key)?),
                "target" => cfg.target = v.parse().map_err(|e| CliError::Config(format!("{e}")))?,
                "top-m" => cfg.top_m = parse(v, key)?,
                "folds" => cfg.folds = parse(v, key)?,
                "metric" => cfg.metric = v.parse().map_err(|e| CliError::Config(format!("{e}")))?,
                "svm-c" => cfg.svm_c = parse(v, key)?,
                "test-size" => cfg.test_size = parse(v, key)?,
                "data" => cfg.data = Some(PathBuf::from(v)),
                "class-a" => cfg.class_a = parse(v, key)?,
                "class-b" => cfg.class_b = parse(v, key)?,
                "test-p" => cfg.test_p = parse(v, key)?,
                "ns" => cfg.ns = parse_list(v, |s| parse(s, "ns"))?,
                "q" => cfg.q = parse(v, key)?,
                "samples" => cfg.samples = parse(v, key)?,
                other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |m: String| Err(CliError::Config(m));
        if self.n == 0 {
            return fail("--n must be at least 1".into());
        }
        if self.c_grid.is_empty() {
            return fail("--c-grid is empty; pass at least one bandwidth".into());
        }
        if let Some(c) = self.c_grid.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return fail(format!("bandwidth {c} is outside [0, 1]"));
        }
        if self.p_grid.is_empty() || self.p_grid.contains(&0) {
            return fail("--p-grid needs one or more positive sample counts".into());
        }
        if self.trials == 0 {
            return fail("--trials must be at least 1".into());
        }
        if !(self.ridge >= 0.0) {
            return fail("--ridge must be ≥ 0".into());
        }
        if self.format == Format::Binary && (self.command != "gram" || self.out.is_none()) {
            return fail("--format binary is only available for `gram` with --out".into());
        }
        if self.threads == Some(0) {
            return fail("--threads must be at least 1".into());
        }
        Ok(())
    }
}

fn parse<T: FromStr>(v: &str, key: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.trim()
        .parse()
        .map_err(|e| CliError::Config(format!("invalid value `{v}` for `{key}`: {e}")))
}

fn parse_list<T>(v: &str, f: impl Fn(&str) -> Result<T, CliError>) -> Result<Vec<T>, CliError> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

/// Accepts `0.1`, `2/n`, `1/sqrt(n)` and `a/b` with numeric b.
pub fn parse_bandwidth(s: &str, n: usize) -> Result<f64, CliError> {
    let s = s.trim();
    let nf = n as f64;
    let denom = |d: &str| -> Result<f64, CliError> {
        match d.trim() {
            "n" => Ok(nf),
            "sqrt(n)" => Ok(nf.sqrt()),
            other => parse(other, "c"),
        }
    };
    match s.split_once('/') {
        Some((a, b)) => Ok(parse::<f64>(a, "c")? / denom(b)?),
        None => parse(s, "c"),
    }
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_key_values(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("{}:{}: expected key = value", path.display(), i + 1))
        })?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}
