//! Run configuration: config-file expansion, method parameters and the
//! record echoed into every report.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use permkit::index::{AccumulatorMetric, Gamma, MethodConfig, PermDistance, PermMode, PrunerParams};
use permkit::io::DataFormat;
use permkit::spaces::QueryMode;
use permkit::SpaceKind;
use serde::{Deserialize, Serialize};

use crate::cli::{DataArgs, MethodArgs};
use crate::error::CliError;

/// Everything that determines the output of one invocation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub config_file: Option<PathBuf>,
    pub space: Option<SpaceKind>,
    pub query_mode: Option<QueryMode>,
    pub methods: Vec<MethodConfig>,
    pub data: Option<PathBuf>,
    pub format: Option<String>,
    pub queries: Option<PathBuf>,
    pub index: Option<PathBuf>,
    pub k: Option<usize>,
    pub seed: u64,
    pub outputs: BTreeMap<String, PathBuf>,
    /// Command-specific settings.
    pub options: serde_json::Value,
}

impl RunConfig {
    pub fn new(command: &str, config_file: Option<PathBuf>, seed: u64) -> Self {
        RunConfig {
            command: command.to_string(),
            config_file,
            space: None,
            query_mode: None,
            methods: Vec::new(),
            data: None,
            format: None,
            queries: None,
            index: None,
            k: None,
            seed,
            outputs: BTreeMap::new(),
            options: serde_json::Value::Null,
        }
    }

    /// Record of the data-related options of a command.
    pub fn with_data(command: &str, data: &DataArgs, kind: SpaceKind, mode: QueryMode) -> Self {
        let mut rc = RunConfig::new(command, data.config.clone(), data.seed);
        rc.space = Some(kind);
        rc.query_mode = (!kind.is_symmetric()).then_some(mode);
        rc.data = data.data.clone();
        rc.format = data.format.clone();
        rc.k = Some(data.k);
        rc
    }
}

/// Report wrapper: the run configuration and library version next to the
/// command's payload.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub run_config: &'a RunConfig,
    pub library_version: &'static str,
    #[serde(flatten)]
    pub body: T,
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(run_config: &'a RunConfig, body: T) -> Self {
        Report {
            run_config,
            library_version: permkit::VERSION,
            body,
        }
    }
}

/// Finds `--config <path>` (or `--config=<path>`) in the raw arguments and
/// splices the file's keys in as options right after the subcommand name,
/// so that flags given on the command line, which come later, win.
pub fn expand_config_file(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    for (i, a) in args.iter().enumerate() {
        let a = a.to_string_lossy();
        if a == "--config" {
            path = args.get(i + 1).map(PathBuf::from);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let tokens = config_tokens(&path)?;
    let Some(sub) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let at = sub + 2;
    let mut out = args[..at].to_vec();
    out.extend(tokens.into_iter().map(OsString::from));
    out.extend_from_slice(&args[at..]);
    Ok(out)
}

fn config_tokens(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let table: toml::Table =
        toml::from_str(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let mut tokens = Vec::new();
    for (key, value) in table {
        if key == "config" {
            return Err(CliError::usage(format!("{}: nested `config` is not allowed", path.display())));
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &toml::Value| -> Result<String, CliError> {
            match v {
                toml::Value::String(s) => Ok(s.clone()),
                toml::Value::Integer(i) => Ok(i.to_string()),
                toml::Value::Float(f) => Ok(f.to_string()),
                _ => Err(CliError::usage(format!(
                    "{}: key `{key}` must be a string, number, boolean or flat list",
                    path.display()
                ))),
            }
        };
        match &value {
            toml::Value::Boolean(true) => tokens.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts = items.iter().map(scalar).collect::<Result<Vec<_>, _>>()?;
                tokens.push(flag);
                tokens.push(parts.join(","));
            }
            v => {
                tokens.push(flag);
                tokens.push(scalar(v)?);
            }
        }
    }
    Ok(tokens)
}

pub fn parse_space(args: &DataArgs) -> Result<(SpaceKind, QueryMode), CliError> {
    let kind: SpaceKind = args.space.parse().map_err(CliError::usage_from)?;
    let mode: QueryMode = args.query_mode.parse().map_err(CliError::usage_from)?;
    Ok((kind, mode))
}

pub fn parse_format(args: &DataArgs, kind: SpaceKind) -> Result<DataFormat, CliError> {
    match &args.format {
        Some(f) => f.parse().map_err(CliError::usage_from),
        None => Ok(DataFormat::default_for(kind)),
    }
}

/// Comma-separated method names resolved to full configurations: the
/// method's defaults overridden by any parameter that applies to it.
pub fn resolve_methods(args: &MethodArgs, kind: SpaceKind) -> Result<Vec<MethodConfig>, CliError> {
    let Some(list) = &args.method else {
        return Err(CliError::usage_with_help("missing --method"));
    };
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| {
            let base = MethodConfig::default_for(name).ok_or_else(|| {
                CliError::usage_with_help(format!(
                    "unknown method `{name}` (expected one of: {})",
                    MethodConfig::NAMES.join(", ")
                ))
            })?;
            apply_params(base, args, kind)
        })
        .collect()
}

pub fn resolve_single_method(args: &MethodArgs, kind: SpaceKind) -> Result<MethodConfig, CliError> {
    let mut methods = resolve_methods(args, kind)?;
    if methods.len() != 1 {
        return Err(CliError::usage_with_help("exactly one --method is required"));
    }
    Ok(methods.remove(0))
}

pub fn parse<T: std::str::FromStr<Err = permkit::Error>>(v: &Option<String>) -> Result<Option<T>, CliError> {
    v.as_deref().map(str::parse).transpose().map_err(CliError::usage_from)
}

fn apply_params(base: MethodConfig, a: &MethodArgs, kind: SpaceKind) -> Result<MethodConfig, CliError> {
    let gamma: Option<Gamma> = parse(&a.gamma)?;
    let perm_distance: Option<PermDistance> = parse(&a.perm_distance)?;
    let metric: Option<AccumulatorMetric> = parse(&a.metric)?;
    Ok(match base {
        MethodConfig::BruteForce => MethodConfig::BruteForce,
        MethodConfig::PermFilter {
            m,
            mode,
            gamma: g,
            distance,
        } => {
            let mode = match a.mode.as_deref() {
                None if a.threshold.is_some() => PermMode::Binary { threshold: a.threshold },
                None => mode,
                Some("full") => PermMode::Full,
                Some("binary") => PermMode::Binary { threshold: a.threshold },
                Some(other) => return Err(CliError::usage(format!("unknown permutation mode `{other}`"))),
            };
            MethodConfig::PermFilter {
                m: a.m.unwrap_or(m),
                mode,
                gamma: gamma.unwrap_or(g),
                distance: perm_distance.or(distance),
            }
        }
        MethodConfig::MiFile {
            m,
            m_i,
            m_s,
            max_position_diff,
            gamma: g,
            metric: mt,
        } => {
            let m_i = a.m_i.unwrap_or(m_i);
            MethodConfig::MiFile {
                m: a.m.unwrap_or(m),
                m_i,
                m_s: a.m_s.unwrap_or(m_s.min(m_i)),
                max_position_diff: a.max_position_diff.or(max_position_diff),
                gamma: gamma.unwrap_or(g),
                metric: metric.unwrap_or(mt),
            }
        }
        MethodConfig::Napp {
            m,
            m_i,
            t,
            gamma: g,
            chunk_size,
        } => MethodConfig::Napp {
            m: a.m.unwrap_or(m),
            m_i: a.m_i.unwrap_or(m_i),
            t: a.t.unwrap_or(t),
            gamma: gamma.or(g),
            chunk_size: a.chunk_size.unwrap_or(chunk_size),
        },
        MethodConfig::VpTree { bucket_size, .. } => MethodConfig::VpTree {
            bucket_size: a.bucket_size.unwrap_or(bucket_size),
            pruner: PrunerParams {
                alpha_left: a.alpha_left.unwrap_or(1.0),
                alpha_right: a.alpha_right.unwrap_or(1.0),
                beta: a.beta.unwrap_or(kind.default_pruner_beta()),
            },
        },
        MethodConfig::SwGraph {
            nn,
            build_attempts,
            search_attempts,
        } => MethodConfig::SwGraph {
            nn: a.nn.unwrap_or(nn),
            build_attempts: a.build_attempts.unwrap_or(build_attempts),
            search_attempts: a.attempts.unwrap_or(search_attempts),
        },
    })
}

pub fn parse_band(s: &str) -> Result<(f64, f64), CliError> {
    let bad = || CliError::usage(format!("invalid recall band `{s}` (expected LOW,HIGH)"));
    let (lo, hi) = s.split_once(',').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    if !(0.0..=1.0).contains(&lo) || hi < lo {
        return Err(bad());
    }
    Ok((lo, hi))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::usage(format!("invalid number `{x}`"))))
        .collect()
}
