//! Scenario files for `simulate`.
//!
//! ```text
//! # one design, three latent sizes
//! [scenario]
//! theta0 = 0.1
//! g = 24
//! s = 3
//! n = 1000, 10000, 100000
//! r = 300
//! seed = 42
//! ```
//!
//! Keys before the first `[scenario]` header form a scenario of their own.
//! `epsilon` is optional; a comma list for `n` runs a convergence sweep.

use std::collections::BTreeMap;

use super::CliError;
use crate::model::{ModelConfig, DEFAULT_EPSILON};

const REQUIRED: [&str; 6] = ["theta0", "g", "s", "n", "r", "seed"];
const OPTIONAL: [&str; 1] = ["epsilon"];

/// One `[scenario]` block, possibly sweeping several latent sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    /// Line of the section header (or of the first key).
    pub line: usize,
    pub theta0: f64,
    pub cfg: ModelConfig,
    pub n: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
}

struct Block {
    line: usize,
    values: BTreeMap<&'static str, (usize, String)>,
}

fn parse_error(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("config line {line}: {msg}"))
}

pub fn parse_config(text: &str) -> Result<Vec<ScenarioSpec>, CliError> {
    let mut blocks: Vec<Block> = Vec::new();
    let mut current: Option<Block> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| parse_error(lineno, "unterminated section header"))?
                .trim();
            if name != "scenario" {
                return Err(parse_error(lineno, format!("unknown section `[{name}]`")));
            }
            blocks.extend(current.take());
            current = Some(Block {
                line: lineno,
                values: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_error(lineno, "expected `key = value`"))?;
        let key = key.trim().to_ascii_lowercase();
        let key = REQUIRED
            .iter()
            .chain(OPTIONAL.iter())
            .copied()
            .find(|k| *k == key)
            .ok_or_else(|| parse_error(lineno, format!("unknown field `{key}`")))?;
        let block = current.get_or_insert_with(|| Block {
            line: lineno,
            values: BTreeMap::new(),
        });
        if let Some((first, _)) = block.values.get(key) {
            return Err(parse_error(
                lineno,
                format!("field `{key}` already set on line {first}"),
            ));
        }
        block.values.insert(key, (lineno, value.trim().to_string()));
    }
    blocks.extend(current);
    if blocks.is_empty() {
        return Err(CliError::Usage("config defines no scenario".into()));
    }
    blocks.iter().map(build).collect()
}

fn field<T: std::str::FromStr>(block: &Block, key: &str) -> Result<T, CliError> {
    let (line, value) = block.values.get(key).ok_or_else(|| {
        parse_error(
            block.line,
            format!("scenario is missing required field `{key}`"),
        )
    })?;
    value
        .parse()
        .map_err(|_| parse_error(*line, format!("field `{key}`: cannot parse `{value}`")))
}

fn build(block: &Block) -> Result<ScenarioSpec, CliError> {
    let theta0: f64 = field(block, "theta0")?;
    let g: f64 = field(block, "g")?;
    let s: f64 = field(block, "s")?;
    let replications: usize = field(block, "r")?;
    let seed: u64 = field(block, "seed")?;
    let epsilon = match block.values.get("epsilon") {
        Some(_) => field(block, "epsilon")?,
        None => DEFAULT_EPSILON,
    };

    let (n_line, n_text) = block
        .values
        .get("n")
        .ok_or_else(|| parse_error(block.line, "scenario is missing required field `n`"))?;
    let n = n_text
        .split(',')
        .map(|v| {
            let v = v.trim();
            // accepts 1e4 as well as 10000
            v.parse::<usize>().ok().or_else(|| {
                v.parse::<f64>()
                    .ok()
                    .filter(|f| f.fract() == 0.0 && *f >= 1.0 && *f < 1e15)
                    .map(|f| f as usize)
            })
        })
        .collect::<Option<Vec<usize>>>()
        .ok_or_else(|| parse_error(*n_line, format!("field `n`: cannot parse `{n_text}`")))?;

    let cfg = ModelConfig::new(g, s, epsilon).map_err(|e| parse_error(block.line, e))?;
    Ok(ScenarioSpec {
        line: block.line,
        theta0,
        cfg,
        n,
        replications,
        seed,
    })
}
