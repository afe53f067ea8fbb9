//! Command-line grammar and its validation into a [`CommandPlan`].

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use deformq_core::graphs::DEFAULT_ENUMERATION_CAP;
use deformq_core::star::{StarOptions, WeightSource};
use deformq_core::weights::{parse_weight_file, WeightTable, MAX_PRECISION_DIGITS};
use deformq_core::{AdmissibleGraph, MultidiffOperator, MultivectorField, Polynomial};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "deformq", version, about = "Kontsevich star products, graph weights and brackets")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// List the admissible graphs of one order in canonical order.
    Graphs {
        #[arg(long)]
        order: usize,
        /// Refuse orders above this.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Weight of one graph, exact or by Monte-Carlo.
    Weight {
        /// Graph in the `n; a b; …` encoding.
        #[arg(long)]
        graph: String,
        /// Monte-Carlo estimate with the given sample count and seed.
        #[arg(long, num_args = 2, value_names = ["SAMPLES", "SEED"], conflicts_with = "exact")]
        mc: Option<Vec<u64>>,
        /// Exact value (the default).
        #[arg(long)]
        exact: bool,
        /// Extra exact weights, one `graph | value` per line.
        #[arg(long)]
        weights_file: Option<PathBuf>,
        /// Significant digits of the numeric value of an exact weight.
        #[arg(long, default_value_t = 12)]
        precision: u32,
    },
    /// Build a star product and print it, or apply it to two polynomials.
    Star {
        #[command(flatten)]
        star: StarArgs,
        /// Evaluate `f ⋆ g` instead of printing the operators.
        #[arg(long, num_args = 2, value_names = ["F", "G"])]
        apply: Option<Vec<String>>,
    },
    /// Check associativity and the order-1 normalization of a star product.
    Verify {
        #[command(flatten)]
        star: StarArgs,
        /// Largest monomial degree used in the sampled check.
        #[arg(long, default_value_t = 2)]
        degree_cap: u32,
    },
    /// Bracket and differential utilities on serialized inputs.
    Brackets {
        #[command(subcommand)]
        op: BracketCommand,
    },
}

#[derive(Args, Debug)]
pub struct StarArgs {
    /// Poisson structure file: a `dim: N` line, then a multivector term list.
    #[arg(long)]
    pub pi: PathBuf,
    /// Truncation order in ħ.
    #[arg(long)]
    pub order: usize,
    /// Use ½π so that the skew part of B₁ is ½{·,·}.
    #[arg(long)]
    pub dirac: bool,
    /// Accept a bivector that is not Poisson.
    #[arg(long)]
    pub allow_non_poisson: bool,
    /// Extra exact weights for orders above 2.
    #[arg(long, conflicts_with = "mc")]
    pub weights_file: Option<PathBuf>,
    /// Use Monte-Carlo weights (sample count, seed) instead of exact ones.
    #[arg(long, num_args = 2, value_names = ["SAMPLES", "SEED"])]
    pub mc: Option<Vec<u64>>,
}

/// Operands are term lists, or `@path` to read one from a file.
#[derive(Subcommand, Debug)]
pub enum BracketCommand {
    /// Schouten–Nijenhuis bracket of two multivector fields.
    Schouten {
        #[arg(long)]
        dim: usize,
        a: String,
        b: String,
    },
    /// Gerstenhaber bracket of two multidifferential operators.
    Gerstenhaber {
        #[arg(long)]
        dim: usize,
        a: String,
        b: String,
    },
    /// Hochschild differential of a multidifferential operator.
    HochschildD {
        #[arg(long)]
        dim: usize,
        a: String,
    },
    /// HKR image of a multivector field.
    Hkr {
        #[arg(long)]
        dim: usize,
        a: String,
    },
}

/// A fully validated invocation.
#[derive(Debug)]
pub struct CommandPlan {
    pub format: Format,
    pub command: Command,
}

#[derive(Debug)]
pub enum Command {
    Graphs {
        order: usize,
        cap: usize,
    },
    Weight {
        graph: AdmissibleGraph,
        method: WeightMethod,
        extra: WeightTable,
        precision: u32,
    },
    Star {
        star: StarPlan,
        apply: Option<(Polynomial, Polynomial)>,
    },
    Verify {
        star: StarPlan,
        degree_cap: u32,
    },
    Bracket(BracketPlan),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeightMethod {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug)]
pub struct StarPlan {
    pub pi: MultivectorField,
    pub order: usize,
    pub source: WeightSource,
    pub options: StarOptions,
}

#[derive(Debug)]
pub enum BracketPlan {
    Schouten(MultivectorField, MultivectorField),
    Gerstenhaber(MultidiffOperator, MultidiffOperator),
    HochschildD(MultidiffOperator),
    Hkr(MultivectorField),
}

impl BracketPlan {
    pub fn name(&self) -> &'static str {
        match self {
            BracketPlan::Schouten(..) => "schouten",
            BracketPlan::Gerstenhaber(..) => "gerstenhaber",
            BracketPlan::HochschildD(..) => "hochschild-d",
            BracketPlan::Hkr(..) => "hkr",
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn operand(src: &str) -> Result<String, CliError> {
    match src.strip_prefix('@') {
        Some(path) => read(Path::new(path)),
        None => Ok(src.to_string()),
    }
}

fn mc_pair(v: &[u64]) -> Result<(u64, u64), CliError> {
    match v {
        [0, _] => Err(CliError::Usage("--mc needs a positive sample count".into())),
        [samples, seed] => Ok((*samples, *seed)),
        _ => Err(CliError::Usage("--mc takes SAMPLES SEED".into())),
    }
}

/// Poisson structure file: blank lines and `#` comments are ignored, the
/// first line is `dim: N`, the rest is one multivector term list.
pub fn parse_pi_file(src: &str) -> Result<MultivectorField, CliError> {
    let mut dim = None;
    let mut body = Vec::new();
    for (no, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if dim.is_none() {
            let n = line
                .strip_prefix("dim:")
                .and_then(|d| d.trim().parse::<usize>().ok())
                .filter(|&d| d > 0)
                .ok_or_else(|| CliError::PiFile {
                    line: no + 1,
                    message: format!("expected 'dim: N' with N ≥ 1, found {line:?}"),
                })?;
            dim = Some(n);
        } else {
            body.push(line);
        }
    }
    let dim = dim.ok_or_else(|| CliError::PiFile {
        line: 1,
        message: "empty file; expected 'dim: N' followed by a bivector".into(),
    })?;
    if body.is_empty() {
        return Err(CliError::PiFile {
            line: src.lines().count().max(1),
            message: "missing bivector after the dim line".into(),
        });
    }
    let pi = MultivectorField::parse(dim, &body.join(" "))?;
    if pi.degree() != 2 && !pi.is_zero() {
        return Err(CliError::Usage(format!("the structure has degree {}, expected a bivector", pi.degree())));
    }
    Ok(pi)
}

fn star_plan(a: StarArgs) -> Result<StarPlan, CliError> {
    let pi = parse_pi_file(&read(&a.pi)?)?;
    let source = match (&a.mc, &a.weights_file) {
        (Some(v), _) => {
            let (samples, seed) = mc_pair(v)?;
            WeightSource::MonteCarlo { samples, seed }
        }
        (None, Some(path)) => WeightSource::Exact(parse_weight_file(&read(path)?)?),
        (None, None) => WeightSource::builtin(),
    };
    Ok(StarPlan {
        pi,
        order: a.order,
        source,
        options: StarOptions {
            allow_non_poisson: a.allow_non_poisson,
            dirac: a.dirac,
        },
    })
}

impl CommandPlan {
    /// Validate every parameter and read every input before any computation.
    pub fn new(cli: Cli) -> Result<Self, CliError> {
        let command = match cli.command {
            CliCommand::Graphs { order, cap } => {
                if order > cap {
                    return Err(CliError::Usage(format!("order {order} is above the cap {cap}; raise --cap")));
                }
                Command::Graphs { order, cap }
            }
            CliCommand::Weight {
                graph,
                mc,
                exact: _,
                weights_file,
                precision,
            } => {
                let graph = AdmissibleGraph::decode(&graph)?;
                let method = match mc {
                    Some(v) => {
                        let (samples, seed) = mc_pair(&v)?;
                        WeightMethod::MonteCarlo { samples, seed }
                    }
                    None => WeightMethod::Exact,
                };
                if precision == 0 || precision > MAX_PRECISION_DIGITS {
                    return Err(CliError::Usage(format!(
                        "--precision must be between 1 and {MAX_PRECISION_DIGITS}"
                    )));
                }
                let extra = match weights_file {
                    Some(p) => parse_weight_file(&read(&p)?)?,
                    None => WeightTable::default(),
                };
                Command::Weight {
                    graph,
                    method,
                    extra,
                    precision,
                }
            }
            CliCommand::Star { star, apply } => {
                let star = star_plan(star)?;
                let apply = match apply {
                    Some(v) => {
                        let dim = star.pi.dim();
                        Some((Polynomial::parse(dim, &v[0])?, Polynomial::parse(dim, &v[1])?))
                    }
                    None => None,
                };
                Command::Star { star, apply }
            }
            CliCommand::Verify { star, degree_cap } => Command::Verify {
                star: star_plan(star)?,
                degree_cap,
            },
            CliCommand::Brackets { op } => Command::Bracket(match op {
                BracketCommand::Schouten { dim, a, b } => BracketPlan::Schouten(
                    MultivectorField::parse(dim, &operand(&a)?)?,
                    MultivectorField::parse(dim, &operand(&b)?)?,
                ),
                BracketCommand::Gerstenhaber { dim, a, b } => BracketPlan::Gerstenhaber(
                    MultidiffOperator::parse(dim, &operand(&a)?)?,
                    MultidiffOperator::parse(dim, &operand(&b)?)?,
                ),
                BracketCommand::HochschildD { dim, a } => {
                    BracketPlan::HochschildD(MultidiffOperator::parse(dim, &operand(&a)?)?)
                }
                BracketCommand::Hkr { dim, a } => BracketPlan::Hkr(MultivectorField::parse(dim, &operand(&a)?)?),
            }),
        };
        Ok(CommandPlan {
            format: cli.format,
            command,
        })
    }
}
