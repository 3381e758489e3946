use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use coalition_core::allocations::{
    harsanyi_allocate, pme, proportional_value, shapley_direct, shapley_dividends, shapley_permutation, weber_allocate,
    weber_monte_carlo, ExplicitPmf, PartialOrder, RandomOrderDistribution, WeightSystem,
};
use coalition_core::value_fns::{
    conditional_gaussian_game_with, conditional_mc_game, marginal_game, sobol_closed_game, sobol_total_game, ExprModel,
    GaussianSpec, Model, SobolMc, SobolOptions,
};
use coalition_core::{dual_game, efficiency_gap, Allocation, Game, EXACT_TOLERANCE};

use crate::error::{config, CliError, CliResult};
use crate::io;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueFn {
    Marginal,
    CondGauss,
    CondMc,
    SobolClosed,
    SobolTotal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Shapley,
    ShapleyPermutation,
    ShapleyDividends,
    Weber,
    WeberMc,
    Harsanyi,
    Proportional,
    Pme,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

/// Build or load a game, then allocate its surplus among the players.
#[derive(Args, Debug, Serialize)]
pub struct AttributeArgs {
    /// Game JSON file {"d", "values"} indexed by coalition mask.
    #[arg(long, value_name = "FILE")]
    pub game: Option<PathBuf>,
    /// Model expression over x1..xd, e.g. "x1 + x2 + x1*x2".
    #[arg(long, value_name = "EXPR")]
    pub model: Option<String>,
    /// Value function turning the model into a game.
    #[arg(long, value_enum)]
    pub value_fn: Option<ValueFn>,
    /// Background dataset (CSV with header) for the marginal value function.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
    /// Gaussian feature distribution JSON {"mean", "cov"}.
    #[arg(long, value_name = "FILE")]
    pub gaussian: Option<PathBuf>,
    /// Instance to explain: inline "1,2" or a CSV file.
    #[arg(long, value_name = "VEC|FILE", allow_hyphen_values = true)]
    pub x: Option<String>,
    /// Divide Sobol games by the total variance.
    #[arg(long)]
    pub normalize: bool,
    /// Monte Carlo draws for the value function (cond-mc; forces Monte Carlo for Sobol games).
    #[arg(long, value_name = "N")]
    pub vf_samples: Option<usize>,
    /// Condition on singular covariance blocks via a pseudo-inverse.
    #[arg(long)]
    pub pseudo_inverse: bool,
    #[arg(long, value_enum)]
    pub method: Method,
    /// Explicit order pmf JSON for weber / weber-mc.
    #[arg(long, value_name = "FILE")]
    pub pmf: Option<PathBuf>,
    /// Precedence DAG JSON for weber / weber-mc (uniform over compatible orders).
    #[arg(long, value_name = "FILE")]
    pub dag: Option<PathBuf>,
    /// Harsanyi weight system JSON.
    #[arg(long, value_name = "FILE")]
    pub weights: Option<PathBuf>,
    /// Sampled orderings for weber-mc.
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for every Monte Carlo step.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Allocate the dual game w(A) = v(D) - v(D\A).
    #[arg(long)]
    pub on_dual: bool,
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl AttributeArgs {
    fn validate(&self) -> CliResult<()> {
        match (&self.game, &self.model) {
            (Some(_), Some(_)) => return config("give either --game or --model, not both"),
            (None, None) => return config("one of --game or --model is required"),
            (Some(_), None) => {
                let stray = [
                    ("--value-fn", self.value_fn.is_some()),
                    ("--data", self.data.is_some()),
                    ("--gaussian", self.gaussian.is_some()),
                    ("--x", self.x.is_some()),
                    ("--normalize", self.normalize),
                    ("--vf-samples", self.vf_samples.is_some()),
                    ("--pseudo-inverse", self.pseudo_inverse),
                ];
                if let Some((flag, _)) = stray.iter().find(|(_, set)| *set) {
                    return config(format!("{flag} only applies with --model"));
                }
            }
            (None, Some(_)) => self.validate_value_fn()?,
        }
        self.validate_method()
    }

    fn validate_value_fn(&self) -> CliResult<()> {
        let Some(vf) = self.value_fn else {
            return config("--model needs --value-fn");
        };
        let sobol = matches!(vf, ValueFn::SobolClosed | ValueFn::SobolTotal);
        if (vf == ValueFn::Marginal) != self.data.is_some() {
            return config("--data is required by, and only used with, --value-fn marginal");
        }
        if (vf != ValueFn::Marginal) != self.gaussian.is_some() {
            return config("--gaussian is required by the conditional and Sobol value functions only");
        }
        if sobol == self.x.is_some() {
            return config(if sobol { "Sobol games take no --x" } else { "--x is required" });
        }
        if self.normalize && !sobol {
            return config("--normalize applies to Sobol games only");
        }
        match (vf, self.vf_samples) {
            (ValueFn::CondMc, None) => return config("--value-fn cond-mc needs --vf-samples"),
            (ValueFn::Marginal | ValueFn::CondGauss, Some(_)) => {
                return config("--vf-samples applies to cond-mc and Sobol games only")
            }
            (_, Some(_)) if self.seed.is_none() => return config("Monte Carlo value functions need --seed"),
            _ => {}
        }
        if self.pseudo_inverse && matches!(vf, ValueFn::Marginal | ValueFn::CondMc) {
            return config("--pseudo-inverse applies to cond-gauss and Sobol games only");
        }
        Ok(())
    }

    fn validate_method(&self) -> CliResult<()> {
        let weber = matches!(self.method, Method::Weber | Method::WeberMc);
        if !weber && (self.pmf.is_some() || self.dag.is_some()) {
            return config("--pmf and --dag apply to weber and weber-mc only");
        }
        if self.pmf.is_some() && self.dag.is_some() {
            return config("give at most one of --pmf and --dag");
        }
        if self.method != Method::Harsanyi && self.weights.is_some() {
            return config("--weights applies to --method harsanyi only");
        }
        if self.method == Method::WeberMc {
            if self.n.is_none() || self.seed.is_none() {
                return config("--method weber-mc needs --n and --seed");
            }
        } else if self.n.is_some() {
            return config("--n applies to --method weber-mc only");
        }
        Ok(())
    }

    fn uses_monte_carlo(&self) -> bool {
        self.method == Method::WeberMc || self.vf_samples.is_some()
    }
}

fn load_model(src: &str, d: usize) -> CliResult<ExprModel> {
    ExprModel::parse(src, d).map_err(|e| CliError::Config(format!("--model: {e}")))
}

fn check_len(what: &str, got: usize, d: usize) -> CliResult<()> {
    if got != d {
        return Err(CliError::Data(format!("{what} has {got} features, expected {d}")));
    }
    Ok(())
}

fn build(args: &AttributeArgs) -> CliResult<Game> {
    if let Some(path) = &args.game {
        return io::load_game(path);
    }
    let src = args.model.as_deref().expect("validated");
    let vf = args.value_fn.expect("validated");
    let x = args.x.as_deref().map(io::parse_instance).transpose()?;

    if vf == ValueFn::Marginal {
        let data = io::load_dataset(args.data.as_deref().expect("validated"))?;
        let x = x.expect("validated");
        check_len("--x", x.len(), data.dim())?;
        let model = load_model(src, data.dim())?;
        return Ok(marginal_game(&model, &data, &x)?);
    }

    let spec: GaussianSpec = io::load_gaussian(args.gaussian.as_deref().expect("validated"))?;
    let d = spec.dim();
    let model = load_model(src, d)?;
    if let Some(x) = &x {
        check_len("--x", x.len(), d)?;
    }
    let seed = args.seed.unwrap_or(0);
    match vf {
        ValueFn::CondGauss => {
            require_quadratic(&model, "cond-gauss")?;
            Ok(conditional_gaussian_game_with(&model, &spec, &x.expect("validated"), args.pseudo_inverse)?)
        }
        ValueFn::CondMc => {
            Ok(conditional_mc_game(&model, &spec, &x.expect("validated"), args.vf_samples.expect("validated"), seed)?)
        }
        ValueFn::SobolClosed | ValueFn::SobolTotal => {
            let opts = SobolOptions {
                normalize: args.normalize,
                mc: args.vf_samples.map(|n| SobolMc { n, seed }),
                pseudo_inverse: args.pseudo_inverse,
            };
            if opts.mc.is_none() {
                require_quadratic(&model, "exact Sobol games")?;
            }
            Ok(if vf == ValueFn::SobolClosed {
                sobol_closed_game(&model, &spec, &opts)?
            } else {
                sobol_total_game(&model, &spec, &opts)?
            })
        }
        ValueFn::Marginal => unreachable!(),
    }
}

fn require_quadratic(model: &ExprModel, what: &str) -> CliResult<()> {
    if model.polynomial().is_some_and(|p| p.degree() <= 2) {
        Ok(())
    } else {
        config(format!("{what} needs a polynomial model of degree <= 2; use --vf-samples with --seed"))
    }
}

fn order_distribution(args: &AttributeArgs, d: usize) -> CliResult<RandomOrderDistribution> {
    if let Some(path) = &args.pmf {
        let pmf = ExplicitPmf::from_json(&io::read_text(path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        check_len("--pmf", pmf.players(), d)?;
        return Ok(RandomOrderDistribution::Explicit(pmf));
    }
    if let Some(path) = &args.dag {
        let po = PartialOrder::from_json(d, &io::read_text(path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        return Ok(RandomOrderDistribution::PartialOrderUniform(po));
    }
    Ok(RandomOrderDistribution::Uniform)
}

fn allocate(args: &AttributeArgs, g: &Game) -> CliResult<Allocation> {
    let d = g.players();
    Ok(match args.method {
        Method::Shapley => shapley_direct(g),
        Method::ShapleyPermutation => shapley_permutation(g)?,
        Method::ShapleyDividends => shapley_dividends(g),
        Method::Weber => weber_allocate(g, &order_distribution(args, d)?)?,
        Method::WeberMc => weber_monte_carlo(
            g,
            &order_distribution(args, d)?,
            args.n.expect("validated"),
            args.seed.expect("validated"),
        )?,
        Method::Harsanyi => {
            let weights = match &args.weights {
                Some(path) => WeightSystem::from_json(&io::read_text(path)?)
                    .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
                None => WeightSystem::egalitarian(),
            };
            harsanyi_allocate(g, &weights)?
        }
        Method::Proportional => proportional_value(g)?,
        Method::Pme => unreachable!("handled by caller"),
    })
}

/// Write-time efficiency bound, scaled by the magnitude of the game.
pub fn efficiency_tolerance(g: &Game) -> f64 {
    EXACT_TOLERANCE * g.values().iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

pub fn run(args: &AttributeArgs) -> CliResult<()> {
    args.validate()?;
    let game = build(args)?;
    // pme always allocates the dual; for other methods --on-dual opts in
    let (allocated, on_dual, alloc) = if args.method == Method::Pme {
        (dual_game(&game), true, pme(&game)?)
    } else if args.on_dual {
        let w = dual_game(&game);
        let a = allocate(args, &w)?;
        (w, true, a)
    } else {
        let a = allocate(args, &game)?;
        (game.clone(), false, a)
    };

    let gap = efficiency_gap(&allocated, &alloc)?;
    let tol = efficiency_tolerance(&allocated);
    if args.method != Method::WeberMc && gap.abs() > tol {
        return Err(CliError::Numerical(format!("efficiency gap {gap:e} exceeds {tol:e} for {}", alloc.method)));
    }

    let body = match args.format {
        Format::Json => {
            let mut report = json!({
                "method": alloc.method,
                "players": (1..=game.players()).collect::<Vec<_>>(),
                "payoffs": alloc.payoffs,
                "efficiency_gap": gap,
                "v_empty": game.v_empty(),
                "v_full": game.v_full(),
                "allocated_game": if on_dual { "dual" } else { "primal" },
                "seed": if args.uses_monte_carlo() { args.seed } else { None },
                "config": args,
            });
            if let Some(se) = &alloc.stderr {
                report["stderr"] = json!(se);
            }
            serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
        }
        Format::Csv => csv_report(&alloc)?,
    };
    io::emit(args.output.as_deref(), &body)
}

fn csv_report(alloc: &Allocation) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Data(e.to_string());
    if alloc.stderr.is_some() {
        w.write_record(["player", "payoff", "stderr"]).map_err(io_err)?;
    } else {
        w.write_record(["player", "payoff"]).map_err(io_err)?;
    }
    for (i, p) in alloc.payoffs.iter().enumerate() {
        let mut row = vec![(i + 1).to_string(), p.to_string()];
        if let Some(se) = &alloc.stderr {
            row.push(se[i].to_string());
        }
        w.write_record(&row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of numbers is utf-8"))
}
