mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use seqcontract::agent::{best_response, reservation_values};
use seqcontract::correlated::{
    bernoulli_to_coverage, brute_force_best_linear, corrmax_to_coverage, coverage_to_bernoulli, coverage_to_corrmax,
    hardness_reduction, perfect_cover, DEFAULT_CORRELATED_BOUND,
};
use seqcontract::general::DEFAULT_VERTEX_BUDGET;
use seqcontract::generators::{
    gap_general_contract, gen_critpoints_instance, gen_gap_instance, gen_partition_reduction, gen_random_instance,
    gen_superpoly_instance,
};
use seqcontract::oracle::{grid_search_general, oracle_best_linear, oracle_best_response, DEFAULT_ORACLE_BUDGET};
use seqcontract::{
    principal_utility, solve_general, solve_linear, Contract, CoverageDocument, Error, InstanceDocument,
    JointDocument, Normalized, Rational,
};

use report::{approximate, digest, Report};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CAPACITY: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "seqcontract", version, about = "Exact contract design for sequential search")]
struct Cli {
    #[command(flatten)]
    opts: Options,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Options {
    /// Cap on hyperplane subsets examined by solve-general.
    #[arg(long, global = true, default_value_t = DEFAULT_VERTEX_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    budget_vertices: u64,
    /// Cap on strategies enumerated by the oracle.
    #[arg(long, global = true, default_value_t = DEFAULT_ORACLE_BUDGET as u64, value_parser = clap::value_parser!(u64).range(1..))]
    budget_oracle: u64,
    /// Step of the payment grid searched by `oracle` without a contract.
    #[arg(long, global = true, value_parser = positive_rational)]
    grid_step: Option<Rational>,
    /// Seed for `gen random`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Append decimal approximations to rationals in the report.
    #[arg(long, global = true)]
    approx: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Check an instance and report its normalized form.
    Validate { instance: PathBuf },
    /// The agent's best response to a contract, with reservation values.
    BestResponse { instance: PathBuf, contract: PathBuf },
    /// Principal utility of a contract and the strategy it induces.
    Eval { instance: PathBuf, contract: PathBuf },
    /// Optimal linear contract.
    SolveLinear { instance: PathBuf },
    /// Optimal general contract by vertex enumeration.
    SolveGeneral { instance: PathBuf },
    /// Build a named instance family.
    #[command(subcommand)]
    Gen(Family),
    /// Exhaustive search. Without a contract: best linear contract, plus a
    /// payment grid search when --grid-step is given. Coverage instances get
    /// the exhaustive linear contract over tuple strategies.
    Oracle { instance: PathBuf, contract: Option<PathBuf> },
    /// Convert between coverage functions and joint distributions.
    Convert { from: Kind, file: PathBuf },
}

#[derive(Subcommand)]
enum Family {
    /// Reduction from Partition; the numbers must sum to 1/5.
    Partition {
        #[arg(long, value_delimiter = ',', required = true)]
        a: Vec<Rational>,
    },
    /// Instance where linear contracts lose a factor growing with n.
    Gap {
        #[arg(long)]
        n: u32,
        /// Parameter of the companion general contract recorded in meta.
        #[arg(long, default_value = "1/100")]
        eps: Rational,
    },
    /// Instance whose linear best response changes at least m−1 times.
    Critpoints {
        #[arg(long)]
        m: usize,
    },
    /// Instance with many distinct best responses.
    Superpoly {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Random instance on a small rational grid.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// Correlated instance with a catch-all action added to a coverage function.
    CorrelatedHardness {
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "1/2")]
        gamma: Rational,
        /// Coverage document to reduce; defaults to the perfect cover on k elements.
        #[arg(long)]
        coverage: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Coverage,
    Bernoulli,
    Corrmax,
}

fn positive_rational(s: &str) -> Result<Rational, String> {
    let r: Rational = s.parse().map_err(|e| format!("{e}"))?;
    if r.is_positive() {
        Ok(r)
    } else {
        Err("must be positive".into())
    }
}

fn read<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Validation(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Normalized, Error> {
    seqcontract::validate_instance(&read::<InstanceDocument>(path)?)
}

fn load_contract(norm: &Normalized, path: &Path) -> Result<Contract, Error> {
    let c: Contract = read(path)?;
    norm.contract_to_normalized(&Contract::new(c.payments)?)
}

fn run(cli: Cli) -> Result<Value, Error> {
    let opts = &cli.opts;
    let oracle_budget = opts.budget_oracle as u128;
    match cli.command {
        Command::Validate { instance } => {
            let norm = load_instance(&instance)?;
            let mut r = Report::for_instance(&norm);
            r.put("n", norm.instance.n());
            r.put("m", norm.instance.m());
            r.put("outcome_order", norm.permutation.iter().map(|j| j + 1).collect::<Vec<_>>());
            r.put("normalized", norm.instance.to_document());
            Ok(r.finish())
        }
        Command::BestResponse { instance, contract } => {
            let norm = load_instance(&instance)?;
            let t = load_contract(&norm, &contract)?;
            let br = best_response(&norm.instance, &t);
            let mut r = Report::for_instance(&norm);
            r.put("agent_utility", &br.agent);
            r.put("principal_utility", &br.principal);
            r.put("strategy", norm.strategy_to_original(&br.strategy));
            r.put("outcome_distribution", norm.to_original(&br.distribution.mass));
            r.put("action_probabilities", &br.distribution.taken);
            r.put("reservation_values", reservation_values(&norm.instance, &t));
            Ok(r.finish())
        }
        Command::Eval { instance, contract } => {
            let norm = load_instance(&instance)?;
            let t = load_contract(&norm, &contract)?;
            let (u, s) = principal_utility(&norm.instance, &t);
            let mut r = Report::for_instance(&norm);
            r.put("utility", &u);
            r.put("strategy", norm.strategy_to_original(&s));
            Ok(r.finish())
        }
        Command::SolveLinear { instance } => {
            let norm = load_instance(&instance)?;
            let lin = solve_linear(&norm.instance);
            let mut r = Report::for_instance(&norm);
            r.put("alpha", &lin.alpha);
            r.put("utility", &lin.utility);
            r.put("strategy", norm.strategy_to_original(&lin.strategy));
            r.put("candidates", &lin.candidates);
            Ok(r.finish())
        }
        Command::SolveGeneral { instance } => {
            let norm = load_instance(&instance)?;
            let g = solve_general(&norm.instance, opts.budget_vertices as u128)?;
            let mut r = Report::for_instance(&norm);
            r.put("contract", norm.contract_to_original(&g.contract));
            r.put("utility", &g.utility);
            r.put("strategy", norm.strategy_to_original(&g.strategy));
            r.put("vertex_count", g.vertex_count);
            r.put("hyperplane_counts", g.hyperplane_counts);
            Ok(r.finish())
        }
        Command::Gen(family) => generate(family, opts.seed),
        Command::Oracle { instance, contract } => oracle(&instance, contract.as_deref(), opts, oracle_budget),
        Command::Convert { from, file } => convert(from, &file),
    }
}

fn with_meta(doc: InstanceDocument, meta: Value) -> Result<Value, Error> {
    Ok(serde_json::to_value(InstanceDocument { meta: Some(meta), ..doc })?)
}

fn generate(family: Family, seed: u64) -> Result<Value, Error> {
    match family {
        Family::Partition { a } => {
            let (inst, params) = gen_partition_reduction(&a)?;
            let mut meta = serde_json::to_value(&params)?;
            meta["family"] = json!("partition");
            with_meta(inst.to_document(), meta)
        }
        Family::Gap { n, eps } => {
            let inst = gen_gap_instance(n)?;
            let companion = gap_general_contract(&eps);
            with_meta(inst.to_document(), json!({"family": "gap", "n": n, "eps": eps, "companion_contract": companion}))
        }
        Family::Critpoints { m } => {
            let inst = gen_critpoints_instance(m)?;
            with_meta(inst.to_document(), json!({"family": "critpoints", "m": m}))
        }
        Family::Superpoly { n, m } => {
            let fam = gen_superpoly_instance(n, m)?;
            let labels: Vec<Value> =
                fam.labels.iter().map(|l| l.map_or(Value::Null, |(j, i)| json!({"outcome": j, "copy": i}))).collect();
            with_meta(
                fam.instance.to_document(),
                json!({"family": "superpoly", "n": n, "m": m, "ell": fam.ell, "actions": labels}),
            )
        }
        Family::Random { n, m } => {
            let inst = gen_random_instance(n, m, seed)?;
            with_meta(inst.to_document(), json!({"family": "random", "n": n, "m": m, "seed": seed}))
        }
        Family::CorrelatedHardness { k, gamma, coverage } => {
            let f = match coverage {
                Some(path) => read::<CoverageDocument>(&path)?.coverage()?,
                None => perfect_cover(k),
            };
            let ci = hardness_reduction(&f, k, &gamma)?;
            let mut doc = ci.to_document();
            doc.meta = Some(json!({"family": "correlated-hardness", "k": k, "gamma": gamma}));
            Ok(serde_json::to_value(doc)?)
        }
    }
}

fn oracle(path: &Path, contract: Option<&Path>, opts: &Options, budget: u128) -> Result<Value, Error> {
    let raw: Value = read(path)?;
    if raw.get("universe").is_some() {
        if contract.is_some() {
            return Err(Error::Validation("coverage instances take no contract".into()));
        }
        let doc: CoverageDocument = serde_json::from_value(raw)?;
        let ci = doc.instance()?;
        let best = brute_force_best_linear(&ci, DEFAULT_CORRELATED_BOUND)?;
        let names = ci.coverage().names();
        let mut r = Report::new(digest(&serde_json::to_string(&ci.to_document())?));
        r.put("alpha", &best.alpha);
        r.put("utility", &best.utility);
        r.put("strategy", best.strategy.iter().map(|&i| &names[i]).collect::<Vec<_>>());
        r.put(
            "candidates",
            best.candidates
                .iter()
                .map(|c| json!({"alpha": c.alpha, "utility": c.utility, "strategy": c.strategy.iter().map(|&i| &names[i]).collect::<Vec<_>>()}))
                .collect::<Vec<_>>(),
        );
        return Ok(r.finish());
    }
    let doc: InstanceDocument = serde_json::from_value(raw)?;
    let norm = seqcontract::validate_instance(&doc)?;
    let mut r = Report::for_instance(&norm);
    match contract {
        Some(c) => {
            let t = load_contract(&norm, c)?;
            let o = oracle_best_response(&norm.instance, &t, budget)?;
            r.put("agent_utility", &o.agent_utility);
            r.put("principal_utility", &o.principal_utility);
            r.put("maximizers", o.maximizers.iter().map(|s| norm.strategy_to_original(s)).collect::<Vec<_>>());
        }
        None => {
            let (alpha, utility) = oracle_best_linear(&norm.instance, budget)?;
            r.put("linear", json!({"alpha": alpha, "utility": utility}));
            if let Some(step) = &opts.grid_step {
                let (t, u) = grid_search_general(&norm.instance, step)?;
                r.put("grid", json!({"step": step, "contract": norm.contract_to_original(&t), "utility": u}));
            }
        }
    }
    Ok(r.finish())
}

fn convert(from: Kind, path: &Path) -> Result<Value, Error> {
    match from {
        Kind::Coverage => {
            let f = read::<CoverageDocument>(path)?.coverage()?;
            let bernoulli = coverage_to_bernoulli(&f)?;
            Ok(json!({
                "actions": f.names(),
                "bernoulli": JointDocument::from(&bernoulli),
                "corrmax": JointDocument::from(&coverage_to_corrmax(&f)),
            }))
        }
        Kind::Bernoulli => {
            let joint = read::<JointDocument>(path)?.bernoulli()?;
            Ok(serde_json::to_value(CoverageDocument::from_parts(&bernoulli_to_coverage(&joint), None))?)
        }
        Kind::Corrmax => {
            let joint = read::<JointDocument>(path)?.corrmax()?;
            Ok(serde_json::to_value(CoverageDocument::from_parts(&corrmax_to_coverage(&joint), None))?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let approx = cli.opts.approx;
    match run(cli) {
        Ok(mut value) => {
            if approx {
                approximate(&mut value);
            }
            println!("{}", serde_json::to_string_pretty(&value).expect("reports serialize"));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Capacity { .. } => EXIT_CAPACITY,
                _ => EXIT_VALIDATION,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;
    use seqcontract::rat;

    use super::*;

    #[test]
    fn arguments_parse() {
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["seqcontract", "gen", "partition", "--a", "1/20,1/20,1/25,3/50"]).unwrap();
        match cli.command {
            Command::Gen(Family::Partition { a }) => assert_eq!(a[3], rat(3, 50)),
            _ => panic!("wrong subcommand"),
        }
        assert!(Cli::try_parse_from(["seqcontract", "solve-linear", "x.json", "--grid-step", "0"]).is_err());
        assert!(Cli::try_parse_from(["seqcontract", "oracle", "x.json", "--budget-oracle", "0"]).is_err());
    }
}
