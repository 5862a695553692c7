//! Command-line front end; all logic lives in the library.

use clap::{Parser, Subcommand, ValueEnum};
use platform_entry::experiment::{
    reproduce_tables, sweep_csv, sweep_exact, sweep_tp, table_csv, TableEnv,
};
use platform_entry::game::parse_log_line;
use platform_entry::gittins::index_state;
use platform_entry::marl::Hyperparameters;
use platform_entry::optimizer::{optimize, Bounds, Constraints, PolicySetting};
use platform_entry::scenario::{generate, ScenarioKind, ScenarioParams};
use platform_entry::seller::evaluate_exact;
use platform_entry::types::{EntryTime, MarketConfig, ProductState};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "platform-entry",
    about = "Strategic platform entry: exact single-seller solvers and a multi-seller market simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Global,
    Fee,
    Hetero,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnvArg {
    #[value(name = "3A1B", alias = "3a1b")]
    ThreeAOneB,
    #[value(name = "1A3B", alias = "1a3b")]
    OneAThreeB,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    C1,
    C2,
    D1,
    D2,
}

#[derive(Subcommand)]
enum Command {
    /// Print Gittins index value and attaining rule per product and state.
    Gittins {
        #[arg(long)]
        config: PathBuf,
        /// Entry time (integer or "inf").
        #[arg(long, default_value = "inf")]
        t_p: String,
        /// Transaction fee.
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
    },
    /// Optimal platform policy for a market.
    Optimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        setting: SettingArg,
        #[arg(long)]
        alpha_cap: Option<f64>,
        #[arg(long)]
        entry_floor: Option<u32>,
        #[arg(long, default_value_t = 30)]
        t_max: u32,
        #[arg(long, default_value_t = 0.02)]
        alpha_step: f64,
    },
    /// Reproduce one market-illustration table.
    Table {
        #[arg(long, value_enum)]
        env: EnvArg,
        #[arg(long)]
        json: bool,
    },
    /// Generate a clustered or diverse market environment.
    GenEnv {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 50.0)]
        g_bar: f64,
        #[arg(long, default_value_t = 3)]
        n_control: usize,
    },
    /// Sweep entry times over trained seller equilibria.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Inclusive range, e.g. "1..15".
        #[arg(long, default_value = "1..15")]
        tp: String,
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Total evaluation episodes per entry time.
        #[arg(long, default_value_t = 4000)]
        episodes: u32,
        /// Training episode budget (full scale is 70000).
        #[arg(long)]
        budget: Option<u32>,
        #[arg(long, default_value_t = 2)]
        rounds: u32,
        /// Use the exact single-seller evaluator instead of learning.
        #[arg(long)]
        exact: bool,
        /// Output prefix for CSV/JSON files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify and summarize a trajectory log.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<MarketConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("read {path:?}: {e}"))?;
    MarketConfig::from_json(&text).map_err(|e| e.to_string())
}

fn parse_entry(text: &str) -> Result<EntryTime, String> {
    if text == "inf" {
        Ok(EntryTime::Never)
    } else {
        text.parse::<u32>()
            .map(EntryTime::Steps)
            .map_err(|e| format!("bad entry time {text:?}: {e}"))
    }
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<u32>, String> {
    let (lo, hi) = text
        .split_once("..")
        .ok_or_else(|| format!("bad range {text:?}, expected lo..hi"))?;
    let lo: u32 = lo.trim().parse().map_err(|e| format!("bad range: {e}"))?;
    let hi: u32 = hi.trim().trim_start_matches('=').parse().map_err(|e| format!("bad range: {e}"))?;
    if lo < 1 || hi < lo {
        return Err(format!("bad range {text:?}"));
    }
    Ok(lo..=hi)
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Gittins { config, t_p, alpha } => {
            let cfg = load_config(&config)?;
            let entry = parse_entry(&t_p)?;
            let gamma = cfg.discounts.gamma_seller;
            println!("product  state  index        rule");
            for (j, product) in cfg.products.iter().enumerate() {
                let cost = cfg.costs.cost(0, j);
                let top = platform_entry::gittins::index_undeveloped(
                    product,
                    cost,
                    gamma,
                    entry.as_f64(),
                    alpha,
                )
                .map_err(|e| e.to_string())?;
                println!("{j:<8} U      {:<12.4} {:?}", top.value, top.rule);
                for state in [ProductState::Good, ProductState::Bad, ProductState::Entered] {
                    let v = index_state(product, cost, gamma, state, entry.as_f64(), alpha)
                        .map_err(|e| e.to_string())?;
                    println!("{j:<8} {state}      {v:<12.4} -");
                }
            }
            Ok(())
        }
        Command::Optimize {
            config,
            setting,
            alpha_cap,
            entry_floor,
            t_max,
            alpha_step,
        } => {
            let cfg = load_config(&config)?;
            let setting = match setting {
                SettingArg::Global => PolicySetting::Global,
                SettingArg::Fee => PolicySetting::GlobalFee,
                SettingArg::Hetero => PolicySetting::Heterogeneous,
            };
            let bounds = Bounds {
                t_max,
                alpha_step,
                ..Bounds::default()
            };
            let constraints = Constraints {
                alpha_cap,
                entry_floor,
            };
            let (policy, _) =
                optimize(&cfg, setting, constraints, &bounds).map_err(|e| e.to_string())?;
            let metrics = evaluate_exact(&policy, &cfg).map_err(|e| e.to_string())?;
            let out = serde_json::json!({
                "policy": policy,
                "platform": metrics.platform_utility,
                "seller": metrics.seller_utility,
                "buyer": metrics.buyer_utility,
                "explored": metrics.products_explored,
            });
            println!("{}", serde_json::to_string_pretty(&out).unwrap());
            Ok(())
        }
        Command::Table { env, json } => {
            let which = match env {
                EnvArg::ThreeAOneB => TableEnv::ThreeAOneB,
                EnvArg::OneAThreeB => TableEnv::OneAThreeB,
            };
            let rows = reproduce_tables(which);
            if json {
                println!("{}", serde_json::to_string_pretty(&rows).unwrap());
            } else {
                print!("{}", table_csv(&rows));
            }
            Ok(())
        }
        Command::GenEnv {
            kind,
            seed,
            out,
            g_bar,
            n_control,
        } => {
            let kind = match kind {
                KindArg::C1 => ScenarioKind::C1Standard,
                KindArg::C2 => ScenarioKind::C2HighStakes,
                KindArg::D1 => ScenarioKind::D1Specialists,
                KindArg::D2 => ScenarioKind::D2SpecGen,
            };
            let params = ScenarioParams {
                g_bar,
                n_control,
                ..ScenarioParams::default()
            };
            let spec = generate(kind, &params, seed).map_err(|e| e.to_string())?;
            let text = serde_json::to_string_pretty(&spec).unwrap();
            match out {
                Some(path) => {
                    std::fs::write(&path, text).map_err(|e| format!("write {path:?}: {e}"))?;
                    println!("wrote {path:?}");
                }
                None => println!("{text}"),
            }
            Ok(())
        }
        Command::Sweep {
            config,
            tp,
            seeds,
            episodes,
            budget,
            rounds,
            exact,
            out,
        } => {
            let cfg = load_config(&config)?;
            let range = parse_range(&tp)?;
            if exact {
                if cfg.n_sellers != 1 {
                    return Err("--exact requires a single-seller config".into());
                }
                println!("t_p,platform,seller,buyer,explored");
                for (t, m) in sweep_exact(&cfg, range) {
                    println!(
                        "{t},{:.6},{:.6},{:.6},{:.6}",
                        m.platform_utility, m.seller_utility, m.buyer_utility, m.products_explored
                    );
                }
                return Ok(());
            }
            let mut hyper = Hyperparameters::desk_scale();
            if let Some(b) = budget {
                hyper.total_episodes = b;
            }
            let seed_list: Vec<u64> = (0..seeds).collect();
            let report = sweep_tp(&cfg, range, &seed_list, episodes, &hyper, rounds);
            let n_unconverged = report.cells.iter().filter(|c| !c.converged).count();
            let csv = sweep_csv(&report);
            match out {
                Some(prefix) => {
                    let csv_path = prefix.with_extension("csv");
                    let json_path = prefix.with_extension("json");
                    std::fs::write(&csv_path, &csv)
                        .map_err(|e| format!("write {csv_path:?}: {e}"))?;
                    std::fs::write(&json_path, serde_json::to_string_pretty(&report).unwrap())
                        .map_err(|e| format!("write {json_path:?}: {e}"))?;
                    println!("wrote {csv_path:?} and {json_path:?}");
                }
                None => print!("{csv}"),
            }
            println!(
                "# T_p*(platform) = {:?}, T_p*(welfare) = {:?}, scale factor {:.4}, unconverged cells {}",
                report.t_star_platform, report.t_star_welfare, report.scale_factor, n_unconverged
            );
            if report.cells.iter().any(|c| !c.converged && c.metrics.is_some()) {
                return Err("internal: unconverged cell carries metrics".into());
            }
            Ok(())
        }
        Command::Replay { log } => {
            let text = std::fs::read_to_string(&log).map_err(|e| format!("read {log:?}: {e}"))?;
            let mut n = 0u32;
            let mut last_t: Option<u32> = None;
            let mut prev_states: Option<Vec<ProductState>> = None;
            let mut seller_total = 0.0;
            let mut platform_total = 0.0;
            for (lineno, line) in text.lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let rec = parse_log_line(line).map_err(|e| format!("line {}: {e}", lineno + 1))?;
                if let Some(t) = last_t {
                    if rec.t != t + 1 {
                        return Err(format!("line {}: t jumps {t} -> {}", lineno + 1, rec.t));
                    }
                }
                if let Some(prev) = &prev_states {
                    for (j, (a, b)) in prev.iter().zip(rec.product_states.iter()).enumerate() {
                        let legal = a == b
                            || matches!(
                                (a, b),
                                (ProductState::Undeveloped, ProductState::Good)
                                    | (ProductState::Undeveloped, ProductState::Bad)
                                    | (ProductState::Good, ProductState::Entered)
                            );
                        if !legal {
                            return Err(format!(
                                "line {}: illegal transition {a} -> {b} for product {j}",
                                lineno + 1
                            ));
                        }
                    }
                }
                last_t = Some(rec.t);
                prev_states = Some(rec.product_states.clone());
                seller_total += rec.seller_rewards.iter().sum::<f64>();
                platform_total += rec.platform_reward;
                n += 1;
            }
            println!(
                "{n} steps verified; undiscounted totals: sellers {seller_total:.2}, platform {platform_total:.2}"
            );
            if let Some(states) = prev_states {
                let line: Vec<String> = states.iter().map(|s| s.to_string()).collect();
                println!("final product states: {}", line.join(" "));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
