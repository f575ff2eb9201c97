//! `pimdp` command line: generate gridworld models, solve possibilistic
//! MDPs/POMDPs and the stochastic baseline, inspect belief spaces, and
//! evaluate policies. Output is deterministic for fixed inputs and flags.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pimdp::belief::Belief;
use pimdp::grid::{generate_gridworld, GridworldSpec, ObservationMode};
use pimdp::io::{
    belief_from_json, load_model, pi_pomdp_to_file, to_json, LoadError, PiModel,
};
use pimdp::mdp::{backwards_induction, policy_value, value_iteration, SolveError, UtilityMode};
use pimdp::model::{Horizon, ModelBuildError, PiMdpModel, PiPomdpModel, StochMdpModel};
use pimdp::pomdp::{all_beliefs, reachable_beliefs, value_iteration_po, BeliefSpace, PomdpError};
use pimdp::stoch::{backwards_induction_stoch, value_iteration_stoch, StochError};

mod output;
use output::Format;

/// Exit codes: 0 success, 2 validation failure, 3 parse failure,
/// 4 enumeration cap exceeded.
#[derive(Debug)]
enum AppError {
    Parse(String),
    Validation(String),
    Cap(String),
    Other(String),
}

impl AppError {
    fn code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 2,
            AppError::Parse(_) => 3,
            AppError::Cap(_) => 4,
            AppError::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Parse(m) | AppError::Validation(m) | AppError::Cap(m) | AppError::Other(m) => m,
        }
    }
}

impl From<LoadError> for AppError {
    fn from(e: LoadError) -> Self {
        match e {
            LoadError::Io { .. } | LoadError::Parse(_) => AppError::Parse(e.to_string()),
            LoadError::Schema(_) | LoadError::Validation(_) => AppError::Validation(e.to_string()),
        }
    }
}

impl From<SolveError> for AppError {
    fn from(e: SolveError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<PomdpError> for AppError {
    fn from(e: PomdpError) -> Self {
        match e {
            PomdpError::CapExceeded { .. } => AppError::Cap(e.to_string()),
            other => AppError::Validation(other.to_string()),
        }
    }
}

impl From<StochError> for AppError {
    fn from(e: StochError) -> Self {
        AppError::Validation(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Other(e.to_string())
    }
}

#[derive(Parser)]
#[command(name = "pimdp", version, about = "Qualitative and stochastic MDP/POMDP solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    /// only the terminal state's satisfaction counts
    Terminal,
    /// every visited state's satisfaction counts
    Intermediate,
}

impl From<ModeArg> for UtilityMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Terminal => UtilityMode::TerminalOnly,
            ModeArg::Intermediate => UtilityMode::Intermediate,
        }
    }
}

#[derive(Args)]
struct CommonSolve {
    /// model file to load
    #[arg(long)]
    model: PathBuf,
    /// output format
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a fully observable possibilistic MDP
    SolveMdp {
        #[command(flatten)]
        common: CommonSolve,
        /// finite horizon; omit for stationary value iteration
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, value_enum, default_value_t = ModeArg::Terminal)]
        mode: ModeArg,
        /// emit per-sweep trace lines (to a file, or stdout when no path)
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        trace: Option<PathBuf>,
    },
    /// Solve a possibilistic POMDP over its belief space
    SolvePomdp {
        #[command(flatten)]
        common: CommonSolve,
        /// initial belief: `ignorance` or a belief file
        #[arg(long, default_value = "ignorance")]
        initial_belief: String,
        #[arg(long, value_enum, default_value_t = ModeArg::Terminal)]
        mode: ModeArg,
        #[arg(long, num_args = 0..=1, default_missing_value = "-")]
        trace: Option<PathBuf>,
        /// enumerate the full normalized belief space instead of the
        /// reachable closure (tiny models only)
        #[arg(long)]
        exhaustive_beliefs: bool,
    },
    /// Solve the stochastic baseline model
    SolveStoch {
        #[command(flatten)]
        common: CommonSolve,
        /// finite horizon; omit for discounted value iteration
        #[arg(long)]
        horizon: Option<usize>,
        /// stopping accuracy of value iteration
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
    },
    /// List the reachable (or exhaustive) belief space and its transitions
    Beliefs {
        #[command(flatten)]
        common: CommonSolve,
        #[arg(long, default_value = "ignorance")]
        initial_belief: String,
        #[arg(long)]
        exhaustive_beliefs: bool,
    },
    /// Evaluate a stationary policy file over a finite horizon
    EvalPolicy {
        #[command(flatten)]
        common: CommonSolve,
        /// JSON file mapping every state to an action
        #[arg(long)]
        policy: PathBuf,
        #[arg(long)]
        horizon: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Terminal)]
        mode: ModeArg,
    },
    /// Generate a gridworld model file
    GenGrid {
        /// builtin room: `paper-3x3`
        #[arg(long, conflicts_with_all = ["width", "height"])]
        preset: Option<String>,
        #[arg(long, requires = "height")]
        width: Option<usize>,
        #[arg(long, requires = "width")]
        height: Option<usize>,
        /// goal cell as `row,col`
        #[arg(long)]
        goal: Option<String>,
        /// obstacle cell as `row,col`; repeatable
        #[arg(long = "obstacle")]
        obstacles: Vec<String>,
        /// wall segment as `r1,c1:r2,c2`; repeatable
        #[arg(long = "wall")]
        walls: Vec<String>,
        /// comma-separated scale labels, bottom first
        #[arg(long, default_value = "0,0.2,0.5,0.8,1")]
        scale: String,
        #[arg(long, default_value = "0.2")]
        slip: String,
        #[arg(long = "neighbor-util", default_value = "0.5")]
        neighbor_util: String,
        #[arg(long = "obs-mode", value_enum, default_value_t = ObsModeArg::WallConfig)]
        obs_mode: ObsModeArg,
        /// write to a file instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ObsModeArg {
    Full,
    WallConfig,
}

const BELIEF_CAP: u128 = 1_000_000;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

fn load_pi_mdp(path: &PathBuf) -> Result<PiMdpModel, AppError> {
    match load_model(path)?.pi {
        Some(PiModel::Mdp(m)) => Ok(m),
        Some(PiModel::Pomdp(m)) => Ok(m.base().clone()),
        None => Err(AppError::Validation(
            "model file has no possibilistic section".to_string(),
        )),
    }
}

fn load_pi_pomdp(path: &PathBuf) -> Result<PiPomdpModel, AppError> {
    match load_model(path)?.pi {
        Some(PiModel::Pomdp(m)) => Ok(m),
        Some(PiModel::Mdp(_)) => Err(AppError::Validation(
            "model file declares no observations".to_string(),
        )),
        None => Err(AppError::Validation(
            "model file has no possibilistic section".to_string(),
        )),
    }
}

fn load_stoch(path: &PathBuf) -> Result<StochMdpModel, AppError> {
    load_model(path)?.stoch.ok_or_else(|| {
        AppError::Validation("model file has no stochastic section".to_string())
    })
}

fn parse_initial(model: &PiPomdpModel, arg: &str) -> Result<Belief, AppError> {
    if arg == "ignorance" {
        return Ok(Belief::ignorance(model));
    }
    let text = std::fs::read_to_string(arg)
        .map_err(|e| AppError::Parse(format!("cannot read belief file {arg}: {e}")))?;
    Ok(belief_from_json(model, &text)?)
}

fn build_space(
    model: &PiPomdpModel,
    initial: &Belief,
    exhaustive: bool,
) -> Result<BeliefSpace, AppError> {
    if exhaustive {
        Ok(all_beliefs(model, BELIEF_CAP)?)
    } else {
        Ok(reachable_beliefs(model, std::slice::from_ref(initial))?)
    }
}

fn emit_trace(dest: &PathBuf, text: &str, out: &mut String) -> Result<(), AppError> {
    if dest.as_os_str() == "-" {
        out.push_str(text);
    } else {
        std::fs::write(dest, text)?;
    }
    Ok(())
}

fn run(command: Command) -> Result<String, AppError> {
    match command {
        Command::SolveMdp {
            common,
            horizon,
            mode,
            trace,
        } => {
            let model = load_pi_mdp(&common.model)?;
            let mut out = String::new();
            match parse_horizon(horizon)? {
                Horizon::Infinite => {
                    if matches!(mode, ModeArg::Intermediate) {
                        return Err(AppError::Validation(
                            "--mode intermediate needs --horizon; stationary value iteration \
                             uses the terminal criterion"
                                .to_string(),
                        ));
                    }
                    let sol = value_iteration(&model)?;
                    if let Some(dest) = &trace {
                        let text = sol.trace.render(
                            |s| model.state_name(s),
                            |l| model.scale().label(l),
                            |a| model.action_name(a),
                        );
                        emit_trace(dest, &text, &mut out)?;
                    }
                    out.push_str(&output::render_stationary(&model, &sol, common.format));
                }
                Horizon::Finite(n) => {
                    let sol = backwards_induction(&model, n, mode.into())?;
                    if let Some(dest) = &trace {
                        let text = sol.trace.render(
                            |s| model.state_name(s),
                            |l| model.scale().label(l),
                            |a| model.action_name(a),
                        );
                        emit_trace(dest, &text, &mut out)?;
                    }
                    out.push_str(&output::render_finite(&model, &sol, n, common.format));
                }
            }
            Ok(out)
        }
        Command::SolvePomdp {
            common,
            initial_belief,
            mode,
            trace,
            exhaustive_beliefs,
        } => {
            let model = load_pi_pomdp(&common.model)?;
            let initial = parse_initial(&model, &initial_belief)?;
            let space = build_space(&model, &initial, exhaustive_beliefs)?;
            let initial_idx = space.index_of(&initial).ok_or_else(|| {
                AppError::Validation("initial belief is outside the belief space".to_string())
            })?;
            let sol = value_iteration_po(&model, &space, mode.into())?;
            let mut out = String::new();
            if let Some(dest) = &trace {
                let names: Vec<String> = (0..space.len()).map(|b| format!("b{b}")).collect();
                let text = sol.trace.render(
                    |b| names[b].as_str(),
                    |l| model.scale().label(l),
                    |a| model.base().action_name(a),
                );
                emit_trace(dest, &text, &mut out)?;
            }
            out.push_str(&output::render_pomdp(
                &model,
                &space,
                &sol,
                initial_idx,
                common.format,
            ));
            Ok(out)
        }
        Command::SolveStoch {
            common,
            horizon,
            epsilon,
        } => {
            let model = load_stoch(&common.model)?;
            match parse_horizon(horizon)? {
                Horizon::Infinite => {
                    let sol = value_iteration_stoch(&model, epsilon)?;
                    Ok(output::render_stoch_stationary(&model, &sol, common.format))
                }
                Horizon::Finite(n) => {
                    let sol = backwards_induction_stoch(&model, n)?;
                    Ok(output::render_stoch_finite(&model, &sol, n, common.format))
                }
            }
        }
        Command::Beliefs {
            common,
            initial_belief,
            exhaustive_beliefs,
        } => {
            let model = load_pi_pomdp(&common.model)?;
            let initial = parse_initial(&model, &initial_belief)?;
            let space = build_space(&model, &initial, exhaustive_beliefs)?;
            Ok(output::render_beliefs(&model, &space, common.format))
        }
        Command::EvalPolicy {
            common,
            policy,
            horizon,
            mode,
        } => {
            let model = load_pi_mdp(&common.model)?;
            let text = std::fs::read_to_string(&policy)
                .map_err(|e| AppError::Parse(format!("cannot read policy file: {e}")))?;
            let map: std::collections::BTreeMap<String, String> = serde_json::from_str(&text)
                .map_err(|e| AppError::Parse(format!("invalid policy JSON: {e}")))?;
            let mut rule = Vec::with_capacity(model.n_states());
            for s in 0..model.n_states() {
                let name = model.state_name(s);
                let action = map.get(name).ok_or_else(|| {
                    AppError::Validation(format!("policy does not cover state `{name}`"))
                })?;
                let a = model.action_id(action).ok_or_else(|| {
                    AppError::Validation(format!("policy.{name}: unknown action `{action}`"))
                })?;
                rule.push(a);
            }
            for extra in map.keys() {
                if model.state_id(extra).is_none() {
                    return Err(AppError::Validation(format!(
                        "policy.{extra}: not a declared state"
                    )));
                }
            }
            let values = policy_value(&model, &rule, horizon, mode.into())?;
            Ok(output::render_values(&model, &values, common.format))
        }
        Command::GenGrid {
            preset,
            width,
            height,
            goal,
            obstacles,
            walls,
            scale,
            slip,
            neighbor_util,
            obs_mode,
            output: dest,
        } => {
            let spec = match preset.as_deref() {
                Some("paper-3x3") => GridworldSpec::paper_3x3(),
                Some(other) => {
                    return Err(AppError::Validation(format!("unknown preset `{other}`")))
                }
                None => {
                    let (width, height) = match (width, height) {
                        (Some(w), Some(h)) => (w, h),
                        _ => {
                            return Err(AppError::Validation(
                                "either --preset or --width/--height is required".to_string(),
                            ))
                        }
                    };
                    let goal = goal.ok_or_else(|| {
                        AppError::Validation("--goal is required without a preset".to_string())
                    })?;
                    let mut obstacle_cells = BTreeSet::new();
                    for o in &obstacles {
                        obstacle_cells.insert(parse_cell(o)?);
                    }
                    let mut wall_edges = BTreeSet::new();
                    for w in &walls {
                        let (a, b) = w.split_once(':').ok_or_else(|| {
                            AppError::Validation(format!("wall `{w}` is not `r1,c1:r2,c2`"))
                        })?;
                        wall_edges.insert((parse_cell(a)?, parse_cell(b)?));
                    }
                    GridworldSpec {
                        width,
                        height,
                        obstacles: obstacle_cells,
                        walls: wall_edges,
                        goal: parse_cell(&goal)?,
                        scale_labels: scale.split(',').map(str::to_string).collect(),
                        slip_label: slip,
                        neighbor_goal_label: neighbor_util,
                        observation_mode: match obs_mode {
                            ObsModeArg::Full => ObservationMode::Full,
                            ObsModeArg::WallConfig => ObservationMode::WallConfiguration,
                        },
                    }
                }
            };
            let model = generate_gridworld(&spec)
                .map_err(|e| AppError::Validation(e.to_string()))?;
            let text = to_json(&pi_pomdp_to_file(&model));
            match dest {
                Some(path) => {
                    std::fs::write(path, text)?;
                    Ok(String::new())
                }
                None => Ok(text),
            }
        }
    }
}

fn parse_horizon(n: Option<usize>) -> Result<Horizon, AppError> {
    match n {
        Some(n) => Horizon::finite(n).map_err(|e: ModelBuildError| AppError::Validation(e.to_string())),
        None => Ok(Horizon::Infinite),
    }
}

fn parse_cell(text: &str) -> Result<(usize, usize), AppError> {
    let (r, c) = text
        .split_once(',')
        .ok_or_else(|| AppError::Validation(format!("cell `{text}` is not `row,col`")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<usize>()
            .map_err(|_| AppError::Validation(format!("cell `{text}` is not `row,col`")))
    };
    Ok((parse(r)?, parse(c)?))
}
