use std::path::PathBuf;

use clap::{Args, ValueEnum};
use omnigeom_core::task_weighting::{
    default_curves, simulate, Dispersion, Scheduler, VarNormConfig, WeightSchedule,
    DWA_TEMPERATURE, VARNORM_EPS, VARNORM_WINDOW,
};

use crate::error::{CliError, Result};
use crate::table::{fmt_num, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchedulerName {
    Varnorm,
    Dwa,
    Geometric,
    Equal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DispersionName {
    Variance,
    Stddev,
}

#[derive(Debug, Clone, Args)]
pub struct WeightsSimArgs {
    #[arg(long, value_enum, default_value_t = SchedulerName::Varnorm)]
    pub scheduler: SchedulerName,
    /// Number of tasks
    #[arg(long, default_value_t = 3)]
    pub tasks: usize,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Log-normal noise level of the synthetic loss curves
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// VarNorm history window n
    #[arg(long, default_value_t = VARNORM_WINDOW)]
    pub window: usize,
    /// VarNorm variance guard
    #[arg(long, default_value_t = VARNORM_EPS)]
    pub eps: f64,
    /// VarNorm dispersion: inverse variance or inverse standard deviation
    #[arg(long, value_enum, default_value_t = DispersionName::Variance)]
    pub dispersion: DispersionName,
    /// DWA softmax temperature
    #[arg(long, default_value_t = DWA_TEMPERATURE)]
    pub temperature: f64,
    /// Output CSV (epoch, task, loss, weight)
    #[arg(long)]
    pub out: PathBuf,
}

pub fn scheduler(args: &WeightsSimArgs) -> Result<Scheduler> {
    Ok(match args.scheduler {
        SchedulerName::Equal => Scheduler::Equal,
        SchedulerName::Geometric => Scheduler::Geometric,
        SchedulerName::Dwa => Scheduler::Dwa {
            temperature: args.temperature,
        },
        SchedulerName::Varnorm => {
            if !(args.eps >= 0.0 && args.eps.is_finite()) {
                return Err(CliError::input(
                    "--eps must be a finite non-negative number",
                ));
            }
            Scheduler::VarNorm(VarNormConfig {
                window: args.window,
                eps: args.eps,
                dispersion: match args.dispersion {
                    DispersionName::Variance => Dispersion::Variance,
                    DispersionName::Stddev => Dispersion::StdDev,
                },
            })
        }
    })
}

pub fn schedule(args: &WeightsSimArgs) -> Result<WeightSchedule> {
    if args.tasks == 0 {
        return Err(CliError::input("--tasks must be at least 1"));
    }
    let curves = default_curves(args.tasks, args.noise);
    Ok(simulate(
        &curves,
        &scheduler(args)?,
        args.epochs,
        args.seed,
    )?)
}

pub fn table(s: &WeightSchedule) -> Table {
    let mut t = Table::new(&["epoch", "task", "loss", "weight"]);
    for (e, task, loss, weight) in s.rows() {
        t.push(vec![
            e.to_string(),
            task.to_string(),
            fmt_num(loss),
            fmt_num(weight),
        ]);
    }
    t
}

pub fn run(args: &WeightsSimArgs) -> Result<()> {
    table(&schedule(args)?).write(&args.out)
}
