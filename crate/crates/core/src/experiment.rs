//! TGC experiment tables: one CSV row per `(n, T)` cell.

use std::path::Path;
use std::time::{Duration, Instant};

use crate::check::{check, CheckConfig, StrategyMode};
use crate::digital::{digitize, DEFAULT_STATE_CAP};
use crate::error::{Error, Result};
use crate::lang::{parse_formula, parse_model};
use crate::tgc::{gen_tgc_formula, gen_tgc_model};

pub const CSV_HEADER: [&str; 10] = [
    "n",
    "T",
    "mode",
    "holds",
    "p_min_at_witness",
    "witness",
    "states",
    "moves",
    "wall_ms",
    "soundness",
];

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub ns: Vec<usize>,
    pub ts: Vec<u32>,
    pub check: CheckConfig,
    pub timeout: Duration,
    /// Cells evaluated at once.
    pub jobs: usize,
    pub state_cap: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            ns: vec![2, 3],
            ts: vec![5, 30],
            check: CheckConfig::default(),
            timeout: Duration::from_secs(600),
            jobs: 1,
            state_cap: DEFAULT_STATE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    Holds(bool),
    /// Fewer than two trains: the formula is undefined.
    NotApplicable,
    Timeout,
    Failed(String),
}

impl Outcome {
    pub fn as_str(&self) -> String {
        match self {
            Outcome::Holds(b) => b.to_string(),
            Outcome::NotApplicable => "n/a".into(),
            Outcome::Timeout => "timeout".into(),
            Outcome::Failed(e) => format!("error: {e}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub n: usize,
    pub t: u32,
    pub mode: StrategyMode,
    pub outcome: Outcome,
    /// `p_min` of the bound under the best strategy found.
    pub p_min: Option<f64>,
    pub witness: Option<String>,
    pub states: Option<usize>,
    pub moves: Option<usize>,
    pub wall_ms: u128,
    pub soundness: Option<&'static str>,
}

impl Row {
    pub fn record(&self) -> [String; 10] {
        let opt = |v: Option<String>| v.unwrap_or_default();
        [
            self.n.to_string(),
            self.t.to_string(),
            self.mode.to_string(),
            self.outcome.as_str(),
            opt(self.p_min.map(|p| format!("{p:.10}"))),
            opt(self.witness.clone()),
            opt(self.states.map(|s| s.to_string())),
            opt(self.moves.map(|s| s.to_string())),
            self.wall_ms.to_string(),
            opt(self.soundness.map(str::to_string)),
        ]
    }
}

/// Runs a single cell with its own deadline.
pub fn run_cell(n: usize, t: u32, config: &ExperimentConfig) -> Row {
    let start = Instant::now();
    let mut row = Row {
        n,
        t,
        mode: config.check.mode,
        outcome: Outcome::NotApplicable,
        p_min: None,
        witness: None,
        states: None,
        moves: None,
        wall_ms: 0,
        soundness: None,
    };
    let result = (|| -> Result<()> {
        let network = parse_model(&gen_tgc_model(n))?;
        let mdp = digitize(&network, config.state_cap)?;
        let stats = mdp.stats();
        row.states = Some(stats.states);
        row.moves = Some(stats.moves);
        let formula = match gen_tgc_formula(n, t) {
            Ok(f) => parse_formula(&f)?,
            Err(Error::TgcTooFewTrains(_)) => return Ok(()),
            Err(e) => return Err(e),
        };
        let mut check_config = config.check.clone();
        check_config.vi.deadline = Some(start + config.timeout);
        let result = check(&network, &mdp, &formula, &check_config)?;
        let verdict = result.verdicts.last().expect("coalition formula");
        row.outcome = Outcome::Holds(result.holds);
        row.p_min = verdict.p_min();
        row.witness = verdict.witness().map(|w| w.trim_end().replace('\n', "; "));
        row.soundness = Some(result.soundness().as_str());
        Ok(())
    })();
    match result {
        Ok(()) => {}
        Err(Error::Timeout) => row.outcome = Outcome::Timeout,
        Err(e) => row.outcome = Outcome::Failed(e.to_string()),
    }
    row.wall_ms = start.elapsed().as_millis();
    row
}

/// All cells in `(n, T)` lexicographic order.
pub fn run_cells(config: &ExperimentConfig) -> Vec<Row> {
    let mut cells: Vec<(usize, u32)> = Vec::new();
    for &n in &config.ns {
        for &t in &config.ts {
            cells.push((n, t));
        }
    }
    cells.sort_unstable();
    cells.dedup();
    let run = || -> Vec<Row> {
        crate::par::map(&cells, jobs_mode(config.jobs), |&(n, t)| run_cell(n, t, config))
    };
    #[cfg(feature = "parallel")]
    if config.jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(config.jobs).build() {
            return pool.install(run);
        }
    }
    run()
}

fn jobs_mode(jobs: usize) -> crate::par::Parallelism {
    if jobs > 1 {
        crate::par::Parallelism::available()
    } else {
        crate::par::Parallelism::Sequential
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.record())?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

/// Runs all cells and writes the table to `path`.
pub fn run_experiment(config: &ExperimentConfig, path: &Path) -> Result<Vec<Row>> {
    let rows = run_cells(config);
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf)?;
    std::fs::write(path, buf).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_train_is_not_applicable() {
        let row = run_cell(1, 5, &ExperimentConfig::default());
        assert_eq!(row.outcome, Outcome::NotApplicable);
        assert_eq!(row.record()[3], "n/a");
        assert!(row.states.is_some());
    }

    #[test]
    fn irp_cell_is_false() {
        let config = ExperimentConfig {
            check: CheckConfig {
                mode: StrategyMode::Irp,
                ..CheckConfig::default()
            },
            ..ExperimentConfig::default()
        };
        let row = run_cell(2, 5, &config);
        assert_eq!(row.outcome, Outcome::Holds(false));
        assert_eq!(row.soundness, Some("exact"));
    }

    #[test]
    fn zero_timeout_reports_timeout() {
        let config = ExperimentConfig {
            timeout: Duration::ZERO,
            ..ExperimentConfig::default()
        };
        assert_eq!(run_cell(2, 30, &config).outcome, Outcome::Timeout);
    }

    #[test]
    fn csv_shape() {
        let rows = vec![run_cell(1, 5, &ExperimentConfig::default())];
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER.join(","));
        assert!(lines.next().unwrap().starts_with("1,5,irP,n/a,"));
    }
}
