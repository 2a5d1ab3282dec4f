//! Grids of runs behind the error tables.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::config::KvConfig;
use super::experiment::{run_experiment, write_artifacts, ExperimentConfig, Scale};
use super::svg::{LinePlot, Series};
use crate::discovery::{convergence_order, par_map, save_reports, ErrorReport};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableId {
    /// ODE-net with Euler on the damped oscillator.
    Table2Euler,
    /// ODE-net with explicit midpoint on the Lorenz system.
    Table2Midpoint,
    /// Symplectic versus explicit Euler HNNs on the pendulum.
    Table3,
}

impl TableId {
    pub const ALL: [TableId; 3] = [TableId::Table2Euler, TableId::Table2Midpoint, TableId::Table3];

    pub fn name(self) -> &'static str {
        match self {
            TableId::Table2Euler => "table2-euler",
            TableId::Table2Midpoint => "table2-midpoint",
            TableId::Table3 => "table3",
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown table `{s}` (table2-euler, table2-midpoint, table3)")))
    }
}

/// One row of a table. Rows of a block share everything but the step `h`,
/// and orders are measured between rows of the same block.
#[derive(Clone, Debug)]
pub struct Cell {
    pub block: usize,
    pub config: ExperimentConfig,
}

/// Data steps of the upper block of the second table, all with `S = 2`.
pub const TABLE2_DATA_STEPS: [f64; 3] = [0.02, 0.04, 0.08];
/// Composition counts of the lower block, all with `T = 0.04`.
pub const TABLE2_COMPOSITIONS: [usize; 3] = [4, 2, 1];

fn table2_cell(table: TableId, t: f64, s: usize, base: &KvConfig, dir: &Path) -> Result<ExperimentConfig> {
    let (problem, method) = match table {
        TableId::Table2Euler => ("damped-oscillator", "euler"),
        _ => ("lorenz", "explicit-midpoint"),
    };
    let mut kv = base.clone();
    kv.set("problem.name", problem)?;
    kv.set("model.kind", "odenet")?;
    kv.set("method.name", method)?;
    kv.set("method.T", t)?;
    kv.set("method.S", s)?;
    kv.set("run.id", format!("{table}-T{t}-S{s}"))?;
    kv.set("run.out", dir.display())?;
    ExperimentConfig::from_kv(&kv)
}

/// The runs of a table. `base` supplies shared keys such as `run.scale`
/// and `run.seed`; cell outputs go under `out/<table>/`.
pub fn grid(table: TableId, base: &KvConfig, out: &Path) -> Result<Vec<Cell>> {
    let dir = out.join(table.name());
    let mut cells = Vec::new();
    match table {
        TableId::Table2Euler | TableId::Table2Midpoint => {
            for t in TABLE2_DATA_STEPS {
                cells.push(Cell { block: 0, config: table2_cell(table, t, 2, base, &dir)? });
            }
            for s in TABLE2_COMPOSITIONS {
                cells.push(Cell { block: 1, config: table2_cell(table, 0.04, s, base, &dir)? });
            }
        }
        TableId::Table3 => {
            for (block, model) in ["hnn-symplectic-euler", "hnn-explicit"].into_iter().enumerate() {
                for space in ["space1", "space2"] {
                    let mut kv = base.clone();
                    kv.set("problem.name", "pendulum-hnn")?;
                    kv.set("problem.domain", space)?;
                    kv.set("model.kind", model)?;
                    kv.set("run.id", format!("{table}-{model}-{space}"))?;
                    kv.set("run.out", dir.display())?;
                    cells.push(Cell { block, config: ExperimentConfig::from_kv(&kv)? });
                }
            }
        }
    }
    Ok(cells)
}

/// Sets `order` on every row whose block also holds a row at twice its step.
pub fn fill_orders(rows: &mut [ErrorReport], blocks: &[usize]) {
    let snapshot: Vec<(usize, f64, Option<f64>)> =
        rows.iter().zip(blocks).map(|(r, &b)| (b, r.h, r.e_net_vs_f)).collect();
    for (i, row) in rows.iter_mut().enumerate() {
        let (block, h, e_h) = snapshot[i];
        let coarse = snapshot.iter().find(|(b, h2, _)| *b == block && (h2 - 2.0 * h).abs() <= 1e-9 * h);
        row.order = match (coarse, e_h) {
            (Some((_, _, Some(e_2h))), Some(e_h)) => convergence_order(*e_2h, e_h).ok(),
            _ => None,
        };
    }
}

/// Rows of a finished table.
pub struct TableRun {
    pub rows: Vec<ErrorReport>,
    pub blocks: Vec<usize>,
    /// `E(f, f_h^K)` per row, when the run succeeded.
    pub e_f_vs_imde: Vec<Option<f64>>,
}

/// Runs every distinct configuration once (cells on up to the configured
/// number of workers), writes per-cell artifacts, and fills the orders.
/// A failing cell is reported in its `status` column and the rest proceed.
pub fn run_cells(cells: &[Cell]) -> TableRun {
    let mut unique: Vec<&ExperimentConfig> = Vec::new();
    for c in cells {
        if !unique.iter().any(|u| u.run_id == c.config.run_id) {
            unique.push(&c.config);
        }
    }
    let results = par_map(&unique, |cfg| match run_experiment(cfg) {
        Ok(outcome) => match write_artifacts(cfg, &outcome) {
            Ok(_) => (outcome.report, Some(outcome.e_f_vs_imde)),
            Err(e) => {
                let mut r = outcome.report;
                r.status = format!("failed: {e}");
                (r, Some(outcome.e_f_vs_imde))
            }
        },
        Err(e) => (cfg.blank_report(format!("failed: {e}")), None),
    });
    let mut rows = Vec::new();
    let mut e_f = Vec::new();
    for c in cells {
        let i = unique.iter().position(|u| u.run_id == c.config.run_id).unwrap();
        rows.push(results[i].0.clone());
        e_f.push(results[i].1);
    }
    let blocks: Vec<usize> = cells.iter().map(|c| c.block).collect();
    fill_orders(&mut rows, &blocks);
    TableRun { rows, blocks, e_f_vs_imde: e_f }
}

/// Runs a whole table and writes `out/<table>.csv` and `out/<table>.svg`.
pub fn reproduce(table: TableId, base: &KvConfig, out: &Path) -> Result<(TableRun, PathBuf)> {
    let cells = grid(table, base, out)?;
    let run = run_cells(&cells);
    std::fs::create_dir_all(out)?;
    let csv = out.join(format!("{table}.csv"));
    save_reports(&csv, &run.rows)?;
    std::fs::write(out.join(format!("{table}.svg")), summary_plot(table, &run).render())?;
    Ok((run, csv))
}

fn summary_plot(table: TableId, run: &TableRun) -> LinePlot {
    let rows = || run.rows.iter().zip(&run.blocks).filter(|(_, &b)| b == 0).map(|(r, _)| r);
    let pick = |f: fn(&ErrorReport) -> Option<f64>| -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = rows().filter_map(|r| Some((r.h, f(r)?))).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    };
    match table {
        TableId::Table3 => LinePlot {
            title: "HNN training and test loss".into(),
            x_label: "row".into(),
            y_label: "loss".into(),
            log_y: true,
            series: vec![
                Series::new(
                    "train",
                    run.rows.iter().enumerate().filter_map(|(i, r)| Some((i as f64, r.train_loss?))).collect(),
                ),
                Series::new(
                    "test",
                    run.rows.iter().enumerate().filter_map(|(i, r)| Some((i as f64, r.test_loss?))).collect(),
                ),
            ],
            ..LinePlot::default()
        },
        _ => LinePlot {
            title: format!("{table}: error against the step"),
            x_label: "h".into(),
            y_label: "E".into(),
            log_x: true,
            log_y: true,
            series: vec![
                Series::new("E(net, f)", pick(|r| r.e_net_vs_f)),
                Series::new("E(net, IMDE)", pick(|r| r.e_net_vs_imde)),
            ],
        },
    }
}

/// A base configuration carrying scale and seed.
pub fn base_config(scale: Scale, seed: u64) -> KvConfig {
    let mut kv = KvConfig::new();
    kv.set("run.scale", scale).expect("valid key");
    kv.set("run.seed", seed).expect("valid key");
    kv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(h: f64, e: f64) -> ErrorReport {
        ErrorReport {
            run_id: String::new(),
            model: "odenet".into(),
            method: "euler".into(),
            t: 2.0 * h,
            s: 2,
            h,
            train_loss: None,
            test_loss: None,
            e_net_vs_f: Some(e),
            e_net_vs_imde: None,
            order: None,
            status: "ok".into(),
        }
    }

    #[test]
    fn orders_pair_rows_within_a_block() {
        let mut rows = vec![row(0.01, 0.1), row(0.02, 0.2), row(0.04, 0.8), row(0.01, 1.0), row(0.02, 1.0)];
        fill_orders(&mut rows, &[0, 0, 0, 1, 1]);
        let orders: Vec<Option<f64>> = rows.iter().map(|r| r.order.map(|o| (o * 1e9).round() / 1e9)).collect();
        assert_eq!(orders, vec![Some(1.0), Some(2.0), None, Some(0.0), None]);
    }

    #[test]
    fn grids_have_the_expected_shape() {
        let base = base_config(Scale::Desk, 0);
        let cells = grid(TableId::Table2Euler, &base, Path::new("out")).unwrap();
        assert_eq!(cells.len(), 6);
        let ts: Vec<(f64, usize)> = cells.iter().map(|c| (c.config.data_step, c.config.compositions)).collect();
        assert_eq!(ts, vec![(0.02, 2), (0.04, 2), (0.08, 2), (0.04, 4), (0.04, 2), (0.04, 1)]);
        let t3 = grid(TableId::Table3, &base, Path::new("out")).unwrap();
        assert_eq!(t3.len(), 4);
        assert!(t3.iter().all(|c| c.config.problem.name == "pendulum-hnn"));
        assert_eq!("table3".parse::<TableId>().unwrap(), TableId::Table3);
        assert!("table4".parse::<TableId>().is_err());
    }
}
