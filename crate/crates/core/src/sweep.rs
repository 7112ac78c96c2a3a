//! Parameter sweeps over the HAPS offset or the task size.
//!
//! Rows are independent, so they are evaluated with rayon when the `parallel`
//! feature is on. Output order always follows the swept values.

use crate::error::ModelError;
use crate::modes::{
    energy_efficiency, mode_payload_power_w, ris_capacity, rs_capacity_at, Mode, ModeConfigs,
};
use crate::offload::{ComputeTask, OffloadProfile};
use crate::optimizer::{optimize_alpha, place_at_mode_optimum};
use crate::scenario::{Scenario, SweepRange, SweepVariable};
use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

fn map_rows<F>(values: &[f64], execution: Execution, f: F) -> Result<Vec<Vec<f64>>, ModelError>
where
    F: Fn(f64) -> Result<Vec<f64>, ModelError> + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            values.par_iter().map(|&v| f(v)).collect()
        }
        _ => values.iter().map(|&v| f(v)).collect(),
    }
}

fn expect_variable(range: &SweepRange, variable: SweepVariable) -> Result<(), ModelError> {
    if range.variable == variable {
        Ok(())
    } else {
        Err(ModelError::invalid(
            "sweep.variable",
            format!("this sweep runs over `{}`", variable.as_str()),
        ))
    }
}

pub fn capacity_header(elements: &[u32]) -> Vec<String> {
    let mut header: Vec<String> = [
        "x_m",
        "rs_half_bps_hz",
        "rs_opt_bps_hz",
        "alpha_opt",
        "rs_half_degradation",
    ]
    .map(String::from)
    .to_vec();
    header.extend(elements.iter().map(|n| format!("ris_n{n}_bps_hz")));
    header
}

/// Spectral efficiencies along the corridor: the relay at an even power
/// split and at its optimum, the split itself, the relative loss of the even
/// split, and the surface for each element count.
pub fn capacity_sweep(
    scenario: &Scenario,
    range: &SweepRange,
    execution: Execution,
) -> Result<Table, ModelError> {
    expect_variable(range, SweepVariable::Offset)?;
    let radio = scenario.radio;
    let row = |x: f64| -> Result<Vec<f64>, ModelError> {
        let geom = scenario.geometry.with_offset(x)?;
        let half = rs_capacity_at(&geom, &radio, 0.5)?;
        let best = optimize_alpha(&geom, &radio);
        let degradation = if best.capacity_bps_hz > 0.0 {
            1.0 - half / best.capacity_bps_hz
        } else {
            0.0
        };
        let mut row = vec![x, half, best.capacity_bps_hz, best.alpha, degradation];
        for &n in &scenario.sweep_elements {
            row.push(ris_capacity(
                &geom,
                &radio,
                &scenario.modes.ris.with_elements(n),
            ));
        }
        Ok(row)
    };
    Ok(Table {
        header: capacity_header(&scenario.sweep_elements),
        rows: map_rows(&range.values(), execution, row)?,
    })
}

pub fn ee_header(elements: &[u32]) -> Vec<String> {
    let mut header: Vec<String> = ["x_m", "rs_capacity_bps", "rs_power_w", "rs_ee_bits_per_j"]
        .map(String::from)
        .to_vec();
    for n in elements {
        header.push(format!("ris_n{n}_capacity_bps"));
        header.push(format!("ris_n{n}_power_w"));
        header.push(format!("ris_n{n}_ee_bits_per_j"));
    }
    header
}

/// Energy efficiency along the corridor, relay at its optimal split.
pub fn ee_sweep(
    scenario: &Scenario,
    range: &SweepRange,
    execution: Execution,
) -> Result<Table, ModelError> {
    expect_variable(range, SweepVariable::Offset)?;
    let radio = scenario.radio;
    let bandwidth = radio.bandwidth_hz;
    let row = |x: f64| -> Result<Vec<f64>, ModelError> {
        let geom = scenario.geometry.with_offset(x)?;
        let rs_bps = optimize_alpha(&geom, &radio).capacity_bps_hz * bandwidth;
        let rs_power = mode_payload_power_w(Mode::Rs, &scenario.modes);
        let mut row = vec![x, rs_bps, rs_power, energy_efficiency(rs_bps, rs_power)?];
        for &n in &scenario.sweep_elements {
            let configs = ModeConfigs {
                ris: scenario.modes.ris.with_elements(n),
                ..scenario.modes
            };
            let bps = ris_capacity(&geom, &radio, &configs.ris) * bandwidth;
            let power = mode_payload_power_w(Mode::Ris, &configs);
            row.extend([bps, power, energy_efficiency(bps, power)?]);
        }
        Ok(row)
    };
    Ok(Table {
        header: ee_header(&scenario.sweep_elements),
        rows: map_rows(&range.values(), execution, row)?,
    })
}

pub fn smbs_latency_column(cpu_hz: f64) -> String {
    format!("smbs_fh_{cpu_hz:e}_s")
}

pub fn latency_header(cpu_rates: &[f64]) -> Vec<String> {
    let mut header = vec!["size_bits".to_string()];
    header.extend(cpu_rates.iter().map(|&f| smbs_latency_column(f)));
    header.push("rs_s".into());
    header.push("ris_s".into());
    header
}

/// Offload profiles with every mode at its own best placement: one base
/// station profile per onboard CPU rate, then the relay and the surface.
pub fn latency_profiles(scenario: &Scenario) -> Vec<OffloadProfile> {
    let (geom, radio, cloud) = (&scenario.geometry, &scenario.radio, &scenario.cloud);
    let mut profiles: Vec<OffloadProfile> = scenario
        .sweep_cpu_hz
        .iter()
        .map(|&cpu_hz| {
            let mut configs = scenario.modes;
            configs.smbs.cpu_hz = cpu_hz;
            let placed = place_at_mode_optimum(Mode::Smbs, geom, radio, &configs);
            OffloadProfile::new(Mode::Smbs, &placed, radio, &configs, cloud)
        })
        .collect();
    for mode in [Mode::Rs, Mode::Ris] {
        let placed = place_at_mode_optimum(mode, geom, radio, &scenario.modes);
        profiles.push(OffloadProfile::new(
            mode,
            &placed,
            radio,
            &scenario.modes,
            cloud,
        ));
    }
    profiles
}

/// End-to-end offload latency against task size.
pub fn latency_sweep(
    scenario: &Scenario,
    range: &SweepRange,
    execution: Execution,
) -> Result<Table, ModelError> {
    expect_variable(range, SweepVariable::TaskSize)?;
    let profiles = latency_profiles(scenario);
    let cycles_per_bit = scenario.cycles_per_bit;
    let row = |size: f64| -> Result<Vec<f64>, ModelError> {
        let task = ComputeTask::new(size, cycles_per_bit)?;
        let mut row = Vec::with_capacity(profiles.len() + 1);
        row.push(size);
        for p in &profiles {
            row.push(p.latency(&task)?);
        }
        Ok(row)
    };
    Ok(Table {
        header: latency_header(&scenario.sweep_cpu_hz),
        rows: map_rows(&range.values(), execution, row)?,
    })
}

/// Gnuplot script plotting every column of `csv_path` against the first.
pub fn gnuplot_script(table: &Table, csv_path: &str, ylabel: &str) -> String {
    let mut script = String::new();
    script.push_str("set datafile separator ','\n");
    script.push_str("set key autotitle columnhead\n");
    script.push_str("set grid\n");
    script.push_str(&format!(
        "set xlabel '{}'\n",
        table.header.first().map_or("", String::as_str)
    ));
    script.push_str(&format!("set ylabel '{ylabel}'\n"));
    let series: Vec<String> = (2..=table.header.len())
        .map(|col| format!("'{csv_path}' using 1:{col} with lines"))
        .collect();
    script.push_str(&format!("plot {}\n", series.join(", \\\n     ")));
    script
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario() -> Scenario {
        Scenario::default()
    }

    #[test]
    fn default_capacity_sweep_has_121_rows() {
        let s = scenario();
        let table = capacity_sweep(&s, &s.default_offset_sweep(), Execution::Sequential).unwrap();
        assert_eq!(table.rows.len(), 121);
        assert_eq!(table.header.len(), 8);
        assert!(table.rows.iter().flatten().all(|v| v.is_finite()));
        for row in &table.rows {
            assert!(row[2] >= row[1]);
            assert!(row[5] < row[6] && row[6] < row[7]);
        }
    }

    #[test]
    fn sequential_and_parallel_agree_exactly() {
        let s = scenario();
        let range = s.default_offset_sweep().with_step(2_000.0);
        for sweep in [capacity_sweep, ee_sweep] {
            let a = sweep(&s, &range, Execution::Sequential).unwrap();
            let b = sweep(&s, &range, Execution::Parallel).unwrap();
            assert_eq!(a.to_csv(), b.to_csv());
        }
        let sizes = s.default_size_sweep().with_step(1.0e7);
        let a = latency_sweep(&s, &sizes, Execution::Sequential).unwrap();
        let b = latency_sweep(&s, &sizes, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ee_columns_are_capacity_over_power() {
        let s = scenario();
        let table = ee_sweep(
            &s,
            &s.default_offset_sweep().with_step(5_000.0),
            Execution::Sequential,
        )
        .unwrap();
        for row in &table.rows {
            for k in 0..=s.sweep_elements.len() {
                let (c, p, ee) = (row[1 + 3 * k], row[2 + 3 * k], row[3 + 3 * k]);
                assert!((ee - c / p).abs() <= 1e-12 * ee);
            }
        }
    }

    #[test]
    fn latency_header_and_zero_size_row() {
        let s = scenario();
        let table = latency_sweep(&s, &s.default_size_sweep(), Execution::Sequential).unwrap();
        assert_eq!(
            table.header,
            [
                "size_bits",
                "smbs_fh_1e9_s",
                "smbs_fh_2e9_s",
                "smbs_fh_3e9_s",
                "rs_s",
                "ris_s"
            ]
        );
        assert_eq!(table.rows.len(), 101);
        let first = &table.rows[0];
        for smbs in &first[1..4] {
            assert!(*smbs < first[4] && *smbs < first[5]);
        }
    }

    #[test]
    fn wrong_variable_is_rejected() {
        let s = scenario();
        assert!(latency_sweep(&s, &s.default_offset_sweep(), Execution::Sequential).is_err());
        assert!(capacity_sweep(&s, &s.default_size_sweep(), Execution::Sequential).is_err());
    }

    #[test]
    fn gnuplot_references_every_series() {
        let table = Table::new(vec!["x_m".into(), "a".into(), "b".into()]);
        let script = gnuplot_script(&table, "cap.csv", "bps/Hz");
        assert!(script.contains("'cap.csv' using 1:2"));
        assert!(script.contains("'cap.csv' using 1:3"));
        assert!(script.contains("set xlabel 'x_m'"));
    }
}
