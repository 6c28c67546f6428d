use std::fs::File;
use std::io::{self, BufWriter, Write};

use cvqkd_attack::analysis::{estimate_parameters, sweep_v_be, EstimationOptions};
use cvqkd_attack::attack::{
    attack_residuals, solve_at_t2, solve_general, solve_same_sign, AttackTarget,
};
use cvqkd_attack::coupler::TELECOM_WAVELENGTH;
use cvqkd_attack::session::{fmt_f64, run_session, session_t2, CSV_HEADER};
use cvqkd_attack::{Error, QuadraturePair, SessionDataset, T2Policy};

use crate::config::{OutputFormat, RunConfig};
use crate::CliError;

fn io_err(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Runs `body` against the configured output file, or stdout without one.
fn with_output(
    cfg: &RunConfig,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w).and_then(|_| w.flush()).map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w).map_err(io_err)
        }
    }
}

fn write_table(
    w: &mut dyn Write,
    format: OutputFormat,
    columns: &[&str],
    rows: impl Iterator<Item = (usize, Vec<f64>)>,
    with_index: bool,
) -> io::Result<()> {
    if format == OutputFormat::Csv {
        writeln!(w, "{}", columns.join(","))?;
    }
    for (k, vals) in rows {
        match format {
            OutputFormat::Csv => {
                let mut fields: Vec<String> = Vec::with_capacity(vals.len() + 1);
                if with_index {
                    fields.push(k.to_string());
                }
                fields.extend(vals.iter().map(|v| fmt_f64(*v)));
                writeln!(w, "{}", fields.join(","))?;
            }
            OutputFormat::JsonLines => {
                let mut fields: Vec<String> = Vec::with_capacity(vals.len() + 1);
                let names = if with_index {
                    fields.push(format!("\"{}\":{k}", columns[0]));
                    &columns[1..]
                } else {
                    columns
                };
                fields.extend(
                    names
                        .iter()
                        .zip(&vals)
                        .map(|(n, v)| format!("\"{n}\":{}", fmt_f64(*v))),
                );
                writeln!(w, "{{{}}}", fields.join(","))?;
            }
        }
    }
    Ok(())
}

pub fn sweep(cfg: &RunConfig) -> Result<(), CliError> {
    let s = &cfg.sweep;
    let rows = sweep_v_be(s.t2_min, s.t2_max, s.steps)?;
    with_output(cfg, |w| {
        write_table(
            w,
            cfg.output.format,
            &["t2", "first_term", "second_term", "v_be"],
            rows.iter()
                .enumerate()
                .map(|(k, r)| (k, vec![r.t2, r.first_term, r.second_term, r.v_be])),
            false,
        )
    })
}

fn line(name: &str, v: f64) {
    println!("{name} = {}", fmt_f64(v));
}

fn nearest_telecom(cfg: &RunConfig, t: f64) -> Result<Option<f64>, CliError> {
    let model = cfg.coupler.model()?;
    let band = cfg.coupler.band()?;
    Ok(model
        .invert_transmittance(t, &band, &cfg.coupler.inversion())
        .ok()
        .and_then(|roots| {
            roots.into_iter().min_by(|a, b| {
                (a - TELECOM_WAVELENGTH)
                    .abs()
                    .total_cmp(&(b - TELECOM_WAVELENGTH).abs())
            })
        }))
}

pub fn solve(cfg: &RunConfig, x_e: f64, p_e: f64) -> Result<(), CliError> {
    if !(x_e.is_finite() && p_e.is_finite()) {
        return Err(CliError::Config(format!(
            "non-finite outcome ({x_e}, {p_e})"
        )));
    }
    let params = &cfg.protocol;
    let forged_lo = cfg
        .attack
        .forged_lo_intensity
        .unwrap_or(params.lo_intensity);
    let target = AttackTarget::new(
        QuadraturePair::new(x_e, p_e),
        params.eta,
        params.lo_amplitude(),
    );
    let (method, sol) = match cfg.attack.policy {
        T2Policy::Fixed { t2 } => ("fixed-t2", solve_at_t2(&target, t2, forged_lo)?),
        _ => match solve_same_sign(&target, forged_lo) {
            Ok(sol) => ("same-sign", sol),
            Err(Error::WrongBranch { .. }) => ("general", solve_general(&target, forged_lo, None)?),
            Err(e) => return Err(e.into()),
        },
    };
    let (rx, rp) = attack_residuals(&sol, &target);
    line("x_E", x_e);
    line("p_E", p_e);
    println!("method = {method}");
    line("T1", sol.t1);
    line("T2", sol.t2);
    line("signal_intensity", sol.signal_intensity);
    line("lo_intensity", sol.lo_intensity);
    line("signal_to_lo_ratio", sol.signal_ratio());
    for (name, t) in [("lambda1_um", sol.t1), ("lambda2_um", sol.t2)] {
        match nearest_telecom(cfg, t)? {
            Some(l) => line(name, l),
            None => println!("{name} = unrealizable"),
        }
    }
    line("residual_x", rx);
    line("residual_p", rp);
    line("relative_residual_x", rx / target.residual_scale());
    line("relative_residual_p", rp / target.residual_scale());
    Ok(())
}

const DATASET_COLUMNS: [&str; 10] = [
    "round",
    "x_A",
    "p_A",
    "x_E",
    "p_E",
    "x_B",
    "p_B",
    "T1",
    "T2",
    "signal_intensity",
];

fn write_dataset(w: &mut dyn Write, ds: &SessionDataset, format: OutputFormat) -> io::Result<()> {
    if format == OutputFormat::Csv {
        return ds.write_csv(w);
    }
    write_table(
        w,
        format,
        &DATASET_COLUMNS,
        ds.records.iter().enumerate().map(|(k, r)| {
            (
                k,
                vec![
                    r.alice.x,
                    r.alice.p,
                    r.eve.x,
                    r.eve.p,
                    r.bob.x,
                    r.bob.p,
                    r.solution.t1,
                    r.solution.t2,
                    r.solution.signal_intensity,
                ],
            )
        }),
        true,
    )
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    debug_assert_eq!(DATASET_COLUMNS.join(","), CSV_HEADER);
    let sim = &cfg.simulation;
    if sim.n_rounds == 0 {
        return Err(CliError::Config(
            "simulation.n_rounds must be at least 1".into(),
        ));
    }
    let session = cfg.session()?;
    let ds = run_session(&cfg.protocol, &session, sim.n_rounds, sim.seed)?;
    with_output(cfg, |w| write_dataset(w, &ds, cfg.output.format))?;

    // keep stdout clean for the dataset when no file is configured
    let mut summary: Box<dyn Write> = match cfg.output.path {
        Some(_) => Box::new(io::stdout().lock()),
        None => Box::new(io::stderr().lock()),
    };
    let mut report = || -> io::Result<()> {
        writeln!(summary, "rounds = {}", ds.len())?;
        writeln!(summary, "seed = {}", ds.seed)?;
        match session_t2(&cfg.protocol, &session) {
            Ok(Some(t2)) => writeln!(summary, "t2 = {}", fmt_f64(t2))?,
            _ => writeln!(summary, "t2 = per-round")?,
        }
        match estimate_parameters(&ds, &EstimationOptions::default()) {
            Ok(r) => {
                writeln!(summary, "t_hat = {}", fmt_f64(r.t_hat))?;
                writeln!(summary, "t_hat_se = {}", fmt_f64(r.t_hat_se))?;
                writeln!(summary, "v_ba_hat = {}", fmt_f64(r.v_ba_hat))?;
                writeln!(summary, "excess_hat = {}", fmt_f64(r.excess_hat))?;
                writeln!(summary, "excess_se = {}", fmt_f64(r.excess_se))?;
                writeln!(summary, "epsilon = {}", fmt_f64(cfg.protocol.epsilon))?;
                writeln!(
                    summary,
                    "attack_detected = {}",
                    r.detects_attack(cfg.protocol.epsilon)
                )?;
            }
            Err(e @ Error::InsufficientData { .. }) => {
                writeln!(summary, "estimation refused: {e}")?
            }
            Err(e) => return Err(io::Error::other(e)),
        }
        summary.flush()
    };
    report().map_err(io_err)
}

pub fn coupler_forward(cfg: &RunConfig, lambda: f64) -> Result<(), CliError> {
    let model = cfg.coupler.model()?;
    let t = model.transmittance(lambda)?;
    line("lambda_um", lambda);
    line("transmittance", t);
    line("phase", model.phase(lambda));
    line("max_transmittance", model.max_transmittance());
    Ok(())
}

pub fn coupler_inverse(cfg: &RunConfig, t: f64) -> Result<(), CliError> {
    let model = cfg.coupler.model()?;
    let band = cfg.coupler.band()?;
    let roots = model.invert_transmittance(t, &band, &cfg.coupler.inversion())?;
    line("transmittance", t);
    line("lambda_min_um", band.lambda_min);
    line("lambda_max_um", band.lambda_max);
    println!("solutions = {}", roots.len());
    for l in roots {
        line("lambda_um", l);
    }
    Ok(())
}
