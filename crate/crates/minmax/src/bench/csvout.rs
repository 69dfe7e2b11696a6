//! CSV export for every experiment. All writers are deterministic: the same
//! inputs produce byte-identical output (floats in scientific notation, LF
//! line endings, no locale or hash-order dependence).

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::bench::suites::{AlignmentAngleResult, CostRow, OgdaCell, OgdaMethodSummary};
use crate::bench::sweep::RunResult;
use crate::error::{Error, Result};
use crate::flow::FlowState;
use crate::lyapunov::{bound_violation_flags, EnergyTrace};
use crate::spectral::SpectralReport;

/// Scientific-notation rendering used for every floating-point cell.
fn num(v: f64) -> String {
    format!("{v:e}")
}

/// Empty cell for a missing optional value.
fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn opt_int(v: Option<usize>) -> String {
    v.map(|k| k.to_string()).unwrap_or_default()
}

/// Open `path` for buffered writing, run the writer, and flush, attaching
/// the path to any I/O error.
pub fn to_file<F>(path: &Path, write_fn: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    let wrap = |e: io::Error| Error::io(path.display().to_string(), e);
    let file = File::create(path).map_err(wrap)?;
    let mut w = BufWriter::new(file);
    write_fn(&mut w).map_err(wrap)?;
    w.flush().map_err(wrap)
}

fn run_row<W: Write + ?Sized>(w: &mut W, prefix: &str, r: &RunResult) -> io::Result<()> {
    writeln!(
        w,
        "{prefix}{},{},{},{},{},{},{},{},{},{},{},{}",
        r.method.name(),
        r.cfg_index,
        num(r.eta),
        num(r.beta),
        num(r.alpha),
        num(r.gamma_reg),
        opt_int(r.iters_to_tol),
        r.status.name(),
        num(r.final_dist_sq),
        r.grad_evals,
        r.jvp_evals,
        opt_num(r.fitted_rate),
    )
}

/// One row per (method, configuration) of a sweep.
pub fn write_run_csv<W: Write + ?Sized>(w: &mut W, rows: &[RunResult]) -> io::Result<()> {
    writeln!(
        w,
        "method,cfg_index,eta,beta,alpha,gamma_reg,iters_to_tol,status,final_dist_sq,\
         grad_evals,jvp_evals,fitted_rate"
    )?;
    for r in rows {
        run_row(w, "", r)?;
    }
    Ok(())
}

/// Best configuration per method at each coupling angle.
pub fn write_alignment_summary_csv<W: Write + ?Sized>(
    w: &mut W,
    angles: &[AlignmentAngleResult],
) -> io::Result<()> {
    writeln!(
        w,
        "theta_a_deg,method,cfg_index,eta,beta,alpha,gamma_reg,iters_to_tol,status,\
         final_dist_sq,grad_evals,jvp_evals,fitted_rate"
    )?;
    for angle in angles {
        let prefix = format!("{},", num(angle.theta_a_deg));
        for r in &angle.best {
            run_row(w, &prefix, r)?;
        }
    }
    Ok(())
}

/// Every (gamma, method, step size) cell of the separable-game grid.
pub fn write_ogda_cells_csv<W: Write + ?Sized>(w: &mut W, cells: &[OgdaCell]) -> io::Result<()> {
    writeln!(w, "gamma,method,eta,iters_to_tol,status,final_dist_sq")?;
    for c in cells {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(c.gamma),
            c.method.name(),
            num(c.eta),
            opt_int(c.iters),
            c.status.name(),
            num(c.final_dist_sq),
        )?;
    }
    Ok(())
}

/// Per-(gamma, method) totals of the separable-game grid.
pub fn write_ogda_summary_csv<W: Write + ?Sized>(
    w: &mut W,
    rows: &[OgdaMethodSummary],
) -> io::Result<()> {
    writeln!(w, "gamma,method,grid_points,converged_points,any_converged,best_eta,best_iters")?;
    for s in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            num(s.gamma),
            s.method.name(),
            s.grid_points,
            s.converged_points,
            u8::from(s.converged_points > 0),
            opt_num(s.best_eta),
            opt_int(s.best_iters),
        )?;
    }
    Ok(())
}

/// Update-operator roots per vector-field mode, plus a trailing summary
/// comment with the whole-spectrum radius and contraction verdict.
pub fn write_spectra_csv<W: Write + ?Sized>(w: &mut W, report: &SpectralReport) -> io::Result<()> {
    writeln!(w, "lambda_im,mu_plus_re,mu_plus_im,mu_minus_re,mu_minus_im,radius")?;
    for mode in &report.per_lambda {
        let radius = mode.mu_plus.norm().max(mode.mu_minus.norm());
        writeln!(
            w,
            "{},{},{},{},{},{}",
            num(mode.lambda.im),
            num(mode.mu_plus.re),
            num(mode.mu_plus.im),
            num(mode.mu_minus.re),
            num(mode.mu_minus.im),
            num(radius),
        )?;
    }
    writeln!(
        w,
        "# spectral_radius={} predicted_rate={} converged={}",
        num(report.spectral_radius),
        num(report.predicted_rate),
        report.converged,
    )
}

/// Energy trace with its decay bound and per-row violation flags.
pub fn write_lyapunov_csv<W: Write + ?Sized>(w: &mut W, trace: &EnergyTrace) -> io::Result<()> {
    writeln!(w, "k_or_t,energy,dist_sq,bound,violation_flag")?;
    let flags = bound_violation_flags(trace);
    for i in 0..trace.len() {
        let bound = trace.bound_curve.as_ref().map(|b| b[i]);
        writeln!(
            w,
            "{},{},{},{},{}",
            num(trace.ticks[i]),
            num(trace.energy[i]),
            num(trace.dist_sq[i]),
            opt_num(bound),
            flags[i],
        )?;
    }
    Ok(())
}

/// Integrated trajectory: time, positions, velocities, and the supplied
/// per-state energy (one entry per state).
pub fn write_flow_csv<W: Write + ?Sized>(
    w: &mut W,
    states: &[FlowState],
    energy: &[f64],
) -> io::Result<()> {
    assert_eq!(states.len(), energy.len(), "one energy value per state");
    let n = states.first().map_or(0, |s| s.x.len());
    let mut header = String::from("t");
    for tag in ["x", "y", "vx", "vy"] {
        for i in 0..n {
            header.push_str(&format!(",{tag}{i}"));
        }
    }
    header.push_str(",energy");
    writeln!(w, "{header}")?;
    for (s, &e) in states.iter().zip(energy.iter()) {
        write!(w, "{}", num(s.t))?;
        for block in [&s.x, &s.y, &s.vx, &s.vy] {
            for v in block.iter() {
                write!(w, ",{}", num(*v))?;
            }
        }
        writeln!(w, ",{}", num(e))?;
    }
    Ok(())
}

/// Oracle-call totals per method.
pub fn write_cost_csv<W: Write + ?Sized>(w: &mut W, rows: &[CostRow]) -> io::Result<()> {
    writeln!(w, "method,iters,grad_evals,jvp_evals,linear_solves")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.method.name(),
            r.iters,
            r.grad_evals,
            r.jvp_evals,
            r.linear_solves,
        )?;
    }
    Ok(())
}
