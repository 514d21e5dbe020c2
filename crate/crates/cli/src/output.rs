//! CSV writers and the aligned growth-rate table.

use std::io::{self, Write};

use gaptooth_core::microsim::{PatchConfig, Trajectory};
use gaptooth_core::opcalc::{fmt_ratio, to_f64, DeltaSeries, Rational};
use gaptooth_core::spectra::{Spectrum, TableRow};
use gaptooth_core::Complex64;
use serde::Serialize;

/// `index,re_lambda,im_lambda,abs_mu,group`
pub fn write_spectrum_csv(w: &mut dyn Write, spectrum: &Spectrum) -> io::Result<()> {
    writeln!(w, "index,re_lambda,im_lambda,abs_mu,group")?;
    for (i, (lambda, mu)) in spectrum
        .growth_rates()
        .iter()
        .zip(spectrum.eigenvalues())
        .enumerate()
    {
        writeln!(
            w,
            "{i},{:.12e},{:.12e},{:.12e},{}",
            lambda.re,
            lambda.im,
            mu.norm(),
            spectrum.group_label(i)
        )?;
    }
    Ok(())
}

/// Same column layout for operator spectra, which are growth rates directly;
/// the map-eigenvalue column stays empty.
pub fn write_macro_csv(w: &mut dyn Write, eigenvalues: &[Complex64]) -> io::Result<()> {
    writeln!(w, "index,re_lambda,im_lambda,abs_mu,group")?;
    for (i, lambda) in eigenvalues.iter().enumerate() {
        writeln!(w, "{i},{:.12e},{:.12e},,macro", lambda.re, lambda.im)?;
    }
    Ok(())
}

/// `t,patch_j,fine_i,x,u` — one row per fine point per snapshot.
pub fn write_trajectory_csv(
    w: &mut dyn Write,
    traj: &Trajectory,
    cfg: &PatchConfig,
) -> io::Result<()> {
    writeln!(w, "t,patch_j,fine_i,x,u")?;
    for state in &traj.snapshots {
        for j in 0..cfg.patches() {
            for i in 0..cfg.fine_points() {
                writeln!(
                    w,
                    "{:.12e},{j},{i},{:.12e},{:.12e}",
                    state.t(),
                    cfg.fine_x(j, i),
                    state.value(j, i)
                )?;
            }
        }
    }
    Ok(())
}

/// Symbolic coefficient table: `delta_power,has_mu,r_power,coeff`.
pub fn write_series_csv(w: &mut dyn Write, series: &DeltaSeries) -> io::Result<()> {
    writeln!(w, "delta_power,has_mu,r_power,coeff")?;
    for term in series.to_json().terms {
        for (coeff, r_power) in term.coeff {
            writeln!(w, "{},{},{},{}", term.delta_power, term.has_mu, r_power, coeff)?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
pub struct NumericSeriesJson {
    pub order: usize,
    pub r: String,
    pub sign: String,
    pub terms: Vec<NumericTermJson>,
}

#[derive(Serialize)]
pub struct NumericTermJson {
    pub delta_power: usize,
    pub has_mu: bool,
    pub coeff: String,
    pub value: f64,
}

/// Coefficients with a concrete patch ratio substituted.
pub fn numeric_series(series: &DeltaSeries, r: &Rational, sign: &str) -> NumericSeriesJson {
    let mut terms = Vec::new();
    for k in 0..=series.order() {
        for (has_mu, poly) in [(false, series.plain_coeff(k)), (true, series.mu_coeff(k))] {
            if poly.is_zero() {
                continue;
            }
            let value = poly.eval(r);
            terms.push(NumericTermJson {
                delta_power: k,
                has_mu,
                coeff: fmt_ratio(&value),
                value: to_f64(&value),
            });
        }
    }
    NumericSeriesJson {
        order: series.order(),
        r: fmt_ratio(r),
        sign: sign.to_owned(),
        terms,
    }
}

/// Numeric coefficient table: `delta_power,has_mu,coeff,value`.
pub fn write_numeric_series_csv(w: &mut dyn Write, series: &NumericSeriesJson) -> io::Result<()> {
    writeln!(w, "delta_power,has_mu,coeff,value")?;
    for term in &series.terms {
        writeln!(
            w,
            "{},{},{},{:.12e}",
            term.delta_power, term.has_mu, term.coeff, term.value
        )?;
    }
    Ok(())
}

fn fmt_pair(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v:.6}"),
        None => "n/a".to_owned(),
    }
}

/// Aligned text table of the leading growth rates, one row per patch count.
pub fn format_table(rows: &[TableRow]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>4}  {:>12}  {:>12}  {:>12}  {:>12}  {:>10}\n",
        "m", "lambda_1", "lambda_2,3", "lambda_4,5", "lambda_6,7", "m+1:2m"
    ));
    for row in rows {
        out.push_str(&format!(
            "{:>4}  {:>12.2e}  {:>12}  {:>12}  {:>12}  {:>10.1}\n",
            row.m,
            row.lambda1,
            fmt_pair(row.pair23),
            fmt_pair(row.pair45),
            fmt_pair(row.pair67),
            row.internal,
        ));
    }
    out
}

/// Table rows as CSV: `m,lambda1,lambda23,lambda45,lambda67,internal`.
pub fn write_table_csv(w: &mut dyn Write, rows: &[TableRow]) -> io::Result<()> {
    writeln!(w, "m,lambda1,lambda23,lambda45,lambda67,internal")?;
    for row in rows {
        let cell = |v: Option<f64>| v.map(|x| format!("{x:.12e}")).unwrap_or_default();
        writeln!(
            w,
            "{},{:.12e},{},{},{},{:.12e}",
            row.m,
            row.lambda1,
            cell(row.pair23),
            cell(row.pair45),
            cell(row.pair67),
            row.internal
        )?;
    }
    Ok(())
}
