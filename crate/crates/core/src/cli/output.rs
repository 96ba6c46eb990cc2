//! CSV, JSON and plot-script writers. CSV numbers carry 12 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::analysis::EnsemblePoint;
use crate::error::Result;
use crate::qops::BlochVector;
use crate::traj::MeasurementEvent;

pub const BLOCH_HEADER: &str = "t,u,v,w";
pub const ENSEMBLE_HEADER: &str = "t,u,v,w,u_se,v_se,w_se";
pub const EVENTS_HEADER: &str = "t,outcome,w_before,w_after,gap";
pub const SWEEP_HEADER: &str =
    "index,rate,p,gamma,measurements,jumps,jump_rate,mean_dwell,filaments,filament_rate";

/// Formats like C's `%.12g`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn row(fields: &[f64]) -> String {
    fields
        .iter()
        .map(|&x| fmt_sig(x))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn bloch_csv<'a>(rows: impl IntoIterator<Item = (f64, &'a BlochVector)>) -> String {
    let mut out = String::from(BLOCH_HEADER);
    out.push('\n');
    for (t, b) in rows {
        out.push_str(&row(&[t, b.u, b.v, b.w]));
        out.push('\n');
    }
    out
}

pub fn ensemble_csv(points: &[EnsemblePoint]) -> String {
    let mut out = String::from(ENSEMBLE_HEADER);
    out.push('\n');
    for p in points {
        let [su, sv, sw] = p.stderr;
        out.push_str(&row(&[p.t, p.mean.u, p.mean.v, p.mean.w, su, sv, sw]));
        out.push('\n');
    }
    out
}

/// Outcomes are written with the 1-based labels `1` (`|1⟩`) and `2` (`|2⟩`).
pub fn events_csv(events: &[MeasurementEvent]) -> String {
    let mut out = String::from(EVENTS_HEADER);
    out.push('\n');
    for e in events {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_sig(e.time),
            e.outcome + 1,
            fmt_sig(e.w_before),
            fmt_sig(e.w_after),
            fmt_sig(e.gap)
        );
    }
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Plot request for [`plot_script`].
pub struct PlotSpec<'a> {
    pub title: &'a str,
    pub window: Option<(f64, f64)>,
    pub with_error_band: bool,
}

/// Gnuplot script drawing the inversion `w` against `Ωt` from `bloch.csv`.
pub fn plot_script(spec: &PlotSpec<'_>) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot -p plot.gp\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set terminal pngcairo size 900,450 font ',11'\n");
    s.push_str("set output 'inversion.png'\n");
    let _ = writeln!(s, "set title '{}'", spec.title.replace('\'', ""));
    s.push_str("set xlabel '{/Symbol W}t'\n");
    s.push_str("set ylabel 'inversion w'\n");
    s.push_str("set yrange [-1.05:1.05]\n");
    s.push_str("set key off\n");
    if let Some((a, b)) = spec.window {
        let _ = writeln!(s, "set xrange [{}:{}]", fmt_sig(a), fmt_sig(b));
    }
    if spec.with_error_band {
        s.push_str(
            "plot 'bloch.csv' skip 1 using 1:($4-3*$7):($4+3*$7) with filledcurves lc rgb '#c0c0c0', \\\n     \
             '' skip 1 using 1:4 with lines lw 1.5 lc rgb 'black'\n",
        );
    } else {
        s.push_str("plot 'bloch.csv' skip 1 using 1:4 with lines lw 1 lc rgb 'black'\n");
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(0.1), "0.1");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(fmt_sig(123456.789), "123456.789");
        assert_eq!(fmt_sig(1e-7), "1e-7");
        assert_eq!(fmt_sig(1.5e20), "1.5e20");
        assert_eq!(fmt_sig(9.9999999999999), "10");
        assert_eq!(fmt_sig(0.00012345678901234), "0.000123456789012");
    }

    #[test]
    fn csv_headers() {
        let b = BlochVector::UPPER;
        let csv = bloch_csv([(0.0, &b)]);
        assert_eq!(csv, "t,u,v,w\n0,0,0,1\n");
        let ev = MeasurementEvent {
            time: 0.5,
            outcome: 1,
            w_before: 0.9,
            w_after: 1.0,
            gap: 0.5,
        };
        assert_eq!(
            events_csv(&[ev]),
            "t,outcome,w_before,w_after,gap\n0.5,2,0.9,1,0.5\n"
        );
    }
}
