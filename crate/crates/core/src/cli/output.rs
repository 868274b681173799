//! CSV tables with locale-independent, fixed-width number formatting.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::metrics::DiamondResult;
use crate::spectrum::{eigenenergies, SystemParams};
use crate::sweeps::{GammaScan, Reference, SweepRow};
use crate::Result;

/// Scientific notation with 12 significant digits, explicit signs and a
/// three-digit exponent, e.g. `+2.93115765434e-003`. Always 19 characters
/// for finite values.
pub fn fmt_sci(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "+inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:+.11e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    format!("{mantissa}e{}{:03}", if exp < 0 { '-' } else { '+' }, exp.abs())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_sci).unwrap_or_default()
}

/// Header of every χ / α sweep table.
pub fn sweep_header() -> String {
    let mut cols = vec!["chi".to_string(), "alpha".into(), "gamma".into()];
    for prefix in ["d", "lo", "hi", "status"] {
        for r in Reference::ALL {
            cols.push(format!("{prefix}_{}", r.name()));
        }
    }
    cols.join(",")
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = sweep_header();
    out.push('\n');
    for row in rows {
        let mut cols = vec![fmt_sci(row.chi), fmt_sci(row.alpha), fmt_opt(row.gamma)];
        let results: Vec<&DiamondResult> = Reference::ALL.iter().map(|r| row.get(*r)).collect();
        cols.extend(results.iter().map(|d| fmt_sci(d.value)));
        cols.extend(results.iter().map(|d| fmt_sci(d.lower_cert)));
        cols.extend(results.iter().map(|d| fmt_sci(d.upper_cert)));
        cols.extend(results.iter().map(|d| d.status.as_str().to_string()));
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    out
}

pub const SCAN_HEADER: &str = "chi,alpha,gamma,d_gamma,lo_gamma,hi_gamma,status_gamma";

/// One row per `(χ, γ)` grid point.
pub fn scan_csv(scan: &GammaScan) -> String {
    let mut out = String::from(SCAN_HEADER);
    out.push('\n');
    for slice in &scan.slices {
        for p in &slice.points {
            let d = &p.distance;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                fmt_sci(slice.chi),
                fmt_sci(slice.alpha),
                fmt_sci(p.gamma),
                fmt_sci(d.value),
                fmt_sci(d.lower_cert),
                fmt_sci(d.upper_cert),
                d.status.as_str()
            );
        }
    }
    out
}

pub const MINIMA_HEADER: &str =
    "chi,alpha,gamma0,gamma_nalpha2,d_nalpha2,grid_argmin,grid_min,argmin,min_distance,tie,experimental";

/// One row per χ: the minimum over γ and the `n = α²` reference curve.
pub fn minima_csv(scan: &GammaScan) -> String {
    let mut out = String::from(MINIMA_HEADER);
    out.push('\n');
    for s in &scan.slices {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_sci(s.chi),
            fmt_sci(s.alpha),
            fmt_sci(s.gamma0),
            fmt_sci(s.gamma_nalpha2),
            fmt_sci(s.d_nalpha2.value),
            fmt_sci(s.grid_argmin),
            fmt_sci(s.grid_min),
            fmt_sci(s.argmin),
            fmt_sci(s.min_distance),
            s.tie,
            s.experimental
        );
    }
    out
}

pub const SPECTRUM_HEADER: &str = "n,gamma_n,e_00,e_01,e_10,e_11";

/// Mixing angle and eigenenergies for every Fock sector up to `n_max`.
pub fn spectrum_csv(params: &SystemParams) -> String {
    let mut out = String::from(SPECTRUM_HEADER);
    out.push('\n');
    for n in 0..=params.n_max {
        let e = eigenenergies(params, n as f64);
        let _ = writeln!(
            out,
            "{n},{},{},{},{},{}",
            fmt_sci(e.gamma_n),
            fmt_sci(e.energies[0]),
            fmt_sci(e.energies[1]),
            fmt_sci(e.energies[2]),
            fmt_sci(e.energies[3])
        );
    }
    out
}

pub const CROSSOVER_HEADER: &str = "axis,value,bracket_lo,bracket_hi,estimate";

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(contents.as_bytes())?;
    Ok(())
}
