//! Run artifacts: trace CSV, summary text and an optional residual plot.

use std::fmt::Write as _;
use std::time::Duration;

use valiant_core::RunTrace;

pub const TRACE_HEADER: &str = "k,i_k,step_norm,residual,fejer_dist";

/// Trace rows for every `every`-th iteration. Reals use Rust's shortest
/// round-trip formatting, so the file parses back to the exact values.
pub fn trace_csv(trace: &RunTrace, every: usize) -> String {
    let every = every.max(1);
    let mut out = String::with_capacity(64 * (trace.records.len() / every + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for r in trace.records.iter().filter(|r| r.k % every == 0) {
        let _ = write!(out, "{},{},{},{},", r.k, r.index, r.step_norm, r.residual);
        if let Some(d) = r.fejer_dist {
            let _ = write!(out, "{d}");
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone)]
pub struct Summary<'a> {
    pub method: &'a str,
    pub trace: &'a RunTrace,
    pub wall_time: Duration,
    pub fejer: Option<bool>,
}

impl Summary<'_> {
    pub fn render(&self) -> String {
        let fejer = match self.fejer {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "n/a",
        };
        format!(
            "method: {}\nstatus: {}\nsweeps: {}\niterations: {}\nfinal_residual: {:e}\nfejer_check: {}\nwall_time_ms: {:.3}\n",
            self.method,
            self.trace.status.name(),
            self.trace.sweeps,
            self.trace.iterations,
            self.trace.final_residual,
            fejer,
            self.wall_time.as_secs_f64() * 1e3,
        )
    }
}

/// `log10(residual)` against iteration as a standalone SVG polyline per series.
pub fn residual_svg(series: &[(&str, &RunTrace)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 40.0;
    const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

    let floor = 1e-16f64;
    let log = |r: f64| r.max(floor).log10();
    let max_k = series
        .iter()
        .map(|(_, t)| t.records.len())
        .max()
        .unwrap_or(1)
        .max(1) as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, t) in series {
        for r in &t.records {
            lo = lo.min(log(r.residual));
            hi = hi.max(log(r.residual));
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(
        svg,
        r#"<text x="{PAD}" y="{}" font-size="12">log10 residual [{lo:.1}, {hi:.1}] vs iteration (0..{max_k})</text>"#,
        PAD - 10.0
    );
    for (n, (name, t)) in series.iter().enumerate() {
        let color = COLORS[n % COLORS.len()];
        let points: Vec<String> = t
            .records
            .iter()
            .map(|r| {
                let x = PAD + (r.k as f64 / max_k) * (W - 2.0 * PAD);
                let y = PAD + (hi - log(r.residual)) / (hi - lo) * (H - 2.0 * PAD);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
            points.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-size="12" fill="{color}">{name}</text>"#,
            W - PAD - 80.0,
            PAD + 16.0 * (n as f64 + 1.0)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
