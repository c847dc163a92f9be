//! CSV, JSON and SVG writers. Floats are written as `%.17g` everywhere so
//! identical runs give byte-identical files.

use std::fmt::Write as _;
use std::io;

use hyplevel_core::bounds::BoundReport;
use hyplevel_core::numeric::fmt_g17;
use hyplevel_core::{Complex64, LevelProblem, TracedCurve};
use serde::Serialize;
use serde_json::ser::Formatter;

pub fn samples_csv(curve: &TracedCurve) -> String {
    let mut out = String::from("s,re_z,im_z,re_t,im_t,ke,kh,u_residual\n");
    for s in curve.samples() {
        let row = [s.s, s.z.re, s.z.im, s.tangent.re, s.tangent.im, s.ke, s.kh, s.u_residual];
        push_row(&mut out, &row.map(fmt_g17));
    }
    out
}

pub fn bounds_csv(reports: &[BoundReport]) -> String {
    let mut out = String::from("spec_id,re_z,im_z,actual,bound,margin\n");
    for rep in reports {
        for row in &rep.rows {
            let mut cells = vec![rep.id.name().to_string()];
            cells.extend([row.z.re, row.z.im, row.actual, row.bound, row.margin].map(fmt_g17));
            push_row(&mut out, &cells);
        }
    }
    out
}

pub fn push_row<S: AsRef<str>>(out: &mut String, cells: &[S]) {
    for (i, c) in cells.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(c.as_ref());
    }
    out.push('\n');
}

/// Compact JSON with `%.17g` numbers.
struct G17;

impl Formatter for G17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    let mut s = String::from_utf8(buf).expect("JSON is UTF-8");
    s.push('\n');
    s
}

const GRID: usize = 160;

/// The unit circle, `Ω` shaded on a grid, and the traced curve, optionally
/// coloured by `k_h` from blue (low) to red (high).
pub fn svg(p: &LevelProblem, curve: &TracedCurve, color_kh: bool) -> String {
    let mut out = String::new();
    out.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"-1.05 -1.05 2.1 2.1\">\n\
         <g transform=\"scale(1,-1)\">\n",
    );
    let cell = 2.0 / GRID as f64;
    out.push_str("<g fill=\"#9ecae1\" fill-opacity=\"0.5\" stroke=\"none\">\n");
    for row in 0..GRID {
        let y = -1.0 + (row as f64 + 0.5) * cell;
        let mut run: Option<usize> = None;
        for col in 0..=GRID {
            let inside = col < GRID && {
                let z = Complex64::new(-1.0 + (col as f64 + 0.5) * cell, y);
                z.norm() < 1.0 && p.u_value(z).is_ok_and(|u| u > 0.0)
            };
            match (inside, run) {
                (true, None) => run = Some(col),
                (false, Some(start)) => {
                    let _ = writeln!(
                        out,
                        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                        fmt_g17(-1.0 + start as f64 * cell),
                        fmt_g17(y - 0.5 * cell),
                        fmt_g17((col - start) as f64 * cell),
                        fmt_g17(cell)
                    );
                    run = None;
                }
                _ => {}
            }
        }
    }
    out.push_str("</g>\n");
    out.push_str("<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.005\"/>\n");
    let samples = curve.samples();
    if color_kh {
        let (lo, hi) = samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), s| (a.min(s.kh), b.max(s.kh)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let segments = if curve.is_closed() { samples.len() } else { samples.len().saturating_sub(1) };
        for i in 0..segments {
            let (a, b) = (samples[i], samples[(i + 1) % samples.len()]);
            let x = ((0.5 * (a.kh + b.kh) - lo) / span).clamp(0.0, 1.0);
            let _ = writeln!(
                out,
                "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"rgb({},{},{})\" stroke-width=\"0.012\"/>",
                fmt_g17(a.z.re),
                fmt_g17(a.z.im),
                fmt_g17(b.z.re),
                fmt_g17(b.z.im),
                (255.0 * x).round(),
                40,
                (255.0 * (1.0 - x)).round()
            );
        }
    } else {
        let tag = if curve.is_closed() { "polygon" } else { "polyline" };
        let _ = write!(out, "<{tag} fill=\"none\" stroke=\"#08306b\" stroke-width=\"0.008\" points=\"");
        for (i, s) in samples.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{},{}", fmt_g17(s.z.re), fmt_g17(s.z.im));
        }
        out.push_str("\"/>\n");
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_numbers_use_g17() {
        #[derive(Serialize)]
        struct Row {
            a: f64,
            b: [f64; 2],
            n: usize,
        }
        let s = to_json(&Row { a: 0.1, b: [1e-20, 2.0], n: 3 });
        assert_eq!(s, "{\"a\":0.10000000000000001,\"b\":[9.9999999999999995e-21,2],\"n\":3}\n");
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_numbers_become_null() {
        assert_eq!(to_json(&[f64::INFINITY, f64::NAN]), "[null,null]\n");
    }
}
