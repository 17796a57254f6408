//! Plot data for two-variable inputs: clipped lines, critical points,
//! direction arrow and log-normal cone rays, as JSON or SVG.

use super::commands::{critical_table, RunError, RunOptions};
use super::problem::ProblemFile;
use super::report::{classification_name, ValueJson};
use crate::critical::{Classification, CriticalPoint, Value};
use crate::exact::{rat_to_f64, rat_to_string, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LineJson {
    pub factor: usize,
    pub from: Vec<String>,
    pub to: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub point: Vec<ValueJson>,
    pub stratum: Vec<usize>,
    pub classification: String,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeJson {
    pub point: Vec<ValueJson>,
    /// `b_j ⊙ σ` for each factor through the point.
    pub rays: Vec<Vec<ValueJson>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlotDocument {
    /// `[x_min, x_max, y_min, y_max]`.
    pub bbox: Vec<String>,
    pub lines: Vec<LineJson>,
    pub points: Vec<PlotPoint>,
    pub direction: Vec<u64>,
    pub cone_rays: Vec<ConeJson>,
    pub warnings: Vec<String>,
}

pub fn color_of(c: Classification) -> &'static str {
    match c {
        Classification::Contributing => "#d62728",
        Classification::NonContributing => "#7f7f7f",
        Classification::Boundary => "#ff7f0e",
    }
}

/// Segment of `b·z = 1` inside the box, if the line crosses it.
pub fn clip_line(b: &[Rational], bbox: &[Rational; 4]) -> Option<[Vec<Rational>; 2]> {
    let [x0, x1, y0, y1] = bbox;
    let inside = |v: &Rational, lo: &Rational, hi: &Rational| v >= lo && v <= hi;
    let mut pts: Vec<Vec<Rational>> = Vec::new();
    if !b[1].is_zero() {
        for x in [x0, x1] {
            let y = (Rational::one() - &b[0] * x) / &b[1];
            if inside(&y, y0, y1) {
                pts.push(vec![x.clone(), y]);
            }
        }
    }
    if !b[0].is_zero() {
        for y in [y0, y1] {
            let x = (Rational::one() - &b[1] * y) / &b[0];
            if inside(&x, x0, x1) {
                pts.push(vec![x, y.clone()]);
            }
        }
    }
    pts.sort();
    pts.dedup();
    if pts.len() < 2 {
        return None;
    }
    let last = pts.pop()?;
    Some([pts.swap_remove(0), last])
}

fn same_coords(a: &[Value], b: &[Value]) -> bool {
    a.iter().zip(b).all(|(x, y)| match (x, y) {
        (Value::Exact(p), Value::Exact(q)) => p == q,
        _ => (x.to_f64() - y.to_f64()).abs() <= 1e-12 * (1.0 + x.to_f64().abs()),
    })
}

/// One entry per geometric point, preferring the entry whose flat is its stratum.
fn distinct_points(points: &[CriticalPoint]) -> Vec<&CriticalPoint> {
    let mut out: Vec<&CriticalPoint> = Vec::new();
    for p in points {
        match out.iter().position(|q| same_coords(&q.coords, &p.coords)) {
            Some(i) if out[i].flat != out[i].stratum && p.flat == p.stratum => out[i] = p,
            Some(_) => {}
            None => out.push(p),
        }
    }
    out
}

fn auto_box(points: &[&CriticalPoint]) -> [Rational; 4] {
    let (mut lo, mut hi) = ([0.0f64, 0.0], [0.0f64, 0.0]);
    for p in points {
        for (k, v) in p.coords_f64().iter().enumerate() {
            lo[k] = lo[k].min(*v);
            hi[k] = hi[k].max(*v);
        }
    }
    let int = |v: f64| Rational::from_integer((v as i64).into());
    [
        int(lo[0].floor() - 1.0),
        int(hi[0].ceil() + 1.0),
        int(lo[1].floor() - 1.0),
        int(hi[1].ceil() + 1.0),
    ]
}

fn scale_value(v: &Value, q: &Rational) -> Value {
    match v {
        Value::Exact(x) => Value::Exact(x * q),
        Value::Approx(c) => Value::Approx(c.mul_rational(q)),
    }
}

pub fn plot_data(file: &ProblemFile, bbox: Option<[Rational; 4]>, opts: &RunOptions) -> Result<PlotDocument, RunError> {
    let p = file.build()?;
    if p.f.nvars != 2 {
        return Err(RunError::Input(format!("plot data needs 2 variables, got {}", p.f.nvars)));
    }
    let (set, relaxed) = critical_table(&p, opts)?;
    let mut warnings = p.warnings.clone();
    if relaxed {
        warnings.push("non-simple input: critical points classified without the simplicity guarantee".into());
    }
    let pts = distinct_points(&set.points);
    let bbox = bbox.unwrap_or_else(|| auto_box(&pts));
    if bbox[0] >= bbox[1] || bbox[2] >= bbox[3] {
        return Err(RunError::Input("bounding box must satisfy x_min < x_max and y_min < y_max".into()));
    }
    let lines = p
        .f
        .factors
        .iter()
        .enumerate()
        .filter_map(|(j, fac)| {
            clip_line(&fac.b, &bbox).map(|[a, b]| LineJson {
                factor: j,
                from: a.iter().map(rat_to_string).collect(),
                to: b.iter().map(rat_to_string).collect(),
            })
        })
        .collect();
    let points = pts
        .iter()
        .map(|q| PlotPoint {
            point: q.coords.iter().map(ValueJson::from).collect(),
            stratum: q.stratum.clone(),
            classification: classification_name(q.classification).into(),
            color: color_of(q.classification).into(),
        })
        .collect();
    let cone_rays = pts
        .iter()
        .filter(|q| q.stratum.len() >= 2)
        .map(|q| ConeJson {
            point: q.coords.iter().map(ValueJson::from).collect(),
            rays: q
                .stratum
                .iter()
                .map(|&j| {
                    q.coords
                        .iter()
                        .zip(&p.f.factors[j].b)
                        .map(|(z, b)| ValueJson::from(&scale_value(z, b)))
                        .collect()
                })
                .collect(),
        })
        .collect();
    Ok(PlotDocument {
        bbox: bbox.iter().map(rat_to_string).collect(),
        lines,
        points,
        direction: p.dir.r().to_vec(),
        cone_rays,
        warnings,
    })
}

impl PlotDocument {
    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("plot serializes");
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn to_svg(&self) -> String {
        const SIZE: f64 = 480.0;
        let num = |s: &String| crate::exact::parse_rational(s).map(|q| rat_to_f64(&q)).unwrap_or(0.0);
        let b: Vec<f64> = self.bbox.iter().map(num).collect();
        let (sx, sy) = (SIZE / (b[1] - b[0]), SIZE / (b[3] - b[2]));
        let px = |x: f64, y: f64| ((x - b[0]) * sx, SIZE - (y - b[2]) * sy);
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white" stroke="black"/>"#);
        let (ox, oy) = px(0.0, 0.0);
        let _ = writeln!(s, r##"<line x1="0" y1="{oy:.2}" x2="{SIZE}" y2="{oy:.2}" stroke="#cccccc"/>"##);
        let _ = writeln!(s, r##"<line x1="{ox:.2}" y1="0" x2="{ox:.2}" y2="{SIZE}" stroke="#cccccc"/>"##);
        for l in &self.lines {
            let (x1, y1) = px(num(&l.from[0]), num(&l.from[1]));
            let (x2, y2) = px(num(&l.to[0]), num(&l.to[1]));
            let _ = writeln!(
                s,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="black" stroke-width="1.5"/>"#
            );
        }
        let ray_len = 0.12 * (b[1] - b[0]).min(b[3] - b[2]);
        for c in &self.cone_rays {
            let (x0, y0) = (c.point[0].approx(), c.point[1].approx());
            for r in &c.rays {
                let (rx, ry) = (r[0].approx(), r[1].approx());
                let norm = (rx * rx + ry * ry).sqrt().max(f64::MIN_POSITIVE);
                let (x1, y1) = px(x0, y0);
                let (x2, y2) = px(x0 + ray_len * rx / norm, y0 + ray_len * ry / norm);
                let _ = writeln!(
                    s,
                    r##"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="#1f77b4" stroke-width="1"/>"##
                );
            }
        }
        let (dx, dy) = (self.direction[0] as f64, self.direction[1] as f64);
        let norm = (dx * dx + dy * dy).sqrt();
        let (ax, ay) = px(ray_len * 2.0 * dx / norm, ray_len * 2.0 * dy / norm);
        let _ = writeln!(
            s,
            r##"<line x1="{ox:.2}" y1="{oy:.2}" x2="{ax:.2}" y2="{ay:.2}" stroke="#2ca02c" stroke-width="2"/>"##
        );
        for p in &self.points {
            let (x, y) = px(p.point[0].approx(), p.point[1].approx());
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{}"/>"#, p.color);
        }
        s.push_str("</svg>\n");
        s
    }
}
