//! Spec documents, result serialization and geometry export.
//!
//! Persisted floats are written with 17 significant digits so that documents
//! round-trip bit-exactly; human-facing reports are rounded to 9.

use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use crate::auxetic::{capability_test, Capability, Certificate, Trajectory};
use crate::cayley::{self, OmegaPoint2};
use crate::critical::{self, find_critical_alphas, realize_critical};
use crate::error::{Error, Result};
use crate::framework::{FrameworkSpec, Patch};
use crate::gram::{self, OmegaMatrix};

/// Float formatting for persisted values: 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

fn parse_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        message: message.into(),
    }
}

fn parse_object(text: &str, allowed: &[&str]) -> Result<Map<String, Value>> {
    let value: Value = serde_json::from_str(text).map_err(|e| parse_err("$", e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(parse_err("$", "document must be a JSON object"));
    };
    if let Some(key) = map.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(parse_err(format!("$.{key}"), "unknown field"));
    }
    Ok(map)
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| parse_err(path, "expected a non-negative integer"))
}

fn as_reals(v: &Value, path: &str) -> Result<Vec<f64>> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| parse_err(format!("{path}[{i}]"), "expected a number"))
        })
        .collect()
}

fn as_real_rows(v: &Value, path: &str) -> Result<Vec<Vec<f64>>> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(path, "expected an array of arrays"))?;
    arr.iter()
        .enumerate()
        .map(|(i, row)| as_reals(row, &format!("{path}[{i}]")))
        .collect()
}

/// A parsed spec document.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecDocument {
    pub spec: FrameworkSpec,
    pub seed: Option<u64>,
}

/// Parses a spec document. Exactly one construction path must be present:
/// `edge_vectors`, `preset: "standard"`, or `squared_lengths` with
/// `mode: "critical-max"`.
pub fn parse_spec(text: &str) -> Result<SpecDocument> {
    let map = parse_object(
        text,
        &[
            "dimension",
            "edge_vectors",
            "preset",
            "squared_lengths",
            "mode",
            "seed",
        ],
    )?;
    let d = as_usize(
        map.get("dimension")
            .ok_or_else(|| parse_err("$.dimension", "missing field"))?,
        "$.dimension",
    )?;
    if d < 2 {
        return Err(Error::InvalidDimension(d));
    }
    let seed = map
        .get("seed")
        .map(|v| {
            v.as_u64()
                .ok_or_else(|| parse_err("$.seed", "expected a non-negative integer"))
        })
        .transpose()?;

    let present: Vec<&str> = ["edge_vectors", "preset", "squared_lengths"]
        .into_iter()
        .filter(|k| map.contains_key(*k))
        .collect();
    if present.len() != 1 {
        return Err(parse_err(
            "$",
            format!(
                "expected exactly one of edge_vectors, preset, squared_lengths; found {present:?}"
            ),
        ));
    }
    if map.contains_key("mode") && present[0] != "squared_lengths" {
        return Err(parse_err("$.mode", "mode only applies to squared_lengths"));
    }

    let spec = match present[0] {
        "edge_vectors" => {
            let vectors = as_real_rows(&map["edge_vectors"], "$.edge_vectors")?;
            if vectors.len() != d + 1 || vectors.iter().any(|v| v.len() != d) {
                return Err(Error::Shape(format!(
                    "$.edge_vectors: dimension {d} needs {} vectors of length {d}",
                    d + 1
                )));
            }
            FrameworkSpec::from_vectors(&vectors)?
        }
        "preset" => match map["preset"].as_str() {
            Some("standard") => FrameworkSpec::standard(d)?,
            _ => {
                return Err(parse_err(
                    "$.preset",
                    "unknown preset (expected \"standard\")",
                ))
            }
        },
        _ => {
            let s = as_reals(&map["squared_lengths"], "$.squared_lengths")?;
            match map.get("mode").and_then(Value::as_str) {
                Some("critical-max") => {}
                Some(_) => {
                    return Err(parse_err(
                        "$.mode",
                        "unknown mode (expected \"critical-max\")",
                    ))
                }
                None => return Err(parse_err("$.mode", "missing field")),
            }
            if s.len() != d + 1 {
                return Err(Error::Shape(format!(
                    "$.squared_lengths: dimension {d} needs {} entries",
                    d + 1
                )));
            }
            critical_max_spec(&s)?
        }
    };
    Ok(SpecDocument { spec, seed })
}

/// Maximal-volume configuration for squared lengths `s` in the given order.
pub fn critical_max_spec(s: &[f64]) -> Result<FrameworkSpec> {
    let mut sorted = s.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alphas = find_critical_alphas(&sorted)?;
    realize_critical(&alphas[0], s)
}

/// Writes a spec document with explicit edge vectors.
pub fn serialize_spec(spec: &FrameworkSpec, seed: Option<u64>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"dimension\": {},", spec.dimension());
    let _ = writeln!(out, "  \"edge_vectors\": [");
    let vectors = spec.edge_vectors();
    for (i, v) in vectors.iter().enumerate() {
        let comps: Vec<String> = v.iter().map(|&x| fmt17(x)).collect();
        let sep = if i + 1 < vectors.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", comps.join(", "));
    }
    match seed {
        Some(seed) => {
            let _ = writeln!(out, "  ],");
            let _ = writeln!(out, "  \"seed\": {seed}");
        }
        None => {
            let _ = writeln!(out, "  ]");
        }
    }
    out.push_str("}\n");
    out
}

/// Omega coordinates of a framework together with its squared lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaDocument {
    pub omega: OmegaMatrix,
    pub squared_lengths: Vec<f64>,
}

pub fn parse_omega(text: &str) -> Result<OmegaDocument> {
    let map = parse_object(text, &["dimension", "squared_lengths", "omega"])?;
    let d = as_usize(
        map.get("dimension")
            .ok_or_else(|| parse_err("$.dimension", "missing field"))?,
        "$.dimension",
    )?;
    let s = as_reals(
        map.get("squared_lengths")
            .ok_or_else(|| parse_err("$.squared_lengths", "missing field"))?,
        "$.squared_lengths",
    )?;
    let rows = as_real_rows(
        map.get("omega")
            .ok_or_else(|| parse_err("$.omega", "missing field"))?,
        "$.omega",
    )?;
    if rows.len() != d || s.len() != d + 1 {
        return Err(Error::Shape(format!(
            "dimension {d} needs a {d}x{d} omega and {} squared lengths",
            d + 1
        )));
    }
    Ok(OmegaDocument {
        omega: OmegaMatrix::from_rows(&rows)?,
        squared_lengths: s,
    })
}

pub fn serialize_omega(doc: &OmegaDocument) -> String {
    let row = |v: &[f64]| v.iter().map(|&x| fmt17(x)).collect::<Vec<_>>().join(", ");
    let rows = doc.omega.rows();
    let mut out = String::from("{\n");
    let _ = writeln!(out, "  \"dimension\": {},", doc.omega.dimension());
    let _ = writeln!(
        out,
        "  \"squared_lengths\": [{}],",
        row(&doc.squared_lengths)
    );
    let _ = writeln!(out, "  \"omega\": [");
    for (i, r) in rows.iter().enumerate() {
        let sep = if i + 1 < rows.len() { "," } else { "" };
        let _ = writeln!(out, "    [{}]{sep}", row(r));
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn omega_document(spec: &FrameworkSpec) -> OmegaDocument {
    OmegaDocument {
        omega: gram::omega_of(spec),
        squared_lengths: spec.squared_lengths().to_vec(),
    }
}

/// Column names of the trajectory table for dimension `d`.
pub fn trajectory_header(d: usize) -> Vec<String> {
    let mut cols = vec!["tau".to_string()];
    for i in 0..=d {
        for k in 1..=d {
            cols.push(format!("p{i}_{k}"));
        }
    }
    for i in 1..=d {
        for j in i..=d {
            cols.push(format!("w{i}{j}"));
        }
    }
    cols.push("volume".into());
    cols.push("increment_min_eig".into());
    cols
}

/// Comma-separated trajectory table with a header row.
pub fn write_trajectory_csv(trajectory: &Trajectory) -> String {
    let d = trajectory
        .samples
        .first()
        .map(|s| s.spec.dimension())
        .unwrap_or(2);
    let mut out = trajectory_header(d).join(",");
    out.push('\n');
    for sample in &trajectory.samples {
        let mut row = vec![fmt17(sample.tau)];
        row.extend(sample.spec.points().iter().map(|&x| fmt17(x)));
        row.extend(sample.omega.upper_triangle().into_iter().map(fmt17));
        row.push(fmt17(sample.volume));
        row.push(
            sample
                .increment_min_eigenvalue
                .map_or_else(|| "NaN".to_string(), fmt17),
        );
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// One `<line>` per patch edge; the viewBox fits the vertices with a 5% margin.
/// The second coordinate is flipped so that it points up on screen.
pub fn render_svg(patch: &Patch) -> Result<String> {
    if patch.dimension != 2 {
        return Err(Error::Format(format!(
            "svg output needs d = 2, got {}",
            patch.dimension
        )));
    }
    let xs = patch.vertices.iter().map(|v| v.position[0]);
    let ys = patch.vertices.iter().map(|v| -v.position[1]);
    let (xmin, xmax) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| {
        (a.min(x), b.max(x))
    });
    let (ymin, ymax) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| {
        (a.min(y), b.max(y))
    });
    let (w, h) = (xmax - xmin, ymax - ymin);
    let margin = 0.05 * w.max(h);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.6} {:.6} {:.6} {:.6}\">",
        xmin - margin,
        ymin - margin,
        w + 2.0 * margin,
        h + 2.0 * margin
    );
    let _ = writeln!(
        out,
        "  <g stroke=\"black\" stroke-width=\"2\" stroke-linecap=\"round\" vector-effect=\"non-scaling-stroke\">"
    );
    for e in &patch.edges {
        let (a, b) = (
            &patch.vertices[e.from].position,
            &patch.vertices[e.to].position,
        );
        let _ = writeln!(
            out,
            "    <line x1=\"{:.6}\" y1=\"{:.6}\" x2=\"{:.6}\" y2=\"{:.6}\" vector-effect=\"non-scaling-stroke\"/>",
            a[0], -a[1], b[0], -b[1]
        );
    }
    out.push_str("  </g>\n</svg>\n");
    Ok(out)
}

/// One line per edge: the start coordinates, two spaces, the end coordinates.
pub fn render_segments(patch: &Patch) -> String {
    let mut out = String::new();
    for e in &patch.edges {
        let fmt = |i: usize| {
            patch.vertices[i]
                .position
                .iter()
                .map(|&x| fmt17(x))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let _ = writeln!(out, "{}  {}", fmt(e.from), fmt(e.to));
    }
    out
}

/// Parses a segments file back into `(start, end)` coordinate pairs.
pub fn parse_segments(text: &str) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let (a, b) = line.split_once("  ").ok_or_else(|| {
                parse_err(format!("line {}", n + 1), "missing endpoint separator")
            })?;
            let nums = |t: &str| -> Result<Vec<f64>> {
                t.split_whitespace()
                    .map(|x| {
                        x.parse()
                            .map_err(|_| parse_err(format!("line {}", n + 1), "bad number"))
                    })
                    .collect()
            };
            Ok((nums(a)?, nums(b)?))
        })
        .collect()
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if !n.is_i64() && !n.is_u64() => json!(round_sig(x, 9)),
            _ => Value::Number(n),
        },
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(m) => {
            Value::Object(m.into_iter().map(|(k, v)| (k, round_value(v))).collect())
        }
        other => other,
    }
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Value {
    json!(m
        .row_iter()
        .map(|r| r.iter().copied().collect::<Vec<f64>>())
        .collect::<Vec<_>>())
}

/// Full analysis of one configuration as a JSON document (9 significant
/// digits).
pub fn analyze_report(spec: &FrameworkSpec) -> Result<Value> {
    spec.require_nondegenerate()?;
    let s = spec.squared_lengths().to_vec();
    let mut sorted = s.clone();
    sorted.sort_by(f64::total_cmp);
    let omega = gram::omega_of(spec);
    let report = critical::criticality_report(&sorted)?;
    let current = critical::lagrange_multipliers(spec);
    let verdict = capability_test(spec)?;

    let alphas: Vec<Value> = report
        .alphas
        .iter()
        .map(|a| json!({"value": a.value, "kind": a.kind, "bracket": [a.bracket.0, a.bracket.1], "multiplicity": a.multiplicity}))
        .collect();
    let certificate = match &verdict.certificate {
        Certificate::Tangent(t) => {
            json!({"type": "psd-tangent", "omega_dot": rows(&t.omega_dot), "velocities": rows(&t.velocities)})
        }
        Certificate::Normal(n) => json!({"type": "definite-normal", "normal": rows(n)}),
    };
    let saddle = report.saddle.as_ref().map(|r| {
        json!({
            "alpha": r.alpha.value,
            "edge_vectors": r.spec.edge_vectors(),
            "volume": r.spec.volume(),
            "lagrange_residual": r.multipliers.residual,
        })
    });

    let mut doc = json!({
        "dimension": spec.dimension(),
        "squared_lengths": s,
        "volume": spec.volume(),
        "omega": omega.rows(),
        "omega_determinant": omega.determinant(),
        "critical": {
            "sorted_squared_lengths": sorted,
            "alphas": alphas,
            "max_abs_volume": report.max_abs_volume(),
            "max_volume_config": {
                "alpha": report.max_volume.alpha.value,
                "edge_vectors": report.max_volume.spec.edge_vectors(),
                "lagrange_multipliers": report.max_volume.multipliers.values,
                "lagrange_residual": report.max_volume.multipliers.residual,
            },
            "saddle_config": saddle,
        },
        "current": {
            "lagrange_residual": current.residual,
            "lagrange_multipliers": current.values,
            "critical": current.critical,
        },
        "capability": {
            "verdict": verdict.verdict,
            "normal_eigenvalues": verdict.normal_eigenvalues,
            "margin": verdict.margin,
            "certificate": certificate,
        },
    });

    if spec.dimension() == 2 && s.iter().all(|x| (x - 1.0).abs() <= cayley::THRESHOLD_TOL) {
        let w = OmegaPoint2::from_omega(&omega)?;
        let planar = json!({
            "cayley_f": cayley::f_cayley(&w),
            "quartic_g": cayley::g_quartic(&w),
            "halfspace_lhs": w.w11 - w.w12 + w.w22,
            "halfspace_verdict": cayley::auxetic_halfspace_test(&w)?,
            "pointedness": cayley::pointedness_test(spec)?,
        });
        doc["planar_unit"] = planar;
    }
    Ok(round_value(doc))
}

/// Short human summary line for a capability verdict.
pub fn describe_capability(c: Capability) -> &'static str {
    match c {
        Capability::Capable => "capable: a nonzero PSD tangent exists",
        Capability::Boundary => "boundary: the hypersurface normal is singular semidefinite",
        Capability::Incapable => "incapable: the hypersurface normal is definite",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn parse_standard_preset() {
        let doc = parse_spec(r#"{"dimension":2, "preset":"standard"}"#).unwrap();
        assert_eq!(doc.spec, FrameworkSpec::standard(2).unwrap());
        assert_eq!(doc.seed, None);
    }

    #[test]
    fn parse_critical_max() {
        let doc =
            parse_spec(r#"{"dimension":2, "squared_lengths":[1,2,3], "mode":"critical-max"}"#)
                .unwrap();
        let g = gram::gram_of(&doc.spec);
        let alpha = find_critical_alphas(&[1.0, 2.0, 3.0]).unwrap()[0].value;
        assert!((g.matrix()[(0, 1)] - alpha).abs() < 1e-12);
        assert!((g.matrix()[(2, 2)] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_spec(r#"{"dimension":2, "edge_vectors":[[1,0],[0,1]]}"#),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            parse_spec(r#"{"dimension":2, "preset":"standard", "colour":"red"}"#),
            Err(Error::Parse { path, .. }) if path == "$.colour"
        ));
        assert!(matches!(parse_spec("{"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_spec(
                r#"{"dimension":2, "preset":"standard", "edge_vectors":[[1,0],[0,1],[1,1]]}"#
            ),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_spec(r#"{"dimension":2, "squared_lengths":[1,2,3]}"#),
            Err(Error::Parse { path, .. }) if path == "$.mode"
        ));
        assert!(matches!(
            parse_spec(r#"{"dimension":2, "edge_vectors":[[1,0],[0,"x"],[1,1]]}"#),
            Err(Error::Parse { path, .. }) if path == "$.edge_vectors[1][1]"
        ));
    }

    #[test]
    fn serialization_round_trips_bytes() {
        let spec = presets::reentrant_honeycomb();
        let text = serialize_spec(&spec, Some(7));
        let doc = parse_spec(&text).unwrap();
        assert_eq!(doc.spec, spec);
        assert_eq!(doc.seed, Some(7));
        assert_eq!(serialize_spec(&doc.spec, doc.seed), text);
    }

    #[test]
    fn omega_document_round_trip() {
        let spec = FrameworkSpec::standard(3).unwrap();
        let doc = omega_document(&spec);
        let text = serialize_omega(&doc);
        let back = parse_omega(&text).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn trajectory_header_width() {
        for d in 2..=4 {
            assert_eq!(
                trajectory_header(d).len(),
                1 + d * (d + 1) + d * (d + 1) / 2 + 2
            );
        }
    }

    #[test]
    fn svg_only_for_planar_patches() {
        let patch = FrameworkSpec::standard(3).unwrap().patch(1).unwrap();
        assert!(matches!(render_svg(&patch), Err(Error::Format(_))));
        let planar = FrameworkSpec::standard(2).unwrap().patch(2).unwrap();
        let svg = render_svg(&planar).unwrap();
        assert_eq!(svg.matches("<line ").count(), planar.edges.len());
    }

    #[test]
    fn round_sig_examples() {
        assert_eq!(round_sig(2.598076211353316, 9), 2.59807621);
        assert_eq!(round_sig(0.0, 9), 0.0);
        assert_eq!(round_sig(-1234567891234.0, 3), -1.23e12);
    }
}
