//! Causal-web export: the hypergraph of target, drivers, noise node and
//! subset hyperedges, rendered as DOT (junction nodes encode edges that
//! merge) or as JSON.

use crate::decomposition::{DecompositionResult, SubsetKey};
use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// One hyperedge: a non-empty driver subset with its pure mlink normalized
/// by the total certainty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperedge {
    pub members: Vec<String>,
    /// Pure mlink / W_total.
    pub strength: f64,
    /// Pure mlink in nats.
    pub pure_nats: f64,
}

/// Exportable causal web. Unthresholded edge strengths sum to
/// I_full / W_total; the export keeps only edges with |strength| >= the
/// chosen threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CausalWeb {
    pub target: String,
    pub nodes: Vec<String>,
    pub noise_node: String,
    pub edges: Vec<Hyperedge>,
    pub totals: Vec<(String, f64)>,
    pub cs: Vec<(String, f64)>,
    pub cs_noise: f64,
    pub threshold: f64,
    pub units: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WebFormat {
    Dot,
    Json,
}

impl std::str::FromStr for WebFormat {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dot" => Ok(WebFormat::Dot),
            "json" => Ok(WebFormat::Json),
            other => Err(crate::error::Error::InvalidParam(format!(
                "unknown web format '{other}' (expected dot|json)"
            ))),
        }
    }
}

/// Build the causal web from a result, keeping hyperedges with normalized
/// |strength| at or above `threshold`.
pub fn build_web(result: &DecompositionResult, threshold: f64) -> Result<CausalWeb> {
    let labels = result.driver_labels();
    let table = result.mlink_table()?;
    let n = labels.len();
    let mut edges = Vec::new();
    for mask in 1..=(1u32 << n) - 1 {
        let key = SubsetKey(mask);
        let pure = table.pure(key);
        let strength = pure / result.w_total;
        if strength.abs() >= threshold {
            edges.push(Hyperedge {
                members: key.members().map(|i| labels[i].clone()).collect(),
                strength,
                pure_nats: pure,
            });
        }
    }
    let mut nodes = labels.clone();
    nodes.push(result.target.clone());

    Ok(CausalWeb {
        target: result.target.clone(),
        nodes,
        noise_node: "noise".into(),
        edges,
        totals: labels
            .iter()
            .map(|l| (l.clone(), result.totals[l]))
            .collect(),
        cs: labels.iter().map(|l| (l.clone(), result.cs[l])).collect(),
        cs_noise: result.cs_noise,
        threshold,
        units: result.units.clone(),
    })
}

fn dot_id(name: &str) -> String {
    format!("\"{}\"", name.replace('"', "\\\""))
}

/// Render the web as DOT. Singleton links are direct arrows into the
/// target; a subset of two or more drivers becomes a junction point that
/// receives an arrow from each member and emits one labeled arrow to the
/// target. Negative strengths render dashed.
pub fn web_to_dot(web: &CausalWeb) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph causal_web {{");
    let _ = writeln!(out, "  rankdir=LR;");
    let _ = writeln!(out, "  {} [shape=doublecircle];", dot_id(&web.target));
    for (label, cs) in &web.cs {
        let _ = writeln!(
            out,
            "  {} [shape=circle, label=\"{}\\ncs={:.2}\"];",
            dot_id(label),
            label,
            cs
        );
    }
    let _ = writeln!(
        out,
        "  {} [shape=ellipse, style=dotted, label=\"{}\\ncs={:.2}\"];",
        dot_id(&web.noise_node),
        web.noise_node,
        web.cs_noise
    );
    let _ = writeln!(
        out,
        "  {} -> {} [style=dotted, label=\"{:.2}\"];",
        dot_id(&web.noise_node),
        dot_id(&web.target),
        web.cs_noise
    );

    for (i, edge) in web.edges.iter().enumerate() {
        let style = if edge.strength < 0.0 {
            ", style=dashed"
        } else {
            ""
        };
        if edge.members.len() == 1 {
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{:.2}\"{}];",
                dot_id(&edge.members[0]),
                dot_id(&web.target),
                edge.strength,
                style
            );
        } else {
            let junction = format!("j{i}_{}", edge.members.join("_"));
            let _ = writeln!(
                out,
                "  {} [shape=point, width=0.08];",
                dot_id(&junction)
            );
            for m in &edge.members {
                let _ = writeln!(
                    out,
                    "  {} -> {} [dir=none{}];",
                    dot_id(m),
                    dot_id(&junction),
                    style
                );
            }
            let _ = writeln!(
                out,
                "  {} -> {} [label=\"{:.2}\"{}];",
                dot_id(&junction),
                dot_id(&web.target),
                edge.strength,
                style
            );
        }
    }
    let _ = writeln!(out, "}}");
    out
}

/// Serialize the web in the requested format.
pub fn export_web(
    result: &DecompositionResult,
    format: WebFormat,
    threshold: f64,
) -> Result<String> {
    let web = build_web(result, threshold)?;
    match format {
        WebFormat::Dot => Ok(web_to_dot(&web)),
        WebFormat::Json => Ok(serde_json::to_string_pretty(&web)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certainty::ReferenceDensity;
    use crate::decomposition::{DriverEcho, SCHEMA_VERSION};
    use crate::estimators::CmiMode;
    use std::collections::BTreeMap;

    /// A hand-built three-driver result with the chaotic-attractor link
    /// pattern: weak 1links, strong 2links, negative 3link.
    fn synthetic_result() -> DecompositionResult {
        let labels = ["x", "y", "z"];
        let w_total: f64 = 4.3;
        // normalized pure links
        let pure_norm: BTreeMap<&str, f64> = [
            ("x", 0.08),
            ("y", 0.059),
            ("z", 0.021),
            ("x+y", 0.70),
            ("x+z", 0.53),
            ("y+z", 0.15),
            ("x+y+z", -0.63),
        ]
        .into_iter()
        .collect();
        let mut pure = BTreeMap::new();
        for (k, v) in &pure_norm {
            pure.insert(k.to_string(), v * w_total);
        }
        // raw = sums of contained pure values
        let mut raw = BTreeMap::new();
        raw.insert("x".into(), pure["x"]);
        raw.insert("y".into(), pure["y"]);
        raw.insert("z".into(), pure["z"]);
        raw.insert("x+y".into(), pure["x"] + pure["y"] + pure["x+y"]);
        raw.insert("x+z".into(), pure["x"] + pure["z"] + pure["x+z"]);
        raw.insert("y+z".into(), pure["y"] + pure["z"] + pure["y+z"]);
        raw.insert(
            "x+y+z".into(),
            pure.values().sum::<f64>(),
        );
        let i_full = raw["x+y+z"];
        let w_x = w_total - i_full;
        let totals: BTreeMap<String, f64> = [
            ("x".to_string(), (0.08 + 0.5 * (0.70 + 0.53) - 0.63 / 3.0) * w_total),
            ("y".to_string(), (0.059 + 0.5 * (0.70 + 0.15) - 0.63 / 3.0) * w_total),
            ("z".to_string(), (0.021 + 0.5 * (0.53 + 0.15) - 0.63 / 3.0) * w_total),
        ]
        .into_iter()
        .collect();
        let cs: BTreeMap<String, f64> =
            totals.iter().map(|(k, v)| (k.clone(), v / w_total)).collect();
        DecompositionResult {
            schema_version: SCHEMA_VERSION,
            target: "x_next".into(),
            lead: 1,
            drivers: labels
                .iter()
                .map(|l| DriverEcho {
                    label: l.to_string(),
                    process: l.to_string(),
                    lags: vec![1],
                })
                .collect(),
            k: 4,
            cmi_mode: CmiMode::ChainRule,
            tail_cut: 0.0425,
            units: "nats".into(),
            seed: None,
            reference: ReferenceDensity::Cauchy {
                mu: 0.0,
                gamma: 0.3,
            },
            raw_cmi: raw,
            pure_mlinks: pure,
            totals,
            i_full,
            w_x,
            w_total,
            cs,
            cs_noise: w_x / w_total,
            diagnostics: None,
        }
    }

    #[test]
    fn dot_junctions_carry_normalized_labels() {
        let result = synthetic_result();
        let dot = export_web(&result, WebFormat::Dot, 0.01).unwrap();
        assert!(dot.contains("label=\"0.70\""));
        assert!(dot.contains("label=\"0.53\""));
        assert!(dot.contains("label=\"0.15\""));
        assert!(dot.contains("label=\"-0.63\""));
        assert!(dot.contains("style=dashed"));
        // junction nodes exist for multi-member subsets
        assert!(dot.contains("shape=point"));
    }

    #[test]
    fn threshold_one_filters_every_edge() {
        let result = synthetic_result();
        let web = build_web(&result, 1.0).unwrap();
        assert!(web.edges.is_empty());
        let dot = web_to_dot(&web);
        assert!(dot.contains("noise"));
    }

    #[test]
    fn single_driver_web_has_no_junctions() {
        let mut result = synthetic_result();
        result.drivers.truncate(1);
        result.raw_cmi = [("x".to_string(), 1.2)].into_iter().collect();
        result.pure_mlinks = result.raw_cmi.clone();
        result.totals = [("x".to_string(), 1.2)].into_iter().collect();
        result.cs = [("x".to_string(), 1.2 / result.w_total)].into_iter().collect();
        result.i_full = 1.2;
        let dot = export_web(&result, WebFormat::Dot, 0.01).unwrap();
        assert!(!dot.contains("shape=point"));
        assert!(dot.contains("\"x\" -> \"x_next\""));
    }

    #[test]
    fn unthresholded_strengths_sum_to_information_share() {
        let result = synthetic_result();
        let web = build_web(&result, 0.0).unwrap();
        let total: f64 = web.edges.iter().map(|e| e.strength).sum();
        assert!((total - result.i_full / result.w_total).abs() < 1e-12);
    }
}
