//! Reproduction benchmarks: regenerate the bundled reference systems,
//! run the full pipeline at the published settings, and compare observed
//! values against the expected tables with explicit tolerances.
//!
//! The acceptance test suite asserts on these reports; the `bench` CLI
//! subcommand prints them.

use crate::certainty::{fit_reference, self_certainty, ReferenceKind};
use crate::decomposition::{
    full_decomposition, DecompositionOptions, DecompositionResult, SubsetKey, TransformedDesign,
};
use crate::error::Result;
use crate::estimators::{mi_ksg, EstimatorParams};
use crate::model::{build_design, AnalysisSpec, Dataset, DriverSpec};
use crate::simulators::{
    simulate_coupled_lorenz, simulate_lorenz63, simulate_model, simulate_model_with_target_noise,
    LorenzParams, NoiseNotation, LORENZ_X0,
};

/// Noise convention used when regenerating the stochastic models.
///
/// The published table for models 1-3 is only consistent with a target
/// noise standard deviation of 0.1 (variance 1e-2, not the printed 1e-4):
/// every tabulated (conditional) mutual information then matches the exact
/// Gaussian value to +/- 0.02 nats. `Recorded` reproduces that scale while
/// keeping all driver noises at the printed variance reading; `Variance`
/// and `Std` read the printed N(0,s) literally.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseConvention {
    Recorded,
    Variance,
    Std,
}

impl NoiseConvention {
    fn simulate(self, id: &str, steps: usize, seed: u64) -> crate::error::Result<Dataset> {
        match self {
            NoiseConvention::Recorded => {
                simulate_model_with_target_noise(id, steps, seed, NoiseNotation::Variance, Some(0.1))
            }
            NoiseConvention::Variance => simulate_model(id, steps, seed, NoiseNotation::Variance),
            NoiseConvention::Std => simulate_model(id, steps, seed, NoiseNotation::Std),
        }
    }
}

impl std::str::FromStr for NoiseConvention {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "recorded" => Ok(NoiseConvention::Recorded),
            "variance" => Ok(NoiseConvention::Variance),
            "std" => Ok(NoiseConvention::Std),
            other => Err(crate::error::Error::InvalidParam(format!(
                "unknown noise convention '{other}' (expected recorded|variance|std)"
            ))),
        }
    }
}

/// Sample length for the table benchmarks.
pub const T_TABLES: usize = 50_000;
/// Sample length for the missing-process diagnostic benchmark.
pub const T_DIAG: usize = 20_000;
/// Lorenz integration step.
pub const LORENZ_DT: f64 = 0.01;
/// Observational noise variance added to the Lorenz series.
pub const LORENZ_OBS_VAR: f64 = 0.01;

const SEED_M1: u64 = 201;
const SEED_M2: u64 = 202;
const SEED_M3: u64 = 203;
const SEED_M4: u64 = 204;
const SEED_M5: u64 = 205;
const SEED_M6: u64 = 206;
const SEED_LORENZ: u64 = 207;
const SEED_DIAG: u64 = 208;
const SEED_COUPLED: u64 = 400;

/// One observed-vs-expected comparison; `tol` may be infinite for rows that
/// are reported but not gated.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub label: String,
    pub observed: f64,
    pub expected: f64,
    pub tol: f64,
}

impl BenchRow {
    pub fn pass(&self) -> bool {
        (self.observed - self.expected).abs() <= self.tol
    }
}

/// A named boolean condition (orderings, verdicts, exact identities).
#[derive(Debug, Clone)]
pub struct Check {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub name: String,
    pub rows: Vec<BenchRow>,
    pub checks: Vec<Check>,
}

impl BenchReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass()) && self.checks.iter().all(|c| c.pass)
    }

    pub fn render(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "== {} ==", self.name);
        let _ = writeln!(
            out,
            "{:<34} {:>10} {:>10} {:>8}  {}",
            "quantity", "observed", "expected", "tol", "status"
        );
        for r in &self.rows {
            let status = if r.tol.is_infinite() {
                "info"
            } else if r.pass() {
                "pass"
            } else {
                "FAIL"
            };
            let tol = if r.tol.is_infinite() {
                "-".to_string()
            } else {
                format!("{:.3}", r.tol)
            };
            let _ = writeln!(
                out,
                "{:<34} {:>10.4} {:>10.4} {:>8}  {}",
                r.label, r.observed, r.expected, tol, status
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<34} {:>31}  {}",
                c.label,
                c.detail,
                if c.pass { "pass" } else { "FAIL" }
            );
        }
        out
    }
}

fn row(label: impl Into<String>, observed: f64, expected: f64, tol: f64) -> BenchRow {
    BenchRow {
        label: label.into(),
        observed,
        expected,
        tol,
    }
}

fn default_spec(target: &str, drivers: Vec<DriverSpec>) -> Result<AnalysisSpec> {
    AnalysisSpec::new(
        target,
        1,
        drivers,
        EstimatorParams::default(),
        ReferenceKind::Cauchy,
    )
}

/// Unconditioned MI of the transformed target with one driver block.
fn singleton_mi(design: &TransformedDesign, driver: usize, params: &EstimatorParams) -> Result<f64> {
    let y = design
        .block_points(SubsetKey(1 << driver))
        .expect("driver exists");
    mi_ksg(&design.target, &y, params)
}

struct ModelRun {
    result: DecompositionResult,
    /// Unconditioned I(x; block_i) for each driver.
    singles: Vec<f64>,
}

fn run_model(dataset: &Dataset, spec: &AnalysisSpec, opts: &DecompositionOptions) -> Result<ModelRun> {
    let result = full_decomposition(dataset, spec, opts)?;
    let design = TransformedDesign::new(&build_design(dataset, spec)?, spec.tail_cut)?;
    let singles = (0..spec.drivers.len())
        .map(|i| singleton_mi(&design, i, &spec.estimator))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ModelRun { result, singles })
}

/// Expected values for the first results table: memoryless models 1-3 with
/// the Cauchy reference. Columns: I(x;y|z), I(x;z|y), I(x;y), I(x;z),
/// W(x), W(x|y,z), (y->x)_total, (z->x)_total, cs(x;y), cs(x;z), cs(x;eta).
const TABLE3_EXPECTED: [[f64; 11]; 3] = [
    [2.99, 2.30, 0.80, 0.11, 0.31, 3.41, 1.91, 1.19, 0.56, 0.35, 0.09],
    [0.00, 2.33, 0.33, 2.66, 0.30, 2.96, 0.17, 2.50, 0.06, 0.84, 0.10],
    [0.00, 2.33, 0.00, 2.33, 0.29, 2.61, 0.00, 2.33, 0.00, 0.89, 0.11],
];

pub const TOL_CS: f64 = 0.05;
pub const TOL_RAW_MI: f64 = 0.15;
pub const TOL_W: f64 = 0.03;

fn table3_driver_spec(model: usize) -> Vec<DriverSpec> {
    match model {
        // model 2's y couples into x two steps back (via z one step back)
        2 => vec![
            DriverSpec::new("y", vec![2]).unwrap(),
            DriverSpec::new("z", vec![1]).unwrap(),
        ],
        _ => vec![
            DriverSpec::new("y", vec![1]).unwrap(),
            DriverSpec::new("z", vec![1]).unwrap(),
        ],
    }
}

/// Models 1-3 at T = 50k, k = 4, Cauchy reference, full transform pipeline.
pub fn run_table3(convention: NoiseConvention, opts: &DecompositionOptions) -> Result<Vec<BenchReport>> {
    let seeds = [SEED_M1, SEED_M2, SEED_M3];
    let mut reports = Vec::new();
    for model in 1..=3usize {
        let ds = convention.simulate(&model.to_string(), T_TABLES, seeds[model - 1])?;
        let spec = default_spec("x", table3_driver_spec(model))?;
        let run = run_model(&ds, &spec, opts)?;
        let r = &run.result;
        let e = TABLE3_EXPECTED[model - 1];

        let report = BenchReport {
            name: format!("table 3 / model {model} ({:?} noise convention)", convention),
            rows: vec![
                row("I(x;y|z)", r.raw_cmi["y"], e[0], TOL_RAW_MI),
                row("I(x;z|y)", r.raw_cmi["z"], e[1], TOL_RAW_MI),
                row("I(x;y)", run.singles[0], e[2], TOL_RAW_MI),
                row("I(x;z)", run.singles[1], e[3], TOL_RAW_MI),
                row("W(x)", r.w_x, e[4], TOL_W),
                row("W(x|y,z)", r.w_total, e[5], f64::INFINITY),
                row("(y->x)_total", r.totals["y"], e[6], f64::INFINITY),
                row("(z->x)_total", r.totals["z"], e[7], f64::INFINITY),
                row("cs(x;y)", r.cs["y"], e[8], TOL_CS),
                row("cs(x;z)", r.cs["z"], e[9], TOL_CS),
                row("cs(x;eta)", r.cs_noise, e[10], TOL_CS),
            ],
            checks: vec![],
        };
        reports.push(report);
    }
    Ok(reports)
}

/// Model 2 analyzed with the gateway driver alone: its strength takes over
/// the removed driver's share.
pub fn run_model2_z_only(convention: NoiseConvention, opts: &DecompositionOptions) -> Result<BenchReport> {
    let ds = convention.simulate("2", T_TABLES, SEED_M2)?;
    let spec = default_spec("x", vec![DriverSpec::new("z", vec![1]).unwrap()])?;
    let result = full_decomposition(&ds, &spec, opts)?;
    Ok(BenchReport {
        name: "model 2 with y removed".into(),
        rows: vec![row("cs(x;z)", result.cs["z"], 0.90, TOL_CS)],
        checks: vec![],
    })
}

/// Expected values for the memory-model table: 1links and causal strengths
/// for models 4-6. Driver order below is (y, z, third) where the third
/// driver is the target's own past for 4-5 and w for 6.
struct Table5Expected {
    onelinks: [f64; 3],
    cs: [f64; 3],
    cs_noise: f64,
}

const TABLE5_EXPECTED: [Table5Expected; 3] = [
    Table5Expected {
        onelinks: [0.00, 1.18, 0.15],
        cs: [0.05, 0.65, 0.14],
        cs_noise: 0.16,
    },
    Table5Expected {
        onelinks: [0.00, 0.36, 0.22],
        cs: [0.17, 0.39, 0.22],
        cs_noise: 0.22,
    },
    Table5Expected {
        onelinks: [0.07, 0.00, 0.00],
        cs: [0.20, 0.29, 0.44],
        cs_noise: 0.07,
    },
];

fn table5_spec(model: usize) -> Result<AnalysisSpec> {
    let drivers = match model {
        4 => vec![
            DriverSpec::new("y", vec![1, 2])?,
            DriverSpec::new("z", vec![1, 2])?,
            DriverSpec::new("x", vec![1])?,
        ],
        5 => vec![
            DriverSpec::new("y", vec![1, 2])?,
            DriverSpec::new("z", vec![1, 2])?,
            DriverSpec::new("x", vec![1, 2])?,
        ],
        6 => vec![
            DriverSpec::new("y", vec![1, 2])?,
            DriverSpec::new("z", vec![1, 2])?,
            DriverSpec::new("w", vec![1, 2])?,
        ],
        _ => unreachable!(),
    };
    default_spec("x", drivers)
}

/// Models 4-6 with multi-lag driver blocks.
pub fn run_table5(convention: NoiseConvention, opts: &DecompositionOptions) -> Result<Vec<BenchReport>> {
    // the memory models carry no recorded scale correction: recorded means
    // the printed variance reading here
    let notation = match convention {
        NoiseConvention::Std => NoiseNotation::Std,
        _ => NoiseNotation::Variance,
    };
    let seeds = [SEED_M4, SEED_M5, SEED_M6];
    let mut reports = Vec::new();
    for (i, model) in (4..=6usize).enumerate() {
        let ds = simulate_model(&model.to_string(), T_TABLES, seeds[i], notation)?;
        let spec = table5_spec(model)?;
        let labels = spec.driver_labels();
        let result = full_decomposition(&ds, &spec, opts)?;
        let e = &TABLE5_EXPECTED[i];
        let third = &labels[2];
        let third_name = if model == 6 { "w" } else { "x_d" };

        let rows = vec![
            row(
                format!("I(x;y|{third_name},z) 1link"),
                result.raw_cmi[&labels[0]],
                e.onelinks[0],
                TOL_RAW_MI,
            ),
            row(
                format!("I(x;z|{third_name},y) 1link"),
                result.raw_cmi[&labels[1]],
                e.onelinks[1],
                TOL_RAW_MI,
            ),
            row(
                format!("I(x;{third_name}|y,z) 1link"),
                result.raw_cmi[third],
                e.onelinks[2],
                TOL_RAW_MI,
            ),
            row("cs(x;y)", result.cs[&labels[0]], e.cs[0], TOL_CS),
            row("cs(x;z)", result.cs[&labels[1]], e.cs[1], TOL_CS),
            row(format!("cs(x;{third_name})"), result.cs[third], e.cs[2], TOL_CS),
            row("cs(x;eta)", result.cs_noise, e.cs_noise, TOL_CS),
        ];

        let mut checks = Vec::new();
        if model == 6 {
            // role reversal: totals rank w > z > y while 1links rank y above
            // both z and w
            let ty = result.totals[&labels[0]];
            let tz = result.totals[&labels[1]];
            let tw = result.totals[third];
            let oy = result.raw_cmi[&labels[0]];
            let oz = result.raw_cmi[&labels[1]];
            let ow = result.raw_cmi[third];
            checks.push(Check {
                label: "totals rank w > z > y".into(),
                pass: tw > tz && tz > ty,
                detail: format!("w={tw:.3} z={tz:.3} y={ty:.3}"),
            });
            checks.push(Check {
                label: "1links rank y above z and w".into(),
                pass: oy > oz && oy > ow,
                detail: format!("y={oy:.3} z={oz:.3} w={ow:.3}"),
            });
        }
        reports.push(BenchReport {
            name: format!("table 5 / model {model} ({:?} noise reading)", notation),
            rows,
            checks,
        });
    }
    Ok(reports)
}

fn lorenz_dataset() -> Result<Dataset> {
    simulate_lorenz63(
        T_TABLES,
        LORENZ_DT,
        LorenzParams::default(),
        LORENZ_X0,
        LORENZ_OBS_VAR,
        SEED_LORENZ,
    )
}

pub fn lorenz_spec(target: &str) -> Result<AnalysisSpec> {
    default_spec(
        target,
        vec![
            DriverSpec::new("x", vec![1])?,
            DriverSpec::new("y", vec![1])?,
            DriverSpec::new("z", vec![1])?,
        ],
    )
}

pub fn lorenz_decomposition(target: &str, opts: &DecompositionOptions) -> Result<DecompositionResult> {
    let ds = lorenz_dataset()?;
    full_decomposition(&ds, &lorenz_spec(target)?, opts)
}

/// Causal strengths for all three Lorenz targets and the normalized link
/// pattern of the x target.
const TABLE6_CS: [[f64; 4]; 3] = [
    // driver order x, y, z then noise
    [0.485, 0.274, 0.151, 0.090],
    [0.260, 0.545, 0.135, 0.062],
    [0.173, 0.130, 0.584, 0.114],
];

pub const TOL_LORENZ_CS: f64 = 0.03;
pub const TOL_LORENZ_LINK: f64 = 0.05;

/// Normalized link pattern of the x target: 1link of x, the three 2links
/// and the 3link, each divided by the total certainty.
const FIG2_LINKS: [(&str, f64); 5] = [
    ("x", 0.08),
    ("x+y", 0.70),
    ("x+z", 0.53),
    ("y+z", 0.15),
    ("x+y+z", -0.63),
];

pub fn run_table6(opts: &DecompositionOptions) -> Result<Vec<BenchReport>> {
    let ds = lorenz_dataset()?;
    let mut reports = Vec::new();
    for (ti, target) in ["x", "y", "z"].iter().enumerate() {
        let result = full_decomposition(&ds, &lorenz_spec(target)?, opts)?;
        let e = TABLE6_CS[ti];
        let mut rows = vec![
            row(format!("cs({target}';x)"), result.cs["x"], e[0], TOL_LORENZ_CS),
            row(format!("cs({target}';y)"), result.cs["y"], e[1], TOL_LORENZ_CS),
            row(format!("cs({target}';z)"), result.cs["z"], e[2], TOL_LORENZ_CS),
            row(format!("cs({target}';eta)"), result.cs_noise, e[3], TOL_LORENZ_CS),
        ];
        let mut checks = Vec::new();
        if *target == "x" {
            for (subset, expected) in FIG2_LINKS {
                rows.push(row(
                    format!("link {subset} / W_total"),
                    result.pure_mlinks[subset] / result.w_total,
                    expected,
                    TOL_LORENZ_LINK,
                ));
            }
            // totals must equal the 1/m-weighted link sums exactly
            let lhs = result.totals["x"];
            let rhs = result.pure_mlinks["x"]
                + 0.5 * (result.pure_mlinks["x+y"] + result.pure_mlinks["x+z"])
                + (result.pure_mlinks["x+y+z"]) / 3.0;
            checks.push(Check {
                label: "total_x = 1link + 2links/2 + 3link/3".into(),
                pass: (lhs - rhs).abs() < 1e-12,
                detail: format!("|{lhs:.12} - {rhs:.12}|"),
            });
        }
        reports.push(BenchReport {
            name: format!("table 6 / lorenz target {target}"),
            rows,
            checks,
        });
    }
    Ok(reports)
}

/// Reference-density sensitivity: W(x), W(x|Y) and the noise share for
/// models 2 and 4 (two-driver configs) and the Lorenz x target under the
/// three reference kinds.
pub fn run_table7(opts: &DecompositionOptions) -> Result<BenchReport> {
    // expected (W(x), W_total, cs_noise) per (system, reference)
    struct SystemExpect {
        name: &'static str,
        per_ref: [[f64; 3]; 3], // cauchy, gaussian, uniform
    }
    let expected = [
        SystemExpect {
            name: "model 2",
            per_ref: [[0.30, 2.96, 0.10], [0.00, 2.66, 0.00], [0.66, 3.30, 0.20]],
        },
        SystemExpect {
            name: "model 4",
            per_ref: [[0.28, 2.76, 0.10], [0.24, 2.71, 0.09], [1.39, 3.87, 0.36]],
        },
        SystemExpect {
            name: "lorenz x",
            per_ref: [[0.39, 4.35, 0.09], [0.04, 4.01, 0.01], [0.21, 4.15, 0.05]],
        },
    ];

    let mut report = BenchReport {
        name: "table 7 / reference sensitivity".into(),
        ..Default::default()
    };

    let mut noise_shares = [[0.0f64; 3]; 3];
    for (si, sys) in expected.iter().enumerate() {
        let (ds, spec) = match si {
            0 => {
                let ds = NoiseConvention::Recorded.simulate("2", T_TABLES, SEED_M2)?;
                (ds, default_spec("x", table3_driver_spec(2))?)
            }
            1 => {
                let ds = simulate_model("4", T_TABLES, SEED_M4, NoiseNotation::Variance)?;
                (
                    ds,
                    default_spec(
                        "x",
                        vec![
                            DriverSpec::new("y", vec![1, 2])?,
                            DriverSpec::new("z", vec![1, 2])?,
                        ],
                    )?,
                )
            }
            _ => (lorenz_dataset()?, lorenz_spec("x")?),
        };

        // the mlink table does not depend on the reference; estimate once
        let result = full_decomposition(&ds, &spec, opts)?;
        let design = build_design(&ds, &spec)?;
        for (ri, kind) in [
            ReferenceKind::Cauchy,
            ReferenceKind::Gaussian,
            ReferenceKind::Uniform,
        ]
        .into_iter()
        .enumerate()
        {
            let q = fit_reference(&design.target, kind)?;
            let w = self_certainty(&design.target, &q, &spec.estimator)?;
            let w_total = w + result.i_full;
            let cs_noise = w / w_total;
            noise_shares[si][ri] = cs_noise;
            let e = sys.per_ref[ri];
            // only the Lorenz noise shares are gated on values; the model
            // rows are gated on ordering checks below
            let tol = if si == 2 { TOL_LORENZ_CS } else { f64::INFINITY };
            report
                .rows
                .push(row(format!("{} W(x) [{kind}]", sys.name), w, e[0], f64::INFINITY));
            report.rows.push(row(
                format!("{} W(x|Y) [{kind}]", sys.name),
                w_total,
                e[1],
                f64::INFINITY,
            ));
            report.rows.push(row(
                format!("{} cs(x;eta) [{kind}]", sys.name),
                cs_noise,
                e[2],
                tol,
            ));
        }
    }

    // gates: gaussian-referenced model 2 noise share vanishes; noise share
    // orders uniform >= cauchy >= gaussian for models 2 and 4; the Lorenz
    // attractor flips the order with cauchy largest
    report.checks.push(Check {
        label: "model 2 gaussian cs(x;eta) <= 0.02".into(),
        pass: noise_shares[0][1] <= 0.02,
        detail: format!("{:.4}", noise_shares[0][1]),
    });
    for (si, name) in [(0usize, "model 2"), (1, "model 4")] {
        let [c, g, u] = noise_shares[si];
        report.checks.push(Check {
            label: format!("{name} noise share uniform >= cauchy >= gaussian"),
            pass: u >= c && c >= g,
            detail: format!("u={u:.3} c={c:.3} g={g:.3}"),
        });
    }
    let [c, g, u] = noise_shares[2];
    report.checks.push(Check {
        label: "lorenz noise share largest under cauchy".into(),
        pass: c > g && c > u,
        detail: format!("c={c:.3} g={g:.3} u={u:.3}"),
    });
    Ok(report)
}

/// Missing-process diagnostic on the confounder system: with the z driver
/// withheld the noise share is insensitive to target perturbation (missing
/// process flagged); with z included it moves by ~50% (no flag).
pub fn run_diagnostics_bench(opts: &DecompositionOptions) -> Result<BenchReport> {
    use crate::diagnostics::{missing_process_test, MissingProcessVerdict};

    let ds = simulate_model("confounder", T_DIAG, SEED_DIAG, NoiseNotation::Variance)?;
    let obs_sigma = 0.01; // the target's own noise std under the variance reading
    let threshold = 0.15;

    let spec_no_z = default_spec("x", vec![DriverSpec::new("y", vec![1])?])?;
    let spec_with_z = default_spec(
        "x",
        vec![
            DriverSpec::new("y", vec![1])?,
            DriverSpec::new("z", vec![1])?,
        ],
    )?;

    let rep_no_z = missing_process_test(&ds, &spec_no_z, obs_sigma, 10, SEED_DIAG, threshold, opts)?;
    let rep_with_z =
        missing_process_test(&ds, &spec_with_z, obs_sigma, 10, SEED_DIAG, threshold, opts)?;

    Ok(BenchReport {
        name: "missing-process diagnostic (confounder system)".into(),
        rows: vec![
            row("cs(x;eta) base, no z", rep_no_z.cs_noise_base, 0.301, TOL_CS),
            row(
                "cs(x;eta) perturbed, no z",
                rep_no_z.cs_noise_perturbed_mean,
                0.308,
                TOL_CS,
            ),
            row("rel change, no z", rep_no_z.rel_change, 0.02, f64::INFINITY),
            row("cs(x;eta) base, with z", rep_with_z.cs_noise_base, 0.086, TOL_CS),
            row(
                "cs(x;eta) perturbed, with z",
                rep_with_z.cs_noise_perturbed_mean,
                0.124,
                TOL_CS,
            ),
            row("rel change, with z", rep_with_z.rel_change, 0.50, f64::INFINITY),
        ],
        checks: vec![
            Check {
                label: "no z: missing process flagged".into(),
                pass: rep_no_z.verdict == MissingProcessVerdict::MissingProcessLikely,
                detail: format!("rel change {:.3} < {threshold}", rep_no_z.rel_change),
            },
            Check {
                label: "with z: no missing process".into(),
                pass: rep_with_z.verdict == MissingProcessVerdict::NoMissingProcess,
                detail: format!("rel change {:.3} >= {threshold}", rep_with_z.rel_change),
            },
        ],
    })
}

/// Normalized 1link of one coupled-Lorenz direction: [I(t;all) - I(t;rest)]
/// / [W(t_raw) + I(t;all)], with all six lag-1 states as drivers.
fn coupled_onelink(
    ds: &Dataset,
    target: &str,
    active: &str,
    opts: &DecompositionOptions,
) -> Result<f64> {
    let names = ["x1", "y1", "z1", "x2", "y2", "z2"];
    let drivers: Vec<DriverSpec> = names
        .iter()
        .map(|n| DriverSpec::new(*n, vec![1]))
        .collect::<Result<Vec<_>>>()?;
    let spec = default_spec(target, drivers)?;
    let design = build_design(ds, &spec)?;
    let transformed = TransformedDesign::new(&design, spec.tail_cut)?;
    let n = names.len();
    let active_idx = names.iter().position(|n| n == &active).unwrap();

    let run = || -> Result<f64> {
        let full = SubsetKey::full(n);
        let rest = SubsetKey(full.0 & !(1 << active_idx));
        let all_pts = transformed.block_points(full).unwrap();
        let rest_pts = transformed.block_points(rest).unwrap();
        let i_full = mi_ksg(&transformed.target, &all_pts, &spec.estimator)?;
        let i_rest = mi_ksg(&transformed.target, &rest_pts, &spec.estimator)?;
        let q = fit_reference(&transformed.raw_target, spec.reference)?;
        let w = self_certainty(&transformed.raw_target, &q, &spec.estimator)?;
        Ok((i_full - i_rest) / (w + i_full))
    };

    match opts.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| crate::error::Error::InvalidParam(format!("thread pool: {e}")))?;
            pool.install(run)
        }
        None => run(),
    }
}

/// Coupled-Lorenz sweep: the downstream system never drives the upstream
/// one, and the upstream 1link peaks at eps = 6 before synchronization
/// kills it.
pub fn run_coupled_bench(eps_values: &[f64], opts: &DecompositionOptions) -> Result<BenchReport> {
    let mut report = BenchReport {
        name: "coupled lorenz 1link sweep".into(),
        ..Default::default()
    };
    let mut sweep: Vec<(f64, f64, f64)> = Vec::new();
    for (i, &eps) in eps_values.iter().enumerate() {
        let ds = simulate_coupled_lorenz(eps, T_TABLES, LORENZ_DT, 10_000, SEED_COUPLED + i as u64)?;
        let x2_to_x1 = coupled_onelink(&ds, "x1", "x2", opts)?;
        let x1_to_x2 = coupled_onelink(&ds, "x2", "x1", opts)?;
        sweep.push((eps, x2_to_x1, x1_to_x2));
        report.rows.push(row(
            format!("eps={eps}: 1link x2->x1"),
            x2_to_x1,
            0.0,
            f64::INFINITY,
        ));
        report.rows.push(row(
            format!("eps={eps}: 1link x1->x2"),
            x1_to_x2,
            0.0,
            f64::INFINITY,
        ));
    }

    let max_reverse = sweep.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    report.checks.push(Check {
        label: "x1 -> x2 1link <= 0.03 at every eps".into(),
        pass: max_reverse <= 0.03,
        detail: format!("max {max_reverse:.4}"),
    });
    if let Some(at6) = sweep.iter().find(|s| s.0 == 6.0) {
        let peak_is_6 = sweep.iter().all(|s| s.1 <= at6.1);
        report.checks.push(Check {
            label: "x2 -> x1 1link peaks at eps=6".into(),
            pass: peak_is_6,
            detail: sweep
                .iter()
                .map(|s| format!("{}:{:.3}", s.0, s.1))
                .collect::<Vec<_>>()
                .join(" "),
        });
    }
    if let Some(at9) = sweep.iter().find(|s| s.0 == 9.0) {
        report.checks.push(Check {
            label: "x2 -> x1 1link < 0.05 by eps=9".into(),
            pass: at9.1 < 0.05,
            detail: format!("{:.4}", at9.1),
        });
    }
    Ok(report)
}
