//! Scratch experiment harness for estimator-mode / noise-scale comparisons.

use causalweb::certainty::ReferenceKind;
use causalweb::decomposition::{full_decomposition, DecompositionOptions};
use causalweb::estimators::{CmiMode, EstimatorParams};
use causalweb::model::{AnalysisSpec, Dataset, DriverSpec};
use causalweb::simulators::{simulate_model_with_target_noise, NoiseNotation};

fn spec(target: &str, drivers: Vec<DriverSpec>, mode: CmiMode) -> AnalysisSpec {
    let params = EstimatorParams { k: 4, cmi_mode: mode };
    AnalysisSpec::new(target, 1, drivers, params, ReferenceKind::Cauchy).unwrap()
}

fn report(tag: &str, ds: &Dataset, s: &AnalysisSpec) {
    let r = full_decomposition(ds, s, &DecompositionOptions::default()).unwrap();
    print!("{tag}: ");
    for d in r.driver_labels() {
        print!("1link[{d}]={:.3} cs[{d}]={:.3} ", r.raw_cmi[&d], r.cs[&d]);
    }
    println!(
        "cs_eta={:.3} I_full={:.3} W={:.3}",
        r.cs_noise, r.i_full, r.w_x
    );
}

fn main() {
    let t = 50_000;
    let var = NoiseNotation::Variance;

    println!("--- table 3 with target noise std 0.1 ---");
    for model in ["1", "2", "3"] {
        let ds =
            simulate_model_with_target_noise(model, t, 200 + model.parse::<u64>().unwrap(), var, Some(0.1))
                .unwrap();
        let drivers = if model == "2" {
            vec![
                DriverSpec::new("y", vec![2]).unwrap(),
                DriverSpec::new("z", vec![1]).unwrap(),
            ]
        } else {
            vec![
                DriverSpec::new("y", vec![1]).unwrap(),
                DriverSpec::new("z", vec![1]).unwrap(),
            ]
        };
        for mode in [CmiMode::ChainRule, CmiMode::Direct] {
            report(
                &format!("m{model} {mode:?}"),
                &ds,
                &spec("x", drivers.clone(), mode),
            );
        }
    }

    println!("--- table 5 under Direct (FP) mode, printed variance reading ---");
    for model in ["4", "5", "6"] {
        let ds = simulate_model_with_target_noise(model, t, 200 + model.parse::<u64>().unwrap(), var, None)
            .unwrap();
        let third = if model == "6" { "w" } else { "x" };
        let third_lags = if model == "4" { vec![1] } else { vec![1, 2] };
        let drivers = vec![
            DriverSpec::new("y", vec![1, 2]).unwrap(),
            DriverSpec::new("z", vec![1, 2]).unwrap(),
            DriverSpec::new(third, third_lags).unwrap(),
        ];
        report(
            &format!("m{model} Direct"),
            &ds,
            &spec("x", drivers.clone(), CmiMode::Direct),
        );
    }

    println!("--- model 4 with x_d lags {{1,2}} ---");
    {
        let ds = simulate_model_with_target_noise("4", t, 204, var, None).unwrap();
        let drivers = vec![
            DriverSpec::new("y", vec![1, 2]).unwrap(),
            DriverSpec::new("z", vec![1, 2]).unwrap(),
            DriverSpec::new("x", vec![1, 2]).unwrap(),
        ];
        for mode in [CmiMode::ChainRule, CmiMode::Direct] {
            report(&format!("m4(xd12) {mode:?}"), &ds, &spec("x", drivers.clone(), mode));
        }
    }
}
