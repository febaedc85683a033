use dgsm_core::analysis::{analyze, AnalysisOptions};
use dgsm_core::models::FnModel;
use dgsm_core::report::{rank, screen, RankKey};
use dgsm_core::sampling::transform_points;
use dgsm_core::{GradientMethod, InputSpace, Marginal, Matrix, SensitivityReport};
use proptest::prelude::*;

fn space() -> InputSpace {
    InputSpace::new([
        ("a", Marginal::uniform(0.0, 1.0).unwrap()),
        ("b", Marginal::normal(0.5, 0.2).unwrap()),
        ("c", Marginal::exponential(3.0).unwrap()),
    ])
    .unwrap()
}

/// `scale·(x₁ + 2x₂ − x₃ + x₁x₂) + shift` with its exact gradient.
fn affine_of_base(scale: f64, shift: f64) -> FnModel {
    FnModel::new("affine", 3, move |x: &[f64]| Ok(scale * (x[0] + 2.0 * x[1] - x[2] + x[0] * x[1]) + shift))
        .with_gradient(move |x: &[f64]| Ok(vec![scale * (1.0 + x[1]), scale * (2.0 + x[0]), -scale]))
}

fn run(scale: f64, shift: f64, seed: u64) -> SensitivityReport {
    let opts = AnalysisOptions {
        n_sobol: 256,
        n_dgsm: 128,
        replicates: 2,
        seed,
        gradient: GradientMethod::Analytic,
        ..AnalysisOptions::default()
    };
    analyze(&affine_of_base(scale, shift), &space(), &opts).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn shifting_the_output_changes_no_measure(shift in -10.0f64..10.0, seed in 0u64..1000) {
        let (base, moved) = (run(1.0, 0.0, seed), run(1.0, shift, seed));
        for (p, q) in base.inputs.iter().zip(&moved.inputs) {
            prop_assert!(close(q.first_order.mean, p.first_order.mean, 1e-12), "S {} {}", q.first_order.mean, p.first_order.mean);
            prop_assert!(close(q.total.mean, p.total.mean, 1e-12));
            prop_assert!(close(q.nu, p.nu, 1e-12));
            prop_assert!(close(q.tau.unwrap(), p.tau.unwrap(), 1e-12));
            prop_assert!(close(q.upsilon, p.upsilon, 1e-12));
        }
    }

    #[test]
    fn scaling_the_output_keeps_indices(scale in prop_oneof![-50.0f64..-0.02, 0.02f64..50.0], seed in 0u64..1000) {
        let (base, scaled) = (run(1.0, 0.0, seed), run(scale, 0.0, seed));
        let c2 = scale * scale;
        prop_assert!(close(scaled.meta.variance.mean, c2 * base.meta.variance.mean, 1e-12));
        for (p, q) in base.inputs.iter().zip(&scaled.inputs) {
            prop_assert!(close(q.first_order.mean, p.first_order.mean, 1e-12));
            prop_assert!(close(q.total.mean, p.total.mean, 1e-12));
            prop_assert!(close(q.upsilon, p.upsilon, 1e-12));
            prop_assert!(close(q.nu, c2 * p.nu, 1e-12));
        }
    }

    #[test]
    fn rank_permutes_and_screen_partitions(
        coeffs in prop::collection::vec(-3.0f64..3.0, 3),
        threshold in 0.001f64..0.5,
        seed in 0u64..1000,
    ) {
        let model = FnModel::new("lin", 3, move |x: &[f64]| Ok(coeffs[0] * x[0] + coeffs[1] * x[1] + coeffs[2] * x[2] + 0.1 * x[0] * x[2]));
        let opts = AnalysisOptions { n_sobol: 128, n_dgsm: 64, replicates: 2, seed, ..AnalysisOptions::default() };
        let report = analyze(&model, &space(), &opts).unwrap();
        for key in [RankKey::FirstOrder, RankKey::Total, RankKey::Nu, RankKey::Upsilon] {
            let mut order = rank(&report, key);
            let values: Vec<f64> = order.iter().map(|&j| key.value(&report.inputs[j])).collect();
            prop_assert!(values.windows(2).all(|w| w[0] >= w[1]));
            order.sort_unstable();
            prop_assert_eq!(order, vec![0, 1, 2]);
        }
        let s = screen(&report, threshold).unwrap();
        let mut all: Vec<usize> = s.influential.iter().chain(&s.negligible).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, vec![0, 1, 2]);
        prop_assert!(s.uninformative.iter().all(|j| s.influential.contains(j)));
    }

    #[test]
    fn transform_is_monotone_per_column(mut column in prop::collection::vec(0.0f64..1.0, 2..64)) {
        column.sort_by(f64::total_cmp);
        let flood_like = InputSpace::new([
            ("q", Marginal::truncated_gumbel(1013.0, 558.0, 500.0, 3000.0).unwrap()),
            ("k", Marginal::truncated_normal(30.0, 8.0, 15.0, f64::INFINITY).unwrap()),
            ("t", Marginal::triangular(49.0, 50.0, 51.0).unwrap()),
            ("w", Marginal::weibull(2.0, 0.5).unwrap()),
        ])
        .unwrap();
        let n = column.len();
        let u = Matrix::from_vec(n, 4, column.iter().flat_map(|&v| [v, v, v, v]).collect()).unwrap();
        let x = transform_points(&u, &flood_like).unwrap();
        for j in 0..4 {
            let col: Vec<f64> = x.column(j).collect();
            prop_assert!(col.windows(2).all(|w| w[0] <= w[1]), "column {}", j);
        }
    }
}
