use hencky_core::coercivity::{pair_constants, scalar_coercivity_constant, verify_full_coercivity, verify_pair_coercivity};
use hencky_core::convexity::{
    hessian_scan, rank_one_scan, ssli_sampler, ssli_tuple, volumetric_convexity_check, Axis, RankOneConfig,
    RankOneSampler, ScanReport,
};
use hencky_core::energy::energy_quadratic_hencky;
use hencky_core::io::{from_json_str, to_json_string};
use hencky_core::{Mat, MaterialParams};
use proptest::prelude::*;

fn with_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

fn round_trip_text<T>(v: &T) -> String
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug,
{
    let s = to_json_string(v).unwrap();
    let back: T = from_json_str(&s).unwrap();
    assert_eq!(to_json_string(&back).unwrap(), s);
    s
}

#[test]
fn scans_independent_of_thread_count() {
    let run = || {
        let i1 = Axis::geometric(0.1, 10.0, 40);
        let z = Axis::linear(0.01, 0.99, 40);
        let h = hessian_scan(0.30, &i1, &z);
        let v = volumetric_convexity_check(0.12, 2, &Axis::geometric(1e-3, 1e3, 2000));
        let s = ssli_sampler(3, 3000, 11).unwrap();
        let mut cfg = RankOneConfig::new(3, 20_000, 3, RankOneSampler::DevBiased { dev_lo: 2.0, dev_hi: 10.0, vol: 0.5 });
        cfg.stop_at_first = true;
        let p = MaterialParams::default();
        let (r, w) = rank_one_scan(|f: &Mat| energy_quadratic_hencky(f, &p).value, &cfg);
        let c = verify_full_coercivity(&p, 2.0, 3, 2000, 4).unwrap();
        [
            to_json_string(&h).unwrap(),
            to_json_string(&v).unwrap(),
            to_json_string(&s).unwrap(),
            to_json_string(&r).unwrap(),
            to_json_string(&w.map(|w| w.second_derivative)).unwrap(),
            to_json_string(&c).unwrap(),
        ]
    };
    let one = with_threads(1, run);
    let four = with_threads(4, run);
    assert_eq!(one, four);
}

#[test]
fn reports_round_trip_exactly() {
    let h = hessian_scan(0.30, &Axis::geometric(0.1, 10.0, 20), &Axis::linear(0.01, 0.99, 20));
    assert!(h.fails());
    round_trip_text(&h);
    let c = verify_pair_coercivity(6.0, 1.0 / 3.0, 1e-3, 1e3, 500).unwrap();
    round_trip_text(&c);
    let full = verify_full_coercivity(&MaterialParams::default(), 1.0, 2, 500, 9).unwrap();
    round_trip_text(&full);
}

#[test]
fn empty_scan_keeps_infinite_margin() {
    let r = ScanReport::from_outcomes("empty", "none".into(), 0.0, Vec::new());
    let back: ScanReport = from_json_str(&round_trip_text(&r)).unwrap();
    assert_eq!(back.min_margin, f64::INFINITY);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn ssli_tuples_satisfy_inequality(n in 2usize..=3, seed in any::<u64>(), index in 0u64..1000) {
        if let Ok(t) = ssli_tuple(n, seed, index) {
            let scale: f64 = t.mu.iter().map(|x| x.ln().powi(2)).sum();
            prop_assert!(t.margin() >= -1e-12 * (1.0 + scale), "margin {}", t.margin());
        }
    }

    #[test]
    fn scalar_constant_bounds_exponential(alpha in 0.1f64..20.0, beta in 0.05f64..3.0, t in 1e-4f64..1e4) {
        let c = scalar_coercivity_constant(alpha, beta).unwrap();
        // exp(β log² t) ≥ K t^(αβ), compared in logs
        let lhs = beta * t.ln().powi(2);
        let rhs = c.log_k + alpha * beta * t.ln();
        prop_assert!(lhs >= rhs - 1e-9 * (1.0 + lhs.abs()));
    }

    #[test]
    fn pair_constants_ordered(alpha in 0.5f64..12.0, beta in 0.1f64..2.0) {
        let pc = pair_constants(alpha, beta);
        prop_assert!(pc.k1 > 0.0 && pc.k1 <= 1.0);
        prop_assert!(pc.k2 >= 0.0);
    }
}
