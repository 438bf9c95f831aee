use proptest::prelude::*;

use carnot::algebra::StratifiedAlgebra;
use carnot::curve::HorizontalPath;
use carnot::error::Error;
use carnot::excess;
use carnot::io;
use carnot::shorten;

type Alg = StratifiedAlgebra<f64>;

fn free23() -> Alg {
    Alg::free(2, 3).unwrap()
}

fn h1() -> Alg {
    Alg::heisenberg(1).unwrap()
}

fn curve_from(alg: &Alg, pieces: &[(f64, [f64; 2])]) -> HorizontalPath<f64> {
    let specs = pieces.iter().map(|&(dt, c)| (dt, c.to_vec())).collect();
    HorizontalPath::lift(alg, alg.identity(), 0.0, specs).unwrap()
}

proptest! {
    #[test]
    fn homogeneous_norm_is_one_homogeneous(
        coords in prop::collection::vec(-2.0..2.0f64, 5),
        lam in 0.1..10.0f64,
    ) {
        let alg = free23();
        let v = alg.vector(coords);
        let lhs = alg.homogeneous_norm_of_log(&alg.dilate(lam, &v));
        let rhs = lam * alg.homogeneous_norm_of_log(&v);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn product_with_inverse_is_the_identity(
        coords in prop::collection::vec(-2.0..2.0f64, 5),
    ) {
        let alg = free23();
        let g = alg.exp(alg.vector(coords));
        let e = alg.product(&g, &g.inverse());
        prop_assert!(e.log().max_abs() <= 1e-12);
    }

    #[test]
    fn squared_excess_is_superadditive_over_splits(
        c1 in prop::array::uniform2(-1.0..1.0f64),
        c2 in prop::array::uniform2(-1.0..1.0f64),
        c3 in prop::array::uniform2(-1.0..1.0f64),
        split in 0.2..0.8f64,
    ) {
        let alg = h1();
        let path = curve_from(&alg, &[(1.0, c1), (1.0, c2), (1.0, c3)]);
        let m = 3.0 * split;
        let whole = excess::excess(&alg, &path, 0.0, 3.0).unwrap().value;
        let left = excess::excess(&alg, &path, 0.0, m).unwrap().value;
        let right = excess::excess(&alg, &path, m, 3.0).unwrap().value;
        let lhs = m * left * left + (3.0 - m) * right * right;
        let rhs = 3.0 * whole * whole;
        prop_assert!(lhs <= rhs + 1e-10, "lhs {lhs} rhs {rhs}");
    }

    #[test]
    fn exponent_ladders_are_strictly_feasible_or_rejected(
        beta in 0.0..0.15f64,
        rho_last in 0.3..0.9f64,
    ) {
        let alg = free23();
        match shorten::choose_params(&alg, 0.5, beta, rho_last, 0.1) {
            Ok(params) => {
                let rho = [1.0, params.exponents[0], params.exponents[1]];
                prop_assert!(rho[1] < rho[0] && rho[2] < rho[1]);
                for k in 1..=2 {
                    let lhs = ((k as f64 + 1.0) * rho[k - 1] - rho[k]) / k as f64;
                    prop_assert!(lhs > 1.0 + beta, "k {k}: {lhs} vs {}", 1.0 + beta);
                }
            }
            Err(Error::InfeasibleParams(_)) => {}
            Err(other) => prop_assert!(false, "unexpected error {other}"),
        }
    }

    #[test]
    fn curve_json_round_trips_exactly(
        dts in prop::collection::vec(0.1..1.0f64, 1..5),
        ctrl in prop::collection::vec(prop::array::uniform2(-1.0..1.0f64), 5),
        start in prop::array::uniform3(-1.0..1.0f64),
    ) {
        let alg = h1();
        let specs: Vec<(f64, Vec<f64>)> = dts
            .iter()
            .zip(&ctrl)
            .map(|(&dt, c)| (dt, c.to_vec()))
            .collect();
        let path =
            HorizontalPath::lift(&alg, alg.exp(alg.vector(start.to_vec())), 0.25, specs).unwrap();
        let text = io::to_canonical_json(&io::curve_to_file(&alg, &path)).unwrap();
        let (alg2, path2) = io::parse_curve(&text).unwrap();
        prop_assert_eq!(alg2.label(), alg.label());
        prop_assert_eq!(path2.t_start(), path.t_start());
        prop_assert_eq!(path2.start().log().coords(), path.start().log().coords());
        prop_assert_eq!(path2.pieces().len(), path.pieces().len());
        for (p, q) in path.pieces().iter().zip(path2.pieces()) {
            prop_assert_eq!(p.dt, q.dt);
            prop_assert_eq!(&p.control, &q.control);
        }
    }
}
