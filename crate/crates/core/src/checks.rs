//! Seeded randomized checks of the structural identities the surgery
//! machinery relies on. Each check draws its own deterministic stream of
//! cases from the suite seed, records the worst residual, and compares it
//! against a fixed tolerance, so a report is reproducible end to end.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{AlgebraVector, StratifiedAlgebra};
use crate::curve::HorizontalPath;
use crate::excess;
use crate::linalg;
use crate::scalar::Scalar;
use crate::surgery;

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub cases: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub algebra: String,
    pub seed: u64,
    pub cases: usize,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

fn rand_coords<S: Scalar>(rng: &mut ChaCha8Rng, n: usize) -> Vec<S> {
    (0..n).map(|_| S::of(rng.gen_range(-1.0..1.0))).collect()
}

fn rand_vector<S: Scalar>(alg: &StratifiedAlgebra<S>, rng: &mut ChaCha8Rng) -> AlgebraVector<S> {
    AlgebraVector::new(rand_coords(rng, alg.n()))
}

/// Random vector supported on layers >= j, nonzero in layer j.
fn rand_vector_from_layer<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    rng: &mut ChaCha8Rng,
    j: usize,
) -> AlgebraVector<S> {
    loop {
        let mut coords = vec![S::zero(); alg.n()];
        for layer in j..=alg.step() {
            for idx in alg.layer_range(layer) {
                coords[idx] = S::of(rng.gen_range(-1.0..1.0));
            }
        }
        let v = AlgebraVector::new(coords);
        if alg.layer_norm(j, &v) > S::of(0.1) {
            return v;
        }
    }
}

fn rand_unit<S: Scalar>(rng: &mut ChaCha8Rng, r: usize) -> Vec<S> {
    loop {
        let v: Vec<S> = rand_coords(rng, r);
        let n = linalg::norm(&v);
        if n > S::of(0.2) {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Random arclength curve with the given number of pieces.
fn rand_curve<S: Scalar>(
    alg: &StratifiedAlgebra<S>,
    rng: &mut ChaCha8Rng,
    pieces: usize,
) -> HorizontalPath<S> {
    let start = alg.exp(rand_vector(alg, rng));
    let specs: Vec<(S, Vec<S>)> = (0..pieces)
        .map(|_| (S::of(rng.gen_range(0.25..1.0)), rand_unit(rng, alg.rank())))
        .collect();
    HorizontalPath::lift(alg, start, S::of(rng.gen_range(-1.0..1.0)), specs)
        .expect("random pieces are valid")
}

fn rand_window<S: Scalar>(rng: &mut ChaCha8Rng, a: S, b: S) -> (S, S) {
    let span = (b - a).as_f64();
    loop {
        let x = rng.gen_range(0.0..span);
        let y = rng.gen_range(0.0..span);
        if (x - y).abs() > 0.1 * span {
            let (lo, hi) = if x < y { (x, y) } else { (y, x) };
            return (a + S::of(lo), a + S::of(hi));
        }
    }
}

struct Suite<'a, S> {
    alg: &'a StratifiedAlgebra<S>,
    seed: u64,
    cases: usize,
    checks: Vec<CheckReport>,
}

impl<'a, S: Scalar> Suite<'a, S> {
    fn run(
        &mut self,
        name: &str,
        tolerance: f64,
        mut case: impl FnMut(&StratifiedAlgebra<S>, &mut ChaCha8Rng) -> S,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(
            self.seed.wrapping_add(self.checks.len() as u64),
        );
        let mut worst = 0.0_f64;
        for _ in 0..self.cases {
            worst = worst.max(case(self.alg, &mut rng).as_f64());
        }
        self.checks.push(CheckReport {
            name: name.to_string(),
            cases: self.cases,
            max_residual: worst,
            tolerance,
            pass: worst <= tolerance,
        });
    }
}

/// Runs every identity check against the algebra with the given seed and
/// case count per check.
pub fn run_suite<S: Scalar>(alg: &StratifiedAlgebra<S>, seed: u64, cases: usize) -> SuiteReport {
    let mut suite = Suite { alg, seed, cases, checks: Vec::new() };
    let s = alg.step();

    suite.run("projection_homomorphism", 1e-12, |alg, rng| {
        let g = alg.exp(rand_vector(alg, rng));
        let h = alg.exp(rand_vector(alg, rng));
        let p = alg.horizontal_projection(&alg.product(&g, &h));
        let pg = alg.horizontal_projection(&g);
        let ph = alg.horizontal_projection(&h);
        p.iter()
            .zip(pg.iter().zip(&ph))
            .fold(S::zero(), |m, (&x, (&y, &z))| m.max((x - (y + z)).abs()))
    });

    suite.run("associativity", 1e-11, |alg, rng| {
        let g = alg.exp(rand_vector(alg, rng));
        let h = alg.exp(rand_vector(alg, rng));
        let k = alg.exp(rand_vector(alg, rng));
        let left = alg.product(&alg.product(&g, &h), &k);
        let right = alg.product(&g, &alg.product(&h, &k));
        left.log().sub(right.log()).max_abs()
    });

    suite.run("conjugation_fixes_projection", 1e-11, |alg, rng| {
        let j = rng.gen_range(1..=alg.step());
        let g = alg.exp(rand_vector(alg, rng));
        let h = alg.exp(rand_vector_from_layer(alg, rng, j));
        let c = alg.conjugate(&g, &h);
        alg.pi_layer(j, &c).sub(&alg.pi_layer(j, &h)).max_abs()
    });

    suite.run("conjugation_routes_agree", 1e-11, |alg, rng| {
        let g = alg.exp(rand_vector(alg, rng));
        let h = alg.exp(rand_vector(alg, rng));
        let a = alg.conjugate(&g, &h);
        let b = alg.conjugate_via_adjoint(&g, &h);
        a.log().sub(b.log()).max_abs()
    });

    suite.run("commutator_raises_layer", 1e-11, |alg, rng| {
        let p = rng.gen_range(1..=alg.step());
        let q = rng.gen_range(1..=alg.step());
        let g = alg.exp(rand_vector_from_layer(alg, rng, p));
        let h = alg.exp(rand_vector_from_layer(alg, rng, q));
        let c = alg.commutator(&g, &h);
        let mut leak = S::zero();
        for layer in 1..=alg.step().min(p + q - 1) {
            leak = leak.max(alg.layer_norm(layer, c.log()));
        }
        if p + q > alg.step() {
            leak = leak.max(c.log().max_abs());
        }
        leak
    });

    // Squared excess is the smallest eigenvalue of the control moment
    // matrix; comparing the squares avoids the square root's unbounded
    // sensitivity near straight windows.
    suite.run("excess_invariance", 1e-12, |alg, rng| {
        let path = rand_curve(alg, rng, 5);
        let (a, b) = path.domain();
        let (lo, hi) = rand_window(rng, a, b);
        let base = excess::excess(alg, &path, lo, hi).expect("window is valid").value;
        let base2 = base * base;
        let mut worst = S::zero();

        let g = alg.exp(rand_vector(alg, rng));
        let translated = path.left_translate(alg, &g);
        let tv = excess::excess(alg, &translated, lo, hi).expect("window unchanged").value;
        worst = worst.max((tv * tv - base2).abs());

        let lam = S::of(rng.gen_range(0.3..3.0));
        let dilated = path.dilated_space(alg, lam);
        let dv = excess::excess(alg, &dilated, lo, hi).expect("window unchanged").value;
        let lam2 = lam * lam;
        worst = worst.max((dv * dv - lam2 * base2).abs() / lam2.max(S::one()));

        let rep = path.dilated_reparam(alg, lam);
        let rv = excess::excess(alg, &rep, lo * lam, hi * lam).expect("scaled window").value;
        worst = worst.max((rv * rv - base2).abs());
        worst
    });

    suite.run("cut_gain_bound", 1e-12, |alg, rng| {
        let path = rand_curve(alg, rng, 5);
        let (a, b) = path.domain();
        let (lo, hi) = rand_window(rng, a, b);
        let (_, rep) = surgery::cut(alg, &path, lo, hi).expect("window is valid");
        let mut bad = S::zero();
        bad = bad.max(rep.guaranteed_gain - rep.gain);
        bad = bad.max(-rep.gain);
        bad
    });

    suite.run("connector_contract", 1e-9, |alg, rng| {
        let v = rand_vector(alg, rng);
        let conn = surgery::connect(alg, &v).expect("target is generic");
        let scale = S::one().max(v.max_abs());
        let mut worst = conn
            .path
            .endpoint(alg)
            .log()
            .sub(&v)
            .max_abs()
            / scale;
        if !conn.path.is_arclength() {
            worst = worst.max(S::one());
        }
        let lam = S::of(rng.gen_range(0.2..4.0));
        let scaled = surgery::connect(alg, &alg.dilate(lam, &v)).expect("scaled target");
        let law = (scaled.length() - lam * conn.length()).abs()
            / (S::one() + lam * conn.length());
        worst.max(law)
    });

    if s >= 2 {
        suite.run("commutator_projection", 1e-10, |alg, rng| {
            let j = rng.gen_range(1..alg.step());
            let g = alg.exp(rand_vector(alg, rng));
            let h = alg.exp(rand_vector_from_layer(alg, rng, j));
            let c = alg.commutator(&g, &h);
            let expect = alg.bracket(&alg.layer_component(1, g.log()), &alg.pi_layer(j, &h));
            alg.pi_layer(j + 1, &c)
                .sub(&alg.layer_component(j + 1, &expect))
                .max_abs()
        });

        suite.run("displacement_two_routes", 1e-10, |alg, rng| {
            let path = rand_curve(alg, rng, 4);
            let (a, b) = path.domain();
            let (lo, hi) = rand_window(rng, a, b);
            let j = rng.gen_range(1..alg.step());
            let y = rand_vector_from_layer(alg, rng, j).scale(S::of(0.3));
            let conn = surgery::connect(alg, &y).expect("target is generic");
            let modified = surgery::insert_device(alg, &path, lo, hi, &conn);
            let direct = surgery::displacement(alg, &path, &modified);
            let via = surgery::displacement_via_commutator(alg, &path, lo, hi, &conn);
            direct.log().sub(via.log()).max_abs()
        });

        suite.run("displacement_layer_structure", 1e-9, |alg, rng| {
            let path = rand_curve(alg, rng, 4);
            let (a, b) = path.domain();
            let (lo, hi) = rand_window(rng, a, b);
            let j = rng.gen_range(1..alg.step());
            let mut coords = vec![S::zero(); alg.n()];
            for idx in alg.layer_range(j) {
                coords[idx] = S::of(rng.gen_range(-0.5..0.5));
            }
            let y = AlgebraVector::new(coords);
            let conn = surgery::connect(alg, &y).expect("pure layer target");
            let modified = surgery::insert_device(alg, &path, lo, hi, &conn);
            let dis = surgery::displacement(alg, &path, &modified);
            let mut worst = S::zero();
            for layer in 1..=j {
                worst = worst.max(alg.layer_norm(layer, dis.log()));
            }
            let delta = path.horizontal_increment(lo, hi);
            let expect = alg.bracket(&y, &alg.horizontal(&delta));
            worst.max(
                alg.layer_component(j + 1, dis.log())
                    .sub(&alg.layer_component(j + 1, &expect))
                    .max_abs(),
            )
        });

        suite.run("iterated_displacement_sum", 1e-9, |alg, rng| {
            let path = rand_curve(alg, rng, 6);
            let (a, b) = path.domain();
            let span = b - a;
            let j = rng.gen_range(1..alg.step());
            let mut devices = Vec::new();
            let mut expect = alg.zero_vector();
            for k in 0..2 {
                let lo = a + span * S::of(0.1 + 0.5 * k as f64);
                let hi = lo + span * S::of(0.25);
                let mut coords = vec![S::zero(); alg.n()];
                for idx in alg.layer_range(j) {
                    coords[idx] = S::of(rng.gen_range(-0.3..0.3));
                }
                let y = AlgebraVector::new(coords);
                let delta = path.horizontal_increment(lo, hi);
                expect = expect.add(&alg.bracket(&y, &alg.horizontal(&delta)));
                let conn = surgery::connect(alg, &y).expect("pure layer target");
                devices.push(((lo, hi), conn));
            }
            let (modified, _) = surgery::insert_devices(alg, &path, &devices);
            let dis = surgery::displacement(alg, &path, &modified);
            alg.layer_component(j + 1, dis.log())
                .sub(&alg.layer_component(j + 1, &expect))
                .max_abs()
        });
    }

    let pass = suite.checks.iter().all(|c| c.pass);
    SuiteReport {
        algebra: alg.label().to_string(),
        seed,
        cases,
        checks: suite.checks,
        pass,
    }
}
