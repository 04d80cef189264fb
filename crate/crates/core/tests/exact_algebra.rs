use minorbit::lie::build_named;
use minorbit::linalg::{rank_qi, Matrix};
use minorbit::modular::{gaussian_primes, ModMatrix};
use minorbit::poly::{Monomial, Polynomial};
use minorbit::scalar::{qi, qi_parts, rat, Qi};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_qi(rng: &mut impl Rng) -> Qi {
    qi_parts(rat(rng.gen_range(-9..=9), rng.gen_range(1..=7)), rat(rng.gen_range(-9..=9), rng.gen_range(1..=7)))
}

fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix<Qi> {
    let v: Vec<Qi> = (0..rows * cols).map(|_| random_qi(rng)).collect();
    Matrix::from_fn(rows, cols, |i, j| v[i * cols + j].clone())
}

fn rows_of(m: &Matrix<Qi>) -> Vec<Vec<Qi>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m[(i, j)].clone()).collect()).collect()
}

#[test]
fn modular_rank_of_random_50x50() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let full = random_matrix(&mut rng, 50, 50);
    let a = random_matrix(&mut rng, 50, 30);
    let b = random_matrix(&mut rng, 30, 50);
    let low = a.matmul(&b).unwrap();
    for (m, expect) in [(&full, 50), (&low, 30)] {
        let exact = rank_qi(m);
        assert_eq!(exact, expect);
        let primes = gaussian_primes(2, 7);
        assert_ne!(primes[0].p, primes[1].p);
        for gp in primes {
            let mm = ModMatrix::from_qi_rows(gp, &rows_of(m)).expect("prime avoids denominators");
            assert_eq!(mm.rank(), exact);
        }
    }
}

#[test]
fn poisson_examples() {
    let g = build_named("sl3").unwrap();
    let bv = g.bivector();
    let n = g.dim();
    let mu = |v: &[Qi]| Polynomial::linear(v);
    let (x, y, h) = (mu(&g.x_vec()), mu(&g.y_vec()), mu(&g.h_vec()));
    assert_eq!(x.poisson(&y, &bv), h);
    assert!(x.poisson(&x, &bv).is_zero());
    let x3 = x.pow(3);
    assert_eq!(h.poisson(&x3, &bv), x3.scale(&qi(6, 1)));
    let m = Polynomial::monomial(Monomial::from_indices(n, &[g.x, g.x, g.y]), qi(1, 1));
    assert_eq!(m.euler(), m.scale(&qi(3, 1)));
    assert!(Polynomial::<Qi>::one(n).euler().is_zero());
}

fn small_poly(n: usize, seed: u64, max_deg: usize) -> Polynomial<Qi> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Polynomial::zero(n);
    for _ in 0..3 {
        let d = rng.gen_range(1..=max_deg);
        let idx: Vec<usize> = (0..d).map(|_| rng.gen_range(0..n)).collect();
        f.add_term(Monomial::from_indices(n, &idx), qi(rng.gen_range(-4..=4), rng.gen_range(1..=3)));
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn poisson_jacobi_leibniz(s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let g = build_named("sl3").unwrap();
        let bv = g.bivector();
        let n = g.dim();
        let (f, gg, h) = (small_poly(n, s1, 2), small_poly(n, s2, 2), small_poly(n, s3, 2));
        let mut jac = f.poisson(&gg.poisson(&h, &bv), &bv);
        jac.add_scaled(&gg.poisson(&h.poisson(&f, &bv), &bv), &qi(1, 1));
        jac.add_scaled(&h.poisson(&f.poisson(&gg, &bv), &bv), &qi(1, 1));
        prop_assert!(jac.is_zero());

        let lhs = f.poisson(&gg.mul(&h), &bv);
        let mut rhs = f.poisson(&gg, &bv).mul(&h);
        rhs.add_scaled(&gg.mul(&f.poisson(&h, &bv)), &qi(1, 1));
        prop_assert_eq!(lhs, rhs);

        let mut anti = f.poisson(&gg, &bv);
        anti.add_scaled(&gg.poisson(&f, &bv), &qi(1, 1));
        prop_assert!(anti.is_zero());
    }

    #[test]
    fn solve_reproduces_right_hand_side(seed in any::<u64>(), rows in 2usize..8, cols in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, rows, cols);
        let x0: Vec<Qi> = (0..cols).map(|_| random_qi(&mut rng)).collect();
        let b = a.mul_vec(&x0).unwrap();
        let x = a.solve(&b).unwrap();
        prop_assert_eq!(a.mul_vec(&x).unwrap(), b);
        for v in a.nullspace() {
            prop_assert!(a.mul_vec(&v).unwrap().iter().all(Zero::is_zero));
        }
        prop_assert_eq!(a.nullspace().len() + a.rank(), cols);
        prop_assert_eq!(rank_qi(&a), a.rank());
    }
}
